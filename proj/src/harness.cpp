#include "modeest/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace modeest {

void parallel_for(std::uint64_t n, unsigned threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t workers = std::min<std::uint64_t>(threads, n);
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::uint64_t chunk = (n + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
        const std::uint64_t begin = w * chunk;
        const std::uint64_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            try {
                if (begin < end) body(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

SampleStats sample_stats(const std::vector<double>& samples, const std::vector<bool>& mistakes) {
    if (samples.empty()) throw std::invalid_argument("sample_stats: need at least one record");
    if (mistakes.size() != samples.size()) throw std::invalid_argument("sample_stats: size mismatch");
    SampleStats stats;
    stats.n = samples.size();
    const double n = static_cast<double>(stats.n);
    double sum = 0.0;
    for (double s : samples) sum += s;
    stats.mean = sum / n;
    if (stats.n > 1) {
        double ss = 0.0;
        for (double s : samples) ss += (s - stats.mean) * (s - stats.mean);
        stats.stderr_mean = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    stats.mistake_rate =
        static_cast<double>(std::count(mistakes.begin(), mistakes.end(), true)) / n;
    return stats;
}

SummaryRow summarize(const std::vector<TrialRecord>& records) {
    std::vector<double> samples;
    std::vector<bool> mistakes;
    for (const TrialRecord& r : records) {
        samples.push_back(static_cast<double>(r.samples));
        mistakes.push_back(!r.correct);
    }
    const SampleStats stats = sample_stats(samples, mistakes);
    SummaryRow row;
    row.n = stats.n;
    row.mean_samples = stats.mean;
    row.stderr_samples = stats.stderr_mean;
    row.mistake_rate = stats.mistake_rate;
    return row;
}

std::vector<TrialRecord> run_trials(const DiscreteInstance& instance, const RuleConfig& rule,
                                    double delta, std::uint64_t replications,
                                    std::uint64_t master_seed, std::uint64_t check_every,
                                    unsigned threads) {
    if (replications == 0) throw std::invalid_argument("replications must be >= 1");
    std::vector<TrialRecord> trials(replications);
    parallel_for(replications, threads, [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            SeededStream rng = derive_stream(master_seed, i);
            trials[i] = run_mode_estimation(instance, rule, delta, rng, check_every);
        }
    });
    return trials;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.replications == 0) throw std::invalid_argument("replications must be >= 1");
    if (!(spec.delta > 0.0 && spec.delta < 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1)");
    }
    const DiscreteInstance instance(spec.probs);
    const RuleConfig rule = parse_rule(spec.rule);
    ExperimentResult result;
    result.trials = run_trials(instance, rule, spec.delta, spec.replications, spec.master_seed,
                               spec.check_every, spec.threads);
    result.summary = summarize(result.trials);
    result.summary.suite = spec.suite;
    result.summary.instance = spec.instance_name;
    result.summary.rule = rule_token(rule);
    result.summary.scheme = rule_scheme(rule);
    result.summary.delta = spec.delta;
    if (!spec.jsonl_path.empty()) write_trials_jsonl(spec.jsonl_path, result.trials);
    if (!spec.csv_path.empty()) write_summary_csv(spec.csv_path, {result.summary});
    return result;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

std::string summary_csv_header() {
    return "suite,instance,rule,scheme,delta,n,mean_samples,stderr_samples,mistake_rate";
}

std::string summary_csv_line(const SummaryRow& row) {
    std::ostringstream out;
    out << row.suite << ',' << row.instance << ',' << row.rule << ',' << row.scheme << ','
        << format_double(row.delta) << ',' << row.n << ',' << format_double(row.mean_samples)
        << ',' << format_double(row.stderr_samples) << ',' << format_double(row.mistake_rate);
    return out.str();
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << summary_csv_header() << '\n';
    for (const SummaryRow& row : rows) out << summary_csv_line(row) << '\n';
}

void write_trials_jsonl(std::ostream& out, const std::vector<TrialRecord>& trials) {
    for (const TrialRecord& t : trials) {
        const nlohmann::ordered_json j = {{"seed", t.seed},
                                          {"samples", t.samples},
                                          {"declared", t.declared},
                                          {"truth", t.truth},
                                          {"correct", t.correct}};
        out << j.dump() << '\n';
    }
}

namespace {

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    write_file(path, [&](std::ostream& out) { write_summary_csv(out, rows); });
}

void write_trials_jsonl(const std::string& path, const std::vector<TrialRecord>& trials) {
    write_file(path, [&](std::ostream& out) { write_trials_jsonl(out, trials); });
}

std::vector<NamedInstance> table1_instances() {
    auto with_tail = [](std::vector<double> head, double tail, std::size_t copies) {
        head.insert(head.end(), copies, tail);
        return head;
    };
    return {
        {"P1", {0.5, 0.25, 0.25}},
        {"P2", with_tail({0.4}, 0.2, 3)},
        {"P3", with_tail({0.2}, 0.1, 8)},
        {"P4", with_tail({0.1}, 0.05, 18)},
        {"P5", with_tail({0.35, 0.33, 0.12}, 0.1, 2)},
        {"P6", with_tail({0.35, 0.33}, 0.04, 8)},
    };
}

namespace {

std::uint64_t effective_reps(const SuiteOptions& options) {
    return options.fast ? std::min(options.replications, kFastReplications) : options.replications;
}

SummaryRow run_cell(const std::string& suite, const std::string& instance_name,
                    const DiscreteInstance& instance, const std::string& rule_name, double delta,
                    const SuiteOptions& options) {
    const RuleConfig rule = parse_rule(rule_name);
    SummaryRow row = summarize(run_trials(instance, rule, delta, effective_reps(options),
                                          options.master_seed, 1, options.threads));
    row.suite = suite;
    row.instance = instance_name;
    row.rule = rule_token(rule);
    row.scheme = rule_scheme(rule);
    row.delta = delta;
    return row;
}

}  // namespace

std::vector<SummaryRow> figure1_sweep(const std::vector<double>& p1_values,
                                      const std::vector<double>& deltas,
                                      const SuiteOptions& options) {
    static const char* const kEngines[] = {"ppr", "kl-sn", "kl-lucb", "lucb", "a1"};
    std::vector<SummaryRow> rows;
    for (double p1 : p1_values) {
        const DiscreteInstance instance({p1, 1.0 - p1});
        for (double delta : deltas) {
            for (const char* engine : kEngines) {
                rows.push_back(run_cell("figure1", "p1=" + format_double(p1), instance,
                                        std::string(engine) + "-1v1", delta, options));
            }
        }
    }
    return rows;
}

std::vector<SummaryRow> table1_suite(const SuiteOptions& options, double delta,
                                     const std::vector<std::string>& instance_names) {
    static const char* const kRules[] = {"ppr-1v1", "ppr-1vr",  "kl-sn-1v1",
                                         "kl-sn-1vr", "a1-1v1", "a1-1vr"};
    std::vector<SummaryRow> rows;
    for (const NamedInstance& named : table1_instances()) {
        if (!instance_names.empty() &&
            std::find(instance_names.begin(), instance_names.end(), named.name) ==
                instance_names.end()) {
            continue;
        }
        const DiscreteInstance instance(named.probs);
        for (const char* rule : kRules) {
            rows.push_back(run_cell("table1", named.name, instance, rule, delta, options));
        }
    }
    return rows;
}

}  // namespace modeest
