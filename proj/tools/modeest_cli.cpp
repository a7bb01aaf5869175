// modeest: command-line front end for the mode-estimation library.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modeest/blockchain.hpp"
#include "modeest/elections.hpp"
#include "modeest/harness.hpp"
#include "modeest/theory.hpp"

using namespace modeest;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    std::uint64_t reps = 100;
    std::string out;
    bool fast = false;
    unsigned threads = 1;
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
        values.push_back(v);
    }
    if (values.empty()) throw std::invalid_argument("empty list");
    return values;
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

// Writes to --out when given, stdout otherwise.
template <typename Fn>
void emit(const Globals& g, Fn&& fn) {
    if (g.out.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream file(g.out);
    if (!file) throw std::runtime_error("cannot open '" + g.out + "' for writing");
    fn(file);
    if (!file) throw std::runtime_error("write to '" + g.out + "' failed");
}

int verify_conjecture(std::uint64_t limit, std::optional<std::size_t> k) {
    const auto failures = verify_1v1_1vr_conjecture(limit, limit, limit, k);
    for (const auto& c : failures) {
        std::cout << "counterexample x=" << c.x << " y=" << c.y << " f=" << c.f
                  << " lhs_log=" << c.lhs_log << " rhs_log=" << c.rhs_log << '\n';
    }
    std::cout << "conjecture sweep up to " << limit << ": " << failures.size() << " failures\n";
    return failures.empty() ? 0 : 1;
}

int verify_thm3(double delta) {
    int failures = 0;
    for (const NamedInstance& named : table1_instances()) {
        const DiscreteInstance inst(named.probs);
        std::vector<double> rest = named.probs;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(inst.true_mode()));
        for (double pj : rest) {
            const MarginTerms t = thm3_margin_terms(inst.p1(), inst.p2(), pj, inst.size(), delta);
            if (!t.holds) {
                ++failures;
                std::cout << named.name << " pj=" << pj << " fails: u=" << t.u
                          << " rhs=" << (1.0 - t.l) * (inst.p1() + pj) * t.t_star << '\n';
            }
        }
    }
    std::cout << "margin check on P1..P6 at delta=" << delta << ": " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential mode estimation: stopping rules, bounds and simulators"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--reps", g.reps, "replications per configuration")->check(CLI::PositiveNumber);
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_flag("--fast", g.fast, "cap replications at 20");
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");

    // mode-sim
    auto* mode = app.add_subcommand("mode-sim", "replicated mode-estimation trials");
    std::string probs_text = "0.5,0.25,0.25";
    std::string rule_text = "ppr-1v1";
    double mode_delta = 0.01;
    std::uint64_t check_every = 1;
    std::string jsonl;
    mode->add_option("--probs", probs_text, "comma-separated probabilities");
    mode->add_option("--rule", rule_text, "stopping rule token");
    mode->add_option("--delta", mode_delta, "mistake probability");
    mode->add_option("--check-every", check_every, "samples between checks");
    mode->add_option("--jsonl", jsonl, "per-trial JSONL output");

    // figure1
    auto* fig1 = app.add_subcommand("figure1", "Bernoulli comparison of all engines");
    std::string p1_text = "0.55,0.65,0.75,0.85,0.95";
    std::string fig_delta_text = "0.01";
    fig1->add_option("--p1", p1_text, "comma-separated p1 values");
    fig1->add_option("--delta", fig_delta_text, "comma-separated delta values");

    // table1
    auto* tab1 = app.add_subcommand("table1", "P1..P6 comparison of PPR, KL-SN and A1");
    double tab_delta = 0.01;
    std::string instances_text;
    tab1->add_option("--delta", tab_delta, "mistake probability");
    tab1->add_option("--instances", instances_text, "subset, e.g. P1,P3");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "closed-form sample-complexity bounds");
    double b_p1 = 0.5, b_p2 = 0.25, b_delta = 0.01;
    std::size_t b_k = 3;
    std::string b_format = "text";
    bounds->add_option("--p1", b_p1)->required();
    bounds->add_option("--p2", b_p2)->required();
    bounds->add_option("--k", b_k, "support size");
    bounds->add_option("--delta", b_delta);
    bounds->add_option("--format", b_format, "text | csv")->check(CLI::IsMember({"text", "csv"}));

    // verify
    auto* verify = app.add_subcommand("verify", "numeric checks of the supporting inequalities");
    std::string what;
    std::uint64_t limit = 30, a_max = 64, b_max = 64;
    std::size_t v_k = 0;
    double v_delta = 0.01;
    verify->add_option("check", what, "conjecture | monotonic | thm3-margin")
        ->required()
        ->check(CLI::IsMember({"conjecture", "monotonic", "thm3-margin"}));
    verify->add_option("--limit", limit, "x, y, f upper limit for the conjecture sweep");
    verify->add_option("--k", v_k, "use the (K-1)/K form of the conjecture");
    verify->add_option("--amax", a_max);
    verify->add_option("--bmax", b_max);
    verify->add_option("--delta", v_delta, "delta for the margin check");

    // election-sim
    auto* elect = app.add_subcommand("election-sim", "indirect-election winner forecasting");
    std::string data_path, e_policy = "dcb", e_rule = "ppr-1v1";
    double e_delta = 0.01;
    std::uint64_t e_batch = 200, e_seeds = 10;
    elect->add_option("--data", data_path, "CSV with constituency,party,votes")->required();
    elect->add_option("--policy", e_policy, "rr | dcb");
    elect->add_option("--rule", e_rule, "per-constituency stopping rule");
    elect->add_option("--delta", e_delta);
    elect->add_option("--batch", e_batch)->check(CLI::PositiveNumber);
    elect->add_option("--seeds", e_seeds)->check(CLI::PositiveNumber);

    // blockchain-sim
    auto* chain = app.add_subcommand("blockchain-sim", "Byzantine verification sweep over f");
    SweepConfig sweep;
    std::string f_text = "0.05,0.1,0.15,0.2,0.25,0.3";
    std::string c_policy = "sprt,ppr-1v1";
    std::optional<std::uint64_t> runs;
    chain->add_option("--n", sweep.nodes);
    chain->add_option("--m", sweep.batch);
    chain->add_option("--delta", sweep.delta);
    chain->add_option("--fmax", sweep.f_max);
    chain->add_option("--f", f_text, "comma-separated Byzantine fractions");
    chain->add_option("--k", sweep.answers, "number of answers (2 or more)");
    chain->add_option("--policy", c_policy, "comma-separated: sprt,ppr-1v1,ppr-1vr,ppr-adaptive");
    chain->add_option("--runs", runs, "runs per cell (default 5000)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*mode) {
            ExperimentSpec spec;
            spec.suite = "mode-sim";
            spec.instance_name = "custom";
            spec.probs = parse_probability_list(probs_text);
            spec.rule = rule_text;
            spec.delta = mode_delta;
            spec.replications = g.fast ? std::min(g.reps, kFastReplications) : g.reps;
            spec.master_seed = g.seed;
            spec.check_every = check_every;
            spec.jsonl_path = jsonl;
            spec.threads = g.threads;
            const ExperimentResult result = run_experiment(spec);
            emit(g, [&](std::ostream& out) { write_summary_csv(out, {result.summary}); });
        } else if (*fig1) {
            SuiteOptions opt{g.reps, g.seed, g.fast, g.threads};
            const auto rows = figure1_sweep(parse_double_list(p1_text),
                                            parse_double_list(fig_delta_text), opt);
            emit(g, [&](std::ostream& out) { write_summary_csv(out, rows); });
        } else if (*tab1) {
            SuiteOptions opt{g.reps, g.seed, g.fast, g.threads};
            const auto rows = table1_suite(opt, tab_delta, split_tokens(instances_text));
            emit(g, [&](std::ostream& out) { write_summary_csv(out, rows); });
        } else if (*bounds) {
            const BoundReport r = bound_report(b_p1, b_p2, b_k, b_delta);
            std::vector<std::pair<std::string, double>> entries = {{"lower", r.lower},
                                                                   {"a1_upper", r.a1_upper}};
            if (r.ppr_bernoulli_upper) entries.emplace_back("ppr_bernoulli_upper", *r.ppr_bernoulli_upper);
            entries.emplace_back("ppr_1v1_upper", r.ppr_1v1_upper);
            emit(g, [&](std::ostream& out) {
                if (b_format == "csv") out << "bound,value\n";
                for (const auto& [name, value] : entries) {
                    out << name << (b_format == "csv" ? "," : ": ") << format_double(value) << '\n';
                }
            });
        } else if (*verify) {
            if (what == "conjecture") {
                return verify_conjecture(limit, v_k ? std::optional<std::size_t>(v_k) : std::nullopt);
            }
            if (what == "monotonic") {
                const bool ok = verify_beta_monotonicity(a_max, b_max);
                std::cout << "beta monotonicity up to (" << a_max << ", " << b_max
                          << "): " << (ok ? "holds" : "violated") << '\n';
                return ok ? 0 : 1;
            }
            return verify_thm3(v_delta);
        } else if (*elect) {
            const ElectionInstance instance = load_election_csv(data_path);
            const Policy policy = parse_policy(e_policy);
            const RuleConfig rule = parse_rule(e_rule);
            std::vector<ElectionRecord> records(e_seeds);
            parallel_for(e_seeds, g.threads, [&](std::uint64_t begin, std::uint64_t end) {
                for (std::uint64_t s = begin; s < end; ++s) {
                    SeededStream rng = derive_stream(g.seed, s);
                    records[s] = run_election(instance, policy, rule, e_delta, e_batch, rng);
                }
            });
            emit(g, [&](std::ostream& out) {
                out << "policy,rule,scheme,delta,seed,samples,winner,seats_resolved,correct\n";
                for (const ElectionRecord& r : records) {
                    out << policy_token(policy) << ',' << rule_token(rule) << ','
                        << rule_scheme(rule) << ',' << format_double(e_delta) << ',' << r.seed
                        << ',' << r.samples << ',' << instance.parties[r.winner] << ','
                        << r.seats_resolved << ',' << (r.correct ? "true" : "false") << '\n';
                }
            });
        } else if (*chain) {
            sweep.master_seed = g.seed;
            sweep.threads = g.threads;
            sweep.runs = runs ? *runs : 5000;
            if (g.fast) sweep.runs = std::min<std::uint64_t>(sweep.runs, 500);
            std::vector<VerificationPolicy> policies;
            for (const std::string& p : split_tokens(c_policy)) {
                policies.push_back(parse_verification_policy(p));
            }
            const auto rows = sweep_f(sweep, parse_double_list(f_text), policies);
            emit(g, [&](std::ostream& out) {
                out << "f,policy,runs,mean_samples,stderr_samples,error_rate\n";
                for (const SweepRow& r : rows) {
                    out << format_double(r.f) << ',' << verification_policy_token(r.policy) << ','
                        << r.runs << ',' << format_double(r.mean_samples) << ','
                        << format_double(r.stderr_samples) << ',' << format_double(r.error_rate)
                        << '\n';
                }
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
