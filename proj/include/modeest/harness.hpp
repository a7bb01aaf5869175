#pragma once
// Replicated trials on derived streams, summary statistics, output writers and
// the P1..P6 and Bernoulli experiment suites.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "modeest/instances.hpp"
#include "modeest/stopping.hpp"

namespace modeest {

// Splits [0, n) into contiguous chunks, one per worker. threads = 0 means
// hardware concurrency. The body must only write to slots it owns.
void parallel_for(std::uint64_t n, unsigned threads,
                  const std::function<void(std::uint64_t, std::uint64_t)>& body);

struct SampleStats {
    std::uint64_t n = 0;
    double mean = 0.0;
    double stderr_mean = 0.0;  // unbiased stddev / sqrt(n); 0 when n = 1
    double mistake_rate = 0.0;
};

SampleStats sample_stats(const std::vector<double>& samples, const std::vector<bool>& mistakes);

struct SummaryRow {
    std::string suite;
    std::string instance;
    std::string rule;
    std::string scheme;
    double delta = 0.0;
    std::uint64_t n = 0;
    double mean_samples = 0.0;
    double stderr_samples = 0.0;
    double mistake_rate = 0.0;
};

// Labels are left empty; callers fill them in.
SummaryRow summarize(const std::vector<TrialRecord>& records);

struct ExperimentSpec {
    std::string suite = "custom";
    std::string instance_name;
    std::vector<double> probs;
    std::string rule = "ppr-1v1";
    double delta = 0.01;
    std::uint64_t replications = 100;
    std::uint64_t master_seed = 1;
    std::uint64_t check_every = 1;
    std::string jsonl_path;  // per-trial records; skipped when empty
    std::string csv_path;    // one-row summary; skipped when empty
    unsigned threads = 1;
};

struct ExperimentResult {
    SummaryRow summary;
    std::vector<TrialRecord> trials;  // in trial-index order
};

// Trial i uses derive_stream(master_seed, i).
std::vector<TrialRecord> run_trials(const DiscreteInstance& instance, const RuleConfig& rule,
                                    double delta, std::uint64_t replications,
                                    std::uint64_t master_seed, std::uint64_t check_every = 1,
                                    unsigned threads = 1);

ExperimentResult run_experiment(const ExperimentSpec& spec);

std::string summary_csv_header();
std::string summary_csv_line(const SummaryRow& row);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_trials_jsonl(std::ostream& out, const std::vector<TrialRecord>& trials);
// File variants; throw std::runtime_error naming the path on I/O failure.
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
void write_trials_jsonl(const std::string& path, const std::vector<TrialRecord>& trials);

// Shortest round-trip decimal form used in every CSV this library writes.
std::string format_double(double value);

struct NamedInstance {
    std::string name;
    std::vector<double> probs;
};

// P1..P6 of the mode-estimation comparison table.
std::vector<NamedInstance> table1_instances();

struct SuiteOptions {
    std::uint64_t replications = 100;
    std::uint64_t master_seed = 1;
    bool fast = false;  // caps replications at 20
    unsigned threads = 1;
};

inline constexpr std::uint64_t kFastReplications = 20;

// Every engine in K = 2 mode (`<engine>-1v1`) for each (p1, δ) cell. Rows are
// labelled suite "figure1", instance "p1=<p1>".
std::vector<SummaryRow> figure1_sweep(const std::vector<double>& p1_values,
                                      const std::vector<double>& deltas,
                                      const SuiteOptions& options);

// PPR, KL-SN and A1 in 1v1 and 1vr on P1..P6 at the given δ.
std::vector<SummaryRow> table1_suite(const SuiteOptions& options, double delta = 0.01,
                                     const std::vector<std::string>& instance_names = {});

}  // namespace modeest
