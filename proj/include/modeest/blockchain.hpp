#pragma once
// Probabilistic verification against a Byzantine node pool: batch drawing,
// the SPRT rule that needs an assumed f_max, and PPR rules that do not.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "modeest/instances.hpp"
#include "modeest/stopping.hpp"

namespace modeest {

// Answer 0 is correct. With K = 2 every Byzantine node reports 1; with K > 2
// Byzantine node b reports 1 + (b mod (K - 1)), so the K - 1 wrong answers are
// equally common up to rounding.
class NodePool {
public:
    NodePool(std::size_t nodes, std::size_t batch, double byzantine_fraction,
             std::size_t answers = 2);

    std::size_t nodes() const { return nodes_; }
    std::size_t batch() const { return batch_; }
    double byzantine_fraction() const { return f_; }
    std::size_t answers() const { return answers_; }
    std::size_t byzantine_count() const { return byzantine_; }
    double q() const { return static_cast<double>(batch_) / static_cast<double>(nodes_); }
    std::size_t answer_of(std::size_t node) const;

private:
    std::size_t nodes_;
    std::size_t batch_;
    double f_;
    std::size_t answers_;
    std::size_t byzantine_;
};

struct Batch {
    std::vector<std::size_t> reports;  // answers in draw order
    std::vector<std::uint64_t> counts;  // per answer, sums to m
};

// Keeps a node permutation between calls; each draw is a partial Fisher-Yates
// shuffle, i.e. m distinct nodes chosen uniformly at random.
class BatchDrawer {
public:
    explicit BatchDrawer(const NodePool& pool);
    Batch draw(SeededStream& rng);
    // Restores the identity order so a run does not depend on earlier runs.
    void reset();

private:
    const NodePool* pool_;
    std::vector<std::uint32_t> order_;
};

Batch draw_batch(const NodePool& pool, SeededStream& rng);

// ln((1 - δ)/δ) · 2q(1 - q)N(1 - f_max)f_max/(1 - 2f_max) with q = m/N.
double sprt_threshold(double delta, std::size_t nodes, std::size_t batch, double f_max);

class SprtState {
public:
    SprtState(std::size_t answers, std::size_t batch, double threshold);

    const std::vector<std::int64_t>& statistics() const { return l_; }
    double threshold() const { return threshold_; }
    std::uint64_t steps() const { return steps_; }

    // l_i += (2c_i - m)m for every answer; Declare the lowest i with l_i > threshold.
    Verdict step(const std::vector<std::uint64_t>& counts);

private:
    std::vector<std::int64_t> l_;
    std::int64_t m_;
    double threshold_;
    std::uint64_t steps_ = 0;
};

Verdict sprt_step(SprtState& state, const std::vector<std::uint64_t>& counts);

enum class VerificationPolicy { Sprt, Ppr1v1, Ppr1vr, PprAdaptive };
VerificationPolicy parse_verification_policy(const std::string& token);
std::string verification_policy_token(VerificationPolicy policy);

struct VerificationRecord {
    std::uint64_t samples = 0;
    std::size_t declared = 0;
    bool correct = false;
};

// Draws batches and checks the policy after each one until it declares.
// Samples count individual node reports. PPR-1v1 and PPR-1vr are told K;
// PPR-Adaptive is not. f_max is read by SPRT only.
VerificationRecord run_verification(const NodePool& pool, VerificationPolicy policy, double delta,
                                    double f_max, SeededStream& rng,
                                    std::uint64_t sample_cap = kDefaultSampleCap);
VerificationRecord run_verification(const NodePool& pool, BatchDrawer& drawer,
                                    VerificationPolicy policy, double delta, double f_max,
                                    SeededStream& rng, std::uint64_t sample_cap = kDefaultSampleCap);

struct SweepRow {
    double f = 0.0;
    VerificationPolicy policy = VerificationPolicy::Sprt;
    std::uint64_t runs = 0;
    double mean_samples = 0.0;
    double stderr_samples = 0.0;
    double error_rate = 0.0;
};

struct SweepConfig {
    std::size_t nodes = 1600;
    std::size_t batch = 20;
    std::size_t answers = 2;
    double delta = 0.005;
    double f_max = 0.1;
    std::uint64_t runs = 5000;
    std::uint64_t master_seed = 1;
    unsigned threads = 1;
};

// Run r of every cell uses derive_stream(master_seed, r), so policies and f
// values share random numbers. Rows are ordered by f, then by policy.
std::vector<SweepRow> sweep_f(const SweepConfig& config, const std::vector<double>& f_values,
                              const std::vector<VerificationPolicy>& policies);

}  // namespace modeest
