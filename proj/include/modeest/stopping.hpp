#pragma once
// δ-correct stopping rules for mode estimation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "modeest/bounds.hpp"
#include "modeest/instances.hpp"

namespace modeest {

class Verdict {
public:
    static Verdict proceed() { return Verdict{}; }
    static Verdict declare(std::size_t index) { return Verdict{index}; }

    bool is_declare() const { return declared_.has_value(); }
    std::size_t index() const { return declared_.value(); }
    bool operator==(const Verdict&) const = default;

private:
    Verdict() = default;
    explicit Verdict(std::size_t index) : declared_(index) {}
    std::optional<std::size_t> declared_;
};

// Declare first(t) iff Beta(1/2; s_first + 1, s_second + 1) <= δ/(K - 1).
Verdict ppr_1v1_check(const TallyState& tally, std::size_t k, double delta);

// Engine for pairwise tests: mistake probability δ/(K - 1).
BoundEngine make_1v1_engine(EngineKind kind, std::size_t k, double delta);
// Engine for one-vs-rest tests: mistake probability δ/K.
BoundEngine make_1vr_engine(EngineKind kind, std::size_t k, double delta);

// Declare first(t) iff for every j != first the pair interval on
// s_first/(s_first + s_j) has lower end above 1/2. Pairs are visited starting
// with second(t) and the scan stops at the first failing pair.
Verdict generic_1v1_check(const TallyState& tally, const BoundEngine& pair_engine);

// Declare first(t) iff LCB_first >= UCB_j for every j != first, each interval
// computed from (s_i, t).
Verdict generic_1vr_check(const TallyState& tally, const BoundEngine& rest_engine);

// Maximizer of the Dirichlet(counts + 1) density on the slice
// {x_first = x_j}: x_first = x_j = (s_first + s_j)/(2t), x_k = s_k/t.
std::vector<double> ppr_md_slice_point(const TallyState& tally, std::size_t j);

// Declare first(t) iff for every j != first the posterior density at the
// slice maximizer is <= δ/(K - 1)!.
Verdict ppr_md_check(const TallyState& tally, std::size_t k, double delta);

// Unknown-support PPR. Answers are registered in order of first appearance;
// the b-th new answer (0-based b >= 1) opens tests against answers 0..b-1,
// which take the next budgets (6/π²)δ/n² of the sequence n = 1, 2, ...
class AdaptiveState {
public:
    explicit AdaptiveState(double delta);

    void observe(std::uint64_t answer);

    double delta() const { return delta_; }
    std::size_t answer_count() const { return answers_.size(); }
    const std::vector<std::uint64_t>& answers() const { return answers_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t total() const { return total_; }
    // Budget of the test between discovery slots a != b.
    double pair_budget(std::size_t a, std::size_t b) const;
    // Position n in the budget sequence of the test between slots a != b.
    static std::uint64_t budget_sequence_index(std::size_t a, std::size_t b);
    double assigned_budget_total() const;
    // Discovery slot with the most observations (earliest slot on ties).
    std::size_t leader() const;

private:
    double delta_;
    std::vector<std::uint64_t> answers_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

void adaptive_observe(AdaptiveState& state, std::uint64_t answer);
// Declares the leader's answer label iff it wins every pairwise PPR test.
// A lone discovered answer never declares.
Verdict adaptive_check(const AdaptiveState& state);

enum class RuleKind { Ppr1v1, OneVsOne, OneVsRest, PprMd, PprAdaptive };

struct RuleConfig {
    RuleKind kind = RuleKind::Ppr1v1;
    EngineKind engine = EngineKind::Ppr;

    bool operator==(const RuleConfig&) const = default;
};

// Tokens: ppr-1v1 | ppr-1vr | ppr-md | ppr-adaptive | <engine>-1v1 | <engine>-1vr.
// "ppr-1v1" selects the O(1) fast path.
RuleConfig parse_rule(std::string_view token);
std::string rule_token(const RuleConfig& rule);
// "1v1", "1vr", "md" or "adaptive".
std::string rule_scheme(const RuleConfig& rule);

// Tally plus whatever per-rule state the configured rule needs.
class ModeStopper {
public:
    ModeStopper(const RuleConfig& rule, std::size_t k, double delta);

    void observe(std::size_t idx);
    Verdict check() const;

    const TallyState& tally() const { return tally_; }
    const RuleConfig& rule() const { return rule_; }
    std::size_t size() const { return k_; }
    double delta() const { return delta_; }
    // Engine used by 1v1 / 1vr rules; empty for the others.
    const std::optional<BoundEngine>& engine() const { return engine_; }

private:
    RuleConfig rule_;
    std::size_t k_;
    double delta_;
    TallyState tally_;
    std::optional<BoundEngine> engine_;
    std::optional<AdaptiveState> adaptive_;
};

struct TrialRecord {
    std::uint64_t master_seed = 0;
    std::uint64_t seed = 0;  // stream index of the trial
    std::uint64_t samples = 0;
    std::size_t declared = 0;
    std::size_t truth = 0;
    bool correct = false;
};

class SampleCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSampleCap = 1'000'000'000;

TrialRecord run_mode_estimation(const DiscreteInstance& instance, const RuleConfig& rule,
                                double delta, SeededStream& rng, std::uint64_t check_every = 1,
                                std::uint64_t sample_cap = kDefaultSampleCap);

}  // namespace modeest
