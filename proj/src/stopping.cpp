#include "modeest/stopping.hpp"

#include <cmath>
#include <numbers>

namespace modeest {

namespace {

double xlogx_ratio(std::uint64_t s, double denom) {
    if (s == 0) return 0.0;
    const double sd = static_cast<double>(s);
    return sd * std::log(sd / denom);
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("mistake probability must lie in (0, 1)");
    }
}

}  // namespace

Verdict ppr_1v1_check(const TallyState& tally, std::size_t k, double delta) {
    const double log_threshold = std::log(delta / static_cast<double>(k - 1));
    const double log_density = beta_logpdf(0.5, tally.counts[tally.first] + 1,
                                           tally.counts[tally.second] + 1);
    return log_density <= log_threshold ? Verdict::declare(tally.first) : Verdict::proceed();
}

BoundEngine make_1v1_engine(EngineKind kind, std::size_t k, double delta) {
    check_delta(delta);
    return BoundEngine(kind, delta / static_cast<double>(k - 1));
}

BoundEngine make_1vr_engine(EngineKind kind, std::size_t k, double delta) {
    check_delta(delta);
    return BoundEngine(kind, delta / static_cast<double>(k));
}

Verdict generic_1v1_check(const TallyState& tally, const BoundEngine& pair_engine) {
    const std::size_t first = tally.first;
    auto beats = [&](std::size_t j) {
        const PairTally pair = pair_tally(tally, first, j);
        return pair_engine.lower(pair.wins_i, pair.pair_total()) > 0.5;
    };
    if (!beats(tally.second)) return Verdict::proceed();
    for (std::size_t j = 0; j < tally.size(); ++j) {
        if (j == first || j == tally.second) continue;
        if (!beats(j)) return Verdict::proceed();
    }
    return Verdict::declare(first);
}

Verdict generic_1vr_check(const TallyState& tally, const BoundEngine& rest_engine) {
    if (tally.total == 0) return Verdict::proceed();
    const std::size_t first = tally.first;
    const double lcb_first = rest_engine.lower(tally.counts[first], tally.total);
    auto separated = [&](std::size_t j) {
        return lcb_first >= rest_engine.upper(tally.counts[j], tally.total);
    };
    if (!separated(tally.second)) return Verdict::proceed();
    for (std::size_t j = 0; j < tally.size(); ++j) {
        if (j == first || j == tally.second) continue;
        if (!separated(j)) return Verdict::proceed();
    }
    return Verdict::declare(first);
}

std::vector<double> ppr_md_slice_point(const TallyState& tally, std::size_t j) {
    if (tally.total == 0) throw std::invalid_argument("ppr_md_slice_point: empty tally");
    const double t = static_cast<double>(tally.total);
    std::vector<double> x(tally.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(tally.counts[i]) / t;
    const double shared =
        static_cast<double>(tally.counts[tally.first] + tally.counts[j]) / (2.0 * t);
    x[tally.first] = shared;
    x[j] = shared;
    return x;
}

Verdict ppr_md_check(const TallyState& tally, std::size_t k, double delta) {
    if (tally.total == 0) return Verdict::proceed();
    const double t = static_cast<double>(tally.total);
    // ln[(t + K - 1)! / ∏ s_i!] + Σ s_i ln(s_i / t), then swap in the slice terms.
    double log_norm = ln_gamma_int(tally.total + k);
    double log_kernel = 0.0;
    for (std::uint64_t s : tally.counts) {
        log_norm -= ln_gamma_int(s + 1);
        log_kernel += xlogx_ratio(s, t);
    }
    const double log_threshold = std::log(delta) - ln_gamma_int(k);
    const std::size_t first = tally.first;
    const std::uint64_t s_first = tally.counts[first];
    for (std::size_t j = 0; j < tally.size(); ++j) {
        if (j == first) continue;
        const std::uint64_t s_j = tally.counts[j];
        const double log_density = log_norm + log_kernel - xlogx_ratio(s_first, t) -
                                   xlogx_ratio(s_j, t) + xlogx_ratio(s_first + s_j, 2.0 * t);
        if (log_density > log_threshold) return Verdict::proceed();
    }
    return Verdict::declare(first);
}

AdaptiveState::AdaptiveState(double delta) : delta_(delta) { check_delta(delta); }

void AdaptiveState::observe(std::uint64_t answer) {
    ++total_;
    for (std::size_t i = 0; i < answers_.size(); ++i) {
        if (answers_[i] == answer) {
            ++counts_[i];
            return;
        }
    }
    answers_.push_back(answer);
    counts_.push_back(1);
}

std::uint64_t AdaptiveState::budget_sequence_index(std::size_t a, std::size_t b) {
    if (a == b) throw std::invalid_argument("budget_sequence_index: a test needs two answers");
    if (a > b) std::swap(a, b);
    const std::uint64_t later = b;
    return later * (later - 1) / 2 + a + 1;
}

double AdaptiveState::pair_budget(std::size_t a, std::size_t b) const {
    const double n = static_cast<double>(budget_sequence_index(a, b));
    return 6.0 / (std::numbers::pi * std::numbers::pi) * delta_ / (n * n);
}

double AdaptiveState::assigned_budget_total() const {
    double sum = 0.0;
    for (std::size_t b = 1; b < answers_.size(); ++b) {
        for (std::size_t a = 0; a < b; ++a) sum += pair_budget(a, b);
    }
    return sum;
}

std::size_t AdaptiveState::leader() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < counts_.size(); ++i) {
        if (counts_[i] > counts_[best]) best = i;
    }
    return best;
}

void adaptive_observe(AdaptiveState& state, std::uint64_t answer) { state.observe(answer); }

Verdict adaptive_check(const AdaptiveState& state) {
    if (state.answer_count() < 2) return Verdict::proceed();
    const std::size_t lead = state.leader();
    const auto& counts = state.counts();
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (j == lead) continue;
        if (counts[lead] <= counts[j]) return Verdict::proceed();
        const double log_density = beta_logpdf(0.5, counts[lead] + 1, counts[j] + 1);
        if (log_density > std::log(state.pair_budget(lead, j))) return Verdict::proceed();
    }
    return Verdict::declare(static_cast<std::size_t>(state.answers()[lead]));
}

RuleConfig parse_rule(std::string_view token) {
    if (token == "ppr-1v1") return {RuleKind::Ppr1v1, EngineKind::Ppr};
    if (token == "ppr-md") return {RuleKind::PprMd, EngineKind::Ppr};
    if (token == "ppr-adaptive") return {RuleKind::PprAdaptive, EngineKind::Ppr};
    auto ends_with = [&](std::string_view suffix) {
        return token.size() > suffix.size() &&
               token.substr(token.size() - suffix.size()) == suffix;
    };
    if (ends_with("-1v1")) {
        return {RuleKind::OneVsOne, parse_engine(token.substr(0, token.size() - 4))};
    }
    if (ends_with("-1vr")) {
        return {RuleKind::OneVsRest, parse_engine(token.substr(0, token.size() - 4))};
    }
    throw std::invalid_argument("unknown rule '" + std::string(token) + "'");
}

std::string rule_token(const RuleConfig& rule) {
    switch (rule.kind) {
        case RuleKind::Ppr1v1: return "ppr-1v1";
        case RuleKind::PprMd: return "ppr-md";
        case RuleKind::PprAdaptive: return "ppr-adaptive";
        case RuleKind::OneVsOne: return engine_token(rule.engine) + "-1v1";
        case RuleKind::OneVsRest: return engine_token(rule.engine) + "-1vr";
    }
    return "?";
}

std::string rule_scheme(const RuleConfig& rule) {
    switch (rule.kind) {
        case RuleKind::Ppr1v1:
        case RuleKind::OneVsOne: return "1v1";
        case RuleKind::OneVsRest: return "1vr";
        case RuleKind::PprMd: return "md";
        case RuleKind::PprAdaptive: return "adaptive";
    }
    return "?";
}

ModeStopper::ModeStopper(const RuleConfig& rule, std::size_t k, double delta)
    : rule_(rule), k_(k), delta_(delta), tally_(k) {
    check_delta(delta);
    switch (rule_.kind) {
        case RuleKind::OneVsOne: engine_.emplace(make_1v1_engine(rule_.engine, k, delta)); break;
        case RuleKind::OneVsRest: engine_.emplace(make_1vr_engine(rule_.engine, k, delta)); break;
        case RuleKind::PprAdaptive: adaptive_.emplace(delta); break;
        default: break;
    }
}

void ModeStopper::observe(std::size_t idx) {
    tally_update(tally_, idx);
    if (adaptive_) adaptive_->observe(idx);
}

Verdict ModeStopper::check() const {
    switch (rule_.kind) {
        case RuleKind::Ppr1v1: return ppr_1v1_check(tally_, k_, delta_);
        case RuleKind::OneVsOne: return generic_1v1_check(tally_, *engine_);
        case RuleKind::OneVsRest: return generic_1vr_check(tally_, *engine_);
        case RuleKind::PprMd: return ppr_md_check(tally_, k_, delta_);
        case RuleKind::PprAdaptive: return adaptive_check(*adaptive_);
    }
    return Verdict::proceed();
}

TrialRecord run_mode_estimation(const DiscreteInstance& instance, const RuleConfig& rule,
                                double delta, SeededStream& rng, std::uint64_t check_every,
                                std::uint64_t sample_cap) {
    if (check_every == 0) throw std::invalid_argument("check_every must be >= 1");
    ModeStopper stopper(rule, instance.size(), delta);
    TrialRecord record;
    record.master_seed = rng.master_seed();
    record.seed = rng.stream_index();
    record.truth = instance.true_mode();
    while (true) {
        if (record.samples >= sample_cap) {
            throw SampleCapExceeded("run_mode_estimation: rule " + rule_token(rule) +
                                    " did not stop within " + std::to_string(sample_cap) +
                                    " samples (stream " + std::to_string(record.seed) + ")");
        }
        stopper.observe(sample(instance, rng));
        ++record.samples;
        if (record.samples % check_every != 0) continue;
        const Verdict verdict = stopper.check();
        if (verdict.is_declare()) {
            record.declared = verdict.index();
            break;
        }
    }
    record.correct = record.declared == record.truth;
    return record;
}

}  // namespace modeest
