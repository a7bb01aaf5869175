#include "modeest/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modeest {

namespace {

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

double ratio(std::uint64_t s, std::uint64_t t) {
    return static_cast<double>(s) / static_cast<double>(t);
}

void check_counts(std::uint64_t s, std::uint64_t t) {
    if (s > t) throw std::invalid_argument("bounds: successes exceed total");
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("bounds: mistake probability must lie in (0, 1)");
    }
}

Interval symmetric(double centre, double half_width) {
    return {clip01(centre - half_width), clip01(centre + half_width)};
}

Interval kl_interval(std::uint64_t s, std::uint64_t t, double beta) {
    const double p = ratio(s, t);
    return {invert_kl_lower(p, t, beta), invert_kl_upper(p, t, beta)};
}

}  // namespace

EngineKind parse_engine(std::string_view token) {
    if (token == "ppr") return EngineKind::Ppr;
    if (token == "lucb") return EngineKind::HoeffdingLucb;
    if (token == "kl-lucb") return EngineKind::KlLucb;
    if (token == "kl-sn") return EngineKind::KlSn;
    if (token == "a1") return EngineKind::A1Bernstein;
    throw std::invalid_argument("unknown bound engine '" + std::string(token) + "'");
}

std::string engine_token(EngineKind kind) {
    switch (kind) {
        case EngineKind::Ppr: return "ppr";
        case EngineKind::HoeffdingLucb: return "lucb";
        case EngineKind::KlLucb: return "kl-lucb";
        case EngineKind::KlSn: return "kl-sn";
        case EngineKind::A1Bernstein: return "a1";
    }
    return "?";
}

double lucb_exploration_rate(std::uint64_t t, double alpha) {
    return std::log(405.5 * std::pow(static_cast<double>(t), 1.1) / alpha);
}

double kl_sn_gamma(double alpha) {
    check_alpha(alpha);
    const double scale = 2.0 * std::exp(2.0);
    auto excess = [&](double g) { return scale * g * std::exp(-g) - alpha; };
    double lo = 1.0 + 1e-9;
    double hi = 200.0;
    if (!(excess(lo) > 0.0 && excess(hi) < 0.0)) {
        throw std::invalid_argument("kl_sn_gamma: no root with gamma in (1, 200] for this alpha");
    }
    for (int it = 0; it < kMaxBisections && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (excess(mid) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double kl_sn_exploration_rate(std::uint64_t t, double gamma) {
    const double lg = std::log(gamma);
    return gamma * (1.0 + lg) / ((gamma - 1.0) * lg) *
               std::log(std::log(static_cast<double>(t))) +
           gamma;
}

Interval hoeffding_lucb_bounds(std::uint64_t s, std::uint64_t t, double alpha) {
    check_counts(s, t);
    check_alpha(alpha);
    if (t == 0) return {0.0, 1.0};
    const double half = std::sqrt(lucb_exploration_rate(t, alpha) / (2.0 * static_cast<double>(t)));
    return symmetric(ratio(s, t), half);
}

Interval kl_lucb_bounds(std::uint64_t s, std::uint64_t t, double alpha) {
    check_counts(s, t);
    check_alpha(alpha);
    if (t == 0) return {0.0, 1.0};
    return kl_interval(s, t, lucb_exploration_rate(t, alpha));
}

Interval kl_sn_bounds(std::uint64_t s, std::uint64_t t, double alpha) {
    return BoundEngine(EngineKind::KlSn, alpha).interval(s, t);
}

Interval a1_bounds(std::uint64_t s, std::uint64_t t, double alpha) {
    check_counts(s, t);
    check_alpha(alpha);
    if (t < 2) return {0.0, 1.0};
    const double td = static_cast<double>(t);
    const double variance = static_cast<double>(s) * static_cast<double>(t - s) / (td * (td - 1.0));
    const double log_term = std::log(4.0 * td * td / alpha);
    const double half = std::sqrt(2.0 * variance * log_term / td) + 7.0 * log_term / (3.0 * (td - 1.0));
    return symmetric(ratio(s, t), half);
}

Interval ppr_bounds(std::uint64_t s, std::uint64_t t, double alpha) {
    check_counts(s, t);
    check_alpha(alpha);
    return posterior_level_crossings(s + 1, t - s + 1, alpha);
}

BoundEngine::BoundEngine(EngineKind kind, double alpha) : kind_(kind), alpha_(alpha) {
    check_alpha(alpha);
    if (kind_ == EngineKind::KlSn) gamma_ = kl_sn_gamma(alpha);
}

Interval BoundEngine::interval(std::uint64_t s, std::uint64_t t) const {
    switch (kind_) {
        case EngineKind::Ppr: return ppr_bounds(s, t, alpha_);
        case EngineKind::HoeffdingLucb: return hoeffding_lucb_bounds(s, t, alpha_);
        case EngineKind::KlLucb: return kl_lucb_bounds(s, t, alpha_);
        case EngineKind::A1Bernstein: return a1_bounds(s, t, alpha_);
        case EngineKind::KlSn:
            check_counts(s, t);
            // ln ln t is not positive below t = 3.
            if (t < 3) return {0.0, 1.0};
            return kl_interval(s, t, kl_sn_exploration_rate(t, gamma_));
    }
    return {0.0, 1.0};
}

double BoundEngine::lower(std::uint64_t s, std::uint64_t t) const {
    switch (kind_) {
        case EngineKind::KlLucb:
            check_counts(s, t);
            if (t == 0) return 0.0;
            return invert_kl_lower(ratio(s, t), t, lucb_exploration_rate(t, alpha_));
        case EngineKind::KlSn:
            check_counts(s, t);
            if (t < 3) return 0.0;
            return invert_kl_lower(ratio(s, t), t, kl_sn_exploration_rate(t, gamma_));
        default:
            return interval(s, t).lo;
    }
}

double BoundEngine::upper(std::uint64_t s, std::uint64_t t) const {
    switch (kind_) {
        case EngineKind::KlLucb:
            check_counts(s, t);
            if (t == 0) return 1.0;
            return invert_kl_upper(ratio(s, t), t, lucb_exploration_rate(t, alpha_));
        case EngineKind::KlSn:
            check_counts(s, t);
            if (t < 3) return 1.0;
            return invert_kl_upper(ratio(s, t), t, kl_sn_exploration_rate(t, gamma_));
        default:
            return interval(s, t).hi;
    }
}

}  // namespace modeest
