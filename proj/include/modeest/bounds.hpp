#pragma once
// Confidence-bound engines for a Bernoulli mean from (successes, total,
// mistake probability). Every engine returns an Interval containing s/t.

#include <cstdint>
#include <string>
#include <string_view>

#include "modeest/numerics.hpp"

namespace modeest {

enum class EngineKind { Ppr, HoeffdingLucb, KlLucb, KlSn, A1Bernstein };

// CLI tokens: ppr | lucb | kl-lucb | kl-sn | a1
EngineKind parse_engine(std::string_view token);
std::string engine_token(EngineKind kind);

// β(t, α) = ln(405.5 t^1.1 / α), shared by LUCB and KL-LUCB.
double lucb_exploration_rate(std::uint64_t t, double alpha);

// Root γ > 1 of 2e²γe^{-γ} = α. Throws std::invalid_argument when no root
// lies in (1, 200].
double kl_sn_gamma(double alpha);
// γ(1 + ln γ) / ((γ - 1) ln γ) · ln ln t + γ.
double kl_sn_exploration_rate(std::uint64_t t, double gamma);

Interval hoeffding_lucb_bounds(std::uint64_t s, std::uint64_t t, double alpha);
Interval kl_lucb_bounds(std::uint64_t s, std::uint64_t t, double alpha);
Interval kl_sn_bounds(std::uint64_t s, std::uint64_t t, double alpha);
Interval a1_bounds(std::uint64_t s, std::uint64_t t, double alpha);
Interval ppr_bounds(std::uint64_t s, std::uint64_t t, double alpha);

// A bound engine bound to one mistake probability. Constants (the KL-SN γ)
// are computed in the constructor; the object is immutable afterwards and can
// be shared across threads.
class BoundEngine {
public:
    BoundEngine(EngineKind kind, double alpha);

    EngineKind kind() const { return kind_; }
    double alpha() const { return alpha_; }

    Interval interval(std::uint64_t s, std::uint64_t t) const;
    double lower(std::uint64_t s, std::uint64_t t) const;
    double upper(std::uint64_t s, std::uint64_t t) const;

private:
    EngineKind kind_;
    double alpha_;
    double gamma_ = 0.0;  // KL-SN only
};

}  // namespace modeest
