#pragma once
// Closed-form sample-complexity bounds and numeric checks of the inequalities
// behind them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace modeest {

// Expected-sample lower bound for any δ-correct rule: p1/(p1-p2)² ln(1/(2.4δ)).
double lower_bound(double p1, double p2, double delta);
// High-probability bound for the empirical-Bernstein rule A1.
double a1_upper_bound(double p1, double p2, std::size_t k, double delta);
// High-probability bound for PPR on a Bernoulli with mean p1 > 1/2.
double ppr_bernoulli_upper(double p1, double delta);
// High-probability bound for PPR-1v1.
double ppr_1v1_upper(double p1, double p2, std::size_t k, double delta);

struct BoundReport {
    double lower = 0.0;
    double a1_upper = 0.0;
    std::optional<double> ppr_bernoulli_upper;  // K = 2 only
    double ppr_1v1_upper = 0.0;
};

BoundReport bound_report(double p1, double p2, std::size_t k, double delta);

// Quantities of the margin inequality u < (1 - l)(p1 + pj) t*, evaluated at t = t*.
struct MarginTerms {
    double u = 0.0;       // PPR-Bernoulli bound at q1 = p1/(p1 + pj), δ' = δ/(2(K - 1))
    double l = 0.0;       // Chernoff slack sqrt(2 ln(1/δ') / ((p1 + pj) t*))
    double t_star = 0.0;  // PPR-1v1 bound
    bool holds = false;
};

MarginTerms thm3_margin_terms(double p1, double p2, double pj, std::size_t k, double delta);
bool verify_thm3_margin(double p1, double p2, double pj, std::size_t k, double delta);

struct ConjectureCheck {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    std::uint64_t f = 0;
    double theta_star = 0.0;
    double lhs_log = 0.0;  // ln[θ^x (1-θ)^{y+f} / B(x+1, y+f+1)]
    double rhs_log = 0.0;  // ln[F / (2^{x+y} B(x+1, y+1))]
    bool holds = false;
};

// θ* from θ/(1-θ) = [x!(y+f)!/(y!(x+f)!)]^{1/(x-y)}, computed in log space.
double conjecture_theta_star(std::uint64_t x, std::uint64_t y, std::uint64_t f);

// Evaluates one (x, y, f) triple with x > y. The factor F is 1 for the strong
// form, or (K - 1)/K when k is given.
ConjectureCheck conjecture_check(std::uint64_t x, std::uint64_t y, std::uint64_t f,
                                 std::optional<std::size_t> k = std::nullopt);

// Sweeps 1 <= y < x <= x_max, y <= y_max, 1 <= f <= f_max; returns failures.
std::vector<ConjectureCheck> verify_1v1_1vr_conjecture(std::uint64_t x_max, std::uint64_t y_max,
                                                       std::uint64_t f_max,
                                                       std::optional<std::size_t> k = std::nullopt);

// Checks Beta(1/2; a, b+1) >= Beta(1/2; a, b) for all 1 <= b <= a, a <= a_max, b <= b_max.
bool verify_beta_monotonicity(std::uint64_t a_max, std::uint64_t b_max);

}  // namespace modeest
