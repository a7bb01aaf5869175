#include "modeest/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "modeest/numerics.hpp"

namespace modeest {

namespace {

void check_gap(double p1, double p2, double delta) {
    if (!(p1 <= 1.0 && p1 > p2 && p2 >= 0.0)) {
        throw std::domain_error("need 1 >= p1 > p2 >= 0");
    }
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
}

// Relative slack for comparisons of quantities that are equal in exact arithmetic.
bool at_least(double lhs, double rhs) {
    return lhs >= rhs - 1e-12 * std::max(1.0, std::abs(rhs));
}

}  // namespace

double lower_bound(double p1, double p2, double delta) {
    check_gap(p1, p2, delta);
    const double gap = p1 - p2;
    return p1 / (gap * gap) * std::log(1.0 / (2.4 * delta));
}

double a1_upper_bound(double p1, double p2, std::size_t k, double delta) {
    check_gap(p1, p2, delta);
    if (k < 2) throw std::domain_error("K must be >= 2");
    const double c = 592.0 / 3.0;
    const double gap = p1 - p2;
    const double hardness = p1 / (gap * gap);
    return c * hardness * std::log(c * std::sqrt(static_cast<double>(k) / delta) * hardness);
}

double ppr_bernoulli_upper(double p1, double delta) {
    if (!(p1 > 0.5 && p1 <= 1.0)) throw std::domain_error("ppr_bernoulli_upper: need p1 in (1/2, 1]");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
    const double gap2 = (p1 - 0.5) * (p1 - 0.5);
    return 20.775 * p1 / gap2 * std::log(2.49 / (gap2 * delta));
}

double ppr_1v1_upper(double p1, double p2, std::size_t k, double delta) {
    check_gap(p1, p2, delta);
    if (k < 2) throw std::domain_error("K must be >= 2");
    const double gap = p1 - p2;
    return 194.07 * p1 / (gap * gap) *
           std::log(std::sqrt(79.68 * static_cast<double>(k - 1) / delta) * p1 / gap);
}

BoundReport bound_report(double p1, double p2, std::size_t k, double delta) {
    BoundReport report;
    report.lower = lower_bound(p1, p2, delta);
    report.a1_upper = a1_upper_bound(p1, p2, k, delta);
    report.ppr_1v1_upper = ppr_1v1_upper(p1, p2, k, delta);
    if (k == 2 && p1 > 0.5) report.ppr_bernoulli_upper = ppr_bernoulli_upper(p1, delta);
    return report;
}

MarginTerms thm3_margin_terms(double p1, double p2, double pj, std::size_t k, double delta) {
    check_gap(p1, p2, delta);
    if (!(pj >= 0.0 && pj <= p2)) throw std::domain_error("need p2 >= pj >= 0");
    MarginTerms terms;
    const double pair_mass = p1 + pj;
    const double delta_prime = delta / (2.0 * static_cast<double>(k - 1));
    terms.u = ppr_bernoulli_upper(p1 / pair_mass, delta_prime);
    terms.t_star = ppr_1v1_upper(p1, p2, k, delta);
    terms.l = std::sqrt(2.0 * std::log(1.0 / delta_prime) / (pair_mass * terms.t_star));
    terms.holds = terms.u < (1.0 - terms.l) * pair_mass * terms.t_star;
    return terms;
}

bool verify_thm3_margin(double p1, double p2, double pj, std::size_t k, double delta) {
    return thm3_margin_terms(p1, p2, pj, k, delta).holds;
}

double conjecture_theta_star(std::uint64_t x, std::uint64_t y, std::uint64_t f) {
    if (!(x > y)) throw std::domain_error("conjecture_theta_star: need x > y");
    const double log_odds = (ln_gamma_int(x + 1) + ln_gamma_int(y + f + 1) -
                             ln_gamma_int(y + 1) - ln_gamma_int(x + f + 1)) /
                            static_cast<double>(x - y);
    return 1.0 / (1.0 + std::exp(-log_odds));
}

ConjectureCheck conjecture_check(std::uint64_t x, std::uint64_t y, std::uint64_t f,
                                 std::optional<std::size_t> k) {
    if (!(x > y)) throw std::domain_error("conjecture_check: need x > y");
    ConjectureCheck check{x, y, f};
    const double log_odds = (ln_gamma_int(x + 1) + ln_gamma_int(y + f + 1) -
                             ln_gamma_int(y + 1) - ln_gamma_int(x + f + 1)) /
                            static_cast<double>(x - y);
    check.theta_star = 1.0 / (1.0 + std::exp(-log_odds));
    const double log_theta = -std::log1p(std::exp(-log_odds));
    const double log_one_minus = -std::log1p(std::exp(log_odds));
    check.lhs_log = static_cast<double>(x) * log_theta +
                    static_cast<double>(y + f) * log_one_minus - ln_beta_int(x + 1, y + f + 1);
    double log_factor = 0.0;
    if (k) {
        if (*k < 2) throw std::domain_error("conjecture_check: K must be >= 2");
        log_factor = std::log(static_cast<double>(*k - 1) / static_cast<double>(*k));
    }
    check.rhs_log = log_factor - static_cast<double>(x + y) * std::numbers::ln2 -
                    ln_beta_int(x + 1, y + 1);
    check.holds = at_least(check.lhs_log, check.rhs_log);
    return check;
}

std::vector<ConjectureCheck> verify_1v1_1vr_conjecture(std::uint64_t x_max, std::uint64_t y_max,
                                                       std::uint64_t f_max,
                                                       std::optional<std::size_t> k) {
    std::vector<ConjectureCheck> failures;
    for (std::uint64_t x = 2; x <= x_max; ++x) {
        for (std::uint64_t y = 1; y < x && y <= y_max; ++y) {
            for (std::uint64_t f = 1; f <= f_max; ++f) {
                ConjectureCheck check = conjecture_check(x, y, f, k);
                if (!check.holds) failures.push_back(check);
            }
        }
    }
    return failures;
}

bool verify_beta_monotonicity(std::uint64_t a_max, std::uint64_t b_max) {
    for (std::uint64_t a = 1; a <= a_max; ++a) {
        for (std::uint64_t b = 1; b <= a && b <= b_max; ++b) {
            if (!at_least(beta_logpdf(0.5, a, b + 1), beta_logpdf(0.5, a, b))) return false;
        }
    }
    return true;
}

}  // namespace modeest
