#include "modeest/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace modeest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Smallest probe used in place of an open endpoint at 0.
constexpr double kTinyProb = 1e-300;

double xlogy(std::uint64_t k, double y) {
    if (k == 0) return 0.0;
    if (y <= 0.0) return kNegInf;
    return static_cast<double>(k) * std::log(y);
}

}  // namespace

LogGammaTable::LogGammaTable(std::size_t capacity) : values_{0.0, 0.0, 0.0} {
    reserve(capacity);
}

void LogGammaTable::reserve(std::size_t capacity) {
    if (capacity + 1 <= values_.size()) return;
    values_.reserve(capacity + 1);
    // values_[n + 1] = values_[n] + ln n, Kahan-compensated.
    while (values_.size() < capacity + 1) {
        const std::size_t n = values_.size() - 1;
        const double sum = values_.back();
        const double y = std::log(static_cast<double>(n)) - compensation_;
        const double next = sum + y;
        compensation_ = (next - sum) - y;
        values_.push_back(next);
    }
}

double LogGammaTable::operator()(std::uint64_t n) {
    if (n == 0) throw std::domain_error("ln_gamma_int: n must be >= 1");
    if (n >= values_.size()) {
        std::size_t grow = values_.size() * 2;
        while (grow <= n) grow *= 2;
        reserve(grow);
    }
    return values_[n];
}

double ln_gamma_int(std::uint64_t n) {
    thread_local LogGammaTable table(4096);
    return table(n);
}

double ln_beta_int(std::uint64_t a, std::uint64_t b) {
    return ln_gamma_int(a) + ln_gamma_int(b) - ln_gamma_int(a + b);
}

double beta_logpdf(double x, std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) throw std::domain_error("beta_logpdf: a, b must be >= 1");
    if (x < 0.0 || x > 1.0) return kNegInf;
    return xlogy(a - 1, x) + xlogy(b - 1, 1.0 - x) - ln_beta_int(a, b);
}

double beta_pdf(double x, std::uint64_t a, std::uint64_t b) {
    return std::exp(beta_logpdf(x, a, b));
}

double dirichlet_logpdf(std::span<const double> x, std::span<const std::uint64_t> counts) {
    if (x.size() != counts.size()) {
        throw std::invalid_argument("dirichlet_logpdf: dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " +
                                    std::to_string(counts.size()) + ")");
    }
    if (x.empty()) throw std::invalid_argument("dirichlet_logpdf: empty point");
    double sum = 0.0;
    for (double xi : x) {
        if (!(xi >= 0.0)) throw std::invalid_argument("dirichlet_logpdf: negative coordinate");
        sum += xi;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("dirichlet_logpdf: point does not sum to 1");
    }
    std::uint64_t total = 0;
    double log_density = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total += counts[i];
        log_density += xlogy(counts[i], x[i]) - ln_gamma_int(counts[i] + 1);
    }
    return log_density + ln_gamma_int(total + x.size());
}

double kl_bernoulli(double p, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("kl_bernoulli: q must lie in (0, 1)");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("kl_bernoulli: p must lie in [0, 1]");
    double d = 0.0;
    if (p > 0.0) d += p * std::log(p / q);
    if (p < 1.0) d += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return d > 0.0 ? d : 0.0;
}

double invert_kl_lower(double p_hat, std::uint64_t t, double beta, double tol) {
    if (p_hat <= 0.0 || t == 0) return 0.0;
    if (beta <= 0.0) return p_hat;
    const double budget = beta / static_cast<double>(t);
    if (kl_bernoulli(p_hat, kTinyProb) <= budget) return 0.0;
    // Invariant: D(p_hat || lo) > budget >= D(p_hat || hi).
    double lo = kTinyProb;
    double hi = p_hat;
    for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kl_bernoulli(p_hat, mid) > budget) lo = mid; else hi = mid;
    }
    return lo;
}

double invert_kl_upper(double p_hat, std::uint64_t t, double beta, double tol) {
    if (p_hat >= 1.0 || t == 0) return 1.0;
    if (beta <= 0.0) return p_hat;
    const double budget = beta / static_cast<double>(t);
    // Work in r = 1 - q so that the open endpoint q -> 1 is resolvable.
    const double p = p_hat;
    const double pc = 1.0 - p_hat;
    auto kl_at_complement = [&](double r) {
        double d = (1.0 - p) * std::log(pc / r);
        if (p > 0.0) d += p * (std::log(p) - std::log1p(-r));
        return d > 0.0 ? d : 0.0;
    };
    if (kl_at_complement(kTinyProb) <= budget) return 1.0;
    double lo = kTinyProb;  // fails the budget
    double hi = pc;         // meets it
    for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kl_at_complement(mid) > budget) lo = mid; else hi = mid;
    }
    return 1.0 - lo;
}

Interval posterior_level_crossings(std::uint64_t a, std::uint64_t b, double level, double tol) {
    if (a == 0 || b == 0) throw std::domain_error("posterior_level_crossings: a, b must be >= 1");
    if (level <= 0.0) return {0.0, 1.0};
    const double log_level = std::log(level);

    const double mode = (a == 1 && b == 1) ? 0.5
                        : static_cast<double>(a - 1) / static_cast<double>(a + b - 2);
    const double log_peak = beta_logpdf(mode, a, b);
    const double slack = 1e-12 * std::max(1.0, std::abs(log_peak));
    if (log_level > log_peak + slack) {
        throw EmptyLevelSet("posterior_level_crossings: level " + std::to_string(level) +
                            " exceeds the maximum density");
    }
    if (a == 1 && b == 1) return {0.0, 1.0};
    if (log_level >= log_peak - slack) return {mode, mode};

    Interval out;
    if (a == 1) {
        out.lo = 0.0;
    } else {
        // Increasing flank: density(lo) <= level < density(hi).
        double lo = 0.0;
        double hi = mode;
        for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (beta_logpdf(mid, a, b) > log_level) hi = mid; else lo = mid;
        }
        out.lo = lo;
    }
    if (b == 1) {
        out.hi = 1.0;
    } else {
        // Decreasing flank: density(lo) > level >= density(hi).
        double lo = mode;
        double hi = 1.0;
        for (int it = 0; it < kMaxBisections && hi - lo > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (beta_logpdf(mid, a, b) > log_level) lo = mid; else hi = mid;
        }
        out.hi = hi;
    }
    return out;
}

}  // namespace modeest
