#pragma once
// Numeric kernels shared by every bound engine: integer log-gamma, Beta and
// Dirichlet densities, Bernoulli KL divergence and the root finders that invert
// them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace modeest {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Thrown when a density level set is empty (level above the maximum density).
class EmptyLevelSet : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ln Γ(n) for integer n ≥ 1, filled by a compensated running sum of ln k so
// that adjacent entries differ by ln n to within rounding of the larger entry.
// Not synchronized; share one per thread (see ln_gamma_int) or clone.
class LogGammaTable {
public:
    explicit LogGammaTable(std::size_t capacity = 1024);

    double operator()(std::uint64_t n);
    std::size_t capacity() const { return values_.size() - 1; }
    void reserve(std::size_t capacity);

private:
    std::vector<double> values_;  // values_[n] = ln Γ(n); slot 0 unused
    double compensation_ = 0.0;
};

// Thread-local table; concurrent callers never share storage.
double ln_gamma_int(std::uint64_t n);

// ln B(a, b) for positive integers.
double ln_beta_int(std::uint64_t a, std::uint64_t b);

// Beta(a, b) density at x, with 0^0 = 1.
double beta_logpdf(double x, std::uint64_t a, std::uint64_t b);
double beta_pdf(double x, std::uint64_t a, std::uint64_t b);

// Log density of Dirichlet(counts + 1) at the simplex point x.
double dirichlet_logpdf(std::span<const double> x, std::span<const std::uint64_t> counts);

// D(Bern(p) || Bern(q)), 0 ln 0 = 0. Throws std::domain_error unless 0 < q < 1.
double kl_bernoulli(double p, double q);

inline constexpr double kDefaultRootTol = 1e-9;
inline constexpr int kMaxBisections = 200;

// Smallest q in [0, p_hat] with t * D(p_hat || q) <= beta.
double invert_kl_lower(double p_hat, std::uint64_t t, double beta, double tol = kDefaultRootTol);
// Largest q in [p_hat, 1] with t * D(p_hat || q) <= beta.
double invert_kl_upper(double p_hat, std::uint64_t t, double beta, double tol = kDefaultRootTol);

// Leftmost and rightmost x with beta_pdf(x; a, b) = level. The returned
// endpoints are the outer ends of the final bisection brackets, so the
// interval never under-covers {x : pdf(x) > level}. An endpoint where the
// density at the boundary itself exceeds the level is returned as 0 or 1.
// Throws EmptyLevelSet when level exceeds the density at the mode.
Interval posterior_level_crossings(std::uint64_t a, std::uint64_t b, double level,
                                   double tol = kDefaultRootTol);

}  // namespace modeest
