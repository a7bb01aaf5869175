#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "modeest/bounds.hpp"
#include "modeest/instances.hpp"
#include "oracles.hpp"

using namespace modeest;

namespace {

const EngineKind kAllEngines[] = {EngineKind::Ppr, EngineKind::HoeffdingLucb, EngineKind::KlLucb,
                                  EngineKind::KlSn, EngineKind::A1Bernstein};

}  // namespace

TEST_CASE("engine tokens round-trip") {
    for (EngineKind k : kAllEngines) CHECK(parse_engine(engine_token(k)) == k);
    CHECK_THROWS_AS(parse_engine("ucb"), std::invalid_argument);
}

TEST_CASE("hoeffding_lucb_bounds") {
    const Interval iv = hoeffding_lucb_bounds(5, 10, 0.01);
    const double half = std::sqrt(std::log(405.5 * std::pow(10.0, 1.1) / 0.01) / 20.0);
    CHECK(iv.lo == doctest::Approx(std::max(0.0, 0.5 - half)));
    CHECK(iv.hi == doctest::Approx(std::min(1.0, 0.5 + half)));
    CHECK(hoeffding_lucb_bounds(10, 10, 0.01).hi == 1.0);
    CHECK(hoeffding_lucb_bounds(5000, 10000, 0.01).width() <
          hoeffding_lucb_bounds(50, 100, 0.01).width());
}

TEST_CASE("kl_lucb_bounds") {
    CHECK(kl_lucb_bounds(10, 10, 0.01).hi == 1.0);
    CHECK(kl_lucb_bounds(0, 10, 0.01).lo == 0.0);
    const Interval kl = kl_lucb_bounds(5, 10, 0.01);
    const Interval h = hoeffding_lucb_bounds(5, 10, 0.01);
    CHECK(kl.lo >= h.lo);
    CHECK(kl.hi <= h.hi);
}

TEST_CASE("kl_sn_gamma") {
    const double g = kl_sn_gamma(0.005);
    CHECK(g > 10.0);
    CHECK(g < 10.6);
    CHECK(kl_sn_gamma(0.01) < g);
    for (double a : {0.1, 0.01, 0.005, 0.001}) {
        const double gamma = kl_sn_gamma(a);
        CHECK(std::abs(2.0 * std::exp(2.0) * gamma * std::exp(-gamma) - a) <= 1e-9);
    }
}

TEST_CASE("kl_sn_bounds") {
    const Interval early = kl_sn_bounds(1, 2, 0.01);
    CHECK(early.lo == 0.0);
    CHECK(early.hi == 1.0);

    const double gamma = kl_sn_gamma(0.01);
    const double beta = kl_sn_exploration_rate(100, gamma);
    const double expected_beta = gamma * (1.0 + std::log(gamma)) / ((gamma - 1.0) * std::log(gamma)) *
                                     std::log(std::log(100.0)) + gamma;
    CHECK(beta == doctest::Approx(expected_beta));
    const Interval iv = kl_sn_bounds(50, 100, 0.01);
    CHECK(std::abs(iv.lo - oracle::kl_lower_grid(0.5, 100, beta)) <= 1e-6);
    CHECK(std::abs(iv.hi - oracle::kl_upper_grid(0.5, 100, beta)) <= 1e-6);

    // ln ln t grows slower than 1.1 ln t.
    CHECK(kl_sn_bounds(500000, 1000000, 0.01).width() <
          kl_lucb_bounds(500000, 1000000, 0.01).width());
}

TEST_CASE("a1_bounds") {
    const Interval tiny = a1_bounds(1, 1, 0.01);
    CHECK(tiny.lo == 0.0);
    CHECK(tiny.hi == 1.0);

    // s = 0: zero variance, only the 7 ln(4t²/α)/(3(t-1)) term.
    const double term = 7.0 * std::log(400.0 / 0.01) / 27.0;
    CHECK(a1_bounds(0, 10, 0.01).hi == doctest::Approx(std::min(1.0, term)));

    const double t = 2.0, v = 0.5;  // s = 1, t = 2
    const double ln_term = std::log(4.0 * t * t / 0.3);
    const double width = std::sqrt(2.0 * v * ln_term / t) + 7.0 * ln_term / (3.0 * (t - 1.0));
    CHECK(a1_bounds(1, 2, 0.3).hi == doctest::Approx(std::min(1.0, 0.5 + width)));

    const Interval a1 = a1_bounds(5, 10, 0.01);
    const Interval kl = kl_lucb_bounds(5, 10, 0.01);
    CHECK(a1.width() >= kl.width());
}

TEST_CASE("ppr_bounds") {
    const Interval empty = ppr_bounds(0, 0, 0.01);
    CHECK(empty.lo == 0.0);
    CHECK(empty.hi == 1.0);

    const Interval all = ppr_bounds(10, 10, 0.01);
    CHECK(all.lo == doctest::Approx(std::pow(0.01 / 11.0, 0.1)).epsilon(1e-8));
    CHECK(all.hi == 1.0);

    const Interval sym = ppr_bounds(5, 10, 0.01);
    CHECK(sym.lo == doctest::Approx(1.0 - sym.hi).epsilon(1e-8));

    for (int i = 0; i < 50; ++i) {
        const std::uint64_t t = 1 + 37 * i, s = (13 * i) % (t + 1);
        const Interval iv = ppr_bounds(s, t, 0.02);
        const auto [glo, ghi] = oracle::level_crossings_grid(s + 1, t - s + 1, 0.02);
        CHECK(std::abs(iv.lo - glo) <= 1e-6);
        CHECK(std::abs(iv.hi - ghi) <= 1e-6);
    }
}

TEST_CASE("every engine contains the empirical mean and stays in [0, 1]") {
    for (EngineKind kind : kAllEngines) {
        for (double alpha : {0.1, 0.01, 0.0005}) {
            const BoundEngine engine(kind, alpha);
            for (std::uint64_t t : {1, 2, 3, 7, 40, 333, 5000}) {
                for (std::uint64_t s = 0; s <= t; s += std::max<std::uint64_t>(1, t / 9)) {
                    const Interval iv = engine.interval(s, t);
                    const double p = static_cast<double>(s) / t;
                    REQUIRE(0.0 <= iv.lo);
                    REQUIRE(iv.hi <= 1.0);
                    REQUIRE(iv.lo <= p + 1e-12);
                    REQUIRE(p - 1e-12 <= iv.hi);
                    REQUIRE(engine.lower(s, t) == doctest::Approx(iv.lo).epsilon(1e-12));
                    REQUIRE(engine.upper(s, t) == doctest::Approx(iv.hi).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("KL interval never wider than Hoeffding with the same rate") {
    for (double alpha : {0.1, 0.01, 0.001}) {
        for (std::uint64_t t : {2, 5, 20, 100, 1000}) {
            for (std::uint64_t s = 0; s <= t; s += std::max<std::uint64_t>(1, t / 10)) {
                const Interval kl = kl_lucb_bounds(s, t, alpha);
                const Interval h = hoeffding_lucb_bounds(s, t, alpha);
                CHECK(kl.lo >= h.lo - 1e-9);
                CHECK(kl.hi <= h.hi + 1e-9);
            }
        }
    }
}

TEST_CASE("PPR interval excludes p exactly when the posterior density at p is at most the level") {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 300; ++i) {
        const std::uint64_t t = 1 + gen() % 400, s = gen() % (t + 1);
        const double p = 0.05 + 0.9 * static_cast<double>(gen() % 1000) / 1000.0;
        const double level = 0.05;
        const double density = beta_pdf(p, s + 1, t - s + 1);
        if (std::abs(density - level) < 1e-6) continue;  // too close to call
        const Interval iv = ppr_bounds(s, t, level);
        CHECK(iv.contains(p) == (density > level));
    }
}

TEST_CASE("PPR anytime coverage at p = 1/2") {
    // The interval is the level set {pdf > α}, so p leaves it exactly when
    // pdf(p) <= α (checked above); track that event directly along each path.
    const double alpha = 0.05;
    const double log_alpha = std::log(alpha);
    const int paths = 2000;
    const std::uint64_t horizon = 10000;
    int exits = 0;
    for (int path = 0; path < paths; ++path) {
        SeededStream rng = derive_stream(2024, path);
        std::uint64_t s = 0;
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            s += rng.next_u64() >> 63;
            if (beta_logpdf(0.5, s + 1, t - s + 1) <= log_alpha) {
                ++exits;
                break;
            }
        }
    }
    CHECK(static_cast<double>(exits) / paths <= alpha);
}
