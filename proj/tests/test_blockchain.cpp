#include "doctest.h"

#include <cmath>
#include <set>

#include "modeest/blockchain.hpp"

using namespace modeest;

TEST_CASE("sprt_threshold") {
    const double q = 20.0 / 1600.0;
    const double direct = std::log(0.995 / 0.005) * 2 * q * (1 - q) * 1600 * 0.9 * 0.1 / 0.8;
    CHECK(sprt_threshold(0.005, 1600, 20, 0.1) == doctest::Approx(direct));
    CHECK(sprt_threshold(0.005, 1600, 20, 0.1) == doctest::Approx(23.52).epsilon(1e-3));
    CHECK(sprt_threshold(0.005, 1600, 20, 1e-9) < 1e-6);
    CHECK(std::abs(sprt_threshold(0.5, 1600, 20, 0.1)) < 1e-12);
    CHECK_THROWS_AS(sprt_threshold(0.005, 1600, 20, 0.5), std::domain_error);
}

TEST_CASE("sprt_step") {
    SprtState s(2, 20, 1e18);
    for (int i = 0; i < 3; ++i) s.step({20, 0});
    CHECK(s.statistics()[0] == 1200);
    CHECK(s.statistics()[1] == -1200);
    s.step({10, 10});
    CHECK(s.statistics()[0] == 1200);
    CHECK_THROWS_AS(s.step({10, 9}), std::invalid_argument);

    SprtState t(3, 20, sprt_threshold(0.005, 1600, 20, 0.1));
    CHECK(t.step({20, 0, 0}) == Verdict::declare(0));
    CHECK(t.steps() == 1);
}

TEST_CASE("SPRT statistic equals a recomputation from the batch history") {
    const NodePool pool(1600, 20, 0.3, 10);
    BatchDrawer drawer(pool);
    SeededStream rng(4, 4);
    SprtState s(10, 20, 1e18);
    std::vector<std::vector<std::uint64_t>> history;
    for (int step = 0; step < 200; ++step) {
        const Batch b = drawer.draw(rng);
        history.push_back(b.counts);
        s.step(b.counts);
        for (std::size_t i = 0; i < 10; ++i) {
            std::int64_t l = 0;
            for (const auto& c : history) l += (2 * static_cast<std::int64_t>(c[i]) - 20) * 20;
            REQUIRE(s.statistics()[i] == l);
        }
    }
}

TEST_CASE("NodePool answer model") {
    const NodePool two(1600, 20, 0.3, 2);
    CHECK(two.byzantine_count() == 480);
    CHECK(two.answer_of(0) == 1);
    CHECK(two.answer_of(479) == 1);
    CHECK(two.answer_of(480) == 0);

    const NodePool ten(1600, 20, 0.3, 10);
    std::vector<int> per_answer(10, 0);
    for (std::size_t n = 0; n < ten.nodes(); ++n) ++per_answer[ten.answer_of(n)];
    CHECK(per_answer[0] == 1120);
    for (std::size_t a = 1; a < 10; ++a) CHECK(std::abs(per_answer[a] - 480 / 9) <= 1);

    CHECK_THROWS_AS(NodePool(1600, 20, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(NodePool(10, 20, 0.1), std::invalid_argument);
}

TEST_CASE("draw_batch") {
    SeededStream rng(1, 2);
    const NodePool honest(1600, 20, 0.0);
    const Batch b = draw_batch(honest, rng);
    CHECK(b.counts[0] == 20);

    // Nodes within a batch are distinct.
    const NodePool ten(40, 40, 0.45, 10);
    BatchDrawer drawer(ten);
    const Batch full = drawer.draw(rng);
    std::uint64_t wrong = 0;
    for (std::size_t a = 1; a < 10; ++a) wrong += full.counts[a];
    CHECK(wrong == ten.byzantine_count());

    // Mean wrong count near m f.
    const NodePool pool(1600, 20, 0.49);
    BatchDrawer d2(pool);
    double total_wrong = 0.0;
    const int batches = 10000;
    for (int i = 0; i < batches; ++i) total_wrong += static_cast<double>(d2.draw(rng).counts[1]);
    const double mean = total_wrong / batches;
    const double expected = 20.0 * pool.byzantine_count() / 1600.0;
    // Hypergeometric sd per batch is below sqrt(20 * 0.25); 5 standard errors.
    CHECK(std::abs(mean - expected) < 5.0 * std::sqrt(5.0 / batches));
}

TEST_CASE("spread wrong answers are equally frequent") {
    const NodePool pool(1600, 20, 0.45, 10);
    BatchDrawer drawer(pool);
    SeededStream rng(6, 0);
    std::vector<double> counts(10, 0.0);
    for (int i = 0; i < 20000; ++i) {
        const Batch b = drawer.draw(rng);
        for (std::size_t a = 0; a < 10; ++a) counts[a] += static_cast<double>(b.counts[a]);
    }
    double wrong = 0.0;
    for (std::size_t a = 1; a < 10; ++a) wrong += counts[a];
    for (std::size_t a = 1; a < 10; ++a) CHECK(counts[a] / wrong == doctest::Approx(1.0 / 9).epsilon(0.05));
}

TEST_CASE("every policy declares the correct answer with no adversary") {
    const NodePool pool(1600, 20, 0.0, 2);
    for (VerificationPolicy p : {VerificationPolicy::Sprt, VerificationPolicy::Ppr1v1,
                                 VerificationPolicy::Ppr1vr}) {
        SeededStream rng(1, 0);
        const VerificationRecord r = run_verification(pool, p, 0.005, 0.1, rng);
        CHECK(r.correct);
        CHECK(r.samples % 20 == 0);
    }
    // With a single observed answer the adaptive rule has no test to run.
    SeededStream rng(1, 0);
    CHECK_THROWS_AS(run_verification(pool, VerificationPolicy::PprAdaptive, 0.005, 0.1, rng, 2000),
                    SampleCapExceeded);
}

TEST_CASE("SPRT at f = 0 stops after one step") {
    const NodePool pool(1600, 20, 0.0, 2);
    SeededStream rng(1, 0);
    const VerificationRecord r = run_verification(pool, VerificationPolicy::Sprt, 0.005, 0.1, rng);
    CHECK(r.samples == 20);
}

TEST_CASE("PPR policies declare the most frequent observed answer") {
    const NodePool pool(1600, 20, 0.3, 10);
    for (std::uint64_t i = 0; i < 50; ++i) {
        SeededStream rng = derive_stream(12, i);
        BatchDrawer drawer(pool);
        ModeStopper stopper(parse_rule("ppr-1v1"), 10, 0.005);
        while (true) {
            for (std::size_t a : drawer.draw(rng).reports) stopper.observe(a);
            const Verdict v = stopper.check();
            if (v.is_declare()) {
                CHECK(v.index() == stopper.tally().first);
                break;
            }
        }
        SeededStream again = derive_stream(12, i);
        const VerificationRecord r =
            run_verification(pool, VerificationPolicy::Ppr1v1, 0.005, 0.1, again);
        CHECK(r.declared == stopper.tally().first);
    }
}

TEST_CASE("sweep_f") {
    SweepConfig cfg;
    cfg.runs = 1;
    const auto one = sweep_f(cfg, {0.1}, {VerificationPolicy::Sprt});
    REQUIRE(one.size() == 1);
    CHECK(one[0].runs == 1);
    CHECK(one[0].stderr_samples == 0.0);

    cfg.runs = 300;
    const auto a = sweep_f(cfg, {0.05, 0.2}, {VerificationPolicy::Sprt, VerificationPolicy::Ppr1v1});
    cfg.threads = 3;
    const auto b = sweep_f(cfg, {0.05, 0.2}, {VerificationPolicy::Sprt, VerificationPolicy::Ppr1v1});
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mean_samples == b[i].mean_samples);
        CHECK(a[i].error_rate == b[i].error_rate);
    }
    CHECK(a[0].f == 0.05);
    CHECK(a[1].policy == VerificationPolicy::Ppr1v1);
}

TEST_CASE("policy tokens") {
    for (const char* t : {"sprt", "ppr-1v1", "ppr-1vr", "ppr-adaptive"}) {
        CHECK(verification_policy_token(parse_verification_policy(t)) == t);
    }
    CHECK_THROWS_AS(parse_verification_policy("wald"), std::invalid_argument);
}
