#include "doctest.h"

#include <algorithm>
#include <limits>
#include <sstream>

#include "modeest/elections.hpp"

using namespace modeest;

namespace {

ElectionInstance from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_election_csv(in, "test.csv");
}

std::string error_of(const std::string& text) {
    try {
        from_text(text);
    } catch (const ElectionDataError& e) {
        return e.what();
    }
    return "";
}

// DCB selection recomputed from scratch on a state snapshot.
DcbChoice reference_dcb(const ElectionState& s, double delta) {
    const auto& inst = s.instance();
    const std::size_t k = inst.parties.size();
    const std::size_t c_count = inst.seat_count();
    std::vector<long> wins(k, 0), losses(k, 0), leads(k, 0);
    for (std::size_t c = 0; c < c_count; ++c) {
        const auto& seat = inst.constituencies[c];
        for (std::size_t p = 0; p < k; ++p) {
            if (std::find(seat.parties.begin(), seat.parties.end(), p) == seat.parties.end()) {
                ++losses[p];
            }
        }
        const auto& st = s.seats()[c];
        if (st.winner) {
            ++wins[*st.winner];
            for (std::size_t p : seat.parties) {
                if (p != *st.winner) ++losses[p];
            }
        } else if (st.stopper.tally().total > 0) {
            const auto& counts = st.stopper.tally().counts;
            const auto top = std::max_element(counts.begin(), counts.end()) - counts.begin();
            ++leads[seat.parties[top]];
        }
    }
    DcbChoice out;
    long best = -1;
    for (std::size_t i = 0; i < k; ++i) {
        if (wins[i] + leads[i] > best) {
            best = wins[i] + leads[i];
            out.contender_a = i;
        }
    }
    long best_ucb = -1;
    for (std::size_t i = 0; i < k; ++i) {
        if (i == out.contender_a) continue;
        const long ucb = static_cast<long>(c_count) - losses[i];
        if (ucb > best_ucb) {
            best_ucb = ucb;
            out.contender_b = i;
        }
    }
    const bool pairwise = s.pairwise();
    auto score = [&](std::size_t c, std::size_t party, bool first_slot) {
        const auto& seat = inst.constituencies[c];
        const std::size_t kc = seat.parties.size();
        const double alpha = delta / c_count / (pairwise ? kc - 1 : kc);
        const BoundEngine engine(s.rule().engine, alpha);
        const auto& counts = s.seats()[c].stopper.tally().counts;
        const std::uint64_t t = s.seats()[c].stopper.tally().total;
        const std::size_t me =
            std::find(seat.parties.begin(), seat.parties.end(), party) - seat.parties.begin();
        double v = first_slot ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < kc; ++j) {
            if (j == me) continue;
            double d;
            if (first_slot) {
                d = pairwise ? engine.interval(counts[me], counts[me] + counts[j]).width()
                             : engine.upper(counts[me], t) - engine.lower(counts[j], t);
                v = std::min(v, d);
            } else {
                d = pairwise ? engine.interval(counts[j], counts[j] + counts[me]).width()
                             : engine.upper(counts[j], t) - engine.lower(counts[me], t);
                v = std::max(v, d);
            }
        }
        return v;
    };
    auto pick = [&](std::size_t party, bool first_slot) -> std::optional<std::size_t> {
        std::optional<std::size_t> arg;
        double best_score = 0.0;
        for (std::size_t c = 0; c < c_count; ++c) {
            const auto& seat = inst.constituencies[c];
            if (s.seats()[c].winner) continue;
            if (std::find(seat.parties.begin(), seat.parties.end(), party) == seat.parties.end()) {
                continue;
            }
            const double v = score(c, party, first_slot);
            if (!arg || v > best_score) {
                arg = c;
                best_score = v;
            }
        }
        return arg;
    };
    out.c1 = pick(out.contender_a, true).value_or(SIZE_MAX);
    out.c2 = pick(out.contender_b, false).value_or(SIZE_MAX);
    return out;
}

const char* kThreeSeats =
    "constituency,party,votes\n"
    "x,A,100\nx,B,0\n"
    "y,A,0\ny,B,100\n"
    "z,A,55\nz,B,45\n";

}  // namespace

TEST_CASE("load_election_csv basics") {
    const ElectionInstance one = from_text("constituency,party,votes\nc1,A,60\nc1,B,40\n");
    REQUIRE(one.seat_count() == 1);
    CHECK(one.parties == std::vector<std::string>{"A", "B"});
    CHECK(one.parties[one.constituencies[0].true_winner] == "A");

    const ElectionInstance dup =
        from_text("constituency,party,votes\nc1,A,30\nc1,B,40\nc1,A,30\n");
    CHECK(dup.constituencies[0].votes == std::vector<std::uint64_t>{60, 40});
    CHECK(dup.parties[dup.constituencies[0].true_winner] == "A");
}

TEST_CASE("load_election_csv errors") {
    CHECK(error_of("constituency,party,votes\n").find("C = 0") != std::string::npos);
    CHECK(error_of("constituency,party,votes\nc1,A,50\nc1,B,50\n").find("'c1'") !=
          std::string::npos);
    CHECK(error_of("constituency,party,votes\nc1,A,50\nc1,B,x\n").find("test.csv:3") !=
          std::string::npos);
    CHECK(error_of("constituency,party,votes\nc1,A,50\nc1,B\n").find("test.csv:3") !=
          std::string::npos);
    CHECK(error_of("seat,party,votes\n").find("header") != std::string::npos);
    CHECK_THROWS_AS(load_election_csv("/nonexistent/file.csv"), ElectionDataError);
}

TEST_CASE("bundled synthetic instance loads") {
    const ElectionInstance inst = load_election_csv(MODEEST_DATA_DIR "/synthetic_50.csv");
    CHECK(inst.seat_count() == 50);
    CHECK(inst.parties.size() == 4);
    CHECK(inst.parties[inst.seat_winner()] == "A");
}

TEST_CASE("rr_select cycles over open seats") {
    const ElectionInstance inst = from_text(kThreeSeats);
    ElectionState s(inst, parse_rule("ppr-1v1"), 0.01);
    std::vector<std::size_t> seq;
    for (int i = 0; i < 4; ++i) seq.push_back(rr_select(s));
    CHECK(seq == std::vector<std::size_t>{0, 1, 2, 0});

    SeededStream rng(1, 0);
    s.sample_seat(1, 200, rng);  // point mass, resolves
    REQUIRE_FALSE(s.seats()[1].open());
    seq.clear();
    for (int i = 0; i < 4; ++i) seq.push_back(rr_select(s));
    CHECK(seq == std::vector<std::size_t>{2, 0, 2, 0});

    s.sample_seat(0, 200, rng);
    for (int i = 0; i < 3; ++i) CHECK(rr_select(s) == 2);
}

TEST_CASE("resolving a seat books one win and K - 1 losses") {
    const ElectionInstance inst = from_text(
        "constituency,party,votes\nx,A,100\nx,B,0\nx,C,0\ny,A,10\ny,B,20\ny,C,5\n");
    ElectionState s(inst, parse_rule("ppr-1v1"), 0.01);
    SeededStream rng(1, 0);
    s.sample_seat(0, 200, rng);
    CHECK(s.wins() == std::vector<std::uint64_t>{1, 0, 0});
    CHECK(s.losses() == std::vector<std::uint64_t>{0, 1, 1});
    CHECK(s.seats_resolved() == 1);
}

TEST_CASE("aggregate_check") {
    const ElectionInstance inst = from_text(kThreeSeats);
    ElectionState s(inst, parse_rule("ppr-1v1"), 0.01);
    CHECK_FALSE(aggregate_check(s).is_declare());
    SeededStream rng(1, 0);
    s.sample_seat(0, 200, rng);
    CHECK_FALSE(aggregate_check(s).is_declare());

    // Two wins for A against C = 3: A needs wins_A > C - losses_B = 1.
    const ElectionInstance two = from_text(
        "constituency,party,votes\nx,A,100\nx,B,0\ny,A,100\ny,B,0\nz,A,50\nz,B,49\n");
    ElectionState t(two, parse_rule("ppr-1v1"), 0.01);
    t.sample_seat(0, 200, rng);
    t.sample_seat(1, 200, rng);
    CHECK(t.wins()[0] == 2);
    CHECK(t.losses()[1] == 2);
    CHECK(aggregate_check(t) == Verdict::declare(0));
    CHECK(t.seats_resolved() < two.seat_count());
}

TEST_CASE("DCB on a single seat reduces to plain mode estimation") {
    const ElectionInstance inst = from_text("constituency,party,votes\nc,A,60\nc,B,40\n");
    ElectionState s(inst, parse_rule("ppr-1v1"), 0.01);
    const DcbChoice d = dcb_select(s);
    CHECK(d.c1 == 0);
    CHECK(d.c2 == 0);

    for (Policy policy : {Policy::Dcb, Policy::RoundRobin}) {
        for (std::uint64_t i = 0; i < 10; ++i) {
            SeededStream a = derive_stream(9, i);
            SeededStream b = derive_stream(9, i);
            const ElectionRecord e = run_election(inst, policy, parse_rule("ppr-1v1"), 0.01, 1, a);
            const TrialRecord m =
                run_mode_estimation(inst.constituencies[0].distribution, parse_rule("ppr-1v1"), 0.01, b);
            CHECK(e.samples == m.samples);
            CHECK(e.winner == inst.constituencies[0].parties[m.declared]);
        }
    }
}

TEST_CASE("DCB picks the last seat where the leader is in contention") {
    const ElectionInstance inst = from_text(kThreeSeats);
    ElectionState s(inst, parse_rule("ppr-1v1"), 0.01);
    SeededStream rng(2, 0);
    s.sample_seat(0, 200, rng);
    s.sample_seat(1, 200, rng);
    s.recompute_leads();
    CHECK(dcb_select(s).c1 == 2);
}

TEST_CASE("DCB selections match a straight-line reimplementation") {
    const ElectionInstance inst = from_text(
        "constituency,party,votes\n"
        "x,A,520\nx,B,480\n"
        "y,A,450\ny,B,550\n"
        "z,A,700\nz,B,300\n");
    for (const char* token : {"ppr-1v1", "ppr-1vr", "kl-sn-1v1", "a1-1vr"}) {
        ElectionState s(inst, parse_rule(token), 0.05);
        SeededStream rng(77, 0);
        int steps = 0;
        while (!aggregate_check(s).is_declare() && s.open_seats() > 0 && steps < 5000) {
            const DcbChoice ref = reference_dcb(s, 0.05);
            const DcbChoice got = dcb_select(s);
            REQUIRE(got.contender_a == ref.contender_a);
            REQUIRE(got.contender_b == ref.contender_b);
            if (ref.c1 != SIZE_MAX) REQUIRE(got.c1 == ref.c1);
            if (ref.c2 != SIZE_MAX) REQUIRE(got.c2 == ref.c2);
            s.sample_seat(got.c1, 20, rng);
            if (got.c2 != got.c1) s.sample_seat(got.c2, 20, rng);
            s.recompute_leads();
            ++steps;
        }
        CHECK(aggregate_check(s).is_declare());
    }
}

TEST_CASE("accounting identities hold after every step") {
    const ElectionInstance inst = load_election_csv(MODEEST_DATA_DIR "/synthetic_50.csv");
    for (Policy policy : {Policy::RoundRobin, Policy::Dcb}) {
        for (const char* token : {"ppr-1v1", "kl-sn-1vr"}) {
            ElectionState s(inst, parse_rule(token), 0.01);
            SeededStream rng(3, 1);
            while (!aggregate_check(s).is_declare()) {
                const auto wins_before = s.wins();
                const auto losses_before = s.losses();
                std::vector<bool> open_before;
                for (const auto& seat : s.seats()) open_before.push_back(seat.open());
                election_step(s, policy, 200, rng);
                const std::uint64_t c = inst.seat_count();
                std::uint64_t win_sum = 0, lead_sum = 0, sampled_open = 0;
                std::uint64_t new_wins = 0, new_losses = 0;
                for (std::size_t p = 0; p < inst.parties.size(); ++p) {
                    REQUIRE(s.wins()[p] + s.losses()[p] <= c);
                    REQUIRE(s.party_lcb(p) == s.wins()[p]);
                    REQUIRE(s.party_ucb(p) == c - s.losses()[p]);
                    win_sum += s.wins()[p];
                    lead_sum += s.leads()[p];
                    new_wins += s.wins()[p] - wins_before[p];
                    new_losses += s.losses()[p] - losses_before[p];
                }
                std::uint64_t resolved_now = 0, expected_losses = 0;
                for (std::size_t i = 0; i < s.seats().size(); ++i) {
                    const auto& seat = s.seats()[i];
                    if (seat.open() && seat.samples > 0) ++sampled_open;
                    if (open_before[i] && !seat.open()) {
                        ++resolved_now;
                        expected_losses += inst.constituencies[i].parties.size() - 1;
                    }
                }
                REQUIRE(win_sum <= c);
                REQUIRE(lead_sum == sampled_open);
                REQUIRE(new_wins == resolved_now);
                REQUIRE(new_losses == expected_losses);
            }
        }
    }
}

TEST_CASE("declared winner is correct on small synthetic elections") {
    const ElectionInstance inst = from_text(
        "constituency,party,votes\n"
        "a,P,60\na,Q,40\n"
        "b,P,55\nb,Q,45\n"
        "c,P,40\nc,Q,60\n"
        "d,P,58\nd,Q,42\nd,R,10\n"
        "e,P,30\ne,Q,25\ne,R,45\n");
    int mistakes = 0;
    for (Policy policy : {Policy::RoundRobin, Policy::Dcb}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SeededStream rng = derive_stream(100, seed);
            const ElectionRecord r = run_election(inst, policy, parse_rule("ppr-1v1"), 0.1, 50, rng);
            if (!r.correct) ++mistakes;
            CHECK(r.seats_resolved <= inst.seat_count());
        }
    }
    CHECK(mistakes <= 4);  // 40 runs at δ = 0.1
}

TEST_CASE("election rules must be 1v1 or 1vr") {
    const ElectionInstance inst = from_text(kThreeSeats);
    CHECK_THROWS_AS(ElectionState(inst, parse_rule("ppr-md"), 0.01), std::invalid_argument);
    CHECK_THROWS_AS(parse_policy("greedy"), std::invalid_argument);
}
