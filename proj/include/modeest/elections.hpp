#pragma once
// Winner forecasting for indirect (seat-based) elections: per-constituency
// mode estimation driven by round-robin or DCB constituency selection, with
// the overall winner declared from seat-count confidence bounds.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "modeest/instances.hpp"
#include "modeest/stopping.hpp"

namespace modeest {

class ElectionDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Constituency {
    std::string id;
    std::vector<std::size_t> parties;  // global party indices contesting this seat
    std::vector<std::uint64_t> votes;  // aligned with parties
    DiscreteInstance distribution;     // normalized votes over the local parties
    std::size_t true_winner = 0;       // global party index
};

struct ElectionInstance {
    std::vector<std::string> parties;
    std::vector<Constituency> constituencies;

    std::size_t seat_count() const { return constituencies.size(); }
    std::vector<std::size_t> true_seats() const;
    // Party with the strict maximum true seat count; throws on a tie.
    std::size_t seat_winner() const;
};

// CSV with header `constituency,party,votes`. Duplicate (constituency, party)
// rows are summed. Throws ElectionDataError with a line number on malformed
// rows, and on empty files, single-party seats or tied seats.
ElectionInstance parse_election_csv(std::istream& in, const std::string& source = "<stream>");
ElectionInstance load_election_csv(const std::string& path);

enum class Policy { RoundRobin, Dcb };
Policy parse_policy(const std::string& token);
std::string policy_token(Policy policy);

struct SeatState {
    ModeStopper stopper;
    std::optional<BoundEngine> engine;  // intervals for DCB scores
    std::optional<std::size_t> winner;  // global party index once resolved
    std::uint64_t samples = 0;
    // DCB score caches, cleared whenever the seat is sampled.
    std::optional<std::pair<std::size_t, double>> c1_cache;
    std::optional<std::pair<std::size_t, double>> c2_cache;
    std::vector<Interval> rest_intervals;  // 1vr per-party intervals, when valid
    bool rest_valid = false;

    bool open() const { return !winner.has_value(); }
};

class ElectionState {
public:
    // Each seat runs `rule` (1v1 or 1vr scheme) with mistake probability δ/C.
    ElectionState(const ElectionInstance& instance, const RuleConfig& rule, double delta);

    const ElectionInstance& instance() const { return *instance_; }
    const RuleConfig& rule() const { return rule_; }
    bool pairwise() const { return pairwise_; }
    double seat_delta() const { return seat_delta_; }

    const std::vector<SeatState>& seats() const { return seats_; }
    const std::vector<std::uint64_t>& wins() const { return wins_; }
    const std::vector<std::uint64_t>& losses() const { return losses_; }
    const std::vector<std::uint64_t>& leads() const { return leads_; }
    std::uint64_t total_samples() const { return total_samples_; }
    std::size_t seats_resolved() const { return seats_resolved_; }
    std::size_t open_seats() const { return seats_.size() - seats_resolved_; }

    std::uint64_t party_lcb(std::size_t party) const { return wins_[party]; }
    std::uint64_t party_ucb(std::size_t party) const;

    // Local index of a global party in a seat, if it contests it.
    std::optional<std::size_t> local_index(std::size_t seat, std::size_t party) const;
    bool in_contention(std::size_t seat, std::size_t party) const;

    // Draws `count` voters from the seat, runs its stopping check and, on a
    // declaration, books the win and the losses.
    void sample_seat(std::size_t seat, std::uint64_t count, SeededStream& rng);
    void recompute_leads();

    // Next open seat in index order after the previous round-robin pick.
    std::size_t rr_select();

    // DCB scores of a seat for contender a (c1) or b (c2); see dcb_select.
    double c1_score(std::size_t seat, std::size_t party);
    double c2_score(std::size_t seat, std::size_t party);

private:
    const std::vector<Interval>& rest_intervals(std::size_t seat);

    const ElectionInstance* instance_;
    RuleConfig rule_;
    bool pairwise_;
    double seat_delta_;
    std::vector<SeatState> seats_;
    std::vector<std::vector<std::optional<std::size_t>>> local_index_;
    std::vector<std::uint64_t> wins_;
    std::vector<std::uint64_t> losses_;
    std::vector<std::uint64_t> leads_;
    std::uint64_t total_samples_ = 0;
    std::size_t seats_resolved_ = 0;
    std::size_t rr_next_ = 0;
};

std::size_t rr_select(ElectionState& state);

struct DcbChoice {
    std::size_t contender_a = 0;
    std::size_t contender_b = 0;
    std::size_t c1 = 0;
    std::size_t c2 = 0;
};

// a = argmax(wins + leads), b = argmax_{i != a} UCB_i. Among open seats
// contested by a, c1 maximizes
//   1v1: min_{j != a} [UCB(c, a, j) - LCB(c, a, j)]
//   1vr: min_{j != a} [UCB(c, a) - LCB(c, j)]
// and among open seats contested by b, c2 maximizes
//   1v1: max_{j != b} [UCB(c, j, b) - LCB(c, j, b)]
//   1vr: max_{j != b} [UCB(c, j) - LCB(c, b)].
// Ties go to the lowest index. A contender with no seat in contention gets a
// round-robin pick instead.
DcbChoice dcb_select(ElectionState& state);

void election_step(ElectionState& state, Policy policy, std::uint64_t batch, SeededStream& rng);

// Declare(i) iff wins_i > C - losses_j for every j != i.
Verdict aggregate_check(const ElectionState& state);

struct ElectionRecord {
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    std::size_t winner = 0;
    std::size_t seats_resolved = 0;
    bool correct = false;
};

ElectionRecord run_election(const ElectionInstance& instance, Policy policy, const RuleConfig& rule,
                            double delta, std::uint64_t batch, SeededStream& rng,
                            std::uint64_t sample_cap = kDefaultSampleCap);

}  // namespace modeest
