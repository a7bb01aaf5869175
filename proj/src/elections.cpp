#include "modeest/elections.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <string_view>
#include <unordered_map>

namespace modeest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what) {
    throw ElectionDataError(source + ":" + std::to_string(line) + ": " + what);
}

struct RawSeat {
    std::string id;
    std::vector<std::size_t> parties;
    std::vector<std::uint64_t> votes;
    std::unordered_map<std::size_t, std::size_t> slot;
};

}  // namespace

std::vector<std::size_t> ElectionInstance::true_seats() const {
    std::vector<std::size_t> seats(parties.size(), 0);
    for (const Constituency& c : constituencies) ++seats[c.true_winner];
    return seats;
}

std::size_t ElectionInstance::seat_winner() const {
    const std::vector<std::size_t> seats = true_seats();
    if (seats.empty()) throw ElectionDataError("election has no parties");
    const auto best = std::max_element(seats.begin(), seats.end());
    if (std::count(seats.begin(), seats.end(), *best) != 1) {
        throw ElectionDataError("true seat counts are tied at the top");
    }
    return static_cast<std::size_t>(best - seats.begin());
}

ElectionInstance parse_election_csv(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3 || fields[0] != "constituency" || fields[1] != "party" ||
            fields[2] != "votes") {
            fail_at(source, line_no, "expected header 'constituency,party,votes'");
        }
        have_header = true;
    }
    if (!have_header) throw ElectionDataError(source + ": missing header");

    ElectionInstance instance;
    std::unordered_map<std::string, std::size_t> party_ids;
    std::unordered_map<std::string, std::size_t> seat_ids;
    std::vector<RawSeat> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3) fail_at(source, line_no, "expected 3 fields");
        if (fields[0].empty() || fields[1].empty()) fail_at(source, line_no, "empty identifier");
        std::uint64_t votes = 0;
        const auto [ptr, ec] =
            std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), votes);
        if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) {
            fail_at(source, line_no, "votes must be a non-negative integer, got '" +
                                         std::string(fields[2]) + "'");
        }
        const std::string seat_name(fields[0]);
        const std::string party_name(fields[1]);
        auto [pit, new_party] = party_ids.try_emplace(party_name, instance.parties.size());
        if (new_party) instance.parties.push_back(party_name);
        auto [sit, new_seat] = seat_ids.try_emplace(seat_name, raw.size());
        if (new_seat) raw.push_back(RawSeat{seat_name, {}, {}, {}});
        RawSeat& seat = raw[sit->second];
        auto [slot, new_slot] = seat.slot.try_emplace(pit->second, seat.parties.size());
        if (new_slot) {
            seat.parties.push_back(pit->second);
            seat.votes.push_back(votes);
        } else {
            seat.votes[slot->second] += votes;
        }
    }
    if (raw.empty()) throw ElectionDataError(source + ": no constituencies (C = 0)");

    instance.constituencies.reserve(raw.size());
    for (RawSeat& seat : raw) {
        if (seat.parties.size() < 2) {
            throw ElectionDataError(source + ": constituency '" + seat.id +
                                    "' lists fewer than two parties");
        }
        std::uint64_t total = 0;
        for (std::uint64_t v : seat.votes) total += v;
        if (total == 0) {
            throw ElectionDataError(source + ": constituency '" + seat.id + "' has no votes");
        }
        const auto top = std::max_element(seat.votes.begin(), seat.votes.end());
        if (std::count(seat.votes.begin(), seat.votes.end(), *top) != 1) {
            throw ElectionDataError(source + ": constituency '" + seat.id +
                                    "' has a tied winner");
        }
        std::vector<double> probs;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < seat.votes.size(); ++i) {
            probs.push_back(static_cast<double>(seat.votes[i]) / static_cast<double>(total));
            labels.push_back(instance.parties[seat.parties[i]]);
        }
        // Renormalize so the sum check in DiscreteInstance never trips on rounding.
        double sum = 0.0;
        for (double p : probs) sum += p;
        for (double& p : probs) p /= sum;
        const std::size_t local_winner = static_cast<std::size_t>(top - seat.votes.begin());
        instance.constituencies.push_back(Constituency{
            seat.id, std::move(seat.parties), std::move(seat.votes),
            DiscreteInstance(std::move(probs), std::move(labels)), 0});
        Constituency& c = instance.constituencies.back();
        c.true_winner = c.parties[local_winner];
    }
    return instance;
}

ElectionInstance load_election_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ElectionDataError("cannot open '" + path + "'");
    return parse_election_csv(in, path);
}

Policy parse_policy(const std::string& token) {
    if (token == "rr") return Policy::RoundRobin;
    if (token == "dcb") return Policy::Dcb;
    throw std::invalid_argument("unknown policy '" + token + "' (expected rr or dcb)");
}

std::string policy_token(Policy policy) {
    return policy == Policy::RoundRobin ? "rr" : "dcb";
}

ElectionState::ElectionState(const ElectionInstance& instance, const RuleConfig& rule,
                             double delta)
    : instance_(&instance), rule_(rule) {
    const std::string scheme = rule_scheme(rule);
    if (scheme != "1v1" && scheme != "1vr") {
        throw std::invalid_argument("election rules must use the 1v1 or 1vr scheme, got '" +
                                    rule_token(rule) + "'");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("mistake probability must lie in (0, 1)");
    }
    const std::size_t c_count = instance.seat_count();
    if (c_count == 0) throw std::invalid_argument("election has no constituencies");
    pairwise_ = scheme == "1v1";
    seat_delta_ = delta / static_cast<double>(c_count);

    const std::size_t k = instance.parties.size();
    wins_.assign(k, 0);
    losses_.assign(k, c_count);
    leads_.assign(k, 0);
    local_index_.resize(c_count);
    seats_.reserve(c_count);
    for (std::size_t c = 0; c < c_count; ++c) {
        const Constituency& seat = instance.constituencies[c];
        const std::size_t kc = seat.parties.size();
        local_index_[c].assign(k, std::nullopt);
        for (std::size_t i = 0; i < kc; ++i) {
            local_index_[c][seat.parties[i]] = i;
            --losses_[seat.parties[i]];  // a party that does not stand has lost the seat
        }
        SeatState state{ModeStopper(rule, kc, seat_delta_), std::nullopt, std::nullopt, 0,
                        std::nullopt, std::nullopt, {}, false};
        state.engine.emplace(pairwise_ ? make_1v1_engine(rule.engine, kc, seat_delta_)
                                       : make_1vr_engine(rule.engine, kc, seat_delta_));
        seats_.push_back(std::move(state));
    }
}

std::uint64_t ElectionState::party_ucb(std::size_t party) const {
    return static_cast<std::uint64_t>(seats_.size()) - losses_[party];
}

std::optional<std::size_t> ElectionState::local_index(std::size_t seat, std::size_t party) const {
    return local_index_[seat][party];
}

bool ElectionState::in_contention(std::size_t seat, std::size_t party) const {
    return seats_[seat].open() && local_index_[seat][party].has_value();
}

void ElectionState::sample_seat(std::size_t seat, std::uint64_t count, SeededStream& rng) {
    SeatState& state = seats_[seat];
    if (!state.open()) return;
    const Constituency& c = instance_->constituencies[seat];
    for (std::uint64_t n = 0; n < count; ++n) state.stopper.observe(sample(c.distribution, rng));
    state.samples += count;
    total_samples_ += count;
    state.c1_cache.reset();
    state.c2_cache.reset();
    state.rest_valid = false;
    const Verdict verdict = state.stopper.check();
    if (!verdict.is_declare()) return;
    const std::size_t winner = c.parties[verdict.index()];
    state.winner = winner;
    ++seats_resolved_;
    ++wins_[winner];
    for (std::size_t party : c.parties) {
        if (party != winner) ++losses_[party];
    }
}

void ElectionState::recompute_leads() {
    std::fill(leads_.begin(), leads_.end(), 0);
    for (std::size_t c = 0; c < seats_.size(); ++c) {
        const SeatState& state = seats_[c];
        if (!state.open() || state.samples == 0) continue;
        ++leads_[instance_->constituencies[c].parties[state.stopper.tally().first]];
    }
}

std::size_t ElectionState::rr_select() {
    const std::size_t c_count = seats_.size();
    for (std::size_t step = 0; step < c_count; ++step) {
        const std::size_t c = (rr_next_ + step) % c_count;
        if (seats_[c].open()) {
            rr_next_ = (c + 1) % c_count;
            return c;
        }
    }
    throw std::logic_error("rr_select: no open constituency");
}

const std::vector<Interval>& ElectionState::rest_intervals(std::size_t seat) {
    SeatState& state = seats_[seat];
    if (!state.rest_valid) {
        const TallyState& tally = state.stopper.tally();
        state.rest_intervals.clear();
        for (std::uint64_t s : tally.counts) {
            state.rest_intervals.push_back(state.engine->interval(s, tally.total));
        }
        state.rest_valid = true;
    }
    return state.rest_intervals;
}

double ElectionState::c1_score(std::size_t seat, std::size_t party) {
    SeatState& state = seats_[seat];
    if (state.c1_cache && state.c1_cache->first == party) return state.c1_cache->second;
    const std::size_t a = local_index_[seat][party].value();
    const TallyState& tally = state.stopper.tally();
    double score = std::numeric_limits<double>::infinity();
    if (pairwise_) {
        for (std::size_t j = 0; j < tally.size(); ++j) {
            if (j == a) continue;
            const Interval iv =
                state.engine->interval(tally.counts[a], tally.counts[a] + tally.counts[j]);
            score = std::min(score, iv.hi - iv.lo);
        }
    } else {
        const auto& iv = rest_intervals(seat);
        for (std::size_t j = 0; j < iv.size(); ++j) {
            if (j == a) continue;
            score = std::min(score, iv[a].hi - iv[j].lo);
        }
    }
    state.c1_cache.emplace(party, score);
    return score;
}

double ElectionState::c2_score(std::size_t seat, std::size_t party) {
    SeatState& state = seats_[seat];
    if (state.c2_cache && state.c2_cache->first == party) return state.c2_cache->second;
    const std::size_t b = local_index_[seat][party].value();
    const TallyState& tally = state.stopper.tally();
    double score = -std::numeric_limits<double>::infinity();
    if (pairwise_) {
        for (std::size_t j = 0; j < tally.size(); ++j) {
            if (j == b) continue;
            const Interval iv =
                state.engine->interval(tally.counts[j], tally.counts[j] + tally.counts[b]);
            score = std::max(score, iv.hi - iv.lo);
        }
    } else {
        const auto& iv = rest_intervals(seat);
        for (std::size_t j = 0; j < iv.size(); ++j) {
            if (j == b) continue;
            score = std::max(score, iv[j].hi - iv[b].lo);
        }
    }
    state.c2_cache.emplace(party, score);
    return score;
}

std::size_t rr_select(ElectionState& state) { return state.rr_select(); }

DcbChoice dcb_select(ElectionState& state) {
    const std::size_t k = state.wins().size();
    DcbChoice choice;
    for (std::size_t i = 1; i < k; ++i) {
        if (state.wins()[i] + state.leads()[i] >
            state.wins()[choice.contender_a] + state.leads()[choice.contender_a]) {
            choice.contender_a = i;
        }
    }
    std::optional<std::size_t> b;
    for (std::size_t i = 0; i < k; ++i) {
        if (i == choice.contender_a) continue;
        if (!b || state.party_ucb(i) > state.party_ucb(*b)) b = i;
    }
    choice.contender_b = b.value_or(choice.contender_a);

    auto pick = [&](std::size_t party, bool first_slot) {
        std::optional<std::size_t> best;
        double best_score = 0.0;
        for (std::size_t c = 0; c < state.seats().size(); ++c) {
            if (!state.in_contention(c, party)) continue;
            const double score = first_slot ? state.c1_score(c, party) : state.c2_score(c, party);
            if (!best || score > best_score) {
                best = c;
                best_score = score;
            }
        }
        return best ? *best : state.rr_select();
    };
    choice.c1 = pick(choice.contender_a, true);
    choice.c2 = pick(choice.contender_b, false);
    return choice;
}

void election_step(ElectionState& state, Policy policy, std::uint64_t batch, SeededStream& rng) {
    if (batch == 0) throw std::invalid_argument("batch must be >= 1");
    if (policy == Policy::RoundRobin) {
        state.sample_seat(state.rr_select(), batch, rng);
    } else {
        const DcbChoice choice = dcb_select(state);
        state.sample_seat(choice.c1, batch, rng);
        if (choice.c2 != choice.c1) state.sample_seat(choice.c2, batch, rng);
    }
    state.recompute_leads();
}

Verdict aggregate_check(const ElectionState& state) {
    const std::size_t k = state.wins().size();
    for (std::size_t i = 0; i < k; ++i) {
        bool ahead = true;
        for (std::size_t j = 0; j < k && ahead; ++j) {
            if (j != i) ahead = state.party_lcb(i) > state.party_ucb(j);
        }
        if (ahead) return Verdict::declare(i);
    }
    return Verdict::proceed();
}

ElectionRecord run_election(const ElectionInstance& instance, Policy policy, const RuleConfig& rule,
                            double delta, std::uint64_t batch, SeededStream& rng,
                            std::uint64_t sample_cap) {
    ElectionState state(instance, rule, delta);
    ElectionRecord record;
    record.seed = rng.stream_index();
    Verdict verdict = aggregate_check(state);
    while (!verdict.is_declare()) {
        if (state.total_samples() >= sample_cap) {
            throw SampleCapExceeded("run_election: no winner within " +
                                    std::to_string(sample_cap) + " samples");
        }
        if (state.open_seats() == 0) {
            // Every seat is resolved yet no party is strictly ahead: a seat tie.
            throw std::runtime_error("run_election: all seats resolved without a strict winner");
        }
        election_step(state, policy, batch, rng);
        verdict = aggregate_check(state);
    }
    record.samples = state.total_samples();
    record.winner = verdict.index();
    record.seats_resolved = state.seats_resolved();
    record.correct = record.winner == instance.seat_winner();
    return record;
}

}  // namespace modeest
