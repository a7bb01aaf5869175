#include "modeest/instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace modeest {

DiscreteInstance::DiscreteInstance(std::vector<double> probs, std::vector<std::string> labels)
    : probs_(std::move(probs)), labels_(std::move(labels)) {
    const std::size_t k = probs_.size();
    if (k < 2) throw std::invalid_argument("DiscreteInstance: need at least 2 values");
    if (labels_.empty()) {
        for (std::size_t i = 0; i < k; ++i) labels_.push_back("v" + std::to_string(i + 1));
    }
    if (labels_.size() != k) throw std::invalid_argument("DiscreteInstance: label count mismatch");

    double sum = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("DiscreteInstance: probability outside [0, 1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("DiscreteInstance: probabilities sum to " +
                                    std::to_string(sum) + ", expected 1");
    }

    true_mode_ = static_cast<std::size_t>(
        std::distance(probs_.begin(), std::max_element(probs_.begin(), probs_.end())));
    for (std::size_t i = 0; i < k; ++i) {
        if (i != true_mode_ && probs_[i] == probs_[true_mode_]) {
            throw std::invalid_argument("DiscreteInstance: mode is not unique");
        }
    }

    cumulative_.resize(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += probs_[i];
        cumulative_[i] = acc;
    }
    // Pin the tail to exactly 1 from the last positive entry on.
    std::size_t last_positive = k - 1;
    while (probs_[last_positive] == 0.0) --last_positive;
    for (std::size_t i = last_positive; i < k; ++i) cumulative_[i] = 1.0;
}

double DiscreteInstance::p1() const { return probs_[true_mode_]; }

double DiscreteInstance::p2() const {
    double best = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
        if (i != true_mode_) best = std::max(best, probs_[i]);
    }
    return best;
}

std::vector<double> parse_probability_list(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        std::string token(text.substr(pos, comma - pos));
        token.erase(0, token.find_first_not_of(" \t"));
        token.erase(token.find_last_not_of(" \t") + 1);
        if (token.empty()) throw std::invalid_argument("empty entry in probability list");
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(token, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad probability '" + token + "'");
        }
        if (used != token.size()) throw std::invalid_argument("bad probability '" + token + "'");
        out.push_back(value);
        pos = comma + 1;
    }
    return out;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeededStream::SeededStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : master_seed_(master_seed),
      stream_index_(stream_index),
      engine_(mix64(master_seed ^ mix64(stream_index + 1))) {}

std::uint64_t SeededStream::uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

SeededStream derive_stream(std::uint64_t master_seed, std::uint64_t index) {
    return SeededStream(master_seed, index);
}

std::size_t sample(const DiscreteInstance& instance, SeededStream& rng) {
    const auto& cdf = instance.cumulative();
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::size_t>(std::distance(cdf.begin(), it));
}

TallyState::TallyState(std::size_t k) : counts(k, 0) {
    if (k < 2) throw std::invalid_argument("TallyState: need at least 2 values");
}

namespace {

// True when value idx outranks value other: more counts, or equal and lower index.
bool outranks(const TallyState& t, std::size_t idx, std::size_t other) {
    return t.counts[idx] > t.counts[other] ||
           (t.counts[idx] == t.counts[other] && idx < other);
}

}  // namespace

void tally_update(TallyState& tally, std::size_t idx) {
    if (idx >= tally.counts.size()) throw std::out_of_range("tally_update: index out of range");
    ++tally.counts[idx];
    ++tally.total;
    if (idx == tally.first) return;
    if (idx == tally.second) {
        if (outranks(tally, idx, tally.first)) std::swap(tally.first, tally.second);
        return;
    }
    if (!outranks(tally, idx, tally.second)) return;
    if (outranks(tally, idx, tally.first)) {
        tally.second = tally.first;
        tally.first = idx;
    } else {
        tally.second = idx;
    }
}

PairTally pair_tally(const TallyState& tally, std::size_t i, std::size_t j) {
    return {i, j, tally.counts[i], tally.counts[j]};
}

}  // namespace modeest
