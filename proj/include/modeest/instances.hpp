#pragma once
// Problem instances, seeded random streams and the O(1) tally that every
// stopping rule reads.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace modeest {

// A K-valued distribution with a strict unique mode.
class DiscreteInstance {
public:
    explicit DiscreteInstance(std::vector<double> probs, std::vector<std::string> labels = {});

    std::size_t size() const { return probs_.size(); }
    const std::vector<double>& probs() const { return probs_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<double>& cumulative() const { return cumulative_; }
    std::size_t true_mode() const { return true_mode_; }
    // Largest and second-largest probabilities.
    double p1() const;
    double p2() const;

private:
    std::vector<double> probs_;
    std::vector<std::string> labels_;
    std::vector<double> cumulative_;
    std::size_t true_mode_ = 0;
};

// Parses "0.5,0.25,0.25". Throws std::invalid_argument on malformed input.
std::vector<double> parse_probability_list(std::string_view text);

// splitmix64 finalizer; the only mixing function used for stream derivation.
std::uint64_t mix64(std::uint64_t x);

// A reproducible random stream. The engine is std::mt19937_64 (fully specified
// by the standard) seeded with mix64(master_seed ^ mix64(stream_index + 1)).
// Uniform variates are built from raw 64-bit outputs, never from <random>
// distributions, so draw sequences are bit-identical across platforms.
class SeededStream {
public:
    SeededStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64() { return engine_(); }
    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Uniform on {0, ..., n - 1} by rejection; n >= 1.
    std::uint64_t uniform_below(std::uint64_t n);

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 engine_;
};

SeededStream derive_stream(std::uint64_t master_seed, std::uint64_t index);

// Inverse-CDF draw; never returns an index with zero probability.
std::size_t sample(const DiscreteInstance& instance, SeededStream& rng);

// Counts with the top-two indices maintained incrementally. Ties go to the
// lowest index.
struct TallyState {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    std::size_t first = 0;
    std::size_t second = 1;

    explicit TallyState(std::size_t k);
    std::size_t size() const { return counts.size(); }
};

void tally_update(TallyState& tally, std::size_t idx);

// Head-to-head counts for an ordered pair of values.
struct PairTally {
    std::size_t i = 0;
    std::size_t j = 0;
    std::uint64_t wins_i = 0;
    std::uint64_t wins_j = 0;

    std::uint64_t pair_total() const { return wins_i + wins_j; }
};

PairTally pair_tally(const TallyState& tally, std::size_t i, std::size_t j);

}  // namespace modeest
