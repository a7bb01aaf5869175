#include "modeest/blockchain.hpp"

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "modeest/harness.hpp"

namespace modeest {

NodePool::NodePool(std::size_t nodes, std::size_t batch, double byzantine_fraction,
                   std::size_t answers)
    : nodes_(nodes), batch_(batch), f_(byzantine_fraction), answers_(answers) {
    if (nodes == 0 || nodes > UINT32_MAX) throw std::invalid_argument("node count out of range");
    if (batch == 0 || batch > nodes) throw std::invalid_argument("need 1 <= m <= N");
    if (!(byzantine_fraction >= 0.0 && byzantine_fraction < 0.5)) {
        throw std::invalid_argument("Byzantine fraction must lie in [0, 1/2)");
    }
    if (answers < 2) throw std::invalid_argument("need at least two answers");
    // Small slack so that e.g. 0.3 * 1600 does not round down to 479.
    byzantine_ = static_cast<std::size_t>(std::floor(f_ * static_cast<double>(nodes) + 1e-9));
}

std::size_t NodePool::answer_of(std::size_t node) const {
    if (node >= byzantine_) return 0;
    return 1 + node % (answers_ - 1);
}

BatchDrawer::BatchDrawer(const NodePool& pool) : pool_(&pool), order_(pool.nodes()) {
    std::iota(order_.begin(), order_.end(), 0u);
}

void BatchDrawer::reset() { std::iota(order_.begin(), order_.end(), 0u); }

Batch BatchDrawer::draw(SeededStream& rng) {
    Batch batch;
    batch.counts.assign(pool_->answers(), 0);
    batch.reports.reserve(pool_->batch());
    const std::size_t n = order_.size();
    for (std::size_t i = 0; i < pool_->batch(); ++i) {
        const std::size_t j = i + rng.uniform_below(n - i);
        std::swap(order_[i], order_[j]);
        const std::size_t answer = pool_->answer_of(order_[i]);
        batch.reports.push_back(answer);
        ++batch.counts[answer];
    }
    return batch;
}

Batch draw_batch(const NodePool& pool, SeededStream& rng) { return BatchDrawer(pool).draw(rng); }

double sprt_threshold(double delta, std::size_t nodes, std::size_t batch, double f_max) {
    if (!(f_max > 0.0 && f_max < 0.5)) throw std::domain_error("f_max must lie in (0, 1/2)");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("delta must lie in (0, 1)");
    if (batch == 0 || batch > nodes) throw std::domain_error("need 1 <= m <= N");
    const double q = static_cast<double>(batch) / static_cast<double>(nodes);
    return std::log((1.0 - delta) / delta) * 2.0 * q * (1.0 - q) * static_cast<double>(nodes) *
           (1.0 - f_max) * f_max / (1.0 - 2.0 * f_max);
}

SprtState::SprtState(std::size_t answers, std::size_t batch, double threshold)
    : l_(answers, 0), m_(static_cast<std::int64_t>(batch)), threshold_(threshold) {}

Verdict SprtState::step(const std::vector<std::uint64_t>& counts) {
    if (counts.size() != l_.size()) throw std::invalid_argument("SPRT: answer count mismatch");
    std::uint64_t sum = 0;
    for (std::uint64_t c : counts) sum += c;
    if (static_cast<std::int64_t>(sum) != m_) throw std::invalid_argument("SPRT: counts must sum to m");
    ++steps_;
    for (std::size_t i = 0; i < l_.size(); ++i) {
        l_[i] += (2 * static_cast<std::int64_t>(counts[i]) - m_) * m_;
    }
    for (std::size_t i = 0; i < l_.size(); ++i) {
        if (static_cast<double>(l_[i]) > threshold_) return Verdict::declare(i);
    }
    return Verdict::proceed();
}

Verdict sprt_step(SprtState& state, const std::vector<std::uint64_t>& counts) {
    return state.step(counts);
}

VerificationPolicy parse_verification_policy(const std::string& token) {
    if (token == "sprt") return VerificationPolicy::Sprt;
    if (token == "ppr-1v1") return VerificationPolicy::Ppr1v1;
    if (token == "ppr-1vr") return VerificationPolicy::Ppr1vr;
    if (token == "ppr-adaptive") return VerificationPolicy::PprAdaptive;
    throw std::invalid_argument("unknown verification policy '" + token + "'");
}

std::string verification_policy_token(VerificationPolicy policy) {
    switch (policy) {
        case VerificationPolicy::Sprt: return "sprt";
        case VerificationPolicy::Ppr1v1: return "ppr-1v1";
        case VerificationPolicy::Ppr1vr: return "ppr-1vr";
        case VerificationPolicy::PprAdaptive: return "ppr-adaptive";
    }
    return "?";
}

VerificationRecord run_verification(const NodePool& pool, VerificationPolicy policy, double delta,
                                    double f_max, SeededStream& rng, std::uint64_t sample_cap) {
    BatchDrawer drawer(pool);
    return run_verification(pool, drawer, policy, delta, f_max, rng, sample_cap);
}

VerificationRecord run_verification(const NodePool& pool, BatchDrawer& drawer,
                                    VerificationPolicy policy, double delta, double f_max,
                                    SeededStream& rng, std::uint64_t sample_cap) {
    VerificationRecord record;
    drawer.reset();
    std::optional<SprtState> sprt;
    std::optional<ModeStopper> stopper;
    switch (policy) {
        case VerificationPolicy::Sprt:
            sprt.emplace(pool.answers(), pool.batch(),
                         sprt_threshold(delta, pool.nodes(), pool.batch(), f_max));
            break;
        case VerificationPolicy::Ppr1v1:
            stopper.emplace(parse_rule("ppr-1v1"), pool.answers(), delta);
            break;
        case VerificationPolicy::Ppr1vr:
            stopper.emplace(parse_rule("ppr-1vr"), pool.answers(), delta);
            break;
        case VerificationPolicy::PprAdaptive:
            stopper.emplace(parse_rule("ppr-adaptive"), pool.answers(), delta);
            break;
    }
    while (true) {
        if (record.samples >= sample_cap) {
            throw SampleCapExceeded("run_verification: policy " +
                                    verification_policy_token(policy) + " did not stop within " +
                                    std::to_string(sample_cap) + " samples");
        }
        const Batch batch = drawer.draw(rng);
        record.samples += pool.batch();
        Verdict verdict = Verdict::proceed();
        if (sprt) {
            verdict = sprt->step(batch.counts);
        } else {
            for (std::size_t answer : batch.reports) stopper->observe(answer);
            verdict = stopper->check();
        }
        if (verdict.is_declare()) {
            record.declared = verdict.index();
            break;
        }
    }
    record.correct = record.declared == 0;
    return record;
}

std::vector<SweepRow> sweep_f(const SweepConfig& config, const std::vector<double>& f_values,
                              const std::vector<VerificationPolicy>& policies) {
    if (config.runs == 0) throw std::invalid_argument("sweep_f: runs must be >= 1");
    std::vector<SweepRow> rows;
    for (double f : f_values) {
        const NodePool pool(config.nodes, config.batch, f, config.answers);
        for (VerificationPolicy policy : policies) {
            std::vector<VerificationRecord> records(config.runs);
            parallel_for(config.runs, config.threads, [&](std::uint64_t begin, std::uint64_t end) {
                BatchDrawer drawer(pool);
                for (std::uint64_t r = begin; r < end; ++r) {
                    SeededStream rng = derive_stream(config.master_seed, r);
                    records[r] = run_verification(pool, drawer, policy, config.delta,
                                                  config.f_max, rng);
                }
            });
            std::vector<double> samples;
            std::vector<bool> mistakes;
            samples.reserve(records.size());
            mistakes.reserve(records.size());
            for (const VerificationRecord& rec : records) {
                samples.push_back(static_cast<double>(rec.samples));
                mistakes.push_back(!rec.correct);
            }
            const SampleStats stats = sample_stats(samples, mistakes);
            rows.push_back(SweepRow{f, policy, config.runs, stats.mean, stats.stderr_mean,
                                    stats.mistake_rate});
        }
    }
    return rows;
}

}  // namespace modeest
