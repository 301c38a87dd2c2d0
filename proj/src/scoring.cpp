#include "clipal/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "clipal/errors.hpp"

namespace clipal {

namespace {

std::array<double, 3> as_array(const RawComponents& r) { return {r.h_var, r.h_e, r.d_bi}; }

}  // namespace

// Welford's single-pass update; the result is the population variance.
PoolStats pool_stats(const std::vector<RawComponents>& raw) {
    if (raw.empty()) throw EmptyPool("cannot compute statistics over an empty pool");
    PoolStats stats;
    std::array<double, 3> m2{};
    std::size_t n = 0;
    for (const auto& r : raw) {
        ++n;
        const auto x = as_array(r);
        for (std::size_t k = 0; k < 3; ++k) {
            const double d = x[k] - stats.mean[k];
            stats.mean[k] += d / static_cast<double>(n);
            m2[k] += d * (x[k] - stats.mean[k]);
        }
    }
    for (std::size_t k = 0; k < 3; ++k) {
        stats.std[k] = std::sqrt(std::max(0.0, m2[k] / static_cast<double>(n)));
    }
    stats.count = n;
    return stats;
}

double phi(double x, double mu, double sigma) {
    if (sigma <= kSigmaEpsilon) return 0.5;
    return std::max(0.0, (x - (mu - 3.0 * sigma)) / (6.0 * sigma));
}

double aggregate(double phi_h_e, double phi_h_var, double phi_d_bi, AggregationMode mode) {
    if (mode == AggregationMode::product) return phi_h_e * phi_h_var * phi_d_bi;
    return phi_h_e + phi_h_var + phi_d_bi;
}

double neutral_element(AggregationMode mode) {
    return mode == AggregationMode::product ? 1.0 : 0.0;
}

std::vector<ClipScore> score_pool(const std::vector<RawScore>& raw_scores, AggregationMode mode,
                                  ComponentMask mask) {
    std::vector<RawComponents> raw;
    raw.reserve(raw_scores.size());
    for (const auto& r : raw_scores) raw.push_back(r.raw);
    const PoolStats stats = pool_stats(raw);
    const double neutral = neutral_element(mode);

    std::vector<ClipScore> out;
    out.reserve(raw_scores.size());
    for (const auto& r : raw_scores) {
        NormalizedComponents n;
        n.phi_h_var = mask.h_var ? phi(r.raw.h_var, stats.mean[0], stats.std[0]) : neutral;
        n.phi_h_e = mask.h_e ? phi(r.raw.h_e, stats.mean[1], stats.std[1]) : neutral;
        n.phi_d_bi = mask.d_bi ? phi(r.raw.d_bi, stats.mean[2], stats.std[2]) : neutral;
        out.emplace_back(r.clip, r.raw, n, mode);
    }
    return out;
}

bool score_order(const ClipScore& a, const ClipScore& b) {
    if (a.aggregate() != b.aggregate()) return a.aggregate() > b.aggregate();
    if (a.clip().video() != b.clip().video()) return a.clip().video() < b.clip().video();
    if (a.clip().start() != b.clip().start()) return a.clip().start() < b.clip().start();
    return a.clip() < b.clip();
}

std::vector<ClipScore> top_candidates(const std::vector<ClipScore>& scored, int b, int delta) {
    if (b < 1) throw ConfigError("clip budget b must be >= 1");
    if (delta < 1) throw ConfigError("candidate multiplier delta must be >= 1");
    const std::size_t keep =
        std::min(scored.size(), static_cast<std::size_t>(b) * static_cast<std::size_t>(delta));
    std::vector<ClipScore> sorted = scored;
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(keep),
                      sorted.end(), score_order);
    sorted.erase(sorted.begin() + static_cast<std::ptrdiff_t>(keep), sorted.end());
    return sorted;
}

}  // namespace clipal
