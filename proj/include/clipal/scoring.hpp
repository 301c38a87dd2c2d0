#pragma once
// Pool-level normalization of raw uncertainty components and their
// aggregation into a single clip score.

#include <array>
#include <vector>

#include "clipal/model.hpp"

namespace clipal {

inline constexpr double kSigmaEpsilon = 1e-12;

// Per-component statistics over the unlabeled pool, indexed h_var, h_e, d_bi.
struct PoolStats {
    std::array<double, 3> mean{};
    std::array<double, 3> std{};  // population standard deviation
    std::size_t count = 0;
};

// Which normalized components take part in aggregation. A disabled component
// is replaced by the neutral element of the aggregation mode.
struct ComponentMask {
    bool h_var = true;
    bool h_e = true;
    bool d_bi = true;

    bool operator==(const ComponentMask&) const = default;
};

struct RawScore {
    Clip clip;
    RawComponents raw;
};

PoolStats pool_stats(const std::vector<RawComponents>& raw);

// max(0, (x - (mu - 3 sigma)) / (6 sigma)), or 0.5 when sigma <= 1e-12.
// There is no upper clamp.
double phi(double x, double mu, double sigma);

// product: phi_h_e * phi_h_var * phi_d_bi; sum: phi_h_e + phi_h_var + phi_d_bi.
double aggregate(double phi_h_e, double phi_h_var, double phi_d_bi, AggregationMode mode);

double neutral_element(AggregationMode mode);

// Normalizes against statistics of exactly the given scores (the unlabeled
// pool) and aggregates. Output order follows input order. Throws EmptyPool.
std::vector<ClipScore> score_pool(const std::vector<RawScore>& raw_scores, AggregationMode mode,
                                  ComponentMask mask = {});

// Orders by aggregate descending, then video ascending, then start ascending.
bool score_order(const ClipScore& a, const ClipScore& b);

// The min(delta * b, |scored|) best clips, sorted by score_order.
std::vector<ClipScore> top_candidates(const std::vector<ClipScore>& scored, int b, int delta);

}  // namespace clipal
