#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    const double inter = (w > 0 && h > 0) ? w * h : 0.0;
    const double uni = (a.x_max - a.x_min) * (a.y_max - a.y_min) + (b.x_max - b.x_min) * (b.y_max - b.y_min) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

std::vector<Pair> greedy_match(const std::vector<BoundingBox>& a, const std::vector<BoundingBox>& b, double tau) {
    std::vector<Pair> all;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double v = iou(a[i], b[j]);
            if (v >= tau) all.push_back({i, j, v});
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const Pair& x, const Pair& y) {
        if (x.iou != y.iou) return x.iou > y.iou;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<Pair> kept;
    std::set<std::size_t> used_a, used_b;
    for (const auto& p : all) {
        if (used_a.count(p.a) || used_b.count(p.b)) continue;
        used_a.insert(p.a);
        used_b.insert(p.b);
        kept.push_back(p);
    }
    return kept;
}

namespace {

double confidence(const clipal::QueryPrediction& q) {
    double m = 0.0;
    for (double v : q.class_probs()) m = std::max(m, v);
    return m;
}

}  // namespace

double h_var(const ClipPredictions& preds) {
    const auto& f = preds.forward();
    double sum = 0.0;
    int valid = 0;
    for (std::size_t u = 0; u + 1 < f.size(); ++u) {
        bool any = false;
        double best = 0.0;
        for (const auto& q : f[u].queries()) {
            for (const auto& q1 : f[u + 1].queries()) {
                if (q.kind() != clipal::QueryKind::track || q1.kind() != clipal::QueryKind::track) continue;
                if (*q.track_id() != *q1.track_id()) continue;
                const double d = std::fabs(entropy(q1.class_probs()) - entropy(q.class_probs()));
                if (!any || d > best) best = d;
                any = true;
            }
        }
        if (any) {
            sum += best;
            ++valid;
        }
    }
    return valid ? sum / valid : 0.0;
}

double h_e(const ClipPredictions& preds, double tau_conf, bool filter_tracks) {
    double sum = 0.0;
    int valid = 0;
    for (const auto& frame : preds.forward()) {
        bool any = false;
        double best = 0.0;
        for (const auto& q : frame.queries()) {
            const bool is_track = q.kind() == clipal::QueryKind::track;
            const bool passes = confidence(q) >= tau_conf;
            if (is_track ? (filter_tracks && !passes) : !passes) continue;
            const double h = entropy(q.class_probs());
            if (!any || h > best) best = h;
            any = true;
        }
        if (any) {
            sum += best;
            ++valid;
        }
    }
    return valid ? sum / valid : 0.0;
}

double d_bi(const ClipPredictions& preds, double tau_iou) {
    if (!preds.backward()) return 0.0;
    const auto& fw = preds.forward();
    const auto& bw = *preds.backward();
    double sum = 0.0;
    int valid = 0;
    for (std::size_t u = 0; u < fw.size(); ++u) {
        std::vector<BoundingBox> a, b;
        for (const auto& q : fw[u].queries()) a.push_back(q.box());
        for (const auto& q : bw[u].queries()) b.push_back(q.box());
        const auto pairs = greedy_match(a, b, tau_iou);
        if (pairs.empty()) continue;
        double best = 0.0;
        for (const auto& p : pairs) {
            best = std::max(best, std::fabs(confidence(fw[u].queries()[p.a]) - confidence(bw[u].queries()[p.b])));
        }
        sum += best;
        ++valid;
    }
    return valid ? sum / valid : 0.0;
}

Stats stats(const std::vector<std::array<double, 3>>& raw) {
    Stats s;
    const double n = static_cast<double>(raw.size());
    for (int k = 0; k < 3; ++k) {
        double total = 0.0;
        for (const auto& r : raw) total += r[k];
        s.mean[k] = total / n;
        double sq = 0.0;
        for (const auto& r : raw) sq += (r[k] - s.mean[k]) * (r[k] - s.mean[k]);
        s.sd[k] = std::sqrt(sq / n);
    }
    return s;
}

double phi(double x, double mu, double sigma) {
    if (sigma <= 1e-12) return 0.5;
    const double v = (x - (mu - 3.0 * sigma)) / (6.0 * sigma);
    return v < 0.0 ? 0.0 : v;
}

std::vector<Scored> score_pool(const std::vector<Clip>& clips, const std::vector<std::array<double, 3>>& raw,
                               bool sum_mode, std::array<bool, 3> enabled) {
    const Stats s = stats(raw);
    const double neutral = sum_mode ? 0.0 : 1.0;
    std::vector<Scored> out;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        Scored sc{clips[i], {}, 0.0};
        for (int k = 0; k < 3; ++k) sc.phi[k] = enabled[k] ? phi(raw[i][k], s.mean[k], s.sd[k]) : neutral;
        // Multiplication order: h_e, h_var, d_bi.
        sc.aggregate = sum_mode ? sc.phi[1] + sc.phi[0] + sc.phi[2] : sc.phi[1] * sc.phi[0] * sc.phi[2];
        out.push_back(sc);
    }
    return out;
}

std::set<std::int64_t> frames(const Clip& c) {
    std::set<std::int64_t> out;
    for (int k = 0; k < c.length(); ++k) out.insert(c.start() + static_cast<std::int64_t>(k) * c.interval());
    return out;
}

bool share_frame(const Clip& a, const Clip& b) {
    if (a.video() != b.video()) return false;
    const auto fa = frames(a);
    for (auto f : frames(b)) {
        if (fa.count(f)) return true;
    }
    return false;
}

bool admissible(const Clip& c, const std::vector<Clip>& annotated) {
    for (const auto& a : annotated) {
        if (share_frame(c, a)) return false;
    }
    return true;
}

std::int64_t gap(const Clip& a, const Clip& b) {
    const std::int64_t d = std::llabs(a.start() - b.start()) - static_cast<std::int64_t>(a.length() - 1) * a.interval();
    return d > 0 ? d : 0;
}

namespace {

bool position_less(const Clip& a, const Clip& b) {
    if (a.video() != b.video()) return a.video() < b.video();
    return a.start() < b.start();
}

// nullopt stands for "no same-video annotation" and outranks every value.
bool farther(const std::optional<double>& x, const std::optional<double>& y) {
    if (!x) return y.has_value();
    if (!y) return false;
    return *x > *y;
}

}  // namespace

std::vector<Clip> temporal_greedy(const std::vector<TemporalCandidate>& candidates, const std::vector<Clip>& labeled,
                                  int b) {
    std::vector<Clip> annotated = labeled;
    std::vector<Clip> picks;
    std::vector<bool> taken(candidates.size(), false);
    while (static_cast<int>(picks.size()) < b) {
        std::optional<std::size_t> best;
        std::optional<double> best_d;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (taken[i] || !admissible(candidates[i].clip, annotated)) continue;
            std::optional<double> d;
            for (const auto& a : annotated) {
                if (a.video() != candidates[i].clip.video()) continue;
                const double g = static_cast<double>(gap(candidates[i].clip, a));
                if (!d || g < *d) d = g;
            }
            bool better = false;
            if (!best) {
                better = true;
            } else if (farther(d, best_d)) {
                better = true;
            } else if (!farther(best_d, d)) {
                const auto& cur = candidates[*best];
                if (candidates[i].aggregate != cur.aggregate) {
                    better = candidates[i].aggregate > cur.aggregate;
                } else {
                    better = position_less(candidates[i].clip, cur.clip);
                }
            }
            if (better) {
                best = i;
                best_d = d;
            }
        }
        if (!best) break;
        taken[*best] = true;
        picks.push_back(candidates[*best].clip);
        annotated.push_back(candidates[*best].clip);
    }
    return picks;
}

std::vector<Clip> feature_greedy(const std::vector<FeatureCandidate>& candidates,
                                 const std::vector<FeatureCandidate>& labeled, int b) {
    auto dist = [](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    };
    std::vector<FeatureCandidate> centers = labeled;
    std::vector<Clip> annotated;
    for (const auto& l : labeled) annotated.push_back(l.clip);
    std::vector<Clip> picks;
    std::vector<bool> taken(candidates.size(), false);
    while (static_cast<int>(picks.size()) < b) {
        std::optional<std::size_t> best;
        std::optional<double> best_d;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (taken[i] || !admissible(candidates[i].clip, annotated)) continue;
            std::optional<double> d;
            for (const auto& c : centers) {
                const double v = dist(candidates[i].embedding, c.embedding);
                if (!d || v < *d) d = v;
            }
            bool better = !best || farther(d, best_d) ||
                          (!farther(best_d, d) && position_less(candidates[i].clip, candidates[*best].clip));
            if (better) {
                best = i;
                best_d = d;
            }
        }
        if (!best) break;
        taken[*best] = true;
        picks.push_back(candidates[*best].clip);
        annotated.push_back(candidates[*best].clip);
        centers.push_back(candidates[*best]);
    }
    return picks;
}

std::vector<double> mean_embedding(const ClipPredictions& preds) {
    std::vector<std::vector<double>> all;
    for (const auto& frame : preds.forward()) {
        for (const auto& q : frame.queries()) {
            if (q.kind() == clipal::QueryKind::track && q.embedding()) all.push_back(*q.embedding());
        }
    }
    std::vector<double> out(all.empty() ? 0 : all.front().size(), 0.0);
    for (std::size_t d = 0; d < out.size(); ++d) {
        double s = 0.0;
        for (const auto& e : all) s += e[d];
        out[d] = s / static_cast<double>(all.size());
    }
    return out;
}

std::vector<Scored> ranked(std::vector<Scored> scored) {
    std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
        if (x.aggregate != y.aggregate) return x.aggregate > y.aggregate;
        return position_less(x.clip, y.clip);
    });
    return scored;
}

std::vector<Clip> cutal(const std::vector<ClipPredictions>& unlabeled, const std::vector<Clip>& labeled,
                        const PipelineConfig& cfg) {
    std::vector<Clip> clips;
    std::vector<std::array<double, 3>> raw;
    for (const auto& p : unlabeled) {
        clips.push_back(p.clip());
        raw.push_back({h_var(p), h_e(p, cfg.tau_conf), d_bi(p, cfg.tau_iou)});
    }
    std::vector<Scored> eligible;
    for (const auto& s : score_pool(clips, raw, cfg.sum_mode, cfg.enabled)) {
        if (admissible(s.clip, labeled)) eligible.push_back(s);
    }
    const auto order = ranked(eligible);
    if (!cfg.temporal) {
        std::vector<Clip> annotated = labeled;
        std::vector<Clip> picks;
        for (const auto& s : order) {
            if (static_cast<int>(picks.size()) == cfg.b) break;
            if (!admissible(s.clip, annotated)) continue;
            picks.push_back(s.clip);
            annotated.push_back(s.clip);
        }
        return picks;
    }
    std::vector<TemporalCandidate> top;
    for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < cfg.b * cfg.delta; ++i) {
        top.push_back({order[i].clip, order[i].aggregate});
    }
    return temporal_greedy(top, labeled, cfg.b);
}

}  // namespace oracle
