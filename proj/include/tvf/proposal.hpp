#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tvf/observation.hpp"
#include "tvf/simulator.hpp"

namespace tvf {

// Dense pick/place action values. q_place(u, v, r) scores placing at pixel
// (u, v) with rotation bin r.
struct ActionValueMaps {
    int rows = 0;
    int cols = 0;
    int bins = 0;
    std::vector<double> q_pick;   // rows * cols
    std::vector<double> q_place;  // rows * cols * bins, bin-fastest

    ActionValueMaps() = default;
    ActionValueMaps(int rows_, int cols_, int bins_)
        : rows(rows_), cols(cols_), bins(bins_),
          q_pick(static_cast<std::size_t>(rows_) * cols_, 0.0),
          q_place(static_cast<std::size_t>(rows_) * cols_ * bins_, 0.0) {}

    double& pick_at(int u, int v) { return q_pick[static_cast<std::size_t>(u) * cols + v]; }
    double pick_at(int u, int v) const { return q_pick[static_cast<std::size_t>(u) * cols + v]; }
    double& place_at(int u, int v, int r) { return q_place[(static_cast<std::size_t>(u) * cols + v) * bins + r]; }
    double place_at(int u, int v, int r) const { return q_place[(static_cast<std::size_t>(u) * cols + v) * bins + r]; }
};

struct ProposalConfig {
    double alpha = 0.01;  // threshold coefficient on max q_place
    int top_n = 100;
    int k = 3;
    int kmeans_iters = 20;
    std::uint64_t seed = 0;  // reserved for stochastic seeding variants

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("proposal.config: alpha must be in (0,1)");
        }
        if (k < 1 || top_n < k) {
            throw std::invalid_argument("proposal.config: need top_n >= k >= 1");
        }
        if (kmeans_iters < 1) {
            throw std::invalid_argument("proposal.config: kmeans_iters must be >= 1");
        }
    }
};

struct ProposalResult {
    PixelPose pick;
    std::vector<PixelPose> places;  // sorted by value, descending
    std::vector<double> values;
};

class empty_proposal_error : public std::runtime_error {
public:
    empty_proposal_error() : std::runtime_error("proposal: q_place has no positive values") {}
};

// Scorer behind the action-value interface: takes current and goal
// observations, returns dense Q maps.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual ActionValueMaps score(const Observation& o, const Observation& goal) const = 0;
};

// Global argmax of q_pick; ties break to the lowest row-major index. The pick
// rotation is fixed to bin 0 (symmetric gripper).
inline PixelPose select_pick(const ActionValueMaps& maps) {
    int best_u = 0, best_v = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int u = 0; u < maps.rows; ++u) {
        for (int v = 0; v < maps.cols; ++v) {
            const double q = maps.pick_at(u, v);
            if (q > best) {
                best = q;
                best_u = u;
                best_v = v;
            }
        }
    }
    return {best_u, best_v, 0};
}

// --- k-means --------------------------------------------------------------

struct KMeansResult {
    std::vector<int> assignment;      // per input point
    std::vector<Vec2> centers;
    std::vector<double> sse_trace;    // within-cluster SSE after each Lloyd update
};

// Lloyd's algorithm with deterministic farthest-point seeding. The first
// center is points[0], so callers should pass points ordered by value. seed
// is accepted for interface stability but unused. k > |points| degrades to
// one singleton cluster per point.
inline KMeansResult kmeans(const std::vector<Vec2>& points, int k, int iters = 20, std::uint64_t /*seed*/ = 0) {
    if (points.empty()) {
        throw std::invalid_argument("proposal.kmeans: need at least one point");
    }
    const int n = static_cast<int>(points.size());
    KMeansResult out;
    if (k >= n) {
        out.centers = points;
        out.assignment.resize(n);
        std::iota(out.assignment.begin(), out.assignment.end(), 0);
        out.sse_trace.push_back(0.0);
        return out;
    }

    auto dist2 = [](Vec2 a, Vec2 b) {
        const double dx = a.x - b.x;
        const double dy = a.y - b.y;
        return dx * dx + dy * dy;
    };

    out.centers.push_back(points[0]);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(out.centers.size()) < k) {
        int far_idx = 0;
        double far_d2 = -1.0;
        for (int i = 0; i < n; ++i) {
            min_d2[i] = std::min(min_d2[i], dist2(points[i], out.centers.back()));
            if (min_d2[i] > far_d2) {
                far_d2 = min_d2[i];
                far_idx = i;
            }
        }
        out.centers.push_back(points[far_idx]);
    }

    out.assignment.assign(n, -1);
    for (int it = 0; it < iters; ++it) {
        // assign to the nearest center, ties to the lowest center index
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best_c = 0;
            double best_d2 = dist2(points[i], out.centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d2 = dist2(points[i], out.centers[c]);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best_c = c;
                }
            }
            if (out.assignment[i] != best_c) {
                out.assignment[i] = best_c;
                changed = true;
            }
        }
        // update means; an emptied cluster reseeds at the farthest point
        std::vector<Vec2> sums(k, Vec2{});
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums[out.assignment[i]].x += points[i].x;
            sums[out.assignment[i]].y += points[i].y;
            ++counts[out.assignment[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                out.centers[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
            } else {
                int far_idx = 0;
                double far_d2 = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d2 = dist2(points[i], out.centers[c]);
                    if (d2 > far_d2) {
                        far_d2 = d2;
                        far_idx = i;
                    }
                }
                out.centers[c] = points[far_idx];
                changed = true;
            }
        }
        double sse = 0.0;
        for (int i = 0; i < n; ++i) {
            sse += dist2(points[i], out.centers[out.assignment[i]]);
        }
        out.sse_trace.push_back(sse);
        if (!changed) break;
    }
    return out;
}

// --- multi-modal proposal ---------------------------------------------------

// Threshold, Top-N, K-means, per-cluster argmax over a precomputed Q map.
// Scorer-agnostic so synthetic maps exercise it directly.
inline ProposalResult propose_from_maps(const ActionValueMaps& maps, const ProposalConfig& cfg) {
    cfg.validate();

    double q_max = 0.0;
    for (double q : maps.q_place) {
        q_max = std::max(q_max, q);
    }
    if (q_max <= 0.0) {
        throw empty_proposal_error();
    }

    // max / argmax over the rotation axis; ties keep the lowest bin
    struct Candidate {
        int u, v, bin;
        double value;
    };
    std::vector<Candidate> s;
    const double threshold = cfg.alpha * q_max;
    for (int u = 0; u < maps.rows; ++u) {
        for (int v = 0; v < maps.cols; ++v) {
            double best = maps.place_at(u, v, 0);
            int best_bin = 0;
            for (int r = 1; r < maps.bins; ++r) {
                const double q = maps.place_at(u, v, r);
                if (q > best) {
                    best = q;
                    best_bin = r;
                }
            }
            if (best > threshold) {
                s.push_back({u, v, best_bin, best});
            }
        }
    }
    if (s.empty()) {
        throw empty_proposal_error();
    }

    // Top-N by value; ties by row-major index
    std::sort(s.begin(), s.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    if (static_cast<int>(s.size()) > cfg.top_n) {
        s.resize(cfg.top_n);
    }

    std::vector<Vec2> points;
    points.reserve(s.size());
    for (const Candidate& c : s) {
        points.push_back({static_cast<double>(c.u), static_cast<double>(c.v)});
    }
    const KMeansResult km = kmeans(points, cfg.k, cfg.kmeans_iters, cfg.seed);
    const int n_clusters = static_cast<int>(km.centers.size());

    // per cluster, the member with the largest value (candidates are sorted,
    // so the first member wins)
    std::vector<int> cluster_best(n_clusters, -1);
    for (int i = 0; i < static_cast<int>(s.size()); ++i) {
        int& best = cluster_best[km.assignment[i]];
        if (best < 0) best = i;
    }

    ProposalResult out;
    out.pick = select_pick(maps);
    std::vector<int> picked;
    for (int c = 0; c < n_clusters; ++c) {
        if (cluster_best[c] >= 0) picked.push_back(cluster_best[c]);
    }
    std::sort(picked.begin(), picked.end());  // candidate order = value order
    for (int i : picked) {
        out.places.push_back({s[i].u, s[i].v, s[i].bin});
        out.values.push_back(s[i].value);
    }
    return out;
}

ProposalResult inline multimodal_propose(const Observation& o, const Observation& goal, const Scorer& scorer,
                                         const ProposalConfig& cfg) {
    return propose_from_maps(scorer.score(o, goal), cfg);
}

// --- heuristic goal-difference scorer --------------------------------------

// Stand-in for a learned action-value model. q_pick: smoothed surplus height
// (present now, absent in the goal), masked to occupied pixels. q_place:
// zero-mean normalized cross correlation between the rotated crop around the
// pick and the deficit image (missing goal height with the goal's colors),
// over R rotation bins.
class HeuristicScorer : public Scorer {
public:
    HeuristicScorer(WorkspaceCalib calib, int mask_side, double max_height, Color table_color = kTableColor)
        : calib_(calib), side_(mask_side), max_height_(max_height), table_(table_color) {
        if (side_ <= 0 || side_ % 2 == 0) {
            throw std::invalid_argument("proposal.scorer: mask side must be odd and positive");
        }
    }

    ActionValueMaps score(const Observation& o, const Observation& goal) const override {
        if (!o.same_shape(goal) || o.rows() != calib_.height_px || o.cols() != calib_.width_px) {
            throw std::invalid_argument("proposal.scorer: observation shape mismatch");
        }
        const int rows = o.rows();
        const int cols = o.cols();
        const Observation cur = normalize_height(o, max_height_);
        const Observation tgt = normalize_height(goal, max_height_);

        ActionValueMaps maps(rows, cols, calib_.rotation_bins);

        // Pick weight per occupied pixel: surplus height (stands where the
        // goal has less), plus a boost for movable objects squatting on
        // under-built goal cells. Squatters must move before their cell can
        // be built; without the boost the planner stacks on top of them.
        const std::size_t n_px = static_cast<std::size_t>(rows) * cols;
        std::vector<double> surplus(n_px, 0.0);
        std::vector<double> occupied_deficit(n_px, 0.0);
        for (int u = 0; u < rows; ++u) {
            for (int v = 0; v < cols; ++v) {
                const double h = cur.height(u, v);
                if (h <= 0.0) continue;
                const std::size_t i = static_cast<std::size_t>(u) * cols + v;
                surplus[i] = std::max(0.0, h - tgt.height(u, v));
                occupied_deficit[i] = std::max(0.0, tgt.height(u, v) - h);
            }
        }
        // connected components of the occupied region and of the goal support
        const auto occupied = [&](int u, int v) { return cur.height(u, v) > 0.0; };
        const auto goal_support = [&](int u, int v) { return tgt.height(u, v) > 0.0; };
        std::vector<int> comp;
        const int n_comp = label_components(occupied, rows, cols, comp);
        std::vector<int> goal_comp;
        const int n_goal = label_components(goal_support, rows, cols, goal_comp);

        // A standing object is "aligned" when it fits inside one goal
        // component's support dilated by the success tolerance. Anything else
        // that covers an under-built cell is a squatter: it must move before
        // the cell can be stacked, so its pixels get a boosted pick weight.
        const int tol_px = static_cast<int>(std::ceil(kTranslationTolerance / calib_.pixel_pitch)) + 1;
        std::vector<std::uint64_t> cover(n_px, 0);
        for (int u = 0; u < rows; ++u) {
            for (int v = 0; v < cols; ++v) {
                const int g = goal_comp[static_cast<std::size_t>(u) * cols + v];
                if (g < 0) continue;
                const std::uint64_t bit = 1ull << std::min(g, 63);
                for (int du = -tol_px; du <= tol_px; ++du) {
                    const int uu = u + du;
                    if (uu < 0 || uu >= rows) continue;
                    for (int dv = -tol_px; dv <= tol_px; ++dv) {
                        const int vv = v + dv;
                        if (vv < 0 || vv >= cols) continue;
                        cover[static_cast<std::size_t>(uu) * cols + vv] |= bit;
                    }
                }
            }
        }

        // a goal cell is unfinished while any of its support still lacks height
        std::vector<double> goal_deficit(std::max(n_goal, 1), 0.0);
        for (std::size_t i = 0; i < n_px; ++i) {
            if (goal_comp[i] < 0) continue;
            const int u = static_cast<int>(i / cols);
            const int v = static_cast<int>(i % cols);
            goal_deficit[goal_comp[i]] += std::max(0.0, tgt.height(u, v) - cur.height(u, v));
        }
        std::vector<double> comp_surplus(n_comp, 0.0);
        std::vector<int> comp_squat(n_comp, 0);
        std::vector<std::uint64_t> comp_cover(n_comp, ~0ull);
        for (std::size_t i = 0; i < n_px; ++i) {
            if (comp[i] < 0) continue;
            comp_surplus[comp[i]] += surplus[i];
            if (goal_comp[i] >= 0 && goal_deficit[goal_comp[i]] > 1e-6) ++comp_squat[comp[i]];
            comp_cover[comp[i]] &= cover[i];
        }
        std::vector<double> weight(n_px, 0.0);
        for (std::size_t i = 0; i < n_px; ++i) {
            if (comp[i] < 0 || comp_surplus[comp[i]] <= 1e-9) continue;  // in place or a correct partial build
            weight[i] = surplus[i];
            if (comp_squat[comp[i]] > 0 && comp_cover[comp[i]] == 0) {
                weight[i] += occupied_deficit[i] + kSquatBoost;
            }
        }
        std::vector<double> blurred = box_blur(weight, rows, cols, kBlurRadius);
        blurred = box_blur(blurred, rows, cols, kBlurRadius);
        for (int u = 0; u < rows; ++u) {
            for (int v = 0; v < cols; ++v) {
                const std::size_t i = static_cast<std::size_t>(u) * cols + v;
                maps.q_pick[i] = cur.height(u, v) > 0.0 ? blurred[i] : 0.0;
            }
        }

        const PixelPose pick = select_pick(maps);
        if (maps.pick_at(pick.u, pick.v) <= 0.0) {
            return maps;  // nothing to move; q_place stays all-zero
        }

        // deficit image: missing height with the goal's color on a zero
        // field; the zero background keeps windows without deficit inert
        Observation deficit(rows, cols);
        int bu0 = rows, bu1 = -1, bv0 = cols, bv1 = -1;
        for (int u = 0; u < rows; ++u) {
            for (int v = 0; v < cols; ++v) {
                const double d = tgt.height(u, v) - cur.height(u, v);
                if (d <= 1e-12) continue;
                deficit.at(u, v, 0) = tgt.at(u, v, 0);
                deficit.at(u, v, 1) = tgt.at(u, v, 1);
                deficit.at(u, v, 2) = tgt.at(u, v, 2);
                deficit.height(u, v) = d;
                bu0 = std::min(bu0, u);
                bu1 = std::max(bu1, u);
                bv0 = std::min(bv0, v);
                bv1 = std::max(bv1, v);
            }
        }
        if (bu1 < 0) {
            return maps;  // no deficit anywhere
        }

        const Integrals ints(deficit, rows, cols);
        const Observation tmpl = masked_template(cur, pick);
        const std::array<double, kChannels> bg{table_.r, table_.g, table_.b, 0.0};

        const int half = side_ / 2;
        const int u_lo = std::max(0, bu0 - half);
        const int u_hi = std::min(rows - 1, bu1 + half);
        const int v_lo = std::max(0, bv0 - half);
        const int v_hi = std::min(cols - 1, bv1 + half);
        const double window_n = 4.0 * side_ * side_;

        for (int r = 0; r < calib_.rotation_bins; ++r) {
            const Observation rot = rotate_about_center_filled(tmpl, bin_to_angle(calib_, r), bg);
            // entries differing from the background drive the correlation
            struct Entry {
                int du, dv, c;
                double delta;
            };
            std::vector<Entry> sparse;
            double sum_t = 0.0;
            double sum_t2 = 0.0;
            for (int i = 0; i < side_; ++i) {
                for (int j = 0; j < side_; ++j) {
                    for (int c = 0; c < kChannels; ++c) {
                        const double t = rot.at(i, j, c);
                        sum_t += t;
                        sum_t2 += t * t;
                        if (std::fabs(t - bg[c]) > 1e-9) {
                            sparse.push_back({i - half, j - half, c, t - bg[c]});
                        }
                    }
                }
            }
            const double mean_t = sum_t / window_n;
            const double var_t = sum_t2 - sum_t * sum_t / window_n;
            if (var_t <= 1e-12) continue;

            for (int u = u_lo; u <= u_hi; ++u) {
                for (int v = v_lo; v <= v_hi; ++v) {
                    const auto w = ints.window(u - half, v - half, u + half, v + half);
                    if (w.count == 0.0) continue;  // no deficit in the window
                    double dot = 0.0;
                    for (const Entry& e : sparse) {
                        const int uu = u + e.du;
                        const int vv = v + e.dv;
                        if (uu < 0 || uu >= rows || vv < 0 || vv >= cols) continue;
                        dot += e.delta * deficit.at(uu, vv, e.c);
                    }
                    const double sum_td = dot + bg[0] * w.sum_c[0] + bg[1] * w.sum_c[1] + bg[2] * w.sum_c[2];
                    const double numerator = sum_td - mean_t * w.sum_total;
                    const double var_d = w.sum_sq - w.sum_total * w.sum_total / window_n;
                    if (var_d <= 1e-12) continue;
                    const double zncc = numerator / std::sqrt(var_t * var_d);
                    maps.place_at(u, v, r) = std::max(0.0, zncc);
                }
            }
        }
        return maps;
    }

private:
    static constexpr int kBlurRadius = 6;
    static constexpr double kSquatBoost = 0.3;

    // 4-connected component labels over pixels where pred(u, v) holds;
    // returns the component count, labels are -1 elsewhere.
    template <typename Pred>
    static int label_components(const Pred& pred, int rows, int cols, std::vector<int>& labels) {
        labels.assign(static_cast<std::size_t>(rows) * cols, -1);
        int n = 0;
        std::vector<std::size_t> stack;
        for (std::size_t start = 0; start < labels.size(); ++start) {
            const int su = static_cast<int>(start / cols);
            const int sv = static_cast<int>(start % cols);
            if (labels[start] >= 0 || !pred(su, sv)) continue;
            labels[start] = n;
            stack.push_back(start);
            while (!stack.empty()) {
                const std::size_t i = stack.back();
                stack.pop_back();
                const int u = static_cast<int>(i / cols);
                const int v = static_cast<int>(i % cols);
                const int nbrs[4][2] = {{u - 1, v}, {u + 1, v}, {u, v - 1}, {u, v + 1}};
                for (const auto& nb : nbrs) {
                    if (nb[0] < 0 || nb[0] >= rows || nb[1] < 0 || nb[1] >= cols) continue;
                    const std::size_t ni = static_cast<std::size_t>(nb[0]) * cols + nb[1];
                    if (labels[ni] < 0 && pred(nb[0], nb[1])) {
                        labels[ni] = n;
                        stack.push_back(ni);
                    }
                }
            }
            ++n;
        }
        return n;
    }

    // Crop around the pick, keeping only the object component under the pick
    // itself. Neighboring blocks inside the crop would otherwise correlate
    // with the deficit and propose placements the grasped object cannot reach.
    Observation masked_template(const Observation& cur, const PixelPose& pick) const {
        Observation tmpl = crop_square(cur, pick, side_);
        const double support = boundary_median_support(cur, pick, side_);
        const double eps = 0.002 / max_height_;
        std::vector<int> labels;
        label_components([&](int i, int j) { return tmpl.height(i, j) > support + eps; }, side_, side_, labels);
        const int half = side_ / 2;
        const int center_label = labels[static_cast<std::size_t>(half) * side_ + half];
        for (int i = 0; i < side_; ++i) {
            for (int j = 0; j < side_; ++j) {
                const int l = labels[static_cast<std::size_t>(i) * side_ + j];
                if (l < 0 || l == center_label) continue;
                tmpl.at(i, j, 0) = table_.r;
                tmpl.at(i, j, 1) = table_.g;
                tmpl.at(i, j, 2) = table_.b;
                tmpl.height(i, j) = support;
            }
        }
        return tmpl;
    }

    // separated box blur with zero padding and a fixed divisor
    static std::vector<double> box_blur(const std::vector<double>& in, int rows, int cols, int radius) {
        const double inv = 1.0 / (2 * radius + 1);
        std::vector<double> tmp(in.size(), 0.0);
        for (int u = 0; u < rows; ++u) {
            double acc = 0.0;
            for (int v = -radius; v <= radius; ++v) {
                if (v >= 0 && v < cols) acc += in[static_cast<std::size_t>(u) * cols + v];
            }
            for (int v = 0; v < cols; ++v) {
                tmp[static_cast<std::size_t>(u) * cols + v] = acc * inv;
                const int out_v = v - radius;
                const int in_v = v + radius + 1;
                if (out_v >= 0) acc -= in[static_cast<std::size_t>(u) * cols + out_v];
                if (in_v < cols) acc += in[static_cast<std::size_t>(u) * cols + in_v];
            }
        }
        std::vector<double> out(in.size(), 0.0);
        for (int v = 0; v < cols; ++v) {
            double acc = 0.0;
            for (int u = -radius; u <= radius; ++u) {
                if (u >= 0 && u < rows) acc += tmp[static_cast<std::size_t>(u) * cols + v];
            }
            for (int u = 0; u < rows; ++u) {
                out[static_cast<std::size_t>(u) * cols + v] = acc * inv;
                const int out_u = u - radius;
                const int in_u = u + radius + 1;
                if (out_u >= 0) acc -= tmp[static_cast<std::size_t>(out_u) * cols + v];
                if (in_u < rows) acc += tmp[static_cast<std::size_t>(in_u) * cols + v];
            }
        }
        return out;
    }

    // summed-area tables over the deficit image: per-channel sums, total sum,
    // total sum of squares, and count of deficit pixels
    struct Integrals {
        int rows, cols;
        std::vector<double> c0, c1, c2, c3, sq, cnt;

        Integrals(const Observation& d, int rows_, int cols_) : rows(rows_), cols(cols_) {
            const std::size_t n = static_cast<std::size_t>(rows + 1) * (cols + 1);
            c0.assign(n, 0.0);
            c1.assign(n, 0.0);
            c2.assign(n, 0.0);
            c3.assign(n, 0.0);
            sq.assign(n, 0.0);
            cnt.assign(n, 0.0);
            for (int u = 0; u < rows; ++u) {
                for (int v = 0; v < cols; ++v) {
                    const std::size_t here = static_cast<std::size_t>(u + 1) * (cols + 1) + (v + 1);
                    const std::size_t up = here - (cols + 1);
                    const std::size_t left = here - 1;
                    const std::size_t diag = up - 1;
                    const double x0 = d.at(u, v, 0);
                    const double x1 = d.at(u, v, 1);
                    const double x2 = d.at(u, v, 2);
                    const double x3 = d.at(u, v, 3);
                    c0[here] = x0 + c0[up] + c0[left] - c0[diag];
                    c1[here] = x1 + c1[up] + c1[left] - c1[diag];
                    c2[here] = x2 + c2[up] + c2[left] - c2[diag];
                    c3[here] = x3 + c3[up] + c3[left] - c3[diag];
                    sq[here] = x0 * x0 + x1 * x1 + x2 * x2 + x3 * x3 + sq[up] + sq[left] - sq[diag];
                    cnt[here] = (x3 > 0.0 ? 1.0 : 0.0) + cnt[up] + cnt[left] - cnt[diag];
                }
            }
        }

        struct Window {
            std::array<double, 3> sum_c;
            double sum_total;
            double sum_sq;
            double count;
        };

        Window window(int u0, int v0, int u1, int v1) const {
            u0 = std::max(u0, 0);
            v0 = std::max(v0, 0);
            u1 = std::min(u1, rows - 1);
            v1 = std::min(v1, cols - 1);
            auto rect = [&](const std::vector<double>& t) {
                const std::size_t a = static_cast<std::size_t>(u1 + 1) * (cols + 1) + (v1 + 1);
                const std::size_t b = static_cast<std::size_t>(u0) * (cols + 1) + (v1 + 1);
                const std::size_t c = static_cast<std::size_t>(u1 + 1) * (cols + 1) + v0;
                const std::size_t e = static_cast<std::size_t>(u0) * (cols + 1) + v0;
                return t[a] - t[b] - t[c] + t[e];
            };
            Window w;
            w.sum_c = {rect(c0), rect(c1), rect(c2)};
            const double s3 = rect(c3);
            w.sum_total = w.sum_c[0] + w.sum_c[1] + w.sum_c[2] + s3;
            w.sum_sq = rect(sq);
            w.count = rect(cnt);
            return w;
        }
    };

    WorkspaceCalib calib_;
    int side_;
    double max_height_;
    Color table_;
};

}  // namespace tvf
