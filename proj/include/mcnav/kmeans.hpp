#ifndef MCNAV_KMEANS_HPP
#define MCNAV_KMEANS_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "mcnav/memory_map.hpp"

namespace mcnav {

struct Cluster {
    int cluster_id = 0;
    std::vector<PlacedObject> members;
    Vec3 centroid;
};

struct ClusterSet {
    std::vector<Cluster> clusters;
    int k = 0;
    std::uint64_t seed = 0;
};

namespace detail {

struct LloydResult {
    std::vector<int> assignment; // point index -> centroid index
    std::vector<Vec3> centroids;
    double inertia = 0.0;
};

inline double nearest_sq(const Vec3& p, const std::vector<Vec3>& centers, int* which = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        double d = squared_distance(p, centers[c]);
        if (d < best) {
            best = d;
            arg = static_cast<int>(c);
        }
    }
    if (which) *which = arg;
    return best;
}

inline std::vector<Vec3> kmeanspp_init(const std::vector<Vec3>& pts, int k,
                                       std::mt19937_64& rng) {
    std::vector<Vec3> centers;
    std::uniform_int_distribution<std::size_t> uni(0, pts.size() - 1);
    centers.push_back(pts[uni(rng)]);
    while (static_cast<int>(centers.size()) < k) {
        std::vector<double> d2(pts.size());
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            d2[i] = nearest_sq(pts[i], centers);
            total += d2[i];
        }
        if (total == 0.0) {
            // all remaining mass coincides with existing centers
            centers.push_back(pts[uni(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> ud(0.0, total);
        double target = ud(rng), acc = 0.0;
        std::size_t pick = pts.size() - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            acc += d2[i];
            if (acc >= target) {
                pick = i;
                break;
            }
        }
        centers.push_back(pts[pick]);
    }
    return centers;
}

/// Lloyd iterations until assignments stabilize or 100 rounds.
/// An optional trace records the inertia after each assignment pass.
inline LloydResult lloyd(const std::vector<Vec3>& pts, int k, std::uint64_t seed,
                         std::vector<double>* inertia_trace = nullptr) {
    std::mt19937_64 rng(seed);
    LloydResult res;
    res.centroids = kmeanspp_init(pts, k, rng);
    res.assignment.assign(pts.size(), -1);

    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            int a;
            inertia += nearest_sq(pts[i], res.centroids, &a);
            if (a != res.assignment[i]) {
                res.assignment[i] = a;
                changed = true;
            }
        }
        res.inertia = inertia;
        if (inertia_trace) inertia_trace->push_back(inertia);
        if (!changed) break;

        std::vector<Vec3> sums(k);
        std::vector<int> counts(k, 0);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sums[res.assignment[i]] = sums[res.assignment[i]] + pts[i];
            counts[res.assignment[i]] += 1;
        }
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) res.centroids[c] = sums[c] / static_cast<double>(counts[c]);
        // empty centroids keep their position; coincident inputs may leave
        // some clusters unused, they are dropped at the end
    }
    return res;
}

/// Mean silhouette over all points; defined as 0 for k=1 and for
/// singleton clusters.
inline double mean_silhouette(const std::vector<Vec3>& pts, const std::vector<int>& assignment,
                              int k) {
    if (k <= 1) return 0.0;
    std::vector<int> counts(k, 0);
    for (int a : assignment) counts[a] += 1;

    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const int own = assignment[i];
        if (counts[own] <= 1) continue; // s(i) = 0
        std::vector<double> sum_d(k, 0.0);
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (j == i) continue;
            sum_d[assignment[j]] += euclidean(pts[i], pts[j]);
        }
        double a = sum_d[own] / (counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, sum_d[c] / counts[c]);
        }
        double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(pts.size());
}

} // namespace detail

/// K-means over placed-object positions (k-means++ init, Lloyd). When k is
/// absent, k in [1, min(8, n)] is chosen by mean silhouette (ties to the
/// smaller k). Final cluster ids are 0..k'-1 ordered by smallest member label.
inline ClusterSet cluster_objects(const std::vector<PlacedObject>& objects,
                                  std::optional<int> k, std::uint64_t seed) {
    const int n = static_cast<int>(objects.size());
    std::vector<Vec3> pts;
    pts.reserve(objects.size());
    for (const auto& o : objects) pts.push_back(o.position);

    int chosen_k;
    if (k) {
        chosen_k = std::clamp(*k, 1, n);
    } else if (n == 1) {
        chosen_k = 1;
    } else {
        chosen_k = 1;
        double best = -std::numeric_limits<double>::infinity();
        for (int kk = 1; kk <= std::min(8, n); ++kk) {
            auto res = detail::lloyd(pts, kk, seed);
            double s = detail::mean_silhouette(pts, res.assignment, kk);
            if (s > best + 1e-12) {
                best = s;
                chosen_k = kk;
            }
        }
    }

    auto res = detail::lloyd(pts, chosen_k, seed);

    // group members; drop clusters left empty by coincident points
    std::vector<Cluster> raw(chosen_k);
    for (int c = 0; c < chosen_k; ++c) raw[c].centroid = res.centroids[c];
    for (int i = 0; i < n; ++i) raw[res.assignment[i]].members.push_back(objects[i]);

    std::vector<Cluster> kept;
    for (auto& cl : raw) {
        if (cl.members.empty()) continue;
        std::sort(cl.members.begin(), cl.members.end(),
                  [](const PlacedObject& a, const PlacedObject& b) { return a.label < b.label; });
        Vec3 sum;
        for (const auto& m : cl.members) sum = sum + m.position;
        cl.centroid = sum / static_cast<double>(cl.members.size());
        kept.push_back(std::move(cl));
    }
    std::sort(kept.begin(), kept.end(), [](const Cluster& a, const Cluster& b) {
        return a.members.front().label < b.members.front().label;
    });
    for (std::size_t c = 0; c < kept.size(); ++c) kept[c].cluster_id = static_cast<int>(c);

    ClusterSet out;
    out.clusters = std::move(kept);
    out.k = static_cast<int>(out.clusters.size());
    out.seed = seed;
    return out;
}

} // namespace mcnav

#endif
