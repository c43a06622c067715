#ifndef MCNAV_METRICS_HPP
#define MCNAV_METRICS_HPP

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcnav/planner.hpp"
#include "mcnav/scene.hpp"

namespace mcnav {

enum class TaskMode { REVERIE, R2R };

inline TaskMode task_mode_from_string(const std::string& s) {
    if (s == "reverie" || s == "REVERIE") return TaskMode::REVERIE;
    if (s == "r2r" || s == "R2R") return TaskMode::R2R;
    throw SchemaError("unknown task mode '" + s + "'");
}

struct EpisodeMetrics {
    std::string episode_id;
    double tl = 0.0;
    double ne = 0.0;
    double sr = 0.0;
    double osr = 0.0;
    double spl = 0.0;
    std::optional<double> rgs;   // REVERIE only
    std::optional<double> rgspl; // REVERIE only
};

struct MetricsReport {
    std::vector<EpisodeMetrics> per_episode;
    EpisodeMetrics aggregate; // arithmetic means; episode_id empty
    TaskMode mode = TaskMode::REVERIE;
};

namespace detail {

/// A memory map covering the whole scene, for ground-truth shortest paths.
inline MemoryMap full_scene_map(const Scene& scene) {
    MemoryMap map;
    for (const auto& vp : scene.viewpoints) {
        NodeRecord rec;
        rec.id = vp.id;
        rec.position = vp.position;
        map.nodes[vp.id] = rec;
    }
    for (const auto& [a, b] : scene.edges) map.edges.insert(MemoryMap::edge_key(a, b));
    if (!scene.viewpoints.empty()) map.current = scene.viewpoints.front().id;
    return map;
}

} // namespace detail

/// Shortest-path length in the full scene graph from `start` to the nearest
/// goal viewpoint (the SPL normalizer L*).
inline double scene_shortest_length(const Scene& scene, const ViewpointId& start,
                                    const std::set<ViewpointId>& goals) {
    auto map = detail::full_scene_map(scene);
    auto dist = detail::dijkstra_distances(map, start);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : goals) {
        auto it = dist.find(g);
        if (it != dist.end()) best = std::min(best, it->second);
    }
    if (!std::isfinite(best))
        throw NoPath("no path from '" + start + "' to any goal viewpoint");
    return best;
}

/// Score one trajectory. REVERIE success is goal-viewpoint membership; R2R
/// success is Euclidean distance to the nearest goal within success_radius.
inline EpisodeMetrics score_episode(const Episode& episode,
                                    const std::vector<ViewpointId>& trajectory,
                                    const std::optional<TargetObject>& selected_object,
                                    const Scene& scene, TaskMode mode) {
    if (trajectory.empty() || trajectory.front() != episode.start)
        throw InvariantError("episode '" + episode.episode_id +
                             "': trajectory must begin at the start viewpoint");
    for (std::size_t i = 1; i < trajectory.size(); ++i)
        if (!scene.adjacent(trajectory[i - 1], trajectory[i]))
            throw InvariantError("episode '" + episode.episode_id + "': trajectory hop " +
                                 trajectory[i - 1] + "->" + trajectory[i] + " is not an edge");
    if (mode == TaskMode::REVERIE && !episode.target_object)
        throw MissingTarget("REVERIE episode '" + episode.episode_id + "' has no target_object");

    EpisodeMetrics m;
    m.episode_id = episode.episode_id;
    for (std::size_t i = 1; i < trajectory.size(); ++i)
        m.tl += distance(scene, trajectory[i - 1], trajectory[i]);

    const ViewpointId& final_vp = trajectory.back();
    auto nearest_goal_dist = [&](const ViewpointId& vp) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : episode.goal_viewpoints)
            best = std::min(best, distance(scene, vp, g));
        return best;
    };
    m.ne = nearest_goal_dist(final_vp);

    if (mode == TaskMode::REVERIE) {
        m.sr = episode.goal_viewpoints.count(final_vp) ? 1.0 : 0.0;
        m.osr = 0.0;
        for (const auto& vp : trajectory)
            if (episode.goal_viewpoints.count(vp)) m.osr = 1.0;
        m.rgs = (m.sr == 1.0 && selected_object && *selected_object == *episode.target_object)
                    ? 1.0
                    : 0.0;
    } else {
        m.sr = m.ne <= episode.success_radius ? 1.0 : 0.0;
        m.osr = 0.0;
        for (const auto& vp : trajectory)
            if (nearest_goal_dist(vp) <= episode.success_radius) m.osr = 1.0;
    }

    const double lstar = scene_shortest_length(scene, episode.start, episode.goal_viewpoints);
    const double weight = lstar == 0.0 ? 1.0 : lstar / std::max(m.tl, lstar);
    m.spl = m.sr * weight;
    if (m.rgs) m.rgspl = *m.rgs * weight;
    return m;
}

inline MetricsReport aggregate(const std::vector<EpisodeMetrics>& per_episode, TaskMode mode) {
    if (per_episode.empty()) throw EmptyInput("no episode metrics to aggregate");
    MetricsReport report;
    report.per_episode = per_episode;
    report.mode = mode;
    auto& agg = report.aggregate;
    const double n = static_cast<double>(per_episode.size());
    double rgs_sum = 0.0, rgspl_sum = 0.0;
    bool any_rgs = false;
    for (const auto& m : per_episode) {
        agg.tl += m.tl;
        agg.ne += m.ne;
        agg.sr += m.sr;
        agg.osr += m.osr;
        agg.spl += m.spl;
        if (m.rgs) {
            any_rgs = true;
            rgs_sum += *m.rgs;
            rgspl_sum += m.rgspl.value_or(0.0);
        }
    }
    agg.tl /= n;
    agg.ne /= n;
    agg.sr /= n;
    agg.osr /= n;
    agg.spl /= n;
    if (any_rgs) {
        agg.rgs = rgs_sum / n;
        agg.rgspl = rgspl_sum / n;
    }
    return report;
}

namespace detail {

inline std::string fmt2(double v) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2) << v;
    return ss.str();
}

} // namespace detail

/// Aligned plain-text table; rates reported x100. Columns follow the
/// benchmark convention: SR OSR SPL TL RGS RGSPL (REVERIE) or SR OSR NE (R2R).
inline std::string render_metrics_table(const MetricsReport& report) {
    std::vector<std::string> cols;
    if (report.mode == TaskMode::REVERIE)
        cols = {"SR", "OSR", "SPL", "TL", "RGS", "RGSPL"};
    else
        cols = {"SR", "OSR", "NE"};

    auto row_values = [&](const EpisodeMetrics& m) {
        std::vector<std::string> out;
        if (report.mode == TaskMode::REVERIE) {
            out = {detail::fmt2(m.sr * 100), detail::fmt2(m.osr * 100),
                   detail::fmt2(m.spl * 100), detail::fmt2(m.tl),
                   detail::fmt2(m.rgs.value_or(0.0) * 100),
                   detail::fmt2(m.rgspl.value_or(0.0) * 100)};
        } else {
            out = {detail::fmt2(m.sr * 100), detail::fmt2(m.osr * 100), detail::fmt2(m.ne)};
        }
        return out;
    };

    std::vector<EpisodeMetrics> rows = report.per_episode;
    std::sort(rows.begin(), rows.end(), [](const EpisodeMetrics& a, const EpisodeMetrics& b) {
        return a.episode_id < b.episode_id;
    });

    constexpr int kIdWidth = 16;
    constexpr int kColWidth = 9;
    std::ostringstream out;
    out << std::left << std::setw(kIdWidth) << "episode";
    for (const auto& c : cols) out << std::right << std::setw(kColWidth) << c;
    out << '\n';
    for (const auto& m : rows) {
        out << std::left << std::setw(kIdWidth) << m.episode_id;
        for (const auto& v : row_values(m)) out << std::right << std::setw(kColWidth) << v;
        out << '\n';
    }
    out << std::left << std::setw(kIdWidth) << "mean";
    for (const auto& v : row_values(report.aggregate))
        out << std::right << std::setw(kColWidth) << v;
    out << '\n';
    return out.str();
}

inline nlohmann::json metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["mode"] = report.mode == TaskMode::REVERIE ? "reverie" : "r2r";
    auto one = [](const EpisodeMetrics& m) {
        nlohmann::json e{{"episode_id", m.episode_id}, {"tl", m.tl},   {"ne", m.ne},
                         {"sr", m.sr},                 {"osr", m.osr}, {"spl", m.spl}};
        e["rgs"] = m.rgs ? nlohmann::json(*m.rgs) : nlohmann::json(nullptr);
        e["rgspl"] = m.rgspl ? nlohmann::json(*m.rgspl) : nlohmann::json(nullptr);
        return e;
    };
    j["per_episode"] = nlohmann::json::array();
    for (const auto& m : report.per_episode) j["per_episode"].push_back(one(m));
    j["aggregate"] = one(report.aggregate);
    return j;
}

} // namespace mcnav

#endif
