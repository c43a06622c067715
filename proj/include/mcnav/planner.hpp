#ifndef MCNAV_PLANNER_HPP
#define MCNAV_PLANNER_HPP

#include <limits>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "mcnav/memory_map.hpp"

namespace mcnav {

struct PlannedPath {
    std::vector<ViewpointId> waypoints; // inclusive of start and goal
    double length = 0.0;                // meters
};

namespace detail {

/// Dijkstra distances from `source` over the map's edges, weighted by
/// Euclidean distance between node positions.
inline std::map<ViewpointId, double> dijkstra_distances(const MemoryMap& map,
                                                        const ViewpointId& source) {
    std::map<ViewpointId, std::vector<std::pair<ViewpointId, double>>> adj;
    for (const auto& [a, b] : map.edges) {
        double w = euclidean(map.nodes.at(a).position, map.nodes.at(b).position);
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
    }

    std::map<ViewpointId, double> dist;
    using Item = std::pair<double, ViewpointId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.emplace(0.0, source);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist.at(u)) continue;
        for (const auto& [v, w] : adj[u]) {
            double nd = d + w;
            auto it = dist.find(v);
            if (it == dist.end() || nd < it->second) {
                dist[v] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    return dist;
}

} // namespace detail

/// Shortest path between two map nodes; among equal-length paths the
/// lexicographically smallest waypoint sequence is returned.
inline PlannedPath shortest_path(const MemoryMap& map, const ViewpointId& from,
                                 const ViewpointId& to) {
    if (!map.nodes.count(from))
        throw UnknownViewpoint("planner: unknown viewpoint '" + from + "'");
    if (!map.nodes.count(to))
        throw UnknownViewpoint("planner: unknown viewpoint '" + to + "'");
    if (from == to) return PlannedPath{{from}, 0.0};

    // Distances to the goal let us walk the shortest-path DAG forward,
    // greedily taking the smallest viewpoint id at each hop.
    auto dist_to_goal = detail::dijkstra_distances(map, to);
    auto it = dist_to_goal.find(from);
    if (it == dist_to_goal.end())
        throw NoPath("no path from '" + from + "' to '" + to + "'");
    const double total = it->second;

    PlannedPath path;
    path.waypoints.push_back(from);
    path.length = total;
    ViewpointId cur = from;
    constexpr double kEps = 1e-12;
    while (cur != to) {
        const double remaining = dist_to_goal.at(cur);
        ViewpointId next;
        for (const auto& nb : map.adjacency(cur)) { // adjacency() is sorted
            auto dit = dist_to_goal.find(nb);
            if (dit == dist_to_goal.end()) continue;
            double w = euclidean(map.nodes.at(cur).position, map.nodes.at(nb).position);
            if (std::abs(w + dit->second - remaining) <= kEps * std::max(1.0, remaining)) {
                next = nb;
                break;
            }
        }
        if (next.empty()) throw NoPath("shortest-path reconstruction failed at '" + cur + "'");
        path.waypoints.push_back(next);
        cur = next;
    }
    return path;
}

struct TrajectorySegment {
    std::vector<ViewpointId> visited; // waypoints after the start, in order
    double meters = 0.0;
};

/// Walk the path hop by hop. Every traversed viewpoint is observed and folded
/// into the map, so transit extends memory; meters accumulate into TL.
inline TrajectorySegment execute_path(MemoryMap& map, const PlannedPath& path,
                                      const Scene& scene) {
    if (path.waypoints.empty() || path.waypoints.front() != map.current)
        throw WalkError("path does not start at the current viewpoint");

    TrajectorySegment seg;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
        const auto& prev = path.waypoints[i - 1];
        const auto& next = path.waypoints[i];
        if (!map.edges.count(MemoryMap::edge_key(prev, next)))
            throw WalkError("missing map edge " + prev + "-" + next);
        seg.meters += euclidean(map.nodes.at(prev).position, map.nodes.at(next).position);
        update_map(map, get_observation(scene, next), scene);
        seg.visited.push_back(next);
    }
    return seg;
}

} // namespace mcnav

#endif
