#ifndef MCNAV_MEMORY_MAP_HPP
#define MCNAV_MEMORY_MAP_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mcnav/errors.hpp"
#include "mcnav/scene.hpp"

namespace mcnav {

/// Sentinel action adjoined to the navigable set.
inline const std::string kStopAction = "STOP";

using Action = std::string; // a viewpoint id or kStopAction

struct NodeRecord {
    ViewpointId id;
    Vec3 position;
    std::string caption;
    std::vector<DetectedObject> detections;
    int first_seen_step = 0;
};

/// Incrementally built topological memory graph. Nodes and edges only grow;
/// captions and detections persist from first observation.
struct MemoryMap {
    std::map<ViewpointId, NodeRecord> nodes;
    std::set<std::pair<ViewpointId, ViewpointId>> edges; // ordered pairs, first < second
    ViewpointId current;
    std::set<ViewpointId> visited;
    std::set<ViewpointId> offered; // union of all local navigable sets seen so far
    int step = 0;

    bool empty() const { return nodes.empty(); }

    std::set<ViewpointId> adjacency(const ViewpointId& id) const {
        std::set<ViewpointId> out;
        for (const auto& [a, b] : edges) {
            if (a == id) out.insert(b);
            if (b == id) out.insert(a);
        }
        return out;
    }

    static std::pair<ViewpointId, ViewpointId> edge_key(const ViewpointId& a,
                                                        const ViewpointId& b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    }
};

namespace detail {

// Scene positions are needed to place nodes; observations carry no geometry,
// so the updater takes the scene for coordinates only.
inline void add_node(MemoryMap& map, const ViewpointId& id, const Vec3& pos,
                     const std::string& caption, const std::vector<DetectedObject>& dets) {
    if (map.nodes.count(id)) return; // captions/detections persist once set
    NodeRecord rec;
    rec.id = id;
    rec.position = pos;
    rec.caption = caption;
    rec.detections = dets;
    rec.first_seen_step = map.step;
    map.nodes[id] = rec;
}

} // namespace detail

/// Fold one observation into the map: the current viewpoint and all its
/// neighbors become nodes, edges current<->neighbor are added, current is
/// marked visited and the step counter advances.
inline void update_map(MemoryMap& map, const Observation& obs, const Scene& scene) {
    // A revisited node must report the same neighborhood it had when visited.
    if (map.visited.count(obs.current)) {
        std::set<ViewpointId> reported;
        for (const auto& n : obs.neighbors) reported.insert(n.id);
        if (reported != map.adjacency(obs.current))
            throw InconsistentObservation("viewpoint '" + obs.current +
                                          "' reports a neighbor set contradicting prior edges");
    }

    detail::add_node(map, obs.current, scene.at(obs.current).position, obs.current_caption,
                     obs.current_detections);
    for (const auto& n : obs.neighbors) {
        detail::add_node(map, n.id, scene.at(n.id).position, n.caption, n.detections);
        map.edges.insert(MemoryMap::edge_key(obs.current, n.id));
        map.offered.insert(n.id);
    }
    map.current = obs.current;
    map.visited.insert(obs.current);
    map.step += 1;
}

/// Global action space: every viewpoint ever offered as navigable, minus the
/// current one, plus STOP. Unvisited frontier first, then visited, both
/// lexicographic.
inline std::vector<Action> global_action_space(const MemoryMap& map) {
    std::vector<Action> frontier, known;
    for (const auto& id : map.offered) {
        if (id == map.current) continue;
        (map.visited.count(id) ? known : frontier).push_back(id);
    }
    std::vector<Action> out;
    out.insert(out.end(), frontier.begin(), frontier.end());
    out.insert(out.end(), known.begin(), known.end());
    out.push_back(kStopAction);
    return out;
}

struct PlacedObject {
    std::string label;
    Vec3 position; // centroid of source viewpoint positions
    std::set<ViewpointId> source_viewpoints;
};

/// One placed object per distinct detection label, at the geometric center
/// of the viewpoints observing it.
inline std::vector<PlacedObject> place_objects(const MemoryMap& map) {
    std::map<std::string, PlacedObject> by_label;
    for (const auto& [id, rec] : map.nodes) {
        for (const auto& det : rec.detections) {
            auto& obj = by_label[det.label];
            obj.label = det.label;
            obj.source_viewpoints.insert(id);
        }
    }
    std::vector<PlacedObject> out;
    for (auto& [label, obj] : by_label) {
        Vec3 sum;
        for (const auto& id : obj.source_viewpoints) sum = sum + map.nodes.at(id).position;
        obj.position = sum / static_cast<double>(obj.source_viewpoints.size());
        out.push_back(obj);
    }
    // std::map iteration already yields labels lexicographically
    return out;
}

} // namespace mcnav

#endif
