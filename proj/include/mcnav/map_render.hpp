#ifndef MCNAV_MAP_RENDER_HPP
#define MCNAV_MAP_RENDER_HPP

#include <sstream>
#include <string>

#include <json.hpp>

#include "mcnav/kmeans.hpp"
#include "mcnav/memory_map.hpp"

namespace mcnav {

/// Id of the cluster whose centroid is nearest to `pos`, ties to the lowest
/// cluster id; -1 when there are no clusters.
inline int nearest_cluster(const ClusterSet& clusters, const Vec3& pos) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& cl : clusters.clusters) {
        double d = squared_distance(pos, cl.centroid);
        if (d < best_d) {
            best_d = d;
            best = cl.cluster_id;
        }
    }
    return best;
}

/// Textual interpretation of the map, two lines:
///   Memory topological map: |0: {chair, table}| |1: {...}|
///   Navigable viewpoints: <B, a hallway, near cluster 0> <...>
/// Viewpoint entries follow global_action_space order (STOP excluded).
inline std::string render_map_text(const MemoryMap& map, const ClusterSet& clusters) {
    std::ostringstream out;
    out << "Memory topological map: ";
    for (const auto& cl : clusters.clusters) {
        if (cl.cluster_id > 0) out << ' ';
        out << '|' << cl.cluster_id << ": {";
        for (std::size_t i = 0; i < cl.members.size(); ++i) {
            if (i) out << ", ";
            out << cl.members[i].label;
        }
        out << "}|";
    }
    out << "\nNavigable viewpoints:";
    for (const auto& action : global_action_space(map)) {
        if (action == kStopAction) continue;
        const NodeRecord& rec = map.nodes.at(action);
        int c = nearest_cluster(clusters, rec.position);
        out << " <" << rec.id << ", " << rec.caption << ", near cluster ";
        if (c < 0)
            out << "none";
        else
            out << c;
        out << '>';
    }
    return out.str();
}

inline nlohmann::json map_to_json(const MemoryMap& map, const ClusterSet& clusters) {
    nlohmann::json j;
    j["current"] = map.current;
    j["step"] = map.step;
    j["nodes"] = nlohmann::json::array();
    for (const auto& [id, rec] : map.nodes) {
        j["nodes"].push_back({{"id", id},
                              {"position", {rec.position.x, rec.position.y, rec.position.z}},
                              {"caption", rec.caption},
                              {"first_seen_step", rec.first_seen_step},
                              {"visited", map.visited.count(id) != 0},
                              {"current", id == map.current}});
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : map.edges) j["edges"].push_back({a, b});
    j["placed_objects"] = nlohmann::json::array();
    for (const auto& obj : place_objects(map)) {
        j["placed_objects"].push_back(
            {{"label", obj.label},
             {"position", {obj.position.x, obj.position.y, obj.position.z}},
             {"source_viewpoints", obj.source_viewpoints}});
    }
    j["clusters"] = nlohmann::json::array();
    for (const auto& cl : clusters.clusters) {
        std::vector<std::string> labels;
        for (const auto& m : cl.members) labels.push_back(m.label);
        j["clusters"].push_back(
            {{"cluster_id", cl.cluster_id},
             {"members", labels},
             {"centroid", {cl.centroid.x, cl.centroid.y, cl.centroid.z}}});
    }
    return j;
}

/// Graphviz export: red = current node, blue = visited, yellow = frontier,
/// boxes = object clusters.
inline std::string map_to_dot(const MemoryMap& map, const ClusterSet& clusters) {
    std::ostringstream out;
    out << "graph memory_map {\n";
    for (const auto& [id, rec] : map.nodes) {
        const char* color = id == map.current ? "red"
                            : map.visited.count(id) ? "blue"
                                                    : "yellow";
        out << "  \"" << id << "\" [style=filled, fillcolor=" << color << ", label=\"" << id
            << "\"];\n";
    }
    for (const auto& [a, b] : map.edges)
        out << "  \"" << a << "\" -- \"" << b << "\";\n";
    for (const auto& cl : clusters.clusters) {
        out << "  \"cluster_" << cl.cluster_id << "\" [shape=box, label=\"" << cl.cluster_id
            << ": ";
        for (std::size_t i = 0; i < cl.members.size(); ++i) {
            if (i) out << ", ";
            out << cl.members[i].label;
        }
        out << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace mcnav

#endif
