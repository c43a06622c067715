#ifndef MCNAV_SCENE_HPP
#define MCNAV_SCENE_HPP

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcnav/errors.hpp"
#include "mcnav/geometry.hpp"

namespace mcnav {

using ViewpointId = std::string;

struct DetectedObject {
    std::string label;
    std::array<double, 4> bbox{}; // x, y, w, h in image pixels
    std::string proposal_id;
};

struct Viewpoint {
    ViewpointId id;
    Vec3 position;
    std::string caption;
    std::vector<DetectedObject> detections;
    std::optional<std::string> room_type_gt;
};

/// Immutable graph world: viewpoints, undirected edges, per-viewpoint
/// precomputed captions and object detections.
struct Scene {
    std::string scene_id;
    std::vector<Viewpoint> viewpoints;
    std::vector<std::pair<ViewpointId, ViewpointId>> edges; // stored once, undirected
    std::vector<std::string> room_type_lexicon;

    // id -> index into viewpoints, built on load
    std::map<ViewpointId, std::size_t> index;

    const Viewpoint& at(const ViewpointId& id) const {
        auto it = index.find(id);
        if (it == index.end())
            throw UnknownViewpoint("unknown viewpoint '" + id + "' in scene '" + scene_id + "'");
        return viewpoints[it->second];
    }

    bool has(const ViewpointId& id) const { return index.count(id) != 0; }

    bool adjacent(const ViewpointId& a, const ViewpointId& b) const {
        for (const auto& [u, v] : edges)
            if ((u == a && v == b) || (u == b && v == a)) return true;
        return false;
    }
};

struct NeighborView {
    ViewpointId id;
    std::string caption;
    std::vector<DetectedObject> detections;
};

struct Observation {
    ViewpointId current;
    std::string current_caption;
    std::vector<DetectedObject> current_detections;
    std::vector<NeighborView> neighbors; // exactly the edge-adjacent viewpoints
};

struct TargetObject {
    ViewpointId viewpoint;
    std::string proposal_id;

    friend bool operator==(const TargetObject& a, const TargetObject& b) {
        return a.viewpoint == b.viewpoint && a.proposal_id == b.proposal_id;
    }
};

struct Episode {
    std::string episode_id;
    std::string instruction;
    ViewpointId start;
    std::set<ViewpointId> goal_viewpoints;
    std::optional<TargetObject> target_object;
    std::vector<ViewpointId> gt_path;
    double success_radius = 3.0;
};

namespace detail {

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3 || !std::all_of(j.begin(), j.end(), [](const auto& v) {
            return v.is_number();
        }))
        throw SchemaError("field '" + field + "' must be a 3-number array");
    Vec3 p{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    if (!p.finite()) throw InvariantError("field '" + field + "' must be finite");
    return p;
}

template <typename T>
T require(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw SchemaError("missing required field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError("field '" + key + "' has wrong type");
    }
}

} // namespace detail

inline void validate_scene(const Scene& scene) {
    std::set<ViewpointId> ids;
    for (const auto& vp : scene.viewpoints) {
        if (!ids.insert(vp.id).second)
            throw InvariantError("duplicate viewpoint id '" + vp.id + "'");
        if (!vp.position.finite())
            throw InvariantError("non-finite position at viewpoint '" + vp.id + "'");
        std::set<std::string> pids;
        for (const auto& det : vp.detections) {
            if (det.bbox[2] <= 0.0 || det.bbox[3] <= 0.0)
                throw InvariantError("non-positive bbox size for proposal '" + det.proposal_id +
                                     "' at viewpoint '" + vp.id + "'");
            if (!pids.insert(det.proposal_id).second)
                throw InvariantError("duplicate proposal_id '" + det.proposal_id +
                                     "' at viewpoint '" + vp.id + "'");
        }
    }
    std::set<std::pair<ViewpointId, ViewpointId>> seen;
    for (const auto& [a, b] : scene.edges) {
        if (!ids.count(a)) throw InvariantError("edge endpoint '" + a + "' does not exist");
        if (!ids.count(b)) throw InvariantError("edge endpoint '" + b + "' does not exist");
        if (a == b) throw InvariantError("self-loop edge at '" + a + "'");
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        if (!seen.insert(key).second)
            throw InvariantError("duplicate edge " + a + "-" + b);
    }
}

inline Scene scene_from_json(const nlohmann::json& j) {
    Scene scene;
    scene.scene_id = detail::require<std::string>(j, "scene_id");
    if (!j.contains("viewpoints") || !j.at("viewpoints").is_array())
        throw SchemaError("missing required field 'viewpoints'");
    for (const auto& jv : j.at("viewpoints")) {
        Viewpoint vp;
        vp.id = detail::require<std::string>(jv, "id");
        vp.position = detail::parse_vec3(jv.contains("position") ? jv.at("position")
                                                                 : nlohmann::json{},
                                         "position");
        vp.caption = detail::require<std::string>(jv, "caption");
        if (jv.contains("room_type_gt"))
            vp.room_type_gt = jv.at("room_type_gt").get<std::string>();
        if (jv.contains("detections")) {
            for (const auto& jd : jv.at("detections")) {
                DetectedObject det;
                det.label = detail::require<std::string>(jd, "label");
                auto bb = detail::require<std::vector<double>>(jd, "bbox");
                if (bb.size() != 4) throw SchemaError("field 'bbox' must have 4 numbers");
                std::copy(bb.begin(), bb.end(), det.bbox.begin());
                det.proposal_id = detail::require<std::string>(jd, "proposal_id");
                vp.detections.push_back(std::move(det));
            }
        }
        scene.viewpoints.push_back(std::move(vp));
    }
    if (j.contains("edges")) {
        for (const auto& je : j.at("edges")) {
            if (!je.is_array() || je.size() != 2)
                throw SchemaError("each edge must be a 2-element array");
            scene.edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
        }
    }
    if (j.contains("room_type_lexicon"))
        scene.room_type_lexicon = j.at("room_type_lexicon").get<std::vector<std::string>>();

    validate_scene(scene);
    for (std::size_t i = 0; i < scene.viewpoints.size(); ++i)
        scene.index[scene.viewpoints[i].id] = i;
    return scene;
}

inline nlohmann::json scene_to_json(const Scene& scene) {
    nlohmann::json j;
    j["scene_id"] = scene.scene_id;
    j["viewpoints"] = nlohmann::json::array();
    for (const auto& vp : scene.viewpoints) {
        nlohmann::json jv;
        jv["id"] = vp.id;
        jv["position"] = {vp.position.x, vp.position.y, vp.position.z};
        jv["caption"] = vp.caption;
        if (vp.room_type_gt) jv["room_type_gt"] = *vp.room_type_gt;
        jv["detections"] = nlohmann::json::array();
        for (const auto& det : vp.detections) {
            jv["detections"].push_back({{"label", det.label},
                                        {"bbox", det.bbox},
                                        {"proposal_id", det.proposal_id}});
        }
        j["viewpoints"].push_back(std::move(jv));
    }
    j["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : scene.edges) j["edges"].push_back({a, b});
    j["room_type_lexicon"] = scene.room_type_lexicon;
    return j;
}

inline Scene load_scene(const std::string& path) {
    return scene_from_json(detail::load_json_file(path));
}

inline void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write '" + path + "'");
    out << scene_to_json(scene).dump(2) << '\n';
}

inline Observation get_observation(const Scene& scene, const ViewpointId& at) {
    const Viewpoint& here = scene.at(at);
    Observation obs;
    obs.current = here.id;
    obs.current_caption = here.caption;
    obs.current_detections = here.detections;
    std::vector<ViewpointId> adj;
    for (const auto& [a, b] : scene.edges) {
        if (a == at) adj.push_back(b);
        if (b == at) adj.push_back(a);
    }
    std::sort(adj.begin(), adj.end());
    for (const auto& id : adj) {
        const Viewpoint& n = scene.at(id);
        obs.neighbors.push_back({n.id, n.caption, n.detections});
    }
    return obs;
}

/// Local navigable set at a viewpoint: edge-adjacent ids, lexicographic.
inline std::vector<ViewpointId> get_navigational_viewpoints(const Scene& scene,
                                                            const ViewpointId& at) {
    scene.at(at); // existence check
    std::vector<ViewpointId> out;
    for (const auto& [a, b] : scene.edges) {
        if (a == at) out.push_back(b);
        if (b == at) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<DetectedObject> get_object_proposals(const Scene& scene,
                                                        const ViewpointId& at) {
    return scene.at(at).detections;
}

inline double distance(const Scene& scene, const ViewpointId& a, const ViewpointId& b) {
    return euclidean(scene.at(a).position, scene.at(b).position);
}

inline void validate_episode(const Scene& scene, const Episode& ep) {
    if (!scene.has(ep.start))
        throw InvariantError("episode '" + ep.episode_id + "': start '" + ep.start +
                             "' not in scene");
    for (const auto& g : ep.goal_viewpoints)
        if (!scene.has(g))
            throw InvariantError("episode '" + ep.episode_id + "': goal '" + g + "' not in scene");
    if (ep.gt_path.empty() || ep.gt_path.front() != ep.start)
        throw InvariantError("episode '" + ep.episode_id + "': gt_path must begin at start");
    for (std::size_t i = 0; i < ep.gt_path.size(); ++i) {
        if (!scene.has(ep.gt_path[i]))
            throw InvariantError("episode '" + ep.episode_id + "': gt_path entry '" +
                                 ep.gt_path[i] + "' not in scene");
        if (i > 0 && !scene.adjacent(ep.gt_path[i - 1], ep.gt_path[i]))
            throw InvariantError("episode '" + ep.episode_id + "': gt_path hop " +
                                 ep.gt_path[i - 1] + "->" + ep.gt_path[i] + " is not an edge");
    }
    if (ep.target_object) {
        const Viewpoint& vp = scene.at(ep.target_object->viewpoint);
        bool found = std::any_of(vp.detections.begin(), vp.detections.end(),
                                 [&](const DetectedObject& d) {
                                     return d.proposal_id == ep.target_object->proposal_id;
                                 });
        if (!found)
            throw InvariantError("episode '" + ep.episode_id + "': target proposal '" +
                                 ep.target_object->proposal_id + "' not at viewpoint '" +
                                 ep.target_object->viewpoint + "'");
    }
}

inline Episode episode_from_json(const nlohmann::json& j) {
    Episode ep;
    ep.episode_id = detail::require<std::string>(j, "episode_id");
    ep.instruction = detail::require<std::string>(j, "instruction");
    ep.start = detail::require<std::string>(j, "start");
    for (const auto& g : detail::require<std::vector<std::string>>(j, "goal_viewpoints"))
        ep.goal_viewpoints.insert(g);
    if (j.contains("target_object") && !j.at("target_object").is_null()) {
        const auto& jt = j.at("target_object");
        ep.target_object = TargetObject{detail::require<std::string>(jt, "viewpoint"),
                                        detail::require<std::string>(jt, "proposal_id")};
    }
    ep.gt_path = detail::require<std::vector<std::string>>(j, "gt_path");
    if (j.contains("success_radius")) ep.success_radius = j.at("success_radius").get<double>();
    return ep;
}

inline nlohmann::json episode_to_json(const Episode& ep) {
    nlohmann::json j;
    j["episode_id"] = ep.episode_id;
    j["instruction"] = ep.instruction;
    j["start"] = ep.start;
    j["goal_viewpoints"] = ep.goal_viewpoints;
    if (ep.target_object)
        j["target_object"] = {{"viewpoint", ep.target_object->viewpoint},
                              {"proposal_id", ep.target_object->proposal_id}};
    j["gt_path"] = ep.gt_path;
    j["success_radius"] = ep.success_radius;
    return j;
}

inline std::vector<Episode> load_episodes(const std::string& path) {
    auto j = detail::load_json_file(path);
    if (!j.is_array()) throw SchemaError("episode file must be a JSON array");
    std::vector<Episode> out;
    for (const auto& je : j) out.push_back(episode_from_json(je));
    return out;
}

} // namespace mcnav

#endif
