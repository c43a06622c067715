#ifndef MCNAV_COT_HPP
#define MCNAV_COT_HPP

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcnav/embedding.hpp"
#include "mcnav/errors.hpp"
#include "mcnav/scene.hpp"

namespace mcnav {

/// One mined demonstration: the instruction, its destination room type, and
/// a per-step explanation along the ground-truth path.
struct CoTStep {
    ViewpointId viewpoint;                   // where the agent stood
    std::optional<std::string> object;       // proposal selected at this step, if any
    std::string explanation;
};

struct CoTExample {
    std::string example_id;
    std::string instruction;
    std::string room_type;
    std::vector<CoTStep> steps;
};

struct ExampleSet {
    std::vector<CoTExample> examples;
    std::string embedder_id;
};

namespace detail {

inline std::string to_lower(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

} // namespace detail

/// First room-type noun in the instruction: case-insensitive substring scan,
/// leftmost occurrence wins, longest lexicon entry wins at equal offsets.
inline std::optional<std::string> extract_room_type(const std::string& instruction,
                                                    const std::vector<std::string>& lexicon) {
    const std::string hay = detail::to_lower(instruction);
    std::optional<std::string> best;
    std::size_t best_pos = std::string::npos;
    std::size_t best_len = 0;
    for (const auto& entry : lexicon) {
        if (entry.empty()) continue;
        std::size_t pos = hay.find(detail::to_lower(entry));
        if (pos == std::string::npos) continue;
        if (pos < best_pos || (pos == best_pos && entry.size() > best_len)) {
            best = entry;
            best_pos = pos;
            best_len = entry.size();
        }
    }
    return best;
}

enum class QuerySimilarity { RoomType, Instruction };

/// Retrieve the demonstration whose room type is closest (cosine) to the
/// instruction's room type, or to the whole instruction when no room-type
/// noun occurs. Ties break to the lowest example index.
inline const CoTExample& query_example(const std::string& instruction, const ExampleSet& set,
                                       const std::vector<std::string>& lexicon,
                                       const Embedder& embedder,
                                       QuerySimilarity similarity = QuerySimilarity::RoomType) {
    if (set.examples.empty()) throw EmptyExampleSet("example set is empty");

    EmbeddingVector query;
    if (similarity == QuerySimilarity::RoomType) {
        auto room = extract_room_type(instruction, lexicon);
        query = embedder.embed(room ? *room : instruction);
    } else {
        query = embedder.embed(instruction);
    }

    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < set.examples.size(); ++i) {
        const std::string& key = similarity == QuerySimilarity::RoomType
                                     ? set.examples[i].room_type
                                     : set.examples[i].instruction;
        double sim = cosine_similarity(query, embedder.embed(key));
        if (sim > best_sim) {
            best_sim = sim;
            best = i;
        }
    }
    return set.examples[best];
}

/// Group episodes by the ground-truth room type of their goal viewpoint and
/// keep the episode with the smallest episode_id per room type.
inline std::vector<std::pair<Episode, std::string>> build_sampled_training_set(
    const std::vector<Episode>& episodes, const Scene& scene) {
    std::vector<Episode> sorted = episodes;
    std::sort(sorted.begin(), sorted.end(),
              [](const Episode& a, const Episode& b) { return a.episode_id < b.episode_id; });

    std::vector<std::pair<Episode, std::string>> out;
    std::set<std::string> seen;
    for (const auto& ep : sorted) {
        const ViewpointId goal =
            ep.gt_path.empty() ? ep.start : ep.gt_path.back();
        const Viewpoint& vp = scene.at(goal);
        if (!vp.room_type_gt)
            throw MissingRoomType("episode '" + ep.episode_id + "': goal viewpoint '" + goal +
                                  "' has no room_type_gt");
        if (seen.insert(*vp.room_type_gt).second) out.emplace_back(ep, *vp.room_type_gt);
    }
    return out;
}

inline nlohmann::json example_set_to_json(const ExampleSet& set) {
    nlohmann::json j;
    j["embedder_id"] = set.embedder_id;
    j["examples"] = nlohmann::json::array();
    for (const auto& ex : set.examples) {
        nlohmann::json je{{"example_id", ex.example_id},
                          {"instruction", ex.instruction},
                          {"room_type", ex.room_type},
                          {"steps", nlohmann::json::array()}};
        for (const auto& st : ex.steps) {
            nlohmann::json js{{"viewpoint", st.viewpoint}, {"explanation", st.explanation}};
            if (st.object) js["object"] = *st.object;
            je["steps"].push_back(std::move(js));
        }
        j["examples"].push_back(std::move(je));
    }
    return j;
}

inline ExampleSet example_set_from_json(const nlohmann::json& j) {
    ExampleSet set;
    set.embedder_id = detail::require<std::string>(j, "embedder_id");
    for (const auto& je : j.at("examples")) {
        CoTExample ex;
        ex.example_id = detail::require<std::string>(je, "example_id");
        ex.instruction = detail::require<std::string>(je, "instruction");
        ex.room_type = detail::require<std::string>(je, "room_type");
        for (const auto& js : je.at("steps")) {
            CoTStep st;
            st.viewpoint = detail::require<std::string>(js, "viewpoint");
            if (js.contains("object")) st.object = js.at("object").get<std::string>();
            st.explanation = detail::require<std::string>(js, "explanation");
            ex.steps.push_back(std::move(st));
        }
        if (ex.steps.empty())
            throw InvariantError("example '" + ex.example_id + "' has no steps");
        set.examples.push_back(std::move(ex));
    }
    return set;
}

inline void save_example_set(const ExampleSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write '" + path + "'");
    out << example_set_to_json(set).dump(2) << '\n';
}

inline ExampleSet load_example_set(const std::string& path) {
    return example_set_from_json(detail::load_json_file(path));
}

} // namespace mcnav

#endif
