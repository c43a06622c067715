#ifndef MCNAV_COT_MINING_HPP
#define MCNAV_COT_MINING_HPP

#include <string>
#include <vector>

#include "mcnav/cot.hpp"
#include "mcnav/kmeans.hpp"
#include "mcnav/llm.hpp"
#include "mcnav/map_render.hpp"
#include "mcnav/planner.hpp"
#include "mcnav/prompts.hpp"

namespace mcnav {

/// Replay each sampled episode along its ground-truth path, asking the LLM to
/// explain every decision; the final decision is always STOP. Produces one
/// example per room type of the sampled set.
inline ExampleSet mine_examples(const std::vector<std::pair<Episode, std::string>>& sampled,
                                const Scene& scene, const BackendFactory& backends,
                                const PromptTemplates& templates, std::uint64_t seed = 0) {
    ExampleSet set;
    set.embedder_id = TrigramEmbedder{}.id();

    for (const auto& [episode, room_type] : sampled) {
        validate_episode(scene, episode);
        auto backend = backends.make(episode);

        CoTExample example;
        example.example_id = episode.episode_id;
        example.instruction = episode.instruction;
        example.room_type = room_type;

        MemoryMap map;
        update_map(map, get_observation(scene, episode.start), scene);

        for (std::size_t i = 0; i < episode.gt_path.size(); ++i) {
            const ViewpointId& here = episode.gt_path[i];
            const bool last = i + 1 == episode.gt_path.size();
            const Action gt_action = last ? kStopAction : episode.gt_path[i + 1];
            std::optional<std::string> gt_object;
            if (last && episode.target_object) gt_object = episode.target_object->proposal_id;

            auto placed = place_objects(map);
            ClusterSet clusters =
                placed.empty() ? ClusterSet{} : cluster_objects(placed, std::nullopt, seed);
            const std::string map_text = render_map_text(map, clusters);

            PromptBundle prompt = build_mining_prompt(templates, map_text, episode.instruction,
                                                      gt_action, gt_object);
            std::string explanation;
            try {
                explanation = backend->complete(prompt);
            } catch (const NavError& e) {
                throw LLMError("mining episode '" + episode.episode_id + "' step " +
                               std::to_string(i) + ": " + e.what());
            }
            example.steps.push_back({here, gt_object, explanation});

            if (!last) {
                auto path = shortest_path(map, map.current, gt_action);
                execute_path(map, path, scene);
            }
        }
        set.examples.push_back(std::move(example));
    }
    return set;
}

} // namespace mcnav

#endif
