#ifndef MCNAV_PIPELINE_HPP
#define MCNAV_PIPELINE_HPP

#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcnav/cot.hpp"
#include "mcnav/kmeans.hpp"
#include "mcnav/llm.hpp"
#include "mcnav/map_render.hpp"
#include "mcnav/metrics.hpp"
#include "mcnav/planner.hpp"
#include "mcnav/prompts.hpp"

namespace mcnav {

inline const std::string kCodeVersion = "mcnav 0.1.0";

struct RunConfig {
    int max_episode_length = 15;
    TaskMode task_mode = TaskMode::REVERIE;
    bool demo_enabled = true;
    QuerySimilarity demo_query = QuerySimilarity::RoomType;
    std::optional<int> demo_steps; // truncate the demo to its first N steps
    BackendConfig backend;
    std::string embedder_id = "trigram-256-v1";
    std::uint64_t seed = 0;
    PromptTemplates templates;
    bool debug_demo_requery = false; // re-query the demo every step and assert it is constant
};

struct PromptDigest {
    int step = 0;
    PromptMode mode = PromptMode::Inference;
    std::size_t chars = 0;
    bool has_demo_section = false;
    std::vector<Action> action_space;
};

struct EpisodeResult {
    std::string episode_id;
    std::vector<ViewpointId> trajectory;
    std::vector<Decision> decisions;
    std::optional<TargetObject> selected_object;
    bool stopped = false;
    int steps_used = 0;
    double tl_meters = 0.0;
    std::vector<std::string> degraded_flags;
    std::vector<PromptDigest> prompt_log;
};

/// Per-step hook for verification and visualization: called after the map
/// update with the step index, the map, and the action space offered to the
/// model.
using StepObserver =
    std::function<void(int step, const MemoryMap& map, const std::vector<Action>& actions)>;

namespace detail {

inline std::optional<CoTExample> select_demo(const Episode& episode, const ExampleSet& set,
                                             const Scene& scene, const RunConfig& cfg,
                                             const Embedder& embedder) {
    const CoTExample& best =
        query_example(episode.instruction, set, scene.room_type_lexicon, embedder,
                      cfg.demo_query);
    CoTExample demo = best;
    if (cfg.demo_steps && static_cast<int>(demo.steps.size()) > *cfg.demo_steps)
        demo.steps.resize(static_cast<std::size_t>(*cfg.demo_steps));
    return demo;
}

} // namespace detail

/// Run one episode end to end: observe, update the map, retrieve a demo,
/// prompt, parse the decision, plan and walk, until STOP or the step budget.
inline EpisodeResult run_episode(const Scene& scene, const Episode& episode,
                                 const ExampleSet* examples, const RunConfig& cfg,
                                 const BackendFactory& backends,
                                 const StepObserver& observer = nullptr) {
    validate_episode(scene, episode);

    EpisodeResult result;
    result.episode_id = episode.episode_id;
    result.trajectory.push_back(episode.start);

    auto embedder = make_embedder(cfg.embedder_id);
    std::optional<CoTExample> demo;
    if (cfg.demo_enabled && examples && !examples->examples.empty()) {
        if (examples->embedder_id != embedder->id())
            throw InvariantError("example set was mined with embedder '" +
                                 examples->embedder_id + "' but the run uses '" +
                                 embedder->id() + "'");
        demo = detail::select_demo(episode, *examples, scene, cfg, *embedder);
    }

    auto backend = backends.make(episode);
    MemoryMap map;
    update_map(map, get_observation(scene, episode.start), scene);

    std::vector<std::string> history;
    for (int step = 0; step < cfg.max_episode_length; ++step) {
        const auto action_space = global_action_space(map);
        const auto proposals = get_object_proposals(scene, map.current);
        if (observer) observer(step, map, action_space);

        if (cfg.debug_demo_requery && demo) {
            auto again = detail::select_demo(episode, *examples, scene, cfg, *embedder);
            if (again->example_id != demo->example_id)
                throw InvariantError("demo query is not loop-invariant for episode '" +
                                     episode.episode_id + "'");
        }

        auto placed = place_objects(map);
        ClusterSet clusters =
            placed.empty() ? ClusterSet{} : cluster_objects(placed, std::nullopt, cfg.seed);
        const std::string map_text = render_map_text(map, clusters);

        PromptBundle prompt = build_inference_prompt(cfg.templates, map_text,
                                                     episode.instruction, demo, action_space,
                                                     proposals, history);
        result.prompt_log.push_back({step, prompt.mode, prompt.total_chars(),
                                     demo.has_value(), action_space});

        // One re-prompt with a format reminder on malformed output; a second
        // failure resolves the step to STOP and flags the episode.
        std::optional<Decision> decision;
        for (int attempt = 0; attempt < 2 && !decision; ++attempt) {
            std::string text;
            try {
                text = backend->complete(prompt);
            } catch (const ScriptExhausted&) {
                break;
            }
            try {
                decision = parse_decision(text, action_space, proposals);
            } catch (const NavError&) {
                if (attempt == 0)
                    prompt.input +=
                        "\nReminder: end your answer with a line 'Selected viewpoint: <id>' "
                        "where <id> is one of the listed actions or STOP.";
            }
        }
        if (!decision) {
            decision = Decision{kStopAction, std::nullopt, "", ""};
            result.degraded_flags.push_back("parse_failure");
        }

        result.decisions.push_back(*decision);
        result.steps_used = step + 1;
        if (decision->object)
            result.selected_object = TargetObject{map.current, *decision->object};

        if (decision->action == kStopAction) {
            result.stopped = true;
            break;
        }

        auto path = shortest_path(map, map.current, decision->action);
        auto seg = execute_path(map, path, scene);
        result.tl_meters += seg.meters;
        for (const auto& vp : seg.visited) result.trajectory.push_back(vp);
        history.push_back("step " + std::to_string(step) + ": moved to " + decision->action);
    }
    return result;
}

/// Run many episodes; results keep input order. Failures are recorded on the
/// result (flag "error: ...") and never abort the suite.
inline std::vector<EpisodeResult> run_suite(const Scene& scene,
                                            const std::vector<Episode>& episodes,
                                            const ExampleSet* examples, const RunConfig& cfg,
                                            int jobs = 1) {
    BackendFactory backends(cfg.backend);
    std::vector<EpisodeResult> results(episodes.size());

    auto run_one = [&](std::size_t i) {
        try {
            results[i] = run_episode(scene, episodes[i], examples, cfg, backends);
        } catch (const NavError& e) {
            results[i].episode_id = episodes[i].episode_id;
            results[i].trajectory = {episodes[i].start};
            results[i].degraded_flags.push_back(std::string("error: ") + e.what());
        }
    };

    if (jobs <= 1) {
        for (std::size_t i = 0; i < episodes.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> futs;
        for (std::size_t i = 0; i < episodes.size(); ++i)
            futs.push_back(std::async(std::launch::async, run_one, i));
        for (auto& f : futs) f.get();
    }
    return results;
}

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
    return {{"max_episode_length", cfg.max_episode_length},
            {"task_mode", cfg.task_mode == TaskMode::REVERIE ? "reverie" : "r2r"},
            {"demo_enabled", cfg.demo_enabled},
            {"demo_query",
             cfg.demo_query == QuerySimilarity::RoomType ? "room_type" : "instruction"},
            {"demo_steps", cfg.demo_steps ? nlohmann::json(*cfg.demo_steps)
                                          : nlohmann::json(nullptr)},
            {"backend", cfg.backend.kind == BackendKind::Remote     ? "remote"
                        : cfg.backend.kind == BackendKind::Scripted ? "scripted"
                                                                    : "oracle"},
            {"model_name", cfg.backend.model_name},
            {"embedder_id", cfg.embedder_id},
            {"seed", cfg.seed}};
}

inline nlohmann::json episode_result_to_json(const EpisodeResult& r) {
    nlohmann::json j;
    j["episode_id"] = r.episode_id;
    j["trajectory"] = r.trajectory;
    j["decisions"] = nlohmann::json::array();
    for (const auto& d : r.decisions) {
        nlohmann::json jd{{"action", d.action}, {"reasoning", d.reasoning}};
        jd["object"] = d.object ? nlohmann::json(*d.object) : nlohmann::json(nullptr);
        j["decisions"].push_back(std::move(jd));
    }
    j["selected_object"] = r.selected_object
                               ? nlohmann::json{{"viewpoint", r.selected_object->viewpoint},
                                                {"proposal_id", r.selected_object->proposal_id}}
                               : nlohmann::json(nullptr);
    j["stopped"] = r.stopped;
    j["steps_used"] = r.steps_used;
    j["tl_meters"] = r.tl_meters;
    j["degraded_flags"] = r.degraded_flags;
    j["prompt_log"] = nlohmann::json::array();
    for (const auto& p : r.prompt_log) {
        j["prompt_log"].push_back({{"step", p.step},
                                   {"mode", p.mode == PromptMode::Inference ? "inference"
                                                                            : "mining"},
                                   {"chars", p.chars},
                                   {"has_demo_section", p.has_demo_section},
                                   {"action_space", p.action_space}});
    }
    return j;
}

inline EpisodeResult episode_result_from_json(const nlohmann::json& j) {
    EpisodeResult r;
    r.episode_id = j.at("episode_id").get<std::string>();
    r.trajectory = j.at("trajectory").get<std::vector<std::string>>();
    for (const auto& jd : j.at("decisions")) {
        Decision d;
        d.action = jd.at("action").get<std::string>();
        if (!jd.at("object").is_null()) d.object = jd.at("object").get<std::string>();
        d.reasoning = jd.at("reasoning").get<std::string>();
        r.decisions.push_back(std::move(d));
    }
    if (!j.at("selected_object").is_null())
        r.selected_object =
            TargetObject{j.at("selected_object").at("viewpoint").get<std::string>(),
                         j.at("selected_object").at("proposal_id").get<std::string>()};
    r.stopped = j.at("stopped").get<bool>();
    r.steps_used = j.at("steps_used").get<int>();
    r.tl_meters = j.at("tl_meters").get<double>();
    r.degraded_flags = j.at("degraded_flags").get<std::vector<std::string>>();
    for (const auto& jp : j.at("prompt_log")) {
        PromptDigest p;
        p.step = jp.at("step").get<int>();
        p.mode = jp.at("mode").get<std::string>() == "mining" ? PromptMode::Mining
                                                              : PromptMode::Inference;
        p.chars = jp.at("chars").get<std::size_t>();
        p.has_demo_section = jp.at("has_demo_section").get<bool>();
        p.action_space = jp.at("action_space").get<std::vector<std::string>>();
        r.prompt_log.push_back(std::move(p));
    }
    return r;
}

inline nlohmann::json results_file_to_json(const Scene& scene, const RunConfig& cfg,
                                           const std::vector<EpisodeResult>& results) {
    nlohmann::json j;
    j["header"] = {{"config", run_config_to_json(cfg)},
                   {"scene_ids", {scene.scene_id}},
                   {"code_version", kCodeVersion},
                   {"seed", cfg.seed}};
    j["results"] = nlohmann::json::array();
    for (const auto& r : results) j["results"].push_back(episode_result_to_json(r));
    return j;
}

inline std::vector<EpisodeResult> results_from_json(const nlohmann::json& j) {
    std::vector<EpisodeResult> out;
    for (const auto& jr : j.at("results")) out.push_back(episode_result_from_json(jr));
    return out;
}

} // namespace mcnav

#endif
