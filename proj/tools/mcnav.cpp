// mcnav: operator entry point for the graph-world navigation framework.
// Subcommands: run, mine, eval, render-map, validate.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcnav/cot_mining.hpp"
#include "mcnav/metrics.hpp"
#include "mcnav/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

mcnav::BackendConfig resolve_backend(const std::string& kind, const std::string& config_path,
                                     const std::string& script_path) {
    mcnav::BackendConfig cfg;
    if (!config_path.empty())
        cfg = mcnav::backend_config_from_json(mcnav::detail::load_json_file(config_path));
    if (!kind.empty()) cfg.kind = mcnav::backend_kind_from_string(kind);
    if (!script_path.empty()) cfg.script_path = script_path;
    cfg.validate();
    return cfg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw mcnav::IOError("cannot write '" + path + "'");
    out << content;
}

struct CommonRunFlags {
    std::string scene_path, episodes_path, examples_path, backend, config_path, script_path;
    std::string mode = "reverie";
    std::string out_path;
    int max_steps = 15;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool no_demo = false;
    std::string demo_query = "room_type";
    std::optional<int> demo_steps;
    std::string templates_dir;
};

int cmd_run(const CommonRunFlags& f) {
    mcnav::Scene scene = mcnav::load_scene(f.scene_path);
    auto episodes = mcnav::load_episodes(f.episodes_path);
    for (const auto& ep : episodes) mcnav::validate_episode(scene, ep);

    mcnav::RunConfig cfg;
    cfg.max_episode_length = f.max_steps;
    cfg.task_mode = mcnav::task_mode_from_string(f.mode);
    cfg.backend = resolve_backend(f.backend, f.config_path, f.script_path);
    cfg.seed = f.seed;
    cfg.demo_query = f.demo_query == "instruction" ? mcnav::QuerySimilarity::Instruction
                                                   : mcnav::QuerySimilarity::RoomType;
    cfg.demo_steps = f.demo_steps;
    if (!f.templates_dir.empty()) cfg.templates = mcnav::load_prompt_templates(f.templates_dir);

    std::optional<mcnav::ExampleSet> examples;
    if (!f.examples_path.empty()) {
        examples = mcnav::load_example_set(f.examples_path);
    } else {
        cfg.demo_enabled = false;
        std::cerr << "notice: no --examples given, running with demonstration disabled\n";
    }
    if (f.no_demo) cfg.demo_enabled = false;

    auto results = mcnav::run_suite(scene, episodes, examples ? &*examples : nullptr, cfg,
                                    f.jobs);
    write_file(f.out_path, mcnav::results_file_to_json(scene, cfg, results).dump(2) + "\n");

    std::vector<mcnav::EpisodeMetrics> per;
    for (std::size_t i = 0; i < results.size(); ++i)
        per.push_back(mcnav::score_episode(episodes[i], results[i].trajectory,
                                           results[i].selected_object, scene, cfg.task_mode));
    std::cout << mcnav::render_metrics_table(mcnav::aggregate(per, cfg.task_mode));
    return kExitOk;
}

int cmd_mine(const CommonRunFlags& f) {
    mcnav::Scene scene = mcnav::load_scene(f.scene_path);
    auto episodes = mcnav::load_episodes(f.episodes_path);
    if (episodes.empty()) throw mcnav::EmptyInput("episode file contains no episodes");
    for (const auto& ep : episodes) mcnav::validate_episode(scene, ep);

    auto sampled = mcnav::build_sampled_training_set(episodes, scene);
    mcnav::BackendFactory backends(resolve_backend(f.backend, f.config_path, f.script_path));
    mcnav::PromptTemplates templates;
    if (!f.templates_dir.empty()) templates = mcnav::load_prompt_templates(f.templates_dir);

    auto set = mcnav::mine_examples(sampled, scene, backends, templates, f.seed);
    mcnav::save_example_set(set, f.out_path);
    for (const auto& ex : set.examples)
        std::cout << ex.room_type << ": 1 example (" << ex.steps.size() << " steps)\n";
    std::cout << "total: " << set.examples.size() << " examples -> " << f.out_path << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& results_path, const std::string& episodes_path,
             const std::string& scene_path, const std::string& mode) {
    mcnav::Scene scene = mcnav::load_scene(scene_path);
    auto episodes = mcnav::load_episodes(episodes_path);
    auto results = mcnav::results_from_json(mcnav::detail::load_json_file(results_path));
    if (results.empty()) throw mcnav::EmptyInput("results file contains no episodes");

    const auto task_mode = mcnav::task_mode_from_string(mode);
    std::vector<mcnav::EpisodeMetrics> per;
    for (const auto& r : results) {
        auto it = std::find_if(episodes.begin(), episodes.end(), [&](const mcnav::Episode& e) {
            return e.episode_id == r.episode_id;
        });
        if (it == episodes.end())
            throw mcnav::InvariantError("result references unknown episode '" + r.episode_id +
                                        "'");
        per.push_back(
            mcnav::score_episode(*it, r.trajectory, r.selected_object, scene, task_mode));
    }
    std::cout << mcnav::render_metrics_table(mcnav::aggregate(per, task_mode));
    return kExitOk;
}

int cmd_render_map(const std::string& results_path, const std::string& scene_path,
                   const std::string& episode_id, std::optional<int> step,
                   const std::string& format, const std::string& out_path,
                   std::uint64_t seed) {
    mcnav::Scene scene = mcnav::load_scene(scene_path);
    auto results = mcnav::results_from_json(mcnav::detail::load_json_file(results_path));
    auto it = std::find_if(results.begin(), results.end(), [&](const mcnav::EpisodeResult& r) {
        return r.episode_id == episode_id;
    });
    if (it == results.end())
        throw mcnav::InvariantError("episode '" + episode_id + "' not found in results");

    const int max_moves = static_cast<int>(it->trajectory.size()) - 1;
    const int moves = step.value_or(max_moves);
    if (moves < 0 || moves > max_moves)
        throw mcnav::InvariantError("step " + std::to_string(moves) +
                                    " out of range (0.." + std::to_string(max_moves) + ")");

    mcnav::MemoryMap map;
    mcnav::update_map(map, mcnav::get_observation(scene, it->trajectory.front()), scene);
    for (int i = 1; i <= moves; ++i)
        mcnav::update_map(map, mcnav::get_observation(scene, it->trajectory[i]), scene);

    auto placed = mcnav::place_objects(map);
    mcnav::ClusterSet clusters =
        placed.empty() ? mcnav::ClusterSet{} : mcnav::cluster_objects(placed, std::nullopt, seed);

    if (format == "dot")
        write_file(out_path, mcnav::map_to_dot(map, clusters));
    else
        write_file(out_path, mcnav::map_to_json(map, clusters).dump(2) + "\n");
    return kExitOk;
}

int cmd_validate(const std::string& scene_path, const std::string& episodes_path) {
    mcnav::Scene scene = mcnav::load_scene(scene_path);
    std::cout << "scene '" << scene.scene_id << "': " << scene.viewpoints.size()
              << " viewpoints, " << scene.edges.size() << " edges: OK\n";
    if (!episodes_path.empty()) {
        auto episodes = mcnav::load_episodes(episodes_path);
        for (const auto& ep : episodes) mcnav::validate_episode(scene, ep);
        std::cout << episodes.size() << " episodes: OK\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-driven graph-world navigation: run, mine, eval, render-map, validate"};
    app.require_subcommand(1);

    CommonRunFlags f;
    std::string results_path, episode_id, format = "dot";
    std::optional<int> render_step;

    auto* run = app.add_subcommand("run", "Run a navigation suite and score it");
    run->add_option("--scene", f.scene_path)->required();
    run->add_option("--episodes", f.episodes_path)->required();
    run->add_option("--examples", f.examples_path);
    run->add_option("--backend", f.backend)->check(CLI::IsMember({"remote", "scripted", "oracle"}));
    run->add_option("--config", f.config_path);
    run->add_option("--script", f.script_path);
    run->add_option("--mode", f.mode)->check(CLI::IsMember({"reverie", "r2r"}));
    run->add_option("--max-steps", f.max_steps);
    run->add_option("--seed", f.seed);
    run->add_option("--out", f.out_path)->required();
    run->add_option("--jobs", f.jobs);
    run->add_flag("--no-demo", f.no_demo);
    run->add_option("--demo-query", f.demo_query)
        ->check(CLI::IsMember({"room_type", "instruction"}));
    run->add_option("--demo-steps", [&f](const std::vector<std::string>& v) {
        f.demo_steps = std::stoi(v.at(0));
        return true;
    }, "Truncate the demonstration to its first N steps");
    run->add_option("--templates", f.templates_dir);

    auto* mine = app.add_subcommand("mine", "Mine chain-of-thought examples from gt paths");
    mine->add_option("--scene", f.scene_path)->required();
    mine->add_option("--episodes", f.episodes_path)->required();
    mine->add_option("--backend", f.backend)
        ->check(CLI::IsMember({"remote", "scripted", "oracle"}));
    mine->add_option("--config", f.config_path);
    mine->add_option("--script", f.script_path);
    mine->add_option("--seed", f.seed);
    mine->add_option("--out", f.out_path)->required();
    mine->add_option("--templates", f.templates_dir);

    auto* eval = app.add_subcommand("eval", "Re-score a results file from its trajectories");
    eval->add_option("--results", results_path)->required();
    eval->add_option("--episodes", f.episodes_path)->required();
    eval->add_option("--scene", f.scene_path)->required();
    eval->add_option("--mode", f.mode)->check(CLI::IsMember({"reverie", "r2r"}));

    auto* render = app.add_subcommand("render-map", "Replay and export a memory map");
    render->add_option("--results", results_path)->required();
    render->add_option("--scene", f.scene_path)->required();
    render->add_option("--episode-id", episode_id)->required();
    render->add_option("--step", [&render_step](const std::vector<std::string>& v) {
        render_step = std::stoi(v.at(0));
        return true;
    }, "Replay only the first N moves");
    render->add_option("--format", format)->check(CLI::IsMember({"dot", "json"}));
    render->add_option("--out", f.out_path)->required();
    render->add_option("--seed", f.seed);

    auto* validate = app.add_subcommand("validate", "Validate scene and episode files");
    validate->add_option("--scene", f.scene_path)->required();
    validate->add_option("--episodes", f.episodes_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(f);
        if (mine->parsed()) return cmd_mine(f);
        if (eval->parsed()) return cmd_eval(results_path, f.episodes_path, f.scene_path, f.mode);
        if (render->parsed())
            return cmd_render_map(results_path, f.scene_path, episode_id, render_step, format,
                                  f.out_path, f.seed);
        if (validate->parsed()) return cmd_validate(f.scene_path, f.episodes_path);
    } catch (const mcnav::TransportError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const mcnav::LLMError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const mcnav::NavError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
