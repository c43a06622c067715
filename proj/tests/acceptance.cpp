// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is checked against an independent oracle (brute
// force, hand-scored fixtures, or the real CLI binary).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

#include "mcnav/cot_mining.hpp"
#include "mcnav/pipeline.hpp"
#include "test_util.hpp"

using namespace mcnav;

namespace {

int failures = 0;

void criterion(const std::string& name, const std::function<void()>& body) {
    try {
        body();
        std::cout << "PASS  " << name << "\n";
    } catch (const std::exception& e) {
        ++failures;
        std::cout << "FAIL  " << name << " -- " << e.what() << "\n";
    }
}

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

Scene house() { return testutil::house(); }

std::vector<Episode> house_episodes() {
    return load_episodes(testutil::fixture("house_episodes.json"));
}

ExampleSet mined(const Scene& scene) {
    auto sampled = build_sampled_training_set(house_episodes(), scene);
    BackendConfig cfg;
    cfg.kind = BackendKind::Scripted;
    cfg.script_path = testutil::fixture("mining_script.json");
    return mine_examples(sampled, scene, BackendFactory(cfg), PromptTemplates{});
}

int run_cli(const std::string& args, const std::string& stdout_file) {
    std::string cmd = std::string(MCNAV_CLI_PATH) + " " + args + " > " + stdout_file +
                      " 2>/dev/null";
    return std::system(cmd.c_str());
}

// Minimal parser for the two-line map text; returns cluster ids and the
// viewpoint ids in order, throwing on any grammar violation.
struct ParsedMapText {
    std::vector<int> cluster_ids;
    std::vector<std::string> viewpoint_ids;
};

ParsedMapText parse_map_text(const std::string& text) {
    auto nl = text.find('\n');
    require(nl != std::string::npos, "map text must have two lines");
    std::string line1 = text.substr(0, nl);
    std::string line2 = text.substr(nl + 1);

    const std::string h1 = "Memory topological map: ";
    require(line1.rfind(h1, 0) == 0, "bad map header");
    ParsedMapText out;
    std::size_t pos = h1.size();
    while (pos < line1.size()) {
        require(line1[pos] == '|', "cluster entry must open with '|'");
        auto colon = line1.find(": {", pos);
        require(colon != std::string::npos, "cluster entry missing ': {'");
        out.cluster_ids.push_back(std::stoi(line1.substr(pos + 1, colon - pos - 1)));
        auto close = line1.find("}|", colon);
        require(close != std::string::npos, "cluster entry missing '}|'");
        pos = close + 2;
        if (pos < line1.size()) {
            require(line1[pos] == ' ', "cluster entries separated by one space");
            ++pos;
        }
    }

    const std::string h2 = "Navigable viewpoints:";
    require(line2.rfind(h2, 0) == 0, "bad viewpoint header");
    pos = h2.size();
    while (pos < line2.size()) {
        require(line2[pos] == ' ' && pos + 1 < line2.size() && line2[pos + 1] == '<',
                "viewpoint entry must open with ' <'");
        auto comma = line2.find(", ", pos);
        require(comma != std::string::npos, "viewpoint entry missing caption");
        out.viewpoint_ids.push_back(line2.substr(pos + 2, comma - pos - 2));
        auto near = line2.find(", near cluster ", comma);
        require(near != std::string::npos, "viewpoint entry missing cluster reference");
        auto close = line2.find('>', near);
        require(close != std::string::npos, "viewpoint entry missing '>'");
        pos = close + 1;
    }
    return out;
}

} // namespace

int main() {
    criterion("1. oracle runs reproduce ground truth with perfect scores in <1s", [] {
        auto t0 = std::chrono::steady_clock::now();
        Scene scene = house();
        auto episodes = house_episodes();
        require(episodes.size() >= 5, "need at least 5 fixture episodes");
        RunConfig cfg;
        cfg.backend.kind = BackendKind::Oracle;
        auto results = run_suite(scene, episodes, nullptr, cfg);

        std::vector<EpisodeMetrics> per;
        for (std::size_t i = 0; i < episodes.size(); ++i) {
            require(results[i].trajectory == episodes[i].gt_path,
                    "trajectory differs from gt_path for " + episodes[i].episode_id);
            require(results[i].degraded_flags.empty(), "degraded oracle episode");
            per.push_back(score_episode(episodes[i], results[i].trajectory,
                                        results[i].selected_object, scene,
                                        TaskMode::REVERIE));
        }
        auto agg = aggregate(per, TaskMode::REVERIE).aggregate;
        require(agg.sr == 1.0 && agg.osr == 1.0 && agg.spl == 1.0 && *agg.rgs == 1.0,
                "oracle aggregate is not exactly 1.0");
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0).count();
        require(ms < 1000, "took " + std::to_string(ms) + " ms");
    });

    criterion("2. planner matches brute-force enumeration on 200 random graphs in <10s", [] {
        auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(20240817);
        for (int trial = 0; trial < 200; ++trial) {
            auto map = testutil::random_connected_map(rng, 15);
            std::vector<std::string> ids;
            for (const auto& [id, _] : map.nodes) ids.push_back(id);
            std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
            const auto& from = ids[pick(rng)];
            const auto& to = ids[pick(rng)];
            double planned = shortest_path(map, from, to).length;
            double expected = testutil::brute_force_shortest(map, from, to);
            require(std::abs(planned - expected) <= 1e-9,
                    "length mismatch on trial " + std::to_string(trial));
        }
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0).count();
        require(ms < 10000, "took " + std::to_string(ms) + " ms");
    });

    criterion("3. demo retrieval equals a brute-force argmax on 100 random sets", [] {
        TrigramEmbedder emb;
        std::mt19937_64 rng(99);
        const std::vector<std::string> pool{
            "bathroom", "bedroom", "closet",  "dining room", "entryway", "garage",
            "hallway",  "kitchen", "laundry room", "living room", "lounge", "office",
            "pantry",   "porch",   "utility room"};
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        std::uniform_int_distribution<int> size_dist(1, 27);
        for (int trial = 0; trial < 100; ++trial) {
            ExampleSet set;
            set.embedder_id = emb.id();
            int n = size_dist(rng); // duplicates across examples exercise ties
            for (int i = 0; i < n; ++i) {
                CoTExample ex;
                ex.example_id = "ex" + std::to_string(i);
                ex.room_type = pool[pick(rng)];
                ex.instruction = "go to the " + ex.room_type;
                ex.steps = {{"A", std::nullopt, "because"}};
                set.examples.push_back(ex);
            }
            std::string instruction = "please go to the " + pool[pick(rng)] + " now";
            const auto& got = query_example(instruction, set, pool, emb);

            auto room = extract_room_type(instruction, pool);
            auto q = emb.embed(room ? *room : instruction);
            std::size_t best = 0;
            double best_sim = -2.0;
            for (std::size_t i = 0; i < set.examples.size(); ++i) {
                double s = cosine_similarity(q, emb.embed(set.examples[i].room_type));
                if (s > best_sim) { // strict: first index wins ties
                    best_sim = s;
                    best = i;
                }
            }
            require(got.example_id == set.examples[best].example_id,
                    "argmax mismatch on trial " + std::to_string(trial));
        }
    });

    criterion("4. the action space equals the offered-viewpoint union at every step", [] {
        Scene scene = house();
        RunConfig cfg;
        cfg.backend.kind = BackendKind::Oracle;
        BackendFactory backends(cfg.backend);
        for (const auto& ep : house_episodes()) {
            StepObserver observer = [&](int, const MemoryMap& map,
                                        const std::vector<Action>& actions) {
                // independent union over the scene's navigable sets
                std::set<std::string> expect;
                for (const auto& v : map.visited)
                    for (const auto& n : get_navigational_viewpoints(scene, v))
                        expect.insert(n);
                expect.erase(map.current);
                expect.insert(kStopAction);
                require(std::set<std::string>(actions.begin(), actions.end()) == expect,
                        "action space diverges from the union in " + ep.episode_id);

                // ordering: frontier (unvisited) first, visited after, STOP last
                require(actions.back() == kStopAction, "STOP must come last");
                bool seen_visited = false;
                for (std::size_t i = 0; i + 1 < actions.size(); ++i) {
                    bool v = map.visited.count(actions[i]) != 0;
                    if (v) seen_visited = true;
                    require(!(seen_visited && !v), "frontier action after a visited one");
                }
            };
            run_episode(scene, ep, nullptr, cfg, backends, observer);
        }
    });

    criterion("5. metrics match the hand-scored fixture and obey the inequality chain", [] {
        Scene scene = house();
        std::map<std::string, Episode> eps;
        for (auto& ep : load_episodes(testutil::fixture("metrics_episodes.json")))
            eps[ep.episode_id] = ep;
        auto hand = nlohmann::json::parse(
            testutil::read_file(testutil::fixture("metrics_hand.json")));

        std::vector<EpisodeMetrics> all;
        for (const auto& c : hand.at("cases")) {
            const auto& ep = eps.at(c.at("episode_id").get<std::string>());
            std::optional<TargetObject> sel;
            if (!c.at("selected_object").is_null())
                sel = TargetObject{c.at("selected_object").at("viewpoint").get<std::string>(),
                                   c.at("selected_object").at("proposal_id").get<std::string>()};
            auto m = score_episode(ep, c.at("trajectory").get<std::vector<std::string>>(), sel,
                                   scene, TaskMode::REVERIE);
            const auto& e = c.at("expected");
            auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
            require(close(m.tl, e.at("tl").get<double>()) &&
                        close(m.ne, e.at("ne").get<double>()) &&
                        close(m.sr, e.at("sr").get<double>()) &&
                        close(m.osr, e.at("osr").get<double>()) &&
                        close(m.spl, e.at("spl").get<double>()) &&
                        close(*m.rgs, e.at("rgs").get<double>()) &&
                        close(*m.rgspl, e.at("rgspl").get<double>()),
                    "hand-scored mismatch for " + m.episode_id);
            all.push_back(m);
        }
        auto agg = aggregate(all, TaskMode::REVERIE).aggregate;
        const auto& ea = hand.at("expected_aggregate");
        require(std::abs(agg.spl - ea.at("spl").get<double>()) <= 1e-9 &&
                    std::abs(*agg.rgspl - ea.at("rgspl").get<double>()) <= 1e-9,
                "aggregate mismatch");

        // RGSPL <= RGS <= SR <= OSR and SPL <= SR on random walks
        std::mt19937_64 rng(55);
        std::vector<Episode> pool;
        for (const auto& [_, ep] : eps) pool.push_back(ep);
        std::uniform_int_distribution<std::size_t> pick_ep(0, pool.size() - 1);
        std::uniform_int_distribution<int> len(0, 12);
        for (int trial = 0; trial < 1000; ++trial) {
            const auto& ep = pool[pick_ep(rng)];
            std::vector<ViewpointId> traj{ep.start};
            for (int h = len(rng); h > 0; --h) {
                auto nav = get_navigational_viewpoints(scene, traj.back());
                std::uniform_int_distribution<std::size_t> pick(0, nav.size() - 1);
                traj.push_back(nav[pick(rng)]);
            }
            auto m = score_episode(ep, traj, ep.target_object, scene, TaskMode::REVERIE);
            require(*m.rgspl <= *m.rgs + 1e-12 && *m.rgs <= m.sr + 1e-12 &&
                        m.sr <= m.osr + 1e-12 && m.spl <= m.sr + 1e-12,
                    "inequality chain violated");
        }
    });

    criterion("6. clustering is optimal on two groups, centroid-consistent, deterministic", [] {
        auto obj = [](const std::string& label, double x, double y) {
            PlacedObject o;
            o.label = label;
            o.position = {x, y, 0.0};
            o.source_viewpoints = {"X"};
            return o;
        };
        std::vector<PlacedObject> objects{obj("chair", 0, 0),    obj("table", 0.1, 0),
                                          obj("lamp", 0, 0.1),   obj("washer", 10, 10),
                                          obj("dryer", 10.1, 10), obj("sink", 10, 10.1)};

        // brute-force optimal 2-partition by within-cluster sum of squares
        std::set<std::string> best_part;
        double best = std::numeric_limits<double>::infinity();
        const int n = static_cast<int>(objects.size());
        for (int mask = 1; mask < (1 << n) - 1; ++mask) {
            std::vector<Vec3> g[2];
            std::set<std::string> part;
            for (int i = 0; i < n; ++i) {
                g[(mask >> i) & 1].push_back(objects[i].position);
                if (((mask >> i) & 1) == 0) part.insert(objects[i].label);
            }
            double wcss = 0.0;
            for (const auto& pts : g) {
                Vec3 sum;
                for (const auto& p : pts) sum = sum + p;
                Vec3 mean = sum / static_cast<double>(pts.size());
                for (const auto& p : pts) wcss += squared_distance(p, mean);
            }
            if (wcss < best) {
                best = wcss;
                best_part = part;
            }
        }

        auto cs = cluster_objects(objects, std::nullopt, 42);
        require(cs.k == 2, "silhouette did not select k=2");
        std::set<std::string> got0, got1;
        for (const auto& m : cs.clusters[0].members) got0.insert(m.label);
        for (const auto& m : cs.clusters[1].members) got1.insert(m.label);
        require(got0 == best_part || got1 == best_part, "not the brute-force partition");

        for (const auto& cl : cs.clusters) {
            Vec3 sum;
            for (const auto& m : cl.members) sum = sum + m.position;
            Vec3 mean = sum / static_cast<double>(cl.members.size());
            require(euclidean(cl.centroid, mean) <= 1e-9, "centroid is not the member mean");
            for (const auto& m : cl.members)
                for (const auto& other : cs.clusters)
                    require(squared_distance(m.position, cl.centroid) <=
                                squared_distance(m.position, other.centroid) + 1e-9,
                            "member not at its nearest centroid");
        }

        auto again = cluster_objects(objects, std::nullopt, 42);
        require(again.k == cs.k, "rerun changed k");
        for (int c = 0; c < cs.k; ++c) {
            require(again.clusters[c].centroid == cs.clusters[c].centroid, "rerun centroid");
            require(again.clusters[c].members.size() == cs.clusters[c].members.size(),
                    "rerun membership");
        }
    });

    criterion("7. the map text follows the template grammar and re-renders identically", [] {
        Scene scene = house();
        MemoryMap map;
        std::vector<ViewpointId> walk{"A", "B", "D", "F"};
        for (const auto& vp : walk) {
            update_map(map, get_observation(scene, vp), scene);
            auto placed = place_objects(map);
            ClusterSet clusters =
                placed.empty() ? ClusterSet{} : cluster_objects(placed, std::nullopt, 0);
            std::string text = render_map_text(map, clusters);

            auto parsed = parse_map_text(text);
            require(parsed.cluster_ids.size() == clusters.clusters.size(),
                    "cluster count mismatch");
            for (std::size_t i = 0; i < parsed.cluster_ids.size(); ++i)
                require(parsed.cluster_ids[i] == static_cast<int>(i),
                        "cluster ids must be 0..k-1 in order");

            std::vector<std::string> expect;
            for (const auto& a : global_action_space(map))
                if (a != kStopAction) expect.push_back(a);
            require(parsed.viewpoint_ids == expect,
                    "viewpoint entries must list each non-STOP action exactly once, in order");

            require(render_map_text(map, clusters) == text, "re-render not byte-identical");
        }
    });

    criterion("8. mining replays gt paths, one demo per room type, byte-stable", [] {
        Scene scene = house();
        auto sampled = build_sampled_training_set(house_episodes(), scene);
        BackendConfig cfg;
        cfg.kind = BackendKind::Scripted;
        cfg.script_path = testutil::fixture("mining_script.json");

        auto set1 = mine_examples(sampled, scene, BackendFactory(cfg), PromptTemplates{});
        require(set1.examples.size() == sampled.size(), "example count mismatch");
        std::set<std::string> room_types;
        for (std::size_t i = 0; i < set1.examples.size(); ++i) {
            const auto& ex = set1.examples[i];
            const auto& ep = sampled[i].first;
            require(room_types.insert(ex.room_type).second, "duplicate room type mined");
            require(ex.steps.size() == ep.gt_path.size(), "step count differs from gt_path");
            for (std::size_t s = 0; s < ex.steps.size(); ++s)
                require(ex.steps[s].viewpoint == ep.gt_path[s],
                        "mined step sequence diverges from gt_path");
        }

        auto set2 = mine_examples(sampled, scene, BackendFactory(cfg), PromptTemplates{});
        require(example_set_to_json(set1).dump(2) == example_set_to_json(set2).dump(2),
                "re-mining is not byte-identical");
    });

    criterion("9. the CLI is deterministic and eval reproduces run's table", [] {
        auto dir = testutil::temp_dir();
        const std::string base = "run --scene " + testutil::fixture("house_scene.json") +
                                 " --episodes " + testutil::fixture("house_episodes.json") +
                                 " --backend scripted --script " +
                                 testutil::fixture("scripted_run.json") + " --seed 7 --out ";
        const std::string out1 = (dir / "cli_results_1.json").string();
        const std::string out2 = (dir / "cli_results_2.json").string();
        const std::string log1 = (dir / "cli_stdout_1.txt").string();
        const std::string log2 = (dir / "cli_stdout_2.txt").string();
        require(run_cli(base + out1, log1) == 0, "first run exited nonzero");
        require(run_cli(base + out2, log2) == 0, "second run exited nonzero");
        require(testutil::read_file(out1) == testutil::read_file(out2),
                "results files are not byte-identical");
        require(testutil::read_file(log1) == testutil::read_file(log2),
                "run stdout is not byte-identical");

        const std::string eval_log = (dir / "cli_eval.txt").string();
        require(run_cli("eval --results " + out1 + " --episodes " +
                            testutil::fixture("house_episodes.json") + " --scene " +
                            testutil::fixture("house_scene.json") + " --mode reverie",
                        eval_log) == 0,
                "eval exited nonzero");
        require(testutil::read_file(eval_log) == testutil::read_file(log1),
                "eval table differs from run's table");
    });

    criterion("10. demonstration ablations are wired through the pipeline", [] {
        Scene scene = house();
        auto episodes = house_episodes();
        auto examples = mined(scene);
        BackendConfig oracle;
        oracle.kind = BackendKind::Oracle;
        BackendFactory backends(oracle);

        // (a) demonstration disabled end to end
        RunConfig no_demo;
        no_demo.backend = oracle;
        no_demo.demo_enabled = false;
        for (const auto& ep : episodes) {
            auto r = run_episode(scene, ep, &examples, no_demo, backends);
            for (const auto& p : r.prompt_log)
                require(!p.has_demo_section, "no-demo run still carries a demo");
        }

        // (b) full room-type demo: prompts carry it and the demo replays the
        // matching room type's full gt path
        RunConfig full;
        full.backend = oracle;
        auto embedder = make_embedder(full.embedder_id);
        for (const auto& ep : episodes) {
            auto r = run_episode(scene, ep, &examples, full, backends);
            for (const auto& p : r.prompt_log)
                require(p.has_demo_section, "full-demo run lost its demo");
        }
        auto full_demo = detail::select_demo(episodes[4], examples, scene, full, *embedder);
        require(full_demo && full_demo->room_type == "utility room" &&
                    full_demo->steps.size() == episodes[4].gt_path.size(),
                "room-type demo is not the full matching example");

        // (c) demo truncated to its first step
        RunConfig truncated = full;
        truncated.demo_steps = 1;
        auto short_demo =
            detail::select_demo(episodes[4], examples, scene, truncated, *embedder);
        require(short_demo && short_demo->steps.size() == 1, "demo truncation failed");
        for (const auto& ep : episodes)
            run_episode(scene, ep, &examples, truncated, backends);

        // (d) whole-instruction similarity instead of the room-type query
        RunConfig instr = full;
        instr.demo_query = QuerySimilarity::Instruction;
        for (const auto& ep : episodes) {
            auto picked = detail::select_demo(ep, examples, scene, instr, *embedder);
            auto q = embedder->embed(ep.instruction);
            std::size_t best = 0;
            double best_sim = -2.0;
            for (std::size_t i = 0; i < examples.examples.size(); ++i) {
                double s = cosine_similarity(
                    q, embedder->embed(examples.examples[i].instruction));
                if (s > best_sim) {
                    best_sim = s;
                    best = i;
                }
            }
            require(picked->example_id == examples.examples[best].example_id,
                    "instruction-similarity query is not the cosine argmax");
            run_episode(scene, ep, &examples, instr, backends);
        }
    });

    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
