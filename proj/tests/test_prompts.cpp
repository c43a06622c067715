#include <catch2/catch_amalgamated.hpp>

#include "mcnav/prompts.hpp"
#include "test_util.hpp"

using namespace mcnav;

namespace {

CoTExample demo_example() {
    CoTExample ex;
    ex.example_id = "ex1";
    ex.instruction = "go to the kitchen";
    ex.room_type = "kitchen";
    ex.steps = {{"A", std::nullopt, "the kitchen is ahead"},
                {"B", std::string("p1"), "the oven is visible"}};
    return ex;
}

std::vector<DetectedObject> proposals() {
    return {{"oven", {1, 1, 2, 2}, "p1"}, {"sink", {3, 3, 2, 2}, "p2"}};
}

} // namespace

TEST_CASE("no demo means no demonstration section") {
    PromptTemplates t;
    auto bundle = build_inference_prompt(t, "Memory topological map: \nNavigable viewpoints:",
                                         "go north", std::nullopt, {"B", "C", "STOP"},
                                         proposals(), {});
    REQUIRE(bundle.input.find("Demonstration") == std::string::npos);
}

TEST_CASE("the demo section renders each step") {
    PromptTemplates t;
    auto bundle = build_inference_prompt(t, "map", "go north", demo_example(),
                                         {"B", "STOP"}, {}, {});
    REQUIRE(bundle.input.find("Demonstration example:") != std::string::npos);
    REQUIRE(bundle.input.find("Step 1 (at A)") != std::string::npos);
    REQUIRE(bundle.input.find("Step 2 (at B, selected object p1)") != std::string::npos);
}

TEST_CASE("every action appears exactly once in the inference prompt") {
    PromptTemplates t;
    std::vector<Action> actions{"B", "C", "STOP"};
    auto bundle = build_inference_prompt(t, "map", "go north", std::nullopt, actions,
                                         proposals(), {});
    auto line_start = bundle.input.find("Action space: ");
    REQUIRE(line_start != std::string::npos);
    auto line_end = bundle.input.find('\n', line_start);
    std::string line = bundle.input.substr(line_start, line_end - line_start);
    REQUIRE(line == "Action space: B, C, STOP");
}

TEST_CASE("builders are pure functions") {
    PromptTemplates t;
    auto a = build_inference_prompt(t, "map", "go", demo_example(), {"B", "STOP"}, proposals(),
                                    {"step 0: moved to B"});
    auto b = build_inference_prompt(t, "map", "go", demo_example(), {"B", "STOP"}, proposals(),
                                    {"step 0: moved to B"});
    REQUIRE(a.prefix == b.prefix);
    REQUIRE(a.input == b.input);

    auto m1 = build_mining_prompt(t, "map", "go", "B", std::nullopt);
    auto m2 = build_mining_prompt(t, "map", "go", "B", std::nullopt);
    REQUIRE(m1.input == m2.input);
}

TEST_CASE("mode-exclusive blocks never co-occur") {
    PromptTemplates t;
    auto inf = build_inference_prompt(t, "map", "go", std::nullopt, {"STOP"}, {}, {});
    auto mine = build_mining_prompt(t, "map", "go", "STOP", std::nullopt);

    std::string inf_all = inf.prefix + inf.input;
    std::string mine_all = mine.prefix + mine.input;
    REQUIRE(inf_all.find(kInferenceSubtaskBlock) != std::string::npos);
    REQUIRE(inf_all.find(kMiningSubtaskBlock) == std::string::npos);
    REQUIRE(mine_all.find(kMiningSubtaskBlock) != std::string::npos);
    REQUIRE(mine_all.find(kInferenceSubtaskBlock) == std::string::npos);
}

TEST_CASE("mining prompt for STOP asks to justify stopping") {
    PromptTemplates t;
    auto bundle = build_mining_prompt(t, "map", "go", "STOP", std::nullopt);
    REQUIRE(bundle.input.find("Chosen viewpoint: STOP") != std::string::npos);
    REQUIRE(bundle.input.find("Explain why this selection was made.") != std::string::npos);
}

TEST_CASE("budget truncation drops the oldest history lines only") {
    PromptTemplates t;
    t.char_budget = t.prefix_inference.size() + 400;
    std::vector<std::string> history;
    for (int i = 0; i < 50; ++i)
        history.push_back("step " + std::to_string(i) + ": moved to X" + std::to_string(i));

    const std::string map_text = "Memory topological map: |0: {chair}|\nNavigable viewpoints:";
    const std::string instruction = "go to the kitchen and find the oven";
    auto bundle = build_inference_prompt(t, map_text, instruction, std::nullopt, {"STOP"}, {},
                                         history);
    REQUIRE(bundle.total_chars() <= t.char_budget);
    REQUIRE(bundle.input.find(map_text) != std::string::npos);
    REQUIRE(bundle.input.find(instruction) != std::string::npos);
    REQUIRE(bundle.input.find("step 0:") == std::string::npos);      // oldest dropped
    REQUIRE(bundle.input.find("step 49:") != std::string::npos);     // newest kept
}

TEST_CASE("unknown placeholders fail at template load") {
    auto dir = testutil::temp_dir() / "templates_bad";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "input_inference.txt") << "Instruction: {instruction}\n{bogus}\n";
    REQUIRE_THROWS_AS(load_prompt_templates(dir.string()), SchemaError);
}

TEST_CASE("template overrides are honored") {
    auto dir = testutil::temp_dir() / "templates_ok";
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "input_inference.txt")
        << "DO {instruction} WITH {map} {actions} {objects} {demo} {history}";
    auto t = load_prompt_templates(dir.string());
    auto bundle = build_inference_prompt(t, "MAPTEXT", "TASK", std::nullopt, {"STOP"}, {}, {});
    REQUIRE(bundle.input.rfind("DO TASK WITH MAPTEXT", 0) == 0);
}
