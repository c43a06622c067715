#include <catch2/catch_amalgamated.hpp>

#include "mcnav/planner.hpp"
#include "test_util.hpp"

using namespace mcnav;

TEST_CASE("path from a node to itself is the node alone") {
    auto map = testutil::make_map({{"A", {0, 0, 0}}, {"B", {1, 0, 0}}}, {{"A", "B"}});
    auto path = shortest_path(map, "A", "A");
    REQUIRE(path.waypoints == std::vector<ViewpointId>{"A"});
    REQUIRE(path.length == 0.0);
}

TEST_CASE("equal-length alternatives break ties lexicographically") {
    // Colinear A-B-C with a direct A-C chord of the same total length: the
    // two-hop route through B ties the chord, and the smaller next id wins.
    auto map = testutil::make_map({{"A", {0, 0, 0}}, {"B", {1, 0, 0}}, {"C", {2, 0, 0}}},
                                  {{"A", "B"}, {"B", "C"}, {"A", "C"}});
    auto path = shortest_path(map, "A", "C");
    REQUIRE(path.length == Catch::Approx(2.0));
    REQUIRE(path.waypoints == std::vector<ViewpointId>{"A", "B", "C"});
}

TEST_CASE("tie between symmetric middle nodes picks the smaller id") {
    // Diamond: A at origin, two middles M1/M2 mirrored, goal Z. Both routes
    // have identical length.
    auto map = testutil::make_map(
        {{"A", {0, 0, 0}}, {"M1", {1, 1, 0}}, {"M2", {1, -1, 0}}, {"Z", {2, 0, 0}}},
        {{"A", "M1"}, {"A", "M2"}, {"M1", "Z"}, {"M2", "Z"}});
    auto path = shortest_path(map, "A", "Z");
    REQUIRE(path.waypoints == std::vector<ViewpointId>{"A", "M1", "Z"});
}

TEST_CASE("disconnected nodes raise NoPath") {
    auto map = testutil::make_map({{"A", {0, 0, 0}}, {"B", {1, 0, 0}}, {"C", {9, 9, 9}}},
                                  {{"A", "B"}});
    REQUIRE_THROWS_AS(shortest_path(map, "A", "C"), NoPath);
    REQUIRE_THROWS_AS(shortest_path(map, "A", "ZZ"), UnknownViewpoint);
}

TEST_CASE("planned length matches a brute-force enumeration on random graphs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        auto map = testutil::random_connected_map(rng);
        std::vector<std::string> ids;
        for (const auto& [id, _] : map.nodes) ids.push_back(id);
        std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
        const auto& from = ids[pick(rng)];
        const auto& to = ids[pick(rng)];

        auto path = shortest_path(map, from, to);
        double expected = testutil::brute_force_shortest(map, from, to);
        REQUIRE(path.length == Catch::Approx(expected).margin(1e-9));

        // waypoint sequence is walkable and sums to the reported length
        double walked = 0.0;
        for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
            REQUIRE(map.edges.count(
                MemoryMap::edge_key(path.waypoints[i - 1], path.waypoints[i])));
            walked += euclidean(map.nodes.at(path.waypoints[i - 1]).position,
                                map.nodes.at(path.waypoints[i]).position);
        }
        REQUIRE(walked == Catch::Approx(path.length).margin(1e-9));
    }
}

TEST_CASE("shortest paths satisfy the triangle inequality") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        auto map = testutil::random_connected_map(rng, 10);
        std::vector<std::string> ids;
        for (const auto& [id, _] : map.nodes) ids.push_back(id);
        std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
        const auto &a = ids[pick(rng)], &b = ids[pick(rng)], &c = ids[pick(rng)];
        double ab = shortest_path(map, a, b).length;
        double bc = shortest_path(map, b, c).length;
        double ac = shortest_path(map, a, c).length;
        REQUIRE(ac <= ab + bc + 1e-9);
    }
}

TEST_CASE("execute_path with a single waypoint is a no-op") {
    Scene house = testutil::house();
    MemoryMap map;
    update_map(map, get_observation(house, "A"), house);
    auto seg = execute_path(map, PlannedPath{{"A"}, 0.0}, house);
    REQUIRE(seg.visited.empty());
    REQUIRE(seg.meters == 0.0);
    REQUIRE(map.current == "A");
}

TEST_CASE("execute_path walks, observes, and accumulates meters") {
    Scene house = testutil::house();
    MemoryMap map;
    update_map(map, get_observation(house, "A"), house);
    update_map(map, get_observation(house, "B"), house);
    update_map(map, get_observation(house, "A"), house); // back at A, D now mapped

    auto seg = execute_path(map, shortest_path(map, "A", "D"), house);
    REQUIRE(seg.visited == std::vector<ViewpointId>{"B", "D"});
    REQUIRE(seg.meters == Catch::Approx(10.0)); // two 5 m hops
    REQUIRE(map.current == "D");
    REQUIRE(map.visited.count("B"));
    REQUIRE(map.visited.count("D"));

    // transit through D revealed F into the action space
    auto actions = global_action_space(map);
    REQUIRE(std::find(actions.begin(), actions.end(), "F") != actions.end());
}

TEST_CASE("execute_path rejects detached or unwalkable paths") {
    Scene house = testutil::house();
    MemoryMap map;
    update_map(map, get_observation(house, "A"), house);
    REQUIRE_THROWS_AS(execute_path(map, PlannedPath{{"B", "A"}, 5.0}, house), WalkError);
    REQUIRE_THROWS_AS(execute_path(map, PlannedPath{{"A", "D"}, 0.0}, house), WalkError);
}
