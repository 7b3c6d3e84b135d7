#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "smapf/instance.hpp"
#include "smapf/json_io.hpp"

using namespace smapf;

namespace {

std::string map_text(const std::vector<std::string>& rows) {
    std::string t = "type octile\nheight " + std::to_string(rows.size()) + "\nwidth " +
                    std::to_string(rows[0].size()) + "\nmap\n";
    for (const auto& r : rows) t += r + "\n";
    return t;
}

GridMap make_map(const std::vector<std::string>& rows) { return GridMap::parse(map_text(rows)); }

// bucket map w h s-col s-row g-col g-row dist
std::string scen_row(int scol, int srow, int gcol, int grow) {
    return "0\tempty.map\t8\t8\t" + std::to_string(scol) + "\t" + std::to_string(srow) + "\t" +
           std::to_string(gcol) + "\t" + std::to_string(grow) + "\t1.0";
}

std::string scen_text(const std::vector<std::string>& rows) {
    std::string t = "version 1\n";
    for (const auto& r : rows) t += r + "\n";
    return t;
}

}  // namespace

TEST_CASE("soc sums path lengths minus one", "[instance]") {
    Solution empty;
    CHECK(soc(empty) == 0);

    Solution single{{StreamPath{Vertex{0, 0}}}};
    CHECK(soc(single) == 0);

    Solution two;
    two.paths.push_back(StreamPath(4, Vertex{0, 0}));
    two.paths.push_back(StreamPath(6, Vertex{0, 0}));
    CHECK(soc(two) == 8);
}

TEST_CASE("actions_of maps deltas to the action alphabet", "[instance]") {
    CHECK(actions_of({Vertex{5, 5}}) == "");
    CHECK(actions_of({Vertex{2, 1}, Vertex{2, 2}, Vertex{2, 2}}) == "RW");
    CHECK(actions_of({Vertex{3, 3}, Vertex{2, 3}, Vertex{3, 3}, Vertex{3, 2}}) == "UDL");
}

TEST_CASE("path_of applies actions with validation", "[instance]") {
    GridMap open6 = make_map({"......", "......", "......", "......", "......", "......"});
    CHECK(path_of(Vertex{3, 3}, "", open6) == StreamPath{Vertex{3, 3}});
    CHECK(path_of(Vertex{5, 0}, "RRU", open6) ==
          StreamPath{Vertex{5, 0}, Vertex{5, 1}, Vertex{5, 2}, Vertex{4, 2}});

    try {
        path_of(Vertex{0, 0}, "U", open6);
        FAIL("expected an error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
    GridMap blocked = make_map({".@."});
    try {
        path_of(Vertex{0, 0}, "RR", blocked);
        FAIL("expected an error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
}

TEST_CASE("actions_of and path_of are mutually inverse", "[instance]") {
    GridMap m = make_map({".....", ".@.@.", ".....", ".@.@.", "....."});
    std::mt19937 rng(5);
    for (int round = 0; round < 200; ++round) {
        Vertex cur{0, 0};
        StreamPath path{cur};
        for (int step = 0; step < 12; ++step) {
            std::vector<Vertex> options = m.neighbors(cur);
            options.push_back(cur);
            cur = options[rng() % options.size()];
            path.push_back(cur);
        }
        std::string acts = actions_of(path);
        CHECK(path_of(path.front(), acts, m) == path);
        CHECK(actions_of(path_of(path.front(), acts, m)) == acts);
    }
}

TEST_CASE("parse_scen degenerate cycle forces zero start times", "[instance]") {
    GridMap m = make_map({"........", "........", "........", "........", "........",
                          "........", "........", "........"});
    auto text = scen_text({scen_row(0, 0, 7, 7), scen_row(1, 2, 3, 4), scen_row(5, 6, 0, 3)});
    for (std::uint32_t seed : {1u, 99u, 12345u}) {
        Instance inst = parse_scen(text, m, 3, 1, seed);
        for (const AgentStream& s : inst.streams()) CHECK(s.t_start == 0);
    }
}

TEST_CASE("parse_scen is deterministic and in file order", "[instance]") {
    GridMap m = make_map({"........", "........", "........", "........", "........",
                          "........", "........", "........"});
    auto text = scen_text({scen_row(0, 0, 7, 7), scen_row(1, 2, 3, 4), scen_row(5, 6, 0, 3),
                           scen_row(2, 2, 4, 4)});
    Instance a = parse_scen(text, m, 3, 3, 7);
    Instance b = parse_scen(text, m, 3, 3, 7);
    REQUIRE(a.num_streams() == 3);
    CHECK(instance_to_json(a, "m.map").dump() == instance_to_json(b, "m.map").dump());

    CHECK(a.stream(0).start == Vertex{0, 0});  // row = field 6, col = field 5
    CHECK(a.stream(1).start == Vertex{2, 1});
    CHECK(a.stream(2).start == Vertex{6, 5});
    CHECK(a.stream(2).goal == Vertex{3, 0});

    for (const AgentStream& s : a.streams()) {
        CHECK(s.t_start >= 0);
        CHECK(s.t_start <= 2);
    }
}

TEST_CASE("parse_scen validates input", "[instance]") {
    GridMap m = make_map({".@", ".."});
    CHECK_THROWS_AS(parse_scen("version 2\n" + scen_row(0, 0, 1, 1), m, 1, 2, 1), ParseError);
    // Out of bounds.
    CHECK_THROWS_AS(parse_scen(scen_text({scen_row(5, 0, 1, 1)}), m, 1, 2, 1), ParseError);
    // Impassable start (cell (0,1) is '@').
    CHECK_THROWS_AS(parse_scen(scen_text({scen_row(1, 0, 1, 1)}), m, 1, 2, 1), ParseError);
    // n larger than the row count.
    CHECK_THROWS_AS(parse_scen(scen_text({scen_row(0, 0, 1, 1)}), m, 2, 2, 1), ParseError);
    Instance inst = parse_scen(scen_text({scen_row(0, 0, 1, 1)}), m, 1, 2, 1);
    CHECK(inst.stream(0).goal == Vertex{1, 1});
}

TEST_CASE("instance invariants are enforced", "[instance]") {
    GridMap m = make_map({"..", ".."});
    std::vector<AgentStream> streams{AgentStream{0, Vertex{0, 0}, Vertex{1, 1}, 5, 1}};
    CHECK_THROWS_AS(Instance::uniform(m, 3, streams), std::invalid_argument);  // t_start > c-1
    streams[0].t_start = 0;
    streams[0].id = 1;
    CHECK_THROWS_AS(Instance::uniform(m, 3, streams), std::invalid_argument);  // id gap
}

TEST_CASE("instance json round-trips", "[instance]") {
    GridMap m = make_map({"...", "...", "..."});
    Instance inst = Instance::uniform(m, 3,
                                      {AgentStream{0, Vertex{0, 0}, Vertex{2, 2}, 1, 1},
                                       AgentStream{1, Vertex{2, 0}, Vertex{0, 2}, 2, 1}});
    Json j = instance_to_json(inst, "x.map");
    Instance back = instance_from_json(j, m);
    CHECK(back.is_uniform());
    CHECK(back.cycle_time() == 3);
    CHECK(back.stream(1).t_start == 2);
    CHECK(back.stream(1).goal == Vertex{0, 2});

    Instance nu = Instance::non_uniform(m, {AgentStream{0, Vertex{0, 0}, Vertex{2, 2}, 1, 4},
                                            AgentStream{1, Vertex{2, 0}, Vertex{0, 2}, 5, 6}});
    Json jn = instance_to_json(nu, "x.map");
    Instance back_nu = instance_from_json(jn, m);
    CHECK_FALSE(back_nu.is_uniform());
    CHECK(back_nu.stream(0).cycle == 4);
    CHECK(back_nu.stream(1).t_start == 5);
}

TEST_CASE("solution json round-trips and validates", "[instance]") {
    GridMap m = make_map({"...", "...", "..."});
    Instance inst = Instance::uniform(m, 2,
                                      {AgentStream{0, Vertex{0, 0}, Vertex{0, 2}, 0, 1},
                                       AgentStream{1, Vertex{2, 2}, Vertex{2, 0}, 1, 1}});
    Solution sol;
    sol.paths.push_back(path_of(Vertex{0, 0}, "RR", m));
    sol.paths.push_back(path_of(Vertex{2, 2}, "LWL", m));
    Json j = solution_to_json(inst, sol);
    CHECK(j["soc"] == 5);
    CHECK(j["cycle_time"] == 2);
    Solution back = solution_from_json(inst, j);
    CHECK(back.paths == sol.paths);

    Json corrupt = j;
    corrupt["streams"][0]["actions"] = "UU";  // runs off the map
    CHECK_THROWS_AS(solution_from_json(inst, corrupt), ParseError);
    Json mismatched = j;
    mismatched["streams"][1]["t_start"] = 0;
    CHECK_THROWS_AS(solution_from_json(inst, mismatched), ParseError);
}

TEST_CASE("uniform_below is deterministic and covers the range", "[instance]") {
    std::mt19937 a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(uniform_below(a, 7) == uniform_below(b, 7));
    std::mt19937 rng(1);
    std::array<int, 3> counts{};
    for (int i = 0; i < 3000; ++i) ++counts[static_cast<std::size_t>(uniform_below(rng, 3))];
    for (int c : counts) CHECK(c > 800);
}
