#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "smapf/simulator.hpp"
#include "test_support.hpp"

using namespace smapf;
using namespace smapf::test;

TEST_CASE("self-colliding loop is caught at the first overlapping spawn", "[simulator]") {
    GridMap m = make_map({".."});
    Vertex A{0, 0}, B{0, 1};
    Instance inst = Instance::uniform(m, 2, {AgentStream{0, A, A, 0, 1}});
    Solution sol{{StreamPath{A, B, A}}};
    CollisionReport r = simulate(inst, sol, 8);
    REQUIRE_FALSE(r.events.empty());
    const CollisionEvent& e = r.events.front();
    CHECK(e.t == 2);
    CHECK(e.kind == ConflictKind::kVertex);
    CHECK(e.a.stream == 0);
    CHECK(e.a.k == 0);
    CHECK(e.b.k == 1);
    CHECK(e.v == A);
}

TEST_CASE("nothing spawns past the horizon", "[simulator]") {
    GridMap m = make_map({".."});
    Vertex A{0, 0}, B{0, 1};
    Instance inst = Instance::uniform(m, 3, {AgentStream{0, A, B, 2, 1}});
    Solution sol{{StreamPath{A, B}}};
    CHECK(simulate(inst, sol, 0).events.empty());
    CHECK(simulate(inst, sol, 1).events.empty());
}

TEST_CASE("a hand-built swap yields one edge event", "[simulator]") {
    GridMap m = make_map({".."});
    Vertex A{0, 0}, B{0, 1};
    Instance inst = Instance::uniform(m, 4,
                                      {AgentStream{0, A, B, 0, 1}, AgentStream{1, B, A, 0, 1}});
    Solution sol{{StreamPath{A, B}, StreamPath{B, A}}};
    CollisionReport r = simulate(inst, sol, 3);
    long edge_events = 0;
    for (const CollisionEvent& e : r.events) {
        if (e.kind == ConflictKind::kEdge) {
            ++edge_events;
            CHECK(e.t == 0);
            CHECK(e.a.stream == 0);
            CHECK(e.b.stream == 1);
            CHECK(e.v == A);
            CHECK(e.u == B);
        }
    }
    CHECK(edge_events == 1);  // only the k=0 agents are active before t=4

    // The next spawns swap with departure t=4, inside a horizon of 5.
    long later = 0;
    for (const CollisionEvent& e : simulate(inst, sol, 5).events)
        if (e.kind == ConflictKind::kEdge) ++later;
    CHECK(later == 2);
}

TEST_CASE("three interleaved streams on an open grid run collision-free", "[simulator]") {
    // Constructed arrangement with the action strings RRRRRUUWUUU, LLLLLL,
    // DDDD and start times 0, 0, 1 at cycle time 2. The routes share the
    // cells (8,2) and (5,5) but pass through them on opposite residues.
    GridMap m = make_map({"............", "............", "............", "............",
                          "............", "............", "............", "............",
                          "............", "............", "............", "............"});
    StreamPath p0 = path_of(Vertex{8, 0}, "RRRRRUUWUUU", m);
    StreamPath p1 = path_of(Vertex{5, 9}, "LLLLLL", m);
    StreamPath p2 = path_of(Vertex{6, 2}, "DDDD", m);
    Instance inst = Instance::uniform(m, 2,
                                      {AgentStream{0, p0.front(), p0.back(), 0, 1},
                                       AgentStream{1, p1.front(), p1.back(), 0, 1},
                                       AgentStream{2, p2.front(), p2.back(), 1, 1}});
    Solution sol{{p0, p1, p2}};
    CHECK(find_conflicts(inst, sol).empty());
    CollisionReport r = validate(inst, sol);
    CHECK(r.structural_errors.empty());
    CHECK(r.events.empty());
}

TEST_CASE("events found at a shorter horizon are a prefix of longer runs", "[simulator]") {
    std::mt19937 rng(606);
    for (int round = 0; round < 40; ++round) {
        GridMap m = random_map(rng, 5, 5, 15);
        auto cells = passable_cells(m);
        const int c = 1 + static_cast<int>(rng() % 3);
        std::vector<AgentStream> streams;
        std::vector<StreamPath> paths;
        for (int i = 0; i < 2; ++i) {
            StreamPath p = random_walk(rng, m, cells[rng() % cells.size()],
                                       2 + static_cast<int>(rng() % 6));
            streams.push_back(AgentStream{i, p.front(), p.back(),
                                          static_cast<int>(rng() % static_cast<unsigned>(c)), c});
            paths.push_back(p);
        }
        Instance inst = Instance::uniform(m, c, streams);
        Solution sol{paths};
        const long long h1 = static_cast<long long>(rng() % 10);
        const long long h2 = h1 + 1 + static_cast<long long>(rng() % 10);
        auto r1 = simulate(inst, sol, h1);
        auto r2 = simulate(inst, sol, h2);
        REQUIRE(r1.events.size() <= r2.events.size());
        for (std::size_t k = 0; k < r1.events.size(); ++k) {
            CHECK_FALSE(r2.events[k] < r1.events[k]);
            CHECK_FALSE(r1.events[k] < r2.events[k]);
        }
    }
}

TEST_CASE("validate rejects structurally broken paths before scanning", "[simulator]") {
    GridMap m = make_map({"...", "...", "..."});
    Instance inst = Instance::uniform(m, 2, {AgentStream{0, Vertex{0, 0}, Vertex{2, 2}, 0, 1}});

    Solution wrong_end{{StreamPath{Vertex{0, 0}, Vertex{0, 1}}}};
    CollisionReport r = validate(inst, wrong_end);
    CHECK_FALSE(r.structural_errors.empty());
    CHECK(r.events.empty());

    Solution teleport{{StreamPath{Vertex{0, 0}, Vertex{2, 2}}}};
    CHECK_FALSE(validate(inst, teleport).structural_errors.empty());

    Solution fine{{path_of(Vertex{0, 0}, "RRDD", m)}};
    CHECK(validate(inst, fine).ok());
}

TEST_CASE("validate in non-uniform mode uses the cycle lcm horizon", "[simulator]") {
    GridMap m = make_map({"....."});
    Vertex A{0, 0}, B{0, 1};
    Instance inst = Instance::non_uniform(m, {AgentStream{0, A, B, 1, 2},
                                              AgentStream{1, Vertex{0, 4}, Vertex{0, 3}, 2, 3}});
    Solution sol{{StreamPath{A, B}, StreamPath{Vertex{0, 4}, Vertex{0, 3}}}};
    CollisionReport r = validate(inst, sol);
    CHECK(r.ok());
    CHECK(r.horizon_used >= 4 * (2 + 6));
    CHECK_FALSE(r.lcm_capped);
}
