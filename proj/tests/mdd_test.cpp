#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "smapf/low_level.hpp"
#include "smapf/mdd.hpp"
#include "test_support.hpp"

using namespace smapf;
using namespace smapf::test;

namespace {

// All constrained paths of exactly `len` vertices, collected layer by layer.
std::vector<std::set<int>> enumerated_layers(const GridMap& m, const Instance& inst,
                                             const ConstraintSet& cs, int len) {
    const AgentStream& s = inst.stream(0);
    std::vector<std::set<int>> layers(static_cast<std::size_t>(len));
    enumerate_paths(m, s.start, s.goal, len, [&](const StreamPath& p) {
        if (!cs.start_allowed(0, p[0])) return;
        for (std::size_t q = 0; q + 1 < p.size(); ++q) {
            if (!cs.move_allowed(0, p[q], p[q + 1], static_cast<int>(q))) return;
        }
        if (cs.last_mandate_step(0) > static_cast<int>(p.size()) - 1) return;
        for (std::size_t q = 0; q < p.size(); ++q) layers[q].insert(m.index(p[q]));
    });
    return layers;
}

}  // namespace

TEST_CASE("the unique corridor path gives width-1 layers", "[mdd]") {
    GridMap m = make_map({"..."});
    Instance inst = Instance::uniform(m, 2, {AgentStream{0, Vertex{0, 0}, Vertex{0, 2}, 0, 1}});
    ConstraintSet cs(1);
    Mdd mdd = build_mdd(inst, 0, cs, 3);
    REQUIRE(mdd.layers.size() == 3);
    for (int q = 0; q < 3; ++q) CHECK(mdd.width(q) == 1);
    CHECK(mdd.singleton(0, m.index(Vertex{0, 0})));
    CHECK(mdd.singleton(1, m.index(Vertex{0, 1})));
    CHECK(mdd.singleton(2, m.index(Vertex{0, 2})));
}

TEST_CASE("open 3x3 corner-to-corner widths follow the shortest-path diamond", "[mdd]") {
    GridMap m = make_map({"...", "...", "..."});
    Instance inst = Instance::uniform(m, 2, {AgentStream{0, Vertex{0, 0}, Vertex{2, 2}, 0, 1}});
    ConstraintSet cs(1);
    Mdd mdd = build_mdd(inst, 0, cs, 5);
    REQUIRE(mdd.layers.size() == 5);
    CHECK(mdd.width(0) == 1);
    CHECK(mdd.width(1) == 2);
    CHECK(mdd.width(2) == 3);
    CHECK(mdd.width(3) == 2);
    CHECK(mdd.width(4) == 1);

    // Cross-check every layer against exhaustive path enumeration.
    auto layers = enumerated_layers(m, inst, cs, 5);
    for (int q = 0; q < 5; ++q) {
        std::set<int> got(mdd.layers[static_cast<std::size_t>(q)].begin(),
                          mdd.layers[static_cast<std::size_t>(q)].end());
        CHECK(got == layers[static_cast<std::size_t>(q)]);
    }
}

TEST_CASE("cyclic constraints narrow the layers", "[mdd]") {
    GridMap m = make_map({"...", "...", "..."});
    Instance inst = Instance::uniform(m, 2, {AgentStream{0, Vertex{0, 0}, Vertex{2, 2}, 0, 1}});
    ConstraintSet free_set(1);
    ConstraintSet constrained(1);
    constrained.add(cyclic_vertex_constraint(0, Vertex{1, 1}, 0, kNoExemption, 2));
    Mdd before = build_mdd(inst, 0, free_set, 5);
    Mdd after = build_mdd(inst, 0, constrained, 5);
    bool strictly_narrower = false;
    for (int q = 0; q < 5; ++q) {
        CHECK(after.width(q) <= before.width(q));
        if (after.width(q) < before.width(q)) strictly_narrower = true;
        for (int vid : after.layers[static_cast<std::size_t>(q)])
            CHECK(before.layer_contains(q, vid));
    }
    CHECK(strictly_narrower);
    // (1,1) sits at step 2 on any shortest path; residue 0 forbids it.
    CHECK_FALSE(after.layer_contains(2, m.index(Vertex{1, 1})));
}

TEST_CASE("every node lies on a full path and the current path is covered", "[mdd]") {
    std::mt19937 rng(31);
    int rounds = 0;
    while (rounds < 60) {
        GridMap m = random_map(rng, 5, 5, 20);
        auto cells = passable_cells(m);
        Vertex start = cells[rng() % cells.size()];
        Vertex goal = cells[rng() % cells.size()];
        auto dist = distance_field(m, goal);
        if (dist[static_cast<std::size_t>(m.index(start))] < 0) continue;
        const int c = 1 + static_cast<int>(rng() % 3);
        Instance inst = Instance::uniform(m, c, {AgentStream{0, start, goal, 0, c}});
        ConstraintSet cs(1);
        for (int k = 0; k < static_cast<int>(rng() % 3); ++k)
            cs.add(cyclic_vertex_constraint(0, cells[rng() % cells.size()],
                                            static_cast<int>(rng() % 4), kNoExemption, c));
        ConflictAvoidanceTable cat(m, true, c);
        auto res = astar_plan(inst, 0, cs, cat, dist);
        if (res.status != LowLevelResult::Status::kFound) continue;
        const int len = static_cast<int>(res.path.size());
        Mdd mdd = build_mdd(inst, 0, cs, len);

        for (int q = 0; q < len; ++q) {
            CHECK(mdd.width(q) >= 1);
            CHECK(mdd.layer_contains(q, m.index(res.path[static_cast<std::size_t>(q)])));
        }
        if (len <= 8) {
            auto layers = enumerated_layers(m, inst, cs, len);
            for (int q = 0; q < len; ++q) {
                std::set<int> got(mdd.layers[static_cast<std::size_t>(q)].begin(),
                                  mdd.layers[static_cast<std::size_t>(q)].end());
                CHECK(got == layers[static_cast<std::size_t>(q)]);
            }
        }
        ++rounds;
    }
}

TEST_CASE("classification counts pinned sides", "[mdd]") {
    GridMap corridor = make_map({"..."});
    GridMap open3 = make_map({"...", "...", "..."});
    Vertex mid{0, 1};

    Instance narrow = Instance::uniform(corridor, 2,
                                        {AgentStream{0, Vertex{0, 0}, Vertex{0, 2}, 0, 1},
                                         AgentStream{1, Vertex{0, 2}, Vertex{0, 0}, 1, 1}});
    ConstraintSet cs2(2);
    Mdd m0 = build_mdd(narrow, 0, cs2, 3);
    Mdd m1 = build_mdd(narrow, 1, cs2, 3);
    Conflict vconf{ConflictKind::kVertex, 0, 1, 1, 1, mid, mid, ConflictPriority::kUnknown};
    CHECK(classify(vconf, m0, m1, corridor) == ConflictPriority::kCardinal);

    // In the open grid both streams have alternative routes: non-cardinal.
    Instance wide = Instance::uniform(open3, 2,
                                      {AgentStream{0, Vertex{0, 0}, Vertex{2, 2}, 0, 1},
                                       AgentStream{1, Vertex{2, 0}, Vertex{0, 2}, 0, 1}});
    Mdd w0 = build_mdd(wide, 0, cs2, 5);
    Mdd w1 = build_mdd(wide, 1, cs2, 5);
    Conflict open_conf{ConflictKind::kVertex, 0, 1, 2, 2, Vertex{1, 1}, Vertex{1, 1},
                       ConflictPriority::kUnknown};
    CHECK(classify(open_conf, w0, w1, open3) == ConflictPriority::kNonCardinal);

    // One pinned side, one wide side: semi-cardinal.
    Instance mixed = Instance::uniform(open3, 2,
                                       {AgentStream{0, Vertex{0, 0}, Vertex{0, 2}, 0, 1},
                                        AgentStream{1, Vertex{2, 1}, Vertex{0, 1}, 0, 1}});
    ConstraintSet pin(2);
    pin.add(cyclic_vertex_constraint(0, Vertex{1, 1}, 1, kNoExemption, 2));
    pin.add(cyclic_vertex_constraint(0, Vertex{1, 0}, 1, kNoExemption, 2));
    pin.add(cyclic_vertex_constraint(0, Vertex{1, 2}, 1, kNoExemption, 2));
    Mdd x0 = build_mdd(mixed, 0, pin, 3);  // forced along the top row
    Mdd x1 = build_mdd(mixed, 1, pin, 3);
    REQUIRE(x0.width(1) == 1);
    Conflict semi{ConflictKind::kVertex, 0, 1, 1, 1, mid, mid, ConflictPriority::kUnknown};
    CHECK(classify(semi, x0, x1, open3) == ConflictPriority::kSemiCardinal);
}

TEST_CASE("edge conflicts classify on both endpoint layers", "[mdd]") {
    GridMap corridor = make_map({"..."});
    Instance inst = Instance::uniform(corridor, 2,
                                      {AgentStream{0, Vertex{0, 0}, Vertex{0, 2}, 0, 1},
                                       AgentStream{1, Vertex{0, 2}, Vertex{0, 0}, 0, 1}});
    ConstraintSet cs(2);
    Mdd m0 = build_mdd(inst, 0, cs, 3);
    Mdd m1 = build_mdd(inst, 1, cs, 3);
    Conflict e{ConflictKind::kEdge, 0, 1, 0, 1, Vertex{0, 0}, Vertex{0, 1},
               ConflictPriority::kUnknown};
    // Stream 0 crosses (0,0)->(0,1) at step 0; stream 1 crosses back at step 1.
    CHECK(classify(e, m0, m1, corridor) == ConflictPriority::kCardinal);
}

TEST_CASE("resolving a cardinal conflict raises the constrained side's cost", "[mdd]") {
    std::mt19937 rng(92);
    int cardinal_checked = 0;
    while (cardinal_checked < 15) {
        GridMap m = random_map(rng, 5, 5, 20);
        auto cells = passable_cells(m);
        const int c = 1 + static_cast<int>(rng() % 3);
        std::vector<AgentStream> streams;
        bool ok = true;
        for (int i = 0; i < 2 && ok; ++i) {
            Vertex s = cells[rng() % cells.size()];
            Vertex g = cells[rng() % cells.size()];
            auto dist = distance_field(m, g);
            if (dist[static_cast<std::size_t>(m.index(s))] < 0) {
                ok = false;
                break;
            }
            streams.push_back(
                AgentStream{i, s, g, static_cast<int>(rng() % static_cast<unsigned>(c)), c});
        }
        if (!ok) continue;
        Instance inst = Instance::uniform(m, c, streams);
        ConstraintSet cs(2);
        Solution sol;
        sol.paths.resize(2);
        for (int i = 0; i < 2; ++i) {
            auto dist = distance_field(m, streams[static_cast<std::size_t>(i)].goal);
            ConflictAvoidanceTable cat(m, true, c);
            auto res = astar_plan(inst, i, cs, cat, dist);
            REQUIRE(res.status == LowLevelResult::Status::kFound);
            sol.paths[static_cast<std::size_t>(i)] = res.path;
        }
        for (const Conflict& conf : find_conflicts(inst, sol)) {
            if (conf.i == conf.j || conf.kind != ConflictKind::kVertex) continue;
            Mdd mi = build_mdd(inst, conf.i, cs,
                               static_cast<int>(sol.paths[static_cast<std::size_t>(conf.i)].size()));
            Mdd mj = build_mdd(inst, conf.j, cs,
                               static_cast<int>(sol.paths[static_cast<std::size_t>(conf.j)].size()));
            if (classify(conf, mi, mj, m) != ConflictPriority::kCardinal) continue;
            ++cardinal_checked;
            for (int side = 0; side < 2; ++side) {
                const int stream = side == 0 ? conf.i : conf.j;
                const int q = side == 0 ? conf.q_i : conf.q_j;
                ConstraintSet harder = cs;
                harder.add(cyclic_vertex_constraint(stream, conf.v, q, kNoExemption, c));
                auto dist = distance_field(m, streams[static_cast<std::size_t>(stream)].goal);
                ConflictAvoidanceTable cat(m, true, c);
                auto res = astar_plan(inst, stream, harder, cat, dist);
                if (res.status == LowLevelResult::Status::kFound) {
                    CHECK(res.path.size() > sol.paths[static_cast<std::size_t>(stream)].size());
                }
            }
        }
    }
}
