#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "smapf/instance.hpp"
#include "smapf/low_level.hpp"
#include "smapf/solver.hpp"

namespace smapf {

// One concrete agent cut out of a stream for the finite-horizon baseline.
struct UnrolledAgent {
    int stream = 0;
    long long k = 0;
    Vertex start;
    Vertex goal;
    long long start_time = 0;
};

// Agents whose spawn time is at most `horizon`, ordered by (stream, k).
inline std::vector<UnrolledAgent> unroll(const Instance& inst, long long horizon) {
    if (!inst.is_uniform()) throw std::invalid_argument("unroll expects a uniform instance");
    std::vector<UnrolledAgent> agents;
    for (const AgentStream& s : inst.streams()) {
        for (long long k = 0;; ++k) {
            const long long spawn = k * s.cycle + s.t_start;
            if (spawn > horizon) break;
            agents.push_back(UnrolledAgent{s.id, k, s.start, s.goal, spawn});
        }
    }
    return agents;
}

struct CbsResult {
    enum class Status { kSolved, kUnsolvable, kTimeout } status = Status::kTimeout;
    std::vector<StreamPath> paths;  // paths[a][q] is agent a's cell at start_time + q
    long long soc = 0;
    long long ct_expanded = 0;
    long long ct_generated = 0;
    double elapsed_seconds = 0.0;
};

namespace detail {

// Plain (agent, cell, absolute time) and (agent, move, departure time)
// constraints for the timed baseline.
struct TimedConstraints {
    std::unordered_set<std::uint64_t> vertex;  // (vid, t)
    std::unordered_set<std::uint64_t> edge;    // (from, to, t)
    long long max_time = -1;

    static std::uint64_t vkey(int vid, long long t) {
        return detail::mix64(static_cast<std::uint64_t>(vid)) ^
               static_cast<std::uint64_t>(t) * 0x9e3779b97f4a7c15ULL;
    }
    static std::uint64_t ekey(int from, int to, long long t) {
        return detail::mix64(static_cast<std::uint64_t>(from) << 20 |
                             static_cast<std::uint64_t>(to)) ^
               static_cast<std::uint64_t>(t) * 0xbf58476d1ce4e5b9ULL;
    }

    void block_vertex(int vid, long long t) {
        vertex.insert(vkey(vid, t));
        max_time = std::max(max_time, t);
    }
    void block_edge(int from, int to, long long t) {
        edge.insert(ekey(from, to, t));
        max_time = std::max(max_time, t);
    }
    bool blocked_vertex(int vid, long long t) const { return vertex.count(vkey(vid, t)) != 0; }
    bool blocked_edge(int from, int to, long long t) const {
        return edge.count(ekey(from, to, t)) != 0;
    }
};

// Timed occupancy of the other agents, for tie-breaking.
struct TimedCat {
    std::unordered_map<std::uint64_t, int> vertex;
    std::unordered_map<std::uint64_t, int> edge;

    void add_path(const GridMap& m, const UnrolledAgent& a, const StreamPath& p) {
        for (std::size_t q = 0; q < p.size(); ++q)
            ++vertex[TimedConstraints::vkey(m.index(p[q]), a.start_time + static_cast<long long>(q))];
        for (std::size_t q = 0; q + 1 < p.size(); ++q) {
            if (p[q] == p[q + 1]) continue;
            ++edge[TimedConstraints::ekey(m.index(p[q]), m.index(p[q + 1]),
                                          a.start_time + static_cast<long long>(q))];
        }
    }
    int vertex_hits(int vid, long long t) const {
        auto it = vertex.find(TimedConstraints::vkey(vid, t));
        return it == vertex.end() ? 0 : it->second;
    }
    int swap_hits(int from, int to, long long t) const {
        auto it = edge.find(TimedConstraints::ekey(to, from, t));
        return it == edge.end() ? 0 : it->second;
    }
};

// Timed A* for one agent; arrival time minus spawn is the cost. Beyond the
// last constrained time step states fold on the vertex alone.
inline std::optional<StreamPath> timed_astar(const GridMap& m, const UnrolledAgent& agent,
                                             const TimedConstraints& cons, const TimedCat& cat,
                                             const std::vector<int>& dist, long long* expansions) {
    const int start_id = m.index(agent.start);
    const int goal_id = m.index(agent.goal);
    if (dist[static_cast<std::size_t>(start_id)] < 0) return std::nullopt;
    if (cons.blocked_vertex(start_id, agent.start_time)) return std::nullopt;

    const long long t_fin = std::max(cons.max_time, agent.start_time);
    const long long t_cap = t_fin + m.size() + 1;
    auto fold = [&](long long t) { return std::min(t, t_fin + 1); };

    struct Node {
        int vid;
        long long t;
        int cc;
        int parent;
    };
    struct Entry {
        long long f;
        int cc;
        std::uint64_t seq;
        int node;
        bool operator>(const Entry& o) const {
            if (f != o.f) return f > o.f;
            if (cc != o.cc) return cc > o.cc;
            return seq > o.seq;
        }
    };
    std::vector<Node> arena;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::unordered_map<std::uint64_t, std::pair<long long, int>> best;
    auto key = [&](int vid, long long t) {
        return static_cast<std::uint64_t>(vid) * static_cast<std::uint64_t>(t_fin + 3) +
               static_cast<std::uint64_t>(fold(t) - agent.start_time);
    };

    std::uint64_t seq = 0;
    arena.push_back(Node{start_id, agent.start_time, cat.vertex_hits(start_id, agent.start_time), -1});
    best[key(start_id, agent.start_time)] = {agent.start_time, arena[0].cc};
    open.push(Entry{agent.start_time + dist[static_cast<std::size_t>(start_id)], arena[0].cc, seq++, 0});

    while (!open.empty()) {
        const Entry e = open.top();
        open.pop();
        const Node node = arena[static_cast<std::size_t>(e.node)];
        {
            auto it = best.find(key(node.vid, node.t));
            if (it == best.end() || it->second != std::make_pair(node.t, node.cc)) continue;
        }
        ++*expansions;
        if (node.vid == goal_id) {
            StreamPath path;
            for (int idx = e.node; idx >= 0; idx = arena[static_cast<std::size_t>(idx)].parent)
                path.push_back(m.vertex(arena[static_cast<std::size_t>(idx)].vid));
            std::reverse(path.begin(), path.end());
            return path;
        }
        if (node.t + 1 > t_cap) continue;
        const Vertex from = m.vertex(node.vid);
        for (int a = 0; a < 5; ++a) {
            const Vertex to{from.row + kActionRow[static_cast<std::size_t>(a)],
                            from.col + kActionCol[static_cast<std::size_t>(a)]};
            if (!m.passable(to)) continue;
            const int to_id = m.index(to);
            if (dist[static_cast<std::size_t>(to_id)] < 0) continue;
            if (cons.blocked_vertex(to_id, node.t + 1)) continue;
            if (a != kWaitAction && cons.blocked_edge(node.vid, to_id, node.t)) continue;
            int cc = node.cc + cat.vertex_hits(to_id, node.t + 1);
            if (a != kWaitAction) cc += cat.swap_hits(node.vid, to_id, node.t);
            auto it = best.find(key(to_id, node.t + 1));
            if (it != best.end() && it->second <= std::make_pair(node.t + 1, cc)) continue;
            best[key(to_id, node.t + 1)] = {node.t + 1, cc};
            arena.push_back(Node{to_id, node.t + 1, cc, e.node});
            open.push(Entry{node.t + 1 + dist[static_cast<std::size_t>(to_id)], cc, seq++,
                            static_cast<int>(arena.size()) - 1});
        }
    }
    return std::nullopt;
}

struct TimedConflict {
    bool edge = false;
    long long t = 0;  // vertex: occupancy time; edge: departure time
    int a = 0;
    int b = 0;
    Vertex v;
    Vertex u;
};

// First conflict in (t, vertex-before-edge, agent pair) order.
inline std::optional<TimedConflict> first_timed_conflict(const std::vector<UnrolledAgent>& agents,
                                                         const std::vector<StreamPath>& paths) {
    std::optional<TimedConflict> best;
    auto consider = [&](const TimedConflict& c) {
        if (!best) {
            best = c;
            return;
        }
        auto rank = [](const TimedConflict& x) {
            return std::make_tuple(x.t, x.edge ? 1 : 0, x.a, x.b);
        };
        if (rank(c) < rank(*best)) best = c;
    };
    for (std::size_t a = 0; a < agents.size(); ++a) {
        for (std::size_t b = a + 1; b < agents.size(); ++b) {
            const long long sa = agents[a].start_time;
            const long long sb = agents[b].start_time;
            const long long lo = std::max(sa, sb);
            const long long hi = std::min(sa + static_cast<long long>(paths[a].size()),
                                          sb + static_cast<long long>(paths[b].size())) -
                                 1;
            for (long long t = lo; t <= hi; ++t) {
                const Vertex va = paths[a][static_cast<std::size_t>(t - sa)];
                const Vertex vb = paths[b][static_cast<std::size_t>(t - sb)];
                if (va == vb)
                    consider(TimedConflict{false, t, static_cast<int>(a), static_cast<int>(b), va, va});
                if (t < hi) {
                    const Vertex na = paths[a][static_cast<std::size_t>(t + 1 - sa)];
                    const Vertex nb = paths[b][static_cast<std::size_t>(t + 1 - sb)];
                    if (!(va == na) && va == nb && na == vb)
                        consider(TimedConflict{true, t, static_cast<int>(a), static_cast<int>(b), va, na});
                }
            }
        }
    }
    return best;
}

inline long long timed_soc(const std::vector<StreamPath>& paths) {
    long long total = 0;
    for (const auto& p : paths) total += static_cast<long long>(p.size()) - 1;
    return total;
}

}  // namespace detail

// Vanilla conflict-based search over the unrolled agents: plain vertex/edge
// constraints at absolute times, agents vanish on arrival. Deterministic.
inline CbsResult cbs_solve(const std::vector<UnrolledAgent>& agents, const GridMap& m,
                           double timeout_seconds) {
    using detail::TimedCat;
    using detail::TimedConstraints;
    const auto t0 = std::chrono::steady_clock::now();
    const auto deadline = Deadline::in_seconds(timeout_seconds);
    CbsResult result;
    auto finish = [&](CbsResult::Status st) {
        result.status = st;
        result.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
    };

    // Distance fields per distinct goal.
    std::unordered_map<int, std::vector<int>> dist_by_goal;
    for (const UnrolledAgent& a : agents) {
        const int gid = m.index(a.goal);
        if (dist_by_goal.find(gid) == dist_by_goal.end())
            dist_by_goal.emplace(gid, distance_field(m, a.goal));
    }

    struct Node {
        std::vector<TimedConstraints> cons;
        std::vector<StreamPath> paths;
        long long cost = 0;
        long long n_conflicts = 0;
        std::uint64_t seq = 0;
    };
    struct Order {
        bool operator()(const std::shared_ptr<Node>& x, const std::shared_ptr<Node>& y) const {
            if (x->cost != y->cost) return x->cost > y->cost;
            if (x->n_conflicts != y->n_conflicts) return x->n_conflicts > y->n_conflicts;
            return x->seq > y->seq;
        }
    };

    long long expansions = 0;
    auto plan_agent = [&](Node& node, std::size_t idx) -> bool {
        TimedCat cat;
        for (std::size_t o = 0; o < agents.size(); ++o) {
            if (o == idx || node.paths[o].empty()) continue;
            cat.add_path(m, agents[o], node.paths[o]);
        }
        auto path = detail::timed_astar(m, agents[idx], node.cons[idx], cat,
                                        dist_by_goal.at(m.index(agents[idx].goal)), &expansions);
        if (!path) return false;
        node.paths[idx] = std::move(*path);
        return true;
    };

    auto count_conflicts = [&](const Node& node) {
        long long count = 0;
        const auto& paths = node.paths;
        // Count pairwise conflicts exactly once for the tie-break key.
        for (std::size_t a = 0; a < agents.size(); ++a) {
            for (std::size_t b = a + 1; b < agents.size(); ++b) {
                const long long sa = agents[a].start_time;
                const long long sb = agents[b].start_time;
                const long long lo = std::max(sa, sb);
                const long long hi = std::min(sa + static_cast<long long>(paths[a].size()),
                                              sb + static_cast<long long>(paths[b].size())) -
                                     1;
                for (long long t = lo; t <= hi; ++t) {
                    const Vertex va = paths[a][static_cast<std::size_t>(t - sa)];
                    const Vertex vb = paths[b][static_cast<std::size_t>(t - sb)];
                    if (va == vb) ++count;
                    if (t < hi) {
                        const Vertex na = paths[a][static_cast<std::size_t>(t + 1 - sa)];
                        const Vertex nb = paths[b][static_cast<std::size_t>(t + 1 - sb)];
                        if (!(va == na) && va == nb && na == vb) ++count;
                    }
                }
            }
        }
        return count;
    };

    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, Order> open;
    std::uint64_t seq = 0;

    auto root = std::make_shared<Node>();
    root->cons.resize(agents.size());
    root->paths.resize(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (!plan_agent(*root, i)) return finish(CbsResult::Status::kUnsolvable);
    }
    root->cost = detail::timed_soc(root->paths);
    root->n_conflicts = count_conflicts(*root);
    root->seq = seq++;
    open.push(root);
    ++result.ct_generated;

    while (!open.empty()) {
        if (deadline.expired()) return finish(CbsResult::Status::kTimeout);
        auto node = open.top();
        open.pop();
        ++result.ct_expanded;
        auto conflict = detail::first_timed_conflict(agents, node->paths);
        if (!conflict) {
            result.paths = node->paths;
            result.soc = node->cost;
            return finish(CbsResult::Status::kSolved);
        }
        for (int side = 0; side < 2; ++side) {
            const int idx = side == 0 ? conflict->a : conflict->b;
            auto child = std::make_shared<Node>(*node);
            child->seq = seq++;
            if (conflict->edge) {
                if (side == 0)
                    child->cons[static_cast<std::size_t>(idx)].block_edge(
                        m.index(conflict->v), m.index(conflict->u), conflict->t);
                else
                    child->cons[static_cast<std::size_t>(idx)].block_edge(
                        m.index(conflict->u), m.index(conflict->v), conflict->t);
            } else {
                child->cons[static_cast<std::size_t>(idx)].block_vertex(m.index(conflict->v),
                                                                        conflict->t);
            }
            if (!plan_agent(*child, static_cast<std::size_t>(idx))) continue;
            if (deadline.expired()) return finish(CbsResult::Status::kTimeout);
            child->cost = detail::timed_soc(child->paths);
            child->n_conflicts = count_conflicts(*child);
            open.push(child);
            ++result.ct_generated;
        }
    }
    return finish(CbsResult::Status::kUnsolvable);
}

struct CompareRecord {
    long long horizon = 0;
    std::optional<long long> cbs_soc;
    std::optional<long long> ascbs_unrolled_soc;
    std::optional<double> relative_error;
    std::optional<double> cbs_seconds;
    double ascbs_seconds = 0.0;
    long long n_agents = 0;
};

// Quality comparison at one horizon: the periodic solution's unrolled cost
// against an optimal finite solve of the same agents.
inline CompareRecord compare(const Instance& inst, const SolveReport& ascbs, long long horizon,
                             double timeout_seconds) {
    if (ascbs.outcome != Outcome::kSolved || !ascbs.solution)
        throw std::invalid_argument("compare needs a solved periodic report");
    CompareRecord rec;
    rec.horizon = horizon;
    rec.ascbs_seconds = ascbs.elapsed_seconds;
    const auto agents = unroll(inst, horizon);
    rec.n_agents = static_cast<long long>(agents.size());

    long long unrolled = 0;
    for (const UnrolledAgent& a : agents)
        unrolled +=
            static_cast<long long>(ascbs.solution->paths[static_cast<std::size_t>(a.stream)].size()) - 1;
    rec.ascbs_unrolled_soc = unrolled;

    CbsResult cbs = cbs_solve(agents, inst.map(), timeout_seconds);
    if (cbs.status == CbsResult::Status::kSolved) {
        rec.cbs_soc = cbs.soc;
        rec.cbs_seconds = cbs.elapsed_seconds;
        if (cbs.soc > 0)
            rec.relative_error = static_cast<double>(unrolled - cbs.soc) / static_cast<double>(cbs.soc);
        else if (unrolled == 0)
            rec.relative_error = 0.0;
    }
    return rec;
}

}  // namespace smapf
