#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <vector>

#include "smapf/constraints.hpp"
#include "smapf/instance.hpp"

namespace smapf {

struct Deadline {
    std::chrono::steady_clock::time_point at{std::chrono::steady_clock::time_point::max()};

    static Deadline never() { return Deadline{}; }
    static Deadline in_seconds(double s) {
        Deadline d;
        d.at = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(s));
        return d;
    }
    bool expired() const { return std::chrono::steady_clock::now() >= at; }
};

// Occupancy index over the other streams' current paths, used only to break
// ties among equal-f low-level nodes. Keys are (cell, absolute-time residue)
// in uniform mode; non-uniform mode keeps raw (offset, cycle) entries per
// cell and tests divisibility by the gcd at query time.
class ConflictAvoidanceTable {
public:
    explicit ConflictAvoidanceTable(const GridMap& m, bool uniform, int cycle)
        : width_(m.width()), nv_(m.size()), uniform_(uniform), cycle_(cycle) {}

    void add_path(const AgentStream& s, const StreamPath& path) {
        for (std::size_t q = 0; q < path.size(); ++q) {
            const long long off = s.t_start + static_cast<long long>(q);
            add_vertex_entry(index(path[q]), off, s.cycle);
        }
        for (std::size_t q = 0; q + 1 < path.size(); ++q) {
            if (path[q] == path[q + 1]) continue;
            const long long off = s.t_start + static_cast<long long>(q);
            add_edge_entry(index(path[q]), index(path[q + 1]), off, s.cycle);
        }
    }

    // Number of other-stream occupancies of `v` timing-compatible with an
    // occupancy at absolute time `abs_time` by a stream of cycle `my_cycle`.
    int vertex_hits(int vid, long long abs_time, int my_cycle) const {
        if (uniform_) {
            auto it = vcount_.find(static_cast<std::uint64_t>(vid) * cycle_ +
                                   static_cast<std::uint64_t>(abs_time % cycle_));
            return it == vcount_.end() ? 0 : it->second;
        }
        auto it = ventries_.find(vid);
        if (it == ventries_.end()) return 0;
        int hits = 0;
        for (const Entry& e : it->second) {
            const long long g = std::gcd(static_cast<long long>(my_cycle), e.cycle);
            if ((abs_time - e.offset) % g == 0) ++hits;
        }
        return hits;
    }

    // Number of other-stream traversals of to -> from timing-compatible with
    // my move from -> to departing at absolute time `abs_time` (a swap).
    int swap_hits(int from_vid, int to_vid, long long abs_time, int my_cycle) const {
        const std::uint64_t rev = static_cast<std::uint64_t>(to_vid) * static_cast<std::uint64_t>(nv_) +
                                  static_cast<std::uint64_t>(from_vid);
        if (uniform_) {
            auto it = ecount_.find(rev * cycle_ + static_cast<std::uint64_t>(abs_time % cycle_));
            return it == ecount_.end() ? 0 : it->second;
        }
        auto it = eentries_.find(rev);
        if (it == eentries_.end()) return 0;
        int hits = 0;
        for (const Entry& e : it->second) {
            const long long g = std::gcd(static_cast<long long>(my_cycle), e.cycle);
            if ((abs_time - e.offset) % g == 0) ++hits;
        }
        return hits;
    }

private:
    struct Entry {
        long long offset;
        long long cycle;
    };

    int index(Vertex v) const { return v.row * width_ + v.col; }

    void add_vertex_entry(int vid, long long off, int cycle) {
        if (uniform_) {
            ++vcount_[static_cast<std::uint64_t>(vid) * cycle_ +
                      static_cast<std::uint64_t>(off % cycle_)];
        } else {
            ventries_[vid].push_back(Entry{off, cycle});
        }
    }
    void add_edge_entry(int from, int to, long long off, int cycle) {
        const std::uint64_t key = static_cast<std::uint64_t>(from) * static_cast<std::uint64_t>(nv_) +
                                  static_cast<std::uint64_t>(to);
        if (uniform_) {
            ++ecount_[key * cycle_ + static_cast<std::uint64_t>(off % cycle_)];
        } else {
            eentries_[key].push_back(Entry{off, cycle});
        }
    }

    int width_;
    int nv_;
    bool uniform_;
    std::uint64_t cycle_;
    std::unordered_map<std::uint64_t, int> vcount_;
    std::unordered_map<std::uint64_t, int> ecount_;
    std::unordered_map<int, std::vector<Entry>> ventries_;
    std::unordered_map<std::uint64_t, std::vector<Entry>> eentries_;
};

// Table over every stream's current path except `exclude`.
inline ConflictAvoidanceTable build_cat(const Instance& inst, const Solution& sol, int exclude) {
    ConflictAvoidanceTable cat(inst.map(), inst.is_uniform(),
                               inst.is_uniform() ? inst.cycle_time() : 1);
    for (int i = 0; i < inst.num_streams(); ++i) {
        if (i == exclude) continue;
        if (static_cast<std::size_t>(i) >= sol.paths.size()) continue;
        const StreamPath& p = sol.paths[static_cast<std::size_t>(i)];
        if (p.empty()) continue;
        cat.add_path(inst.stream(i), p);
    }
    return cat;
}

struct LowLevelResult {
    enum class Status { kFound, kInfeasible, kTimeout } status = Status::kInfeasible;
    StreamPath path;
    long long expansions = 0;
};

namespace detail {

struct SearchLimits {
    int t_fin;          // last step with non-periodic constraint features
    long long period;   // fold period beyond t_fin
    long long t_cap;    // no path needs to run longer than this
    int last_mandate;   // earliest admissible arrival step
};

inline SearchLimits search_limits(const Instance& inst, int stream, const ConstraintSet& cs) {
    SearchLimits lim;
    lim.t_fin = cs.stream_horizon(stream);
    lim.period = cs.fold_period(stream, inst.stream(stream).cycle);
    lim.t_cap = static_cast<long long>(lim.t_fin) +
                static_cast<long long>(inst.map().size()) * lim.period + 1;
    lim.last_mandate = cs.last_mandate_step(stream);
    return lim;
}

// Beyond t_fin the blocked predicates are periodic, so times fold onto
// t_fin+1 .. t_fin+period; earlier times stay distinct.
inline long long fold_key(long long t, int t_fin, long long period) {
    if (t <= t_fin) return t;
    return t_fin + 1 + (t - t_fin - 1) % period;
}

}  // namespace detail

// Space-time A*: minimum arrival time first, then fewest accumulated CAT
// collisions, then the U,D,L,R,W expansion order. The start state is
// (start, 0) and is itself subject to the constraint set.
inline LowLevelResult astar_plan(const Instance& inst, int stream, const ConstraintSet& cs,
                                 const ConflictAvoidanceTable& cat, const std::vector<int>& dist,
                                 Deadline deadline = Deadline::never()) {
    const GridMap& m = inst.map();
    const AgentStream& s = inst.stream(stream);
    LowLevelResult result;

    const int start_id = m.index(s.start);
    const int goal_id = m.index(s.goal);
    if (dist[static_cast<std::size_t>(start_id)] < 0) return result;
    if (!cs.start_allowed(stream, s.start)) return result;

    const detail::SearchLimits lim = detail::search_limits(inst, stream, cs);

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
        bool operator>(const Entry& b) const {
            if (f != b.f) return f > b.f;
            if (cc != b.cc) return cc > b.cc;
            return seq > b.seq;
        }
    };
    std::vector<Node> arena;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    // Best (g, cc) label per folded state; lexicographic improvements reopen.
    std::unordered_map<std::uint64_t, std::pair<long long, int>> best;
    const std::uint64_t key_span = static_cast<std::uint64_t>(lim.t_fin) + lim.period + 2;
    auto state_key = [&](int vid, long long t) {
        return static_cast<std::uint64_t>(vid) * key_span +
               static_cast<std::uint64_t>(detail::fold_key(t, lim.t_fin, lim.period));
    };

    std::uint64_t seq = 0;
    {
        const int cc0 = cat.vertex_hits(start_id, s.t_start, s.cycle);
        arena.push_back(Node{start_id, 0, cc0, -1});
        best[state_key(start_id, 0)] = {0, cc0};
        open.push(Entry{dist[static_cast<std::size_t>(start_id)], cc0, seq++, 0});
    }

    while (!open.empty()) {
        const Entry e = open.top();
        open.pop();
        const Node node = arena[static_cast<std::size_t>(e.node)];
        {
            auto it = best.find(state_key(node.vid, node.t));
            if (it == best.end() || it->second != std::make_pair(node.t, node.cc)) continue;
        }
        ++result.expansions;
        if ((result.expansions & 0x3ff) == 0 && deadline.expired()) {
            result.status = LowLevelResult::Status::kTimeout;
            return result;
        }

        if (node.vid == goal_id && node.t >= lim.last_mandate) {
            StreamPath path;
            for (int idx = e.node; idx >= 0; idx = arena[static_cast<std::size_t>(idx)].parent)
                path.push_back(m.vertex(arena[static_cast<std::size_t>(idx)].vid));
            std::reverse(path.begin(), path.end());
            result.status = LowLevelResult::Status::kFound;
            result.path = std::move(path);
            return result;
        }
        if (node.t + 1 > lim.t_cap) continue;

        const Vertex from = m.vertex(node.vid);
        for (int a = 0; a < 5; ++a) {
            const Vertex to{from.row + kActionRow[static_cast<std::size_t>(a)],
                            from.col + kActionCol[static_cast<std::size_t>(a)]};
            if (!m.passable(to)) continue;
            const int to_id = m.index(to);
            if (dist[static_cast<std::size_t>(to_id)] < 0) continue;
            if (!cs.move_allowed(stream, from, to, static_cast<int>(node.t))) continue;

            const long long t_next = node.t + 1;
            int cc = node.cc + cat.vertex_hits(to_id, s.t_start + t_next, s.cycle);
            if (a != kWaitAction) cc += cat.swap_hits(node.vid, to_id, s.t_start + node.t, s.cycle);

            const std::uint64_t key = state_key(to_id, t_next);
            auto it = best.find(key);
            if (it != best.end() && it->second <= std::make_pair(t_next, cc)) continue;
            best[key] = {t_next, cc};
            arena.push_back(Node{to_id, t_next, cc, e.node});
            open.push(Entry{t_next + dist[static_cast<std::size_t>(to_id)], cc, seq++,
                            static_cast<int>(arena.size()) - 1});
        }
    }
    result.status = LowLevelResult::Status::kInfeasible;
    return result;
}

// Iterative-deepening variant. The depth-first search keeps the whole partial
// path, so successors that would collide with an earlier step of the same
// stream (vertex or swap, modulo the stream's cycle) are pruned; returned
// paths are free of same-stream cyclic conflicts. No state folding: the full
// path identity matters.
inline LowLevelResult idastar_plan(const Instance& inst, int stream, const ConstraintSet& cs,
                                   const ConflictAvoidanceTable& cat, const std::vector<int>& dist,
                                   Deadline deadline = Deadline::never()) {
    const GridMap& m = inst.map();
    const AgentStream& s = inst.stream(stream);
    LowLevelResult result;

    const int start_id = m.index(s.start);
    const int goal_id = m.index(s.goal);
    if (dist[static_cast<std::size_t>(start_id)] < 0) return result;
    if (!cs.start_allowed(stream, s.start)) return result;

    // Feasibility guard: self-clean paths are a subset of constrained paths,
    // so a folded A* pass settles infeasibility in polynomial time. Without
    // it, the depth-first search would have to enumerate every simple path
    // up to the horizon cap to prove a dead query dead.
    {
        LowLevelResult probe = astar_plan(inst, stream, cs, cat, dist, deadline);
        result.expansions = probe.expansions;
        if (probe.status != LowLevelResult::Status::kFound) {
            result.status = probe.status;
            return result;
        }
    }

    const detail::SearchLimits lim = detail::search_limits(inst, stream, cs);
    const long long cyc = s.cycle;
    const long long nv = m.size();

    std::vector<int> path_ids{start_id};
    std::unordered_map<std::uint64_t, int> vertex_used;   // (vid, q mod cyc) -> count
    std::unordered_map<std::uint64_t, int> edge_used;     // (from, to, q mod cyc) -> count
    auto vkey = [&](int vid, long long q) {
        return static_cast<std::uint64_t>(vid) * cyc + static_cast<std::uint64_t>(q % cyc);
    };
    auto ekey = [&](int from, int to, long long q) {
        return (static_cast<std::uint64_t>(from) * static_cast<std::uint64_t>(nv) +
                static_cast<std::uint64_t>(to)) *
                   cyc +
               static_cast<std::uint64_t>(q % cyc);
    };
    ++vertex_used[vkey(start_id, 0)];

    long long bound = dist[static_cast<std::size_t>(start_id)];
    long long next_bound = 0;
    bool timed_out = false;

    struct Succ {
        int vid;
        int delta_cc;
        int action;
    };

    auto dfs = [&](auto&& self, int vid, long long t) -> bool {
        ++result.expansions;
        if ((result.expansions & 0x3ff) == 0 && deadline.expired()) {
            timed_out = true;
            return false;
        }
        const long long f = t + dist[static_cast<std::size_t>(vid)];
        if (f > bound) {
            next_bound = std::min(next_bound, f);
            return false;
        }
        if (vid == goal_id && t >= lim.last_mandate) return true;
        if (t + 1 > lim.t_cap) return false;

        const Vertex from = m.vertex(vid);
        std::vector<Succ> succs;
        succs.reserve(5);
        for (int a = 0; a < 5; ++a) {
            const Vertex to{from.row + kActionRow[static_cast<std::size_t>(a)],
                            from.col + kActionCol[static_cast<std::size_t>(a)]};
            if (!m.passable(to)) continue;
            const int to_id = m.index(to);
            if (dist[static_cast<std::size_t>(to_id)] < 0) continue;
            if (!cs.move_allowed(stream, from, to, static_cast<int>(t))) continue;
            // Same-stream cyclic conflicts against the partial path.
            if (auto it = vertex_used.find(vkey(to_id, t + 1));
                it != vertex_used.end() && it->second > 0)
                continue;
            if (a != kWaitAction) {
                if (auto it = edge_used.find(ekey(to_id, vid, t));
                    it != edge_used.end() && it->second > 0)
                    continue;
            }
            int dcc = cat.vertex_hits(to_id, s.t_start + t + 1, s.cycle);
            if (a != kWaitAction) dcc += cat.swap_hits(vid, to_id, s.t_start + t, s.cycle);
            succs.push_back(Succ{to_id, dcc, a});
        }
        std::stable_sort(succs.begin(), succs.end(),
                         [](const Succ& a, const Succ& b) { return a.delta_cc < b.delta_cc; });

        for (const Succ& sc : succs) {
            ++vertex_used[vkey(sc.vid, t + 1)];
            const bool is_move = sc.vid != vid;
            if (is_move) ++edge_used[ekey(vid, sc.vid, t)];
            path_ids.push_back(sc.vid);
            if (self(self, sc.vid, t + 1)) return true;
            path_ids.pop_back();
            if (is_move) --edge_used[ekey(vid, sc.vid, t)];
            --vertex_used[vkey(sc.vid, t + 1)];
            if (timed_out) return false;
        }
        return false;
    };

    while (bound <= lim.t_cap) {
        next_bound = std::numeric_limits<long long>::max();
        if (dfs(dfs, start_id, 0)) {
            StreamPath path;
            path.reserve(path_ids.size());
            for (int vid : path_ids) path.push_back(m.vertex(vid));
            result.status = LowLevelResult::Status::kFound;
            result.path = std::move(path);
            return result;
        }
        if (timed_out) {
            result.status = LowLevelResult::Status::kTimeout;
            return result;
        }
        if (next_bound == std::numeric_limits<long long>::max()) break;
        bound = next_bound;
    }
    result.status = LowLevelResult::Status::kInfeasible;
    return result;
}

}  // namespace smapf
