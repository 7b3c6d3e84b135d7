#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "smapf/conflict.hpp"
#include "smapf/instance.hpp"

namespace smapf {

// A concrete agent of a stream: the k-th spawn, active on
// [spawn_time, spawn_time + l) and positioned at path[t - spawn_time].
struct SimAgent {
    int stream = 0;
    long long k = 0;
    long long spawn_time = 0;
};

struct CollisionEvent {
    long long t = 0;  // vertex events: occupancy time; edge events: departure time
    ConflictKind kind = ConflictKind::kVertex;
    SimAgent a;
    SimAgent b;
    Vertex v;  // vertex events: the shared cell; edge events: a's departure cell
    Vertex u;  // edge events: a's arrival cell

    friend bool operator<(const CollisionEvent& x, const CollisionEvent& y) {
        if (x.t != y.t) return x.t < y.t;
        if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind);
        if (x.a.stream != y.a.stream) return x.a.stream < y.a.stream;
        if (x.a.k != y.a.k) return x.a.k < y.a.k;
        if (x.b.stream != y.b.stream) return x.b.stream < y.b.stream;
        return x.b.k < y.b.k;
    }
};

struct CollisionReport {
    std::vector<CollisionEvent> events;
    std::vector<std::string> structural_errors;
    long long horizon_used = 0;
    bool lcm_capped = false;

    bool ok() const { return events.empty() && structural_errors.empty(); }
};

inline std::string to_string(const CollisionEvent& e) {
    std::string loc = to_string(e.v);
    if (e.kind == ConflictKind::kEdge) loc += "->" + to_string(e.u);
    return "t=" + std::to_string(e.t) + " kind=" + (e.kind == ConflictKind::kVertex ? "v" : "e") +
           " a=(" + std::to_string(e.a.stream) + "," + std::to_string(e.a.k) + ")" + " b=(" +
           std::to_string(e.b.stream) + "," + std::to_string(e.b.k) + ")" + " at=" + loc;
}

// Unrolls every agent with spawn_time <= horizon and checks vertex
// co-occupancy at times 0..horizon and edge swaps departing at times
// 0..horizon-1. Events are listed in (t, kind, agent-pair) order.
inline CollisionReport simulate(const Instance& inst, const Solution& sol, long long horizon) {
    CollisionReport report;
    report.horizon_used = horizon;
    if (horizon < 0) return report;

    struct Active {
        SimAgent agent;
        const StreamPath* path;
    };
    std::vector<Active> agents;
    for (int i = 0; i < inst.num_streams(); ++i) {
        const AgentStream& s = inst.stream(i);
        const StreamPath& p = sol.paths[static_cast<std::size_t>(i)];
        if (p.empty()) continue;
        for (long long k = 0;; ++k) {
            long long spawn = k * s.cycle + s.t_start;
            if (spawn > horizon) break;
            agents.push_back(Active{SimAgent{i, k, spawn}, &p});
        }
    }

    auto order_pair = [](const SimAgent& x, const SimAgent& y) {
        if (x.stream != y.stream) return x.stream < y.stream;
        return x.k < y.k;
    };

    std::unordered_map<int, std::vector<std::size_t>> at_cell;
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> moving;
    const long long nv = inst.map().size();
    for (long long t = 0; t <= horizon; ++t) {
        at_cell.clear();
        for (std::size_t a = 0; a < agents.size(); ++a) {
            const Active& ag = agents[a];
            long long q = t - ag.agent.spawn_time;
            if (q < 0 || q >= static_cast<long long>(ag.path->size())) continue;
            at_cell[inst.map().index((*ag.path)[static_cast<std::size_t>(q)])].push_back(a);
        }
        for (auto& [cell, list] : at_cell) {
            for (std::size_t x = 0; x < list.size(); ++x) {
                for (std::size_t y = x + 1; y < list.size(); ++y) {
                    SimAgent pa = agents[list[x]].agent;
                    SimAgent pb = agents[list[y]].agent;
                    if (!order_pair(pa, pb)) std::swap(pa, pb);
                    report.events.push_back(CollisionEvent{t, ConflictKind::kVertex, pa, pb,
                                                           inst.map().vertex(cell),
                                                           inst.map().vertex(cell)});
                }
            }
        }
        if (t == horizon) break;
        moving.clear();
        for (std::size_t a = 0; a < agents.size(); ++a) {
            const Active& ag = agents[a];
            long long q = t - ag.agent.spawn_time;
            if (q < 0 || q + 1 >= static_cast<long long>(ag.path->size())) continue;
            Vertex from = (*ag.path)[static_cast<std::size_t>(q)];
            Vertex to = (*ag.path)[static_cast<std::size_t>(q + 1)];
            if (from == to) continue;
            std::uint64_t key = static_cast<std::uint64_t>(inst.map().index(from)) *
                                    static_cast<std::uint64_t>(nv) +
                                static_cast<std::uint64_t>(inst.map().index(to));
            moving[key].push_back(a);
        }
        for (auto& [key, list] : moving) {
            const int from_id = static_cast<int>(key / static_cast<std::uint64_t>(nv));
            const int to_id = static_cast<int>(key % static_cast<std::uint64_t>(nv));
            if (from_id >= to_id) continue;  // visit each unordered edge once
            std::uint64_t rev = static_cast<std::uint64_t>(to_id) * static_cast<std::uint64_t>(nv) +
                                static_cast<std::uint64_t>(from_id);
            auto it = moving.find(rev);
            if (it == moving.end()) continue;
            for (std::size_t x : list) {
                for (std::size_t y : it->second) {
                    SimAgent pa = agents[x].agent;
                    SimAgent pb = agents[y].agent;
                    Vertex av = inst.map().vertex(from_id);
                    Vertex au = inst.map().vertex(to_id);
                    if (!order_pair(pa, pb)) {
                        std::swap(pa, pb);
                        std::swap(av, au);
                    }
                    report.events.push_back(
                        CollisionEvent{t, ConflictKind::kEdge, pa, pb, av, au});
                }
            }
        }
    }
    std::sort(report.events.begin(), report.events.end());
    return report;
}

namespace detail {

inline long long capped_lcm(long long a, long long b, long long cap, bool& capped) {
    long long g = std::gcd(a, b);
    long long l = a / g * b;
    if (l > cap) {
        capped = true;
        return cap;
    }
    return l;
}

}  // namespace detail

// Structural validation followed by a simulation over a horizon long enough
// that every step-level conflict is realized by concrete agents:
// max t_start + 4 * (longest path + largest cycle period).
inline CollisionReport validate(const Instance& inst, const Solution& sol) {
    CollisionReport report;
    if (static_cast<int>(sol.paths.size()) != inst.num_streams()) {
        report.structural_errors.push_back("solution has " + std::to_string(sol.paths.size()) +
                                           " paths for " + std::to_string(inst.num_streams()) +
                                           " streams");
        return report;
    }
    for (int i = 0; i < inst.num_streams(); ++i) {
        const AgentStream& s = inst.stream(i);
        const StreamPath& p = sol.paths[static_cast<std::size_t>(i)];
        const std::string tag = "stream " + std::to_string(i) + ": ";
        if (p.empty()) {
            report.structural_errors.push_back(tag + "empty path");
            continue;
        }
        if (p.front() != s.start)
            report.structural_errors.push_back(tag + "path does not begin at the start vertex");
        if (p.back() != s.goal)
            report.structural_errors.push_back(tag + "path does not end at the goal vertex");
        for (std::size_t q = 0; q < p.size(); ++q) {
            if (!inst.map().passable(p[q])) {
                report.structural_errors.push_back(tag + "step " + std::to_string(q) +
                                                   " is not a passable cell");
                break;
            }
        }
        for (std::size_t q = 0; q + 1 < p.size(); ++q) {
            int dr = p[q + 1].row - p[q].row;
            int dc = p[q + 1].col - p[q].col;
            if (std::abs(dr) + std::abs(dc) > 1) {
                report.structural_errors.push_back(tag + "step " + std::to_string(q) +
                                                   " is not a unit move or wait");
                break;
            }
        }
    }
    if (!report.structural_errors.empty()) return report;

    long long l_max = 1;
    for (const auto& p : sol.paths) l_max = std::max(l_max, static_cast<long long>(p.size()));
    long long max_t_start = 0;
    bool capped = false;
    long long c_max = 1;
    if (inst.is_uniform()) {
        c_max = inst.cycle_time();
    } else {
        constexpr long long kLcmCap = 1'000'000;
        for (const AgentStream& s : inst.streams())
            c_max = detail::capped_lcm(c_max, s.cycle, kLcmCap, capped);
    }
    for (const AgentStream& s : inst.streams())
        max_t_start = std::max(max_t_start, static_cast<long long>(s.t_start));

    report = simulate(inst, sol, max_t_start + 4 * (l_max + c_max));
    report.lcm_capped = capped;
    return report;
}

}  // namespace smapf
