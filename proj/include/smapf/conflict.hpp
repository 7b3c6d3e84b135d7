#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <vector>

#include "smapf/instance.hpp"

namespace smapf {

// Two spawned agents of streams i and j collide iff their absolute times can
// line up: k_i*c_i + t_i + q_i == k_j*c_j + t_j + q_j for some nonnegative
// k_i, k_j (k_i != k_j when i == j). Shifting any integer solution by
// (c_j/g, c_i/g) makes both k's nonnegative, so existence reduces to the
// divisibility test g = gcd(c_i, c_j) | (t_j + q_j - t_i - q_i).
inline bool timing_compatible(long long t_i, int c_i, long long q_i, long long t_j, int c_j,
                              long long q_j, bool same_agent_excluded) {
    const long long diff = (t_j + q_j) - (t_i + q_i);
    const long long g = std::gcd(static_cast<long long>(c_i), static_cast<long long>(c_j));
    if (diff % g != 0) return false;
    // With equal cycles k_i - k_j is pinned to diff/c; diff == 0 then forces
    // k_i == k_j, which is the same agent. Distinct cycles always admit a
    // solution with k_i != k_j.
    if (same_agent_excluded && c_i == c_j && diff == 0) return false;
    return true;
}

enum class ConflictKind : std::uint8_t { kVertex = 0, kEdge = 1 };

enum class ConflictPriority : std::uint8_t {
    kNonCardinal = 0,
    kSemiCardinal = 1,
    kCardinal = 2,
    kUnknown = 3,
};

// Canonical form: i <= j, and q_i < q_j when i == j. For edge conflicts
// (v, u) is the edge as traversed by stream i at step q_i; stream j traverses
// u -> v at step q_j.
struct Conflict {
    ConflictKind kind = ConflictKind::kVertex;
    int i = 0;
    int j = 0;
    int q_i = 0;
    int q_j = 0;
    Vertex v;
    Vertex u;
    ConflictPriority priority = ConflictPriority::kUnknown;

    friend bool operator==(const Conflict& a, const Conflict& b) {
        return a.kind == b.kind && a.i == b.i && a.j == b.j && a.q_i == b.q_i && a.q_j == b.q_j &&
               a.v == b.v && a.u == b.u;
    }
};

inline bool conflict_order(const Conflict& a, const Conflict& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    if (a.q_i != b.q_i) return a.q_i < b.q_i;
    if (a.q_j != b.q_j) return a.q_j < b.q_j;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
}

inline std::string to_string(const Conflict& c) {
    std::string s = c.kind == ConflictKind::kVertex ? "vertex" : "edge";
    s += "<" + std::to_string(c.i) + "," + std::to_string(c.j) + "," + std::to_string(c.q_i) +
         "," + std::to_string(c.q_j) + "," + to_string(c.v);
    if (c.kind == ConflictKind::kEdge) s += "->" + to_string(c.u);
    return s + ">";
}

// All cyclic conflicts between streams i and j (i == j allowed). Occupancies
// are bucketed by (location, (t_start + q) mod gcd(c_i, c_j)); entries in one
// bucket are exactly the timing-compatible pairs.
inline std::vector<Conflict> find_conflicts_between(const Instance& inst, const Solution& sol,
                                                    int i, int j) {
    assert(i <= j);
    const AgentStream& si = inst.stream(i);
    const AgentStream& sj = inst.stream(j);
    const StreamPath& pi = sol.paths[static_cast<std::size_t>(i)];
    const StreamPath& pj = sol.paths[static_cast<std::size_t>(j)];
    const long long g = std::gcd(static_cast<long long>(si.cycle), static_cast<long long>(sj.cycle));
    const GridMap& m = inst.map();
    const long long nv = m.size();

    std::vector<Conflict> out;
    auto vkey = [&](Vertex v, long long q, long long t0) {
        return static_cast<std::uint64_t>(m.index(v)) * static_cast<std::uint64_t>(g) +
               static_cast<std::uint64_t>((t0 + q) % g);
    };
    auto ekey = [&](Vertex from, Vertex to, long long q, long long t0) {
        std::uint64_t e = static_cast<std::uint64_t>(m.index(from)) * static_cast<std::uint64_t>(nv) +
                          static_cast<std::uint64_t>(m.index(to));
        return e * static_cast<std::uint64_t>(g) + static_cast<std::uint64_t>((t0 + q) % g);
    };

    std::unordered_map<std::uint64_t, std::vector<int>> vocc;
    std::unordered_map<std::uint64_t, std::vector<int>> eocc;

    if (i == j) {
        // Scan steps in order, querying before inserting: emitted pairs have
        // q_i < q_j by construction.
        for (int q = 0; q < static_cast<int>(pi.size()); ++q) {
            if (auto it = vocc.find(vkey(pi[static_cast<std::size_t>(q)], q, si.t_start));
                it != vocc.end()) {
                for (int qp : it->second) {
                    out.push_back(Conflict{ConflictKind::kVertex, i, i, qp, q,
                                           pi[static_cast<std::size_t>(q)], pi[static_cast<std::size_t>(q)],
                                           ConflictPriority::kUnknown});
                }
            }
            vocc[vkey(pi[static_cast<std::size_t>(q)], q, si.t_start)].push_back(q);
        }
        for (int q = 0; q + 1 < static_cast<int>(pi.size()); ++q) {
            Vertex from = pi[static_cast<std::size_t>(q)];
            Vertex to = pi[static_cast<std::size_t>(q + 1)];
            if (from == to) continue;
            if (auto it = eocc.find(ekey(to, from, q, si.t_start)); it != eocc.end()) {
                for (int qp : it->second) {
                    // Earlier step qp traversed to -> from; q traverses from -> to.
                    out.push_back(Conflict{ConflictKind::kEdge, i, i, qp, q, to, from,
                                           ConflictPriority::kUnknown});
                }
            }
            eocc[ekey(from, to, q, si.t_start)].push_back(q);
        }
    } else {
        for (int q = 0; q < static_cast<int>(pi.size()); ++q)
            vocc[vkey(pi[static_cast<std::size_t>(q)], q, si.t_start)].push_back(q);
        for (int q = 0; q + 1 < static_cast<int>(pi.size()); ++q) {
            Vertex from = pi[static_cast<std::size_t>(q)];
            Vertex to = pi[static_cast<std::size_t>(q + 1)];
            if (from == to) continue;
            eocc[ekey(from, to, q, si.t_start)].push_back(q);
        }
        for (int q = 0; q < static_cast<int>(pj.size()); ++q) {
            if (auto it = vocc.find(vkey(pj[static_cast<std::size_t>(q)], q, sj.t_start));
                it != vocc.end()) {
                for (int qi : it->second) {
                    out.push_back(Conflict{ConflictKind::kVertex, i, j, qi, q,
                                           pj[static_cast<std::size_t>(q)], pj[static_cast<std::size_t>(q)],
                                           ConflictPriority::kUnknown});
                }
            }
        }
        for (int q = 0; q + 1 < static_cast<int>(pj.size()); ++q) {
            Vertex from = pj[static_cast<std::size_t>(q)];
            Vertex to = pj[static_cast<std::size_t>(q + 1)];
            if (from == to) continue;
            if (auto it = eocc.find(ekey(to, from, q, sj.t_start)); it != eocc.end()) {
                for (int qi : it->second) {
                    // Stream i traverses to -> from at qi; stream j swaps it at q.
                    out.push_back(Conflict{ConflictKind::kEdge, i, j, qi, q, to, from,
                                           ConflictPriority::kUnknown});
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), conflict_order);
    return out;
}

inline std::vector<Conflict> find_conflicts(const Instance& inst, const Solution& sol) {
    std::vector<Conflict> out;
    for (int i = 0; i < inst.num_streams(); ++i) {
        for (int j = i; j < inst.num_streams(); ++j) {
            auto part = find_conflicts_between(inst, sol, i, j);
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    std::sort(out.begin(), out.end(), conflict_order);
    return out;
}

struct TimingWitness {
    long long k_i = 0;
    long long k_j = 0;
};

namespace detail {

// ext_gcd(a, b) returns (g, x, y) with x*a + y*b == g.
inline std::tuple<long long, long long, long long> ext_gcd(long long a, long long b) {
    if (b == 0) return {a, 1, 0};
    auto [g, x, y] = ext_gcd(b, a % b);
    return {g, y, x - (a / b) * y};
}

inline long long ceil_div(long long a, long long b) {
    // b > 0
    return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

}  // namespace detail

// Lexicographically smallest nonnegative (k_i, k_j) with
// k_i*c_i - k_j*c_j == diff, excluding k_i == k_j for same-stream conflicts.
inline TimingWitness min_timing_witness(long long diff, int c_i, int c_j, bool exclude_equal) {
    auto [g, x, y] = detail::ext_gcd(c_i, c_j);
    if (diff % g != 0) throw std::logic_error("min_timing_witness: no solution exists");
    const long long f = diff / g;
    // General solution: (ki0 + m*c_j/g, kj0 + m*c_i/g). Both coordinates grow
    // with m, so the smallest m keeping both nonnegative is lexicographically
    // minimal.
    long long ki = x * f;
    long long kj = -y * f;
    const long long step_i = c_j / g;
    const long long step_j = c_i / g;
    const long long m = std::max(detail::ceil_div(-ki, step_i), detail::ceil_div(-kj, step_j));
    ki += m * step_i;
    kj += m * step_j;
    if (exclude_equal && ki == kj) {
        if (step_i == step_j)
            throw std::logic_error("min_timing_witness: only the same-agent pairing exists");
        // With distinct steps, k_i == k_j holds for at most one shift index.
        ki += step_i;
        kj += step_j;
    }
    return TimingWitness{ki, kj};
}

// Smallest-lexicographic concrete spawn indices realizing a detected conflict.
inline TimingWitness conflict_witness(const Conflict& conf, const Instance& inst) {
    const AgentStream& si = inst.stream(conf.i);
    const AgentStream& sj = inst.stream(conf.j);
    const long long diff =
        (static_cast<long long>(sj.t_start) + conf.q_j) - (static_cast<long long>(si.t_start) + conf.q_i);
    return min_timing_witness(diff, si.cycle, sj.cycle, conf.i == conf.j);
}

}  // namespace smapf
