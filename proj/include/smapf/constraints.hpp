#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "smapf/instance.hpp"

namespace smapf {

enum class ConstraintKind : std::uint8_t {
    kVertex,          // blocks (v, q) exactly
    kEdge,            // blocks the directed move v -> u departing at q
    kCyclicVertex,    // blocks (v, q') for every q' == q (mod cycle), q' != q_e
    kCyclicEdge,      // blocks v -> u departing at every q' == q (mod cycle), q' != q_e
    kPositiveVertex,  // the stream must occupy v at step q
    kPositiveEdge,    // the stream must traverse v -> u departing at step q
};

inline constexpr int kNoExemption = -1;

struct Constraint {
    ConstraintKind kind = ConstraintKind::kVertex;
    int stream = 0;
    Vertex v;
    Vertex u;              // edge kinds only: the arrival cell
    int q = 0;             // plain/positive: the step; cyclic: the residue q_r
    int q_e = kNoExemption;  // cyclic kinds: exempted step, kNoExemption if none
    int cycle = 0;         // cyclic kinds only

    bool is_cyclic() const {
        return kind == ConstraintKind::kCyclicVertex || kind == ConstraintKind::kCyclicEdge;
    }
    bool is_positive() const {
        return kind == ConstraintKind::kPositiveVertex || kind == ConstraintKind::kPositiveEdge;
    }
    bool is_edge_like() const {
        return kind == ConstraintKind::kEdge || kind == ConstraintKind::kCyclicEdge ||
               kind == ConstraintKind::kPositiveEdge;
    }
};

inline Constraint vertex_constraint(int stream, Vertex v, int q) {
    return Constraint{ConstraintKind::kVertex, stream, v, v, q, kNoExemption, 0};
}
inline Constraint edge_constraint(int stream, Vertex from, Vertex to, int q) {
    return Constraint{ConstraintKind::kEdge, stream, from, to, q, kNoExemption, 0};
}
inline Constraint cyclic_vertex_constraint(int stream, Vertex v, int q_r, int q_e, int cycle) {
    return Constraint{ConstraintKind::kCyclicVertex, stream, v, v,
                      ((q_r % cycle) + cycle) % cycle, q_e, cycle};
}
inline Constraint cyclic_edge_constraint(int stream, Vertex from, Vertex to, int q_r, int q_e,
                                         int cycle) {
    return Constraint{ConstraintKind::kCyclicEdge, stream, from, to,
                      ((q_r % cycle) + cycle) % cycle, q_e, cycle};
}
inline Constraint positive_vertex_constraint(int stream, Vertex v, int q) {
    return Constraint{ConstraintKind::kPositiveVertex, stream, v, v, q, kNoExemption, 0};
}
inline Constraint positive_edge_constraint(int stream, Vertex from, Vertex to, int q) {
    return Constraint{ConstraintKind::kPositiveEdge, stream, from, to, q, kNoExemption, 0};
}

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t constraint_hash(const Constraint& c) {
    std::uint64_t h = static_cast<std::uint64_t>(c.kind);
    h = mix64(h ^ static_cast<std::uint64_t>(c.stream + 1));
    h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.v.row)) << 32 |
                   static_cast<std::uint32_t>(c.v.col)));
    h = mix64(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.u.row)) << 32 |
                   static_cast<std::uint32_t>(c.u.col)));
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q)));
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q_e + 2)));
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.cycle)));
    return h;
}

}  // namespace detail

// Per-stream indexed constraint store. Copy-on-extend along CT branches:
// a set attached to a CT node is never mutated afterwards.
class ConstraintSet {
public:
    explicit ConstraintSet(int num_streams) : streams_(static_cast<std::size_t>(num_streams)) {}

    // Inserts a constraint (exact duplicates are dropped). Returns false when
    // the insertion contradicts a positive mandate already in the set (or a
    // new mandate is contradicted by existing blocks); the caller prunes such
    // children. The set itself is left unchanged on contradiction.
    bool add(const Constraint& c);

    // True iff a vertex/cyclic-vertex constraint matches (v, q) or a positive
    // vertex mandate at q names a different cell.
    bool blocked_vertex(int stream, Vertex v, int q) const {
        const StreamStore& st = streams_[static_cast<std::size_t>(stream)];
        if (st.plain_vertex.count(vq_key(v, q)) != 0) return true;
        if (auto it = st.cyclic_vertex.find(vertex_key(v)); it != st.cyclic_vertex.end()) {
            for (const CyclicItem& item : it->second) {
                if (q % item.cycle == item.q_r && q != item.q_e) return true;
            }
        }
        if (auto it = st.positives.find(q); it != st.positives.end()) {
            const Constraint& p = pick_positive(it->second, stream, q);
            if (p.kind == ConstraintKind::kPositiveVertex && !(p.v == v)) return true;
        }
        return false;
    }

    // True iff an edge/cyclic-edge constraint matches the directed move
    // from -> to departing at q, or a positive edge mandate at q names a
    // different move. Edge constraints are directional.
    bool blocked_edge(int stream, Vertex from, Vertex to, int q) const {
        const StreamStore& st = streams_[static_cast<std::size_t>(stream)];
        if (st.plain_edge.count(evq_key(from, to, q)) != 0) return true;
        if (auto it = st.cyclic_edge.find(edge_key(from, to)); it != st.cyclic_edge.end()) {
            for (const CyclicItem& item : it->second) {
                if (q % item.cycle == item.q_r && q != item.q_e) return true;
            }
        }
        if (auto it = st.positives.find(q); it != st.positives.end()) {
            const Constraint& p = pick_positive(it->second, stream, q);
            if (p.kind == ConstraintKind::kPositiveEdge && !(p.v == from && p.u == to)) return true;
        }
        return false;
    }

    // The positive mandate anchored at step q, if any. Throws on two distinct
    // mandates at the same step (an inconsistent set; unreachable through the
    // solver's own splits).
    std::optional<Constraint> mandated_at(int stream, int q) const {
        const StreamStore& st = streams_[static_cast<std::size_t>(stream)];
        auto it = st.positives.find(q);
        if (it == st.positives.end()) return std::nullopt;
        return pick_positive(it->second, stream, q);
    }

    // Full legality of one step: occupying `from` at q and `to` at q+1
    // (from == to is a wait). Covers blocked_vertex/blocked_edge plus the
    // adjacency effects of positive edge mandates.
    bool move_allowed(int stream, Vertex from, Vertex to, int q) const {
        if (!(from == to) && blocked_edge(stream, from, to, q)) return false;
        if (blocked_vertex(stream, to, q + 1)) return false;
        if (auto m = mandated_at(stream, q)) {
            if (m->kind == ConstraintKind::kPositiveEdge && !(from == m->v && to == m->u))
                return false;
            if (m->kind == ConstraintKind::kPositiveVertex && !(from == m->v)) return false;
        }
        if (auto m = mandated_at(stream, q + 1)) {
            if (m->kind == ConstraintKind::kPositiveEdge && !(to == m->v)) return false;
        }
        return true;
    }

    // Legality of starting at `v` (step 0).
    bool start_allowed(int stream, Vertex v) const {
        if (blocked_vertex(stream, v, 0)) return false;
        if (auto m = mandated_at(stream, 0)) {
            if (m->kind == ConstraintKind::kPositiveEdge && !(v == m->v)) return false;
        }
        return true;
    }

    // True iff any path step is blocked, a mandate along the path is unmet,
    // or a mandate's effect extends past the end of the path.
    bool violates(int stream, const StreamPath& path) const {
        if (path.empty()) return true;
        if (!start_allowed(stream, path[0])) return true;
        for (std::size_t q = 0; q + 1 < path.size(); ++q) {
            if (!move_allowed(stream, path[q], path[q + 1], static_cast<int>(q))) return true;
        }
        if (last_mandate_step(stream) > static_cast<int>(path.size()) - 1) return true;
        return false;
    }

    // Largest step referenced by a finite constraint feature of this stream:
    // plain steps, positive anchors (q+1 for positive edges), and cyclic
    // exemptions. Beyond it the blocked predicates are purely periodic.
    int stream_horizon(int stream) const {
        return streams_[static_cast<std::size_t>(stream)].finite_horizon;
    }

    int finite_horizon() const {
        int h = -1;
        for (const StreamStore& st : streams_) h = std::max(h, st.finite_horizon);
        return h;
    }

    // Period of the blocked predicates beyond stream_horizon: the lcm of the
    // stream's own cycle and the cycles of its cyclic constraints.
    long long fold_period(int stream, int stream_cycle) const {
        long long p = stream_cycle;
        p = std::lcm(p, streams_[static_cast<std::size_t>(stream)].cycle_lcm);
        return p;
    }

    // Last step at which a positive mandate takes effect (q+1 for edges);
    // -1 when the stream has none. A returned path must reach at least here.
    int last_mandate_step(int stream) const {
        return streams_[static_cast<std::size_t>(stream)].last_mandate;
    }

    // Order-independent digest of this stream's constraints.
    std::uint64_t fingerprint(int stream) const {
        return streams_[static_cast<std::size_t>(stream)].fingerprint;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const StreamStore& st : streams_) n += st.count;
        return n;
    }

private:
    struct CyclicItem {
        int q_r;
        int q_e;
        int cycle;
    };

    struct StreamStore {
        std::unordered_set<std::uint64_t> plain_vertex;
        std::unordered_set<std::uint64_t> plain_edge;
        std::unordered_map<std::uint64_t, std::vector<CyclicItem>> cyclic_vertex;
        std::unordered_map<std::uint64_t, std::vector<CyclicItem>> cyclic_edge;
        std::map<int, std::vector<Constraint>> positives;
        std::unordered_set<std::uint64_t> dedup;
        int finite_horizon = -1;
        int last_mandate = -1;
        long long cycle_lcm = 1;
        std::uint64_t fingerprint = 0;
        std::size_t count = 0;
    };

    // Resolves the mandates anchored at one step. An edge mandate subsumes a
    // vertex mandate at its departure cell; anything else is a contradiction.
    static const Constraint& pick_positive(const std::vector<Constraint>& list, int stream, int q) {
        auto inconsistent = [&]() -> const Constraint& {
            throw std::logic_error("constraint set: two distinct positive mandates for stream " +
                                   std::to_string(stream) + " at step " + std::to_string(q));
        };
        const Constraint* edge = nullptr;
        for (const Constraint& p : list) {
            if (p.kind != ConstraintKind::kPositiveEdge) continue;
            if (edge != nullptr && !(edge->v == p.v && edge->u == p.u)) return inconsistent();
            edge = &p;
        }
        for (const Constraint& p : list) {
            if (p.kind != ConstraintKind::kPositiveVertex) continue;
            if (edge != nullptr ? !(p.v == edge->v) : !(p.v == list[0].v)) return inconsistent();
        }
        return edge != nullptr ? *edge : list[0];
    }

    static std::uint64_t vertex_key(Vertex v) {
        return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.row)) << 32 |
               static_cast<std::uint32_t>(v.col);
    }
    static std::uint64_t vq_key(Vertex v, int q) {
        return detail::mix64(vertex_key(v)) ^ static_cast<std::uint64_t>(q) * 0x9e3779b97f4a7c15ULL;
    }
    static std::uint64_t edge_key(Vertex from, Vertex to) {
        return detail::mix64(vertex_key(from)) ^ detail::mix64(~vertex_key(to));
    }
    static std::uint64_t evq_key(Vertex from, Vertex to, int q) {
        return detail::mix64(edge_key(from, to)) ^
               static_cast<std::uint64_t>(q) * 0x9e3779b97f4a7c15ULL;
    }

    // Would this blocking constraint forbid an occupancy a mandate requires?
    bool blocks_mandate(const Constraint& c, const Constraint& p) const {
        auto blocks_vertex_at = [&](Vertex v, int q) {
            switch (c.kind) {
                case ConstraintKind::kVertex:
                    return c.v == v && c.q == q;
                case ConstraintKind::kCyclicVertex:
                    return c.v == v && q % c.cycle == c.q && q != c.q_e;
                default:
                    return false;
            }
        };
        auto blocks_move_at = [&](Vertex from, Vertex to, int q) {
            switch (c.kind) {
                case ConstraintKind::kEdge:
                    return c.v == from && c.u == to && c.q == q;
                case ConstraintKind::kCyclicEdge:
                    return c.v == from && c.u == to && q % c.cycle == c.q && q != c.q_e;
                default:
                    return false;
            }
        };
        if (p.kind == ConstraintKind::kPositiveVertex) return blocks_vertex_at(p.v, p.q);
        return blocks_vertex_at(p.v, p.q) || blocks_vertex_at(p.u, p.q + 1) ||
               blocks_move_at(p.v, p.u, p.q);
    }

    std::vector<StreamStore> streams_;
};

inline bool ConstraintSet::add(const Constraint& raw) {
    Constraint c = raw;
    if (c.is_cyclic()) {
        if (c.cycle < 1) throw std::invalid_argument("cyclic constraint needs cycle >= 1");
        c.q = ((c.q % c.cycle) + c.cycle) % c.cycle;
    }
    StreamStore& st = streams_[static_cast<std::size_t>(c.stream)];
    const std::uint64_t h = detail::constraint_hash(c);
    if (st.dedup.count(h) != 0) return true;

    if (c.is_positive()) {
        // Reject a mandate that an existing block already forbids.
        if (c.kind == ConstraintKind::kPositiveVertex) {
            if (blocked_vertex(c.stream, c.v, c.q)) return false;
        } else {
            if (blocked_vertex(c.stream, c.v, c.q) || blocked_vertex(c.stream, c.u, c.q + 1) ||
                blocked_edge(c.stream, c.v, c.u, c.q))
                return false;
        }
    } else {
        for (const auto& [q, list] : st.positives) {
            for (const Constraint& p : list) {
                if (blocks_mandate(c, p)) return false;
            }
        }
    }

    switch (c.kind) {
        case ConstraintKind::kVertex:
            st.plain_vertex.insert(vq_key(c.v, c.q));
            st.finite_horizon = std::max(st.finite_horizon, c.q);
            break;
        case ConstraintKind::kEdge:
            st.plain_edge.insert(evq_key(c.v, c.u, c.q));
            st.finite_horizon = std::max(st.finite_horizon, c.q);
            break;
        case ConstraintKind::kCyclicVertex:
            st.cyclic_vertex[vertex_key(c.v)].push_back(CyclicItem{c.q, c.q_e, c.cycle});
            if (c.q_e != kNoExemption) st.finite_horizon = std::max(st.finite_horizon, c.q_e);
            st.cycle_lcm = std::lcm(st.cycle_lcm, static_cast<long long>(c.cycle));
            break;
        case ConstraintKind::kCyclicEdge:
            st.cyclic_edge[edge_key(c.v, c.u)].push_back(CyclicItem{c.q, c.q_e, c.cycle});
            if (c.q_e != kNoExemption) st.finite_horizon = std::max(st.finite_horizon, c.q_e);
            st.cycle_lcm = std::lcm(st.cycle_lcm, static_cast<long long>(c.cycle));
            break;
        case ConstraintKind::kPositiveVertex:
            st.positives[c.q].push_back(c);
            st.finite_horizon = std::max(st.finite_horizon, c.q);
            st.last_mandate = std::max(st.last_mandate, c.q);
            break;
        case ConstraintKind::kPositiveEdge:
            st.positives[c.q].push_back(c);
            st.finite_horizon = std::max(st.finite_horizon, c.q + 1);
            st.last_mandate = std::max(st.last_mandate, c.q + 1);
            break;
    }
    st.dedup.insert(h);
    st.fingerprint ^= h;
    ++st.count;
    return true;
}

}  // namespace smapf
