#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "smapf/conflict.hpp"
#include "smapf/constraints.hpp"
#include "smapf/instance.hpp"

namespace smapf {

// Layered diagram of every constrained path of exactly `layers-1` moves from
// the stream's start to its goal. Layer q holds the cells the stream can
// occupy at step q on some such path.
struct Mdd {
    std::vector<std::vector<int>> layers;                     // sorted vertex ids
    std::vector<std::vector<std::pair<int, int>>> edges;      // moves between layer q and q+1

    int width(int q) const { return static_cast<int>(layers[static_cast<std::size_t>(q)].size()); }
    bool layer_contains(int q, int vid) const {
        const auto& l = layers[static_cast<std::size_t>(q)];
        return std::binary_search(l.begin(), l.end(), vid);
    }
    bool singleton(int q, int vid) const {
        const auto& l = layers[static_cast<std::size_t>(q)];
        return l.size() == 1 && l[0] == vid;
    }
};

// Forward-reachable x backward-reachable product per layer under the
// stream's constraint set. `path_len` is the vertex count of the stream's
// current optimal path.
inline Mdd build_mdd(const Instance& inst, int stream, const ConstraintSet& cs, int path_len) {
    const GridMap& m = inst.map();
    const AgentStream& s = inst.stream(stream);
    const int nv = m.size();
    const int layers = path_len;

    std::vector<std::vector<std::uint8_t>> fwd(static_cast<std::size_t>(layers),
                                               std::vector<std::uint8_t>(static_cast<std::size_t>(nv), 0));
    if (cs.start_allowed(stream, s.start)) fwd[0][static_cast<std::size_t>(m.index(s.start))] = 1;
    for (int q = 0; q + 1 < layers; ++q) {
        for (int vid = 0; vid < nv; ++vid) {
            if (!fwd[static_cast<std::size_t>(q)][static_cast<std::size_t>(vid)]) continue;
            const Vertex from = m.vertex(vid);
            for (int a = 0; a < 5; ++a) {
                const Vertex to{from.row + kActionRow[static_cast<std::size_t>(a)],
                                from.col + kActionCol[static_cast<std::size_t>(a)]};
                if (!m.passable(to)) continue;
                if (!cs.move_allowed(stream, from, to, q)) continue;
                fwd[static_cast<std::size_t>(q + 1)][static_cast<std::size_t>(m.index(to))] = 1;
            }
        }
    }

    std::vector<std::vector<std::uint8_t>> bwd(static_cast<std::size_t>(layers),
                                               std::vector<std::uint8_t>(static_cast<std::size_t>(nv), 0));
    bwd[static_cast<std::size_t>(layers - 1)][static_cast<std::size_t>(m.index(s.goal))] = 1;
    for (int q = layers - 2; q >= 0; --q) {
        for (int vid = 0; vid < nv; ++vid) {
            const Vertex from = m.vertex(vid);
            if (!m.passable(from)) continue;
            bool ok = false;
            for (int a = 0; a < 5 && !ok; ++a) {
                const Vertex to{from.row + kActionRow[static_cast<std::size_t>(a)],
                                from.col + kActionCol[static_cast<std::size_t>(a)]};
                if (!m.passable(to)) continue;
                if (!bwd[static_cast<std::size_t>(q + 1)][static_cast<std::size_t>(m.index(to))]) continue;
                if (!cs.move_allowed(stream, from, to, q)) continue;
                ok = true;
            }
            if (ok) bwd[static_cast<std::size_t>(q)][static_cast<std::size_t>(vid)] = 1;
        }
    }

    Mdd mdd;
    mdd.layers.resize(static_cast<std::size_t>(layers));
    for (int q = 0; q < layers; ++q) {
        for (int vid = 0; vid < nv; ++vid) {
            if (fwd[static_cast<std::size_t>(q)][static_cast<std::size_t>(vid)] &&
                bwd[static_cast<std::size_t>(q)][static_cast<std::size_t>(vid)])
                mdd.layers[static_cast<std::size_t>(q)].push_back(vid);
        }
    }
    mdd.edges.resize(static_cast<std::size_t>(layers > 0 ? layers - 1 : 0));
    for (int q = 0; q + 1 < layers; ++q) {
        for (int vid : mdd.layers[static_cast<std::size_t>(q)]) {
            const Vertex from = m.vertex(vid);
            for (int a = 0; a < 5; ++a) {
                const Vertex to{from.row + kActionRow[static_cast<std::size_t>(a)],
                                from.col + kActionCol[static_cast<std::size_t>(a)]};
                if (!m.passable(to)) continue;
                const int to_id = m.index(to);
                if (!mdd.layer_contains(q + 1, to_id)) continue;
                if (!cs.move_allowed(stream, from, to, q)) continue;
                mdd.edges[static_cast<std::size_t>(q)].push_back({vid, to_id});
            }
        }
    }
    return mdd;
}

// Width-1-layer rule: a conflict side counts when the stream's MDD pins it to
// the conflict location at that step. Two pinned sides make the conflict
// cardinal, one semi-cardinal, none non-cardinal. Edge conflicts inspect both
// endpoint layers.
inline ConflictPriority classify(const Conflict& conf, const Mdd& mdd_i, const Mdd& mdd_j,
                                 const GridMap& m) {
    int pinned = 0;
    if (conf.kind == ConflictKind::kVertex) {
        const int vid = m.index(conf.v);
        if (mdd_i.singleton(conf.q_i, vid)) ++pinned;
        if (mdd_j.singleton(conf.q_j, vid)) ++pinned;
    } else {
        const int x = m.index(conf.v);
        const int y = m.index(conf.u);
        // Stream i traverses v -> u at q_i; stream j traverses u -> v at q_j.
        if (mdd_i.singleton(conf.q_i, x) && mdd_i.singleton(conf.q_i + 1, y)) ++pinned;
        if (mdd_j.singleton(conf.q_j, y) && mdd_j.singleton(conf.q_j + 1, x)) ++pinned;
    }
    switch (pinned) {
        case 2:
            return ConflictPriority::kCardinal;
        case 1:
            return ConflictPriority::kSemiCardinal;
        default:
            return ConflictPriority::kNonCardinal;
    }
}

// Per-solve cache: MDDs are immutable once built and reused across CT nodes
// whose (constraint fingerprint, cost) pair matches.
class MddCache {
public:
    const Mdd& get(const Instance& inst, int stream, const ConstraintSet& cs, int path_len) {
        const std::uint64_t key =
            detail::mix64(cs.fingerprint(stream) ^
                          (static_cast<std::uint64_t>(stream) << 40) ^
                          static_cast<std::uint64_t>(path_len));
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
        auto mdd = std::make_unique<Mdd>(build_mdd(inst, stream, cs, path_len));
        const Mdd& ref = *mdd;
        cache_.emplace(key, std::move(mdd));
        return ref;
    }

    std::size_t size() const { return cache_.size(); }

private:
    std::unordered_map<std::uint64_t, std::unique_ptr<Mdd>> cache_;
};

}  // namespace smapf
