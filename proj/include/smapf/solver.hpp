#pragma once

#include <array>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "smapf/conflict.hpp"
#include "smapf/constraints.hpp"
#include "smapf/instance.hpp"
#include "smapf/low_level.hpp"
#include "smapf/mdd.hpp"

namespace smapf {

enum class LowLevelKind { kAStar, kIdaStar };
enum class SplitKind { kNonDisjoint, kDisjoint };

struct SolverConfig {
    LowLevelKind low_level = LowLevelKind::kAStar;
    SplitKind splitting = SplitKind::kNonDisjoint;
    double timeout_seconds = 60.0;
    std::uint32_t rng_seed = 1;
    std::optional<long long> cost_upper_bound;
};

// The four variants benchmarked: a-nd, a-d, ida-nd, ida-d.
inline std::optional<SolverConfig> config_for_variant(std::string_view name) {
    SolverConfig cfg;
    if (name == "a-nd") {
        cfg.low_level = LowLevelKind::kAStar;
        cfg.splitting = SplitKind::kNonDisjoint;
    } else if (name == "a-d") {
        cfg.low_level = LowLevelKind::kAStar;
        cfg.splitting = SplitKind::kDisjoint;
    } else if (name == "ida-nd") {
        cfg.low_level = LowLevelKind::kIdaStar;
        cfg.splitting = SplitKind::kNonDisjoint;
    } else if (name == "ida-d") {
        cfg.low_level = LowLevelKind::kIdaStar;
        cfg.splitting = SplitKind::kDisjoint;
    } else {
        return std::nullopt;
    }
    return cfg;
}

inline std::string variant_name(const SolverConfig& cfg) {
    std::string s = cfg.low_level == LowLevelKind::kAStar ? "a" : "ida";
    s += cfg.splitting == SplitKind::kNonDisjoint ? "-nd" : "-d";
    return s;
}

inline const std::array<std::string, 4>& all_variants() {
    static const std::array<std::string, 4> v = {"a-nd", "a-d", "ida-nd", "ida-d"};
    return v;
}

enum class Outcome { kSolved, kUnsolvable, kTimeout };

inline std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::kSolved:
            return "solved";
        case Outcome::kUnsolvable:
            return "unsolvable";
        default:
            return "timeout";
    }
}

struct SolveReport {
    Outcome outcome = Outcome::kTimeout;
    std::optional<Solution> solution;
    std::optional<long long> soc;
    long long ct_expanded = 0;
    long long ct_generated = 0;
    long long low_level_expansions = 0;
    double elapsed_seconds = 0.0;
    std::uint32_t seed = 0;
};

// One of the two bundles a split produces: the constraints to add and the
// streams to replan. The disjoint positive child replans every stream whose
// current path violates the extended set instead of a fixed list.
struct ChildSpec {
    std::vector<Constraint> additions;
    std::vector<int> replan;
    bool replan_violators = false;
};

// Non-disjoint resolution: cross-stream conflicts get symmetric cyclic
// constraints; same-stream conflicts get plain constraints on the two steps
// (cyclic constraints must not be used there, or complete subtrees are lost).
inline std::array<ChildSpec, 2> split_nondisjoint(const Instance& inst, const Conflict& conf) {
    std::array<ChildSpec, 2> out;
    const int ci = inst.stream(conf.i).cycle;
    const int cj = inst.stream(conf.j).cycle;
    if (conf.i != conf.j) {
        if (conf.kind == ConflictKind::kVertex) {
            out[0].additions = {cyclic_vertex_constraint(conf.i, conf.v, conf.q_i, kNoExemption, ci)};
            out[1].additions = {cyclic_vertex_constraint(conf.j, conf.v, conf.q_j, kNoExemption, cj)};
        } else {
            out[0].additions = {
                cyclic_edge_constraint(conf.i, conf.v, conf.u, conf.q_i, kNoExemption, ci)};
            out[1].additions = {
                cyclic_edge_constraint(conf.j, conf.u, conf.v, conf.q_j, kNoExemption, cj)};
        }
        out[0].replan = {conf.i};
        out[1].replan = {conf.j};
    } else {
        if (conf.kind == ConflictKind::kVertex) {
            out[0].additions = {vertex_constraint(conf.i, conf.v, conf.q_i)};
            out[1].additions = {vertex_constraint(conf.i, conf.v, conf.q_j)};
        } else {
            out[0].additions = {edge_constraint(conf.i, conf.v, conf.u, conf.q_i)};
            out[1].additions = {edge_constraint(conf.i, conf.u, conf.v, conf.q_j)};
        }
        out[0].replan = {conf.i};
        out[1].replan = {conf.i};
    }
    return out;
}

// Disjoint resolution (uniform cycle time only). The positive child mandates
// stream k's own conflicting occupancy, closes the rest of its residue class,
// and broadcasts the residue to every other stream; the negative child blocks
// exactly that occupancy. k is drawn at random for cross-stream conflicts and
// is the earlier step's side for same-stream conflicts.
inline std::array<ChildSpec, 2> split_disjoint(const Instance& inst, const Conflict& conf,
                                               std::mt19937& rng) {
    const int c = inst.cycle_time();
    int k;
    int q_k;
    Vertex from;
    Vertex to;
    if (conf.i != conf.j) {
        const bool pick_i = (rng() & 1u) != 0;
        k = pick_i ? conf.i : conf.j;
        q_k = pick_i ? conf.q_i : conf.q_j;
        from = pick_i ? conf.v : conf.u;
        to = pick_i ? conf.u : conf.v;
    } else {
        k = conf.i;
        q_k = std::min(conf.q_i, conf.q_j);
        const bool first = q_k == conf.q_i;
        from = first ? conf.v : conf.u;
        to = first ? conf.u : conf.v;
    }

    std::array<ChildSpec, 2> out;
    ChildSpec& pos = out[0];
    ChildSpec& neg = out[1];
    if (conf.kind == ConflictKind::kVertex) {
        pos.additions.push_back(positive_vertex_constraint(k, conf.v, q_k));
        pos.additions.push_back(cyclic_vertex_constraint(k, conf.v, q_k, q_k, c));
        for (const AgentStream& o : inst.streams()) {
            if (o.id == k) continue;
            const int residue = static_cast<int>(
                ((static_cast<long long>(inst.stream(k).t_start) + q_k - o.t_start) % c + c) % c);
            pos.additions.push_back(
                cyclic_vertex_constraint(o.id, conf.v, residue, kNoExemption, c));
        }
        neg.additions.push_back(vertex_constraint(k, conf.v, q_k));
    } else {
        pos.additions.push_back(positive_edge_constraint(k, from, to, q_k));
        pos.additions.push_back(cyclic_edge_constraint(k, to, from, q_k, q_k, c));
        for (const AgentStream& o : inst.streams()) {
            if (o.id == k) continue;
            const int residue = static_cast<int>(
                ((static_cast<long long>(inst.stream(k).t_start) + q_k - o.t_start) % c + c) % c);
            pos.additions.push_back(cyclic_edge_constraint(o.id, to, from, residue, kNoExemption, c));
        }
        neg.additions.push_back(edge_constraint(k, from, to, q_k));
    }
    pos.replan_violators = true;
    neg.replan = {k};
    return out;
}

namespace detail {

struct CtNode {
    ConstraintSet cons;
    Solution paths;
    long long cost = 0;
    std::vector<Conflict> conflicts;
    std::uint64_t seq = 0;
};

// Incremental conflict cache update: keep parent conflicts not touching a
// replanned stream, redetect every pair with at least one replanned side.
// Equivalent to a full find_conflicts pass over the child's paths.
inline std::vector<Conflict> refresh_conflicts(const Instance& inst,
                                               const std::vector<Conflict>& parent,
                                               const Solution& paths,
                                               const std::vector<int>& replan) {
    std::vector<std::uint8_t> is_replanned(static_cast<std::size_t>(inst.num_streams()), 0);
    for (int r : replan) is_replanned[static_cast<std::size_t>(r)] = 1;
    std::vector<Conflict> out;
    for (const Conflict& c : parent) {
        if (!is_replanned[static_cast<std::size_t>(c.i)] &&
            !is_replanned[static_cast<std::size_t>(c.j)]) {
            Conflict copy = c;
            copy.priority = ConflictPriority::kUnknown;
            out.push_back(copy);
        }
    }
    for (int r : replan) {
        for (int o = 0; o < inst.num_streams(); ++o) {
            if (is_replanned[static_cast<std::size_t>(o)] && o < r) continue;
            auto part = find_conflicts_between(inst, paths, std::min(r, o), std::max(r, o));
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    std::sort(out.begin(), out.end(), conflict_order);
    return out;
}

class AscbsSolver {
public:
    AscbsSolver(const Instance& inst, const SolverConfig& cfg)
        : inst_(inst), cfg_(cfg), rng_(cfg.rng_seed) {}

    SolveReport run() {
        const auto t0 = std::chrono::steady_clock::now();
        auto finish = [&](SolveReport r) {
            r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            r.ct_expanded = ct_expanded_;
            r.ct_generated = ct_generated_;
            r.low_level_expansions = ll_expansions_;
            r.seed = cfg_.rng_seed;
            return r;
        };
        if (cfg_.splitting == SplitKind::kDisjoint && !inst_.is_uniform())
            throw std::invalid_argument("disjoint splitting requires a uniform-cycle instance");

        deadline_ = Deadline::in_seconds(cfg_.timeout_seconds);
        dists_.reserve(static_cast<std::size_t>(inst_.num_streams()));
        for (const AgentStream& s : inst_.streams())
            dists_.push_back(distance_field(inst_.map(), s.goal));

        // Root: plan every stream under the empty constraint set. Streams
        // planned earlier feed the CAT of later ones for tie-breaking only.
        auto root = std::make_shared<CtNode>(CtNode{ConstraintSet(inst_.num_streams()), Solution{}, 0, {}, 0});
        root->paths.paths.resize(static_cast<std::size_t>(inst_.num_streams()));
        for (int s = 0; s < inst_.num_streams(); ++s) {
            ConflictAvoidanceTable cat = build_cat(inst_, root->paths, s);
            LowLevelResult res = plan_stream(s, root->cons, cat);
            if (res.status == LowLevelResult::Status::kTimeout)
                return finish(SolveReport{Outcome::kTimeout, std::nullopt, std::nullopt});
            if (res.status == LowLevelResult::Status::kInfeasible)
                return finish(SolveReport{Outcome::kUnsolvable, std::nullopt, std::nullopt});
            root->paths.paths[static_cast<std::size_t>(s)] = std::move(res.path);
        }
        root->cost = soc(root->paths);
        root->conflicts = find_conflicts(inst_, root->paths);
        root->seq = next_seq_++;
        if (cfg_.cost_upper_bound && root->cost > *cfg_.cost_upper_bound)
            return finish(SolveReport{Outcome::kUnsolvable, std::nullopt, std::nullopt});
        open_.push(root);
        ++ct_generated_;

        while (!open_.empty()) {
            if (deadline_.expired())
                return finish(SolveReport{Outcome::kTimeout, std::nullopt, std::nullopt});
            auto node = open_.top();
            open_.pop();
            ++ct_expanded_;

            const Conflict* best = select_conflict(*node);
            if (best == nullptr) {
                SolveReport r;
                r.outcome = Outcome::kSolved;
                r.solution = node->paths;
                r.soc = node->cost;
                return finish(r);
            }
            assert(cfg_.low_level != LowLevelKind::kIdaStar || best->i != best->j);

            const auto specs = cfg_.splitting == SplitKind::kDisjoint
                                   ? split_disjoint(inst_, *best, rng_)
                                   : split_nondisjoint(inst_, *best);
            for (const ChildSpec& spec : specs) {
                auto child = make_child(*node, spec);
                if (timed_out_)
                    return finish(SolveReport{Outcome::kTimeout, std::nullopt, std::nullopt});
                if (!child) continue;
                if (cfg_.cost_upper_bound && (*child)->cost > *cfg_.cost_upper_bound) continue;
                open_.push(*child);
                ++ct_generated_;
            }
        }
        return finish(SolveReport{Outcome::kUnsolvable, std::nullopt, std::nullopt});
    }

private:
    LowLevelResult plan_stream(int stream, const ConstraintSet& cs,
                               const ConflictAvoidanceTable& cat) {
        LowLevelResult res = cfg_.low_level == LowLevelKind::kAStar
                                 ? astar_plan(inst_, stream, cs, cat,
                                              dists_[static_cast<std::size_t>(stream)], deadline_)
                                 : idastar_plan(inst_, stream, cs, cat,
                                                dists_[static_cast<std::size_t>(stream)], deadline_);
        ll_expansions_ += res.expansions;
        return res;
    }

    // Highest classification first (cardinal > semi-cardinal > non-cardinal),
    // then the canonical (i, j, q_i, q_j, vertex-before-edge) scan order.
    const Conflict* select_conflict(CtNode& node) {
        if (node.conflicts.empty()) return nullptr;
        const Conflict* best = nullptr;
        for (Conflict& c : node.conflicts) {
            const Mdd& mi = mdds_.get(inst_, c.i, node.cons,
                                      static_cast<int>(node.paths.paths[static_cast<std::size_t>(c.i)].size()));
            const Mdd& mj = mdds_.get(inst_, c.j, node.cons,
                                      static_cast<int>(node.paths.paths[static_cast<std::size_t>(c.j)].size()));
            c.priority = classify(c, mi, mj, inst_.map());
            if (best == nullptr || static_cast<int>(c.priority) > static_cast<int>(best->priority))
                best = &c;
            if (best->priority == ConflictPriority::kCardinal) break;
        }
        return best;
    }

    std::optional<std::shared_ptr<CtNode>> make_child(const CtNode& parent, const ChildSpec& spec) {
        ConstraintSet cs = parent.cons;
        for (const Constraint& c : spec.additions) {
            if (!cs.add(c)) return std::nullopt;  // contradicts a mandate: empty subproblem
        }
        std::vector<int> replan = spec.replan;
        if (spec.replan_violators) {
            replan.clear();
            for (int s = 0; s < inst_.num_streams(); ++s) {
                if (cs.violates(s, parent.paths.paths[static_cast<std::size_t>(s)]))
                    replan.push_back(s);
            }
        }
        std::sort(replan.begin(), replan.end());
        replan.erase(std::unique(replan.begin(), replan.end()), replan.end());

        auto child = std::make_shared<CtNode>(CtNode{std::move(cs), parent.paths, 0, {}, next_seq_++});
        for (int r : replan) {
            ConflictAvoidanceTable cat = build_cat(inst_, child->paths, r);
            LowLevelResult res = plan_stream(r, child->cons, cat);
            if (res.status == LowLevelResult::Status::kTimeout) {
                timed_out_ = true;
                return std::nullopt;
            }
            if (res.status == LowLevelResult::Status::kInfeasible) return std::nullopt;
            child->paths.paths[static_cast<std::size_t>(r)] = std::move(res.path);
        }
        child->cost = soc(child->paths);
        assert(child->cost >= parent.cost);
        child->conflicts = refresh_conflicts(inst_, parent.conflicts, child->paths, replan);
        return child;
    }

    struct OpenOrder {
        bool operator()(const std::shared_ptr<CtNode>& a, const std::shared_ptr<CtNode>& b) const {
            if (a->cost != b->cost) return a->cost > b->cost;
            if (a->conflicts.size() != b->conflicts.size())
                return a->conflicts.size() > b->conflicts.size();
            return a->seq > b->seq;
        }
    };

    const Instance& inst_;
    SolverConfig cfg_;
    std::mt19937 rng_;
    Deadline deadline_;
    std::vector<std::vector<int>> dists_;
    MddCache mdds_;
    std::priority_queue<std::shared_ptr<CtNode>, std::vector<std::shared_ptr<CtNode>>, OpenOrder>
        open_;
    std::uint64_t next_seq_ = 0;
    long long ct_expanded_ = 0;
    long long ct_generated_ = 0;
    long long ll_expansions_ = 0;
    bool timed_out_ = false;
};

}  // namespace detail

// Best-first constraint-tree search over cyclic conflicts, in four variants
// (a-nd, a-d, ida-nd, ida-d). Deterministic given (instance, config).
inline SolveReport solve(const Instance& inst, const SolverConfig& cfg) {
    detail::AscbsSolver solver(inst, cfg);
    return solver.run();
}

}  // namespace smapf
