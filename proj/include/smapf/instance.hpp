#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smapf/grid.hpp"

namespace smapf {

enum class CycleMode { kUniform, kNonUniform };

// One periodic stream: agents spawn at start every `cycle` steps beginning
// at t_start, follow the stream's path, and vanish on reaching the goal.
struct AgentStream {
    int id = 0;
    Vertex start;
    Vertex goal;
    int t_start = 0;
    int cycle = 1;
};

class Instance {
public:
    static Instance uniform(GridMap map, int cycle_time, std::vector<AgentStream> streams) {
        if (cycle_time < 1) throw std::invalid_argument("cycle_time must be >= 1");
        for (auto& s : streams) s.cycle = cycle_time;
        return Instance(std::move(map), CycleMode::kUniform, cycle_time, std::move(streams));
    }

    static Instance non_uniform(GridMap map, std::vector<AgentStream> streams) {
        return Instance(std::move(map), CycleMode::kNonUniform, 0, std::move(streams));
    }

    const GridMap& map() const { return map_; }
    CycleMode mode() const { return mode_; }
    bool is_uniform() const { return mode_ == CycleMode::kUniform; }

    // Global cycle time; only meaningful in uniform mode.
    int cycle_time() const {
        if (mode_ != CycleMode::kUniform)
            throw std::logic_error("cycle_time() on a non-uniform instance");
        return cycle_time_;
    }

    const std::vector<AgentStream>& streams() const { return streams_; }
    const AgentStream& stream(int i) const { return streams_[static_cast<std::size_t>(i)]; }
    int num_streams() const { return static_cast<int>(streams_.size()); }

private:
    Instance(GridMap map, CycleMode mode, int cycle_time, std::vector<AgentStream> streams)
        : map_(std::move(map)), mode_(mode), cycle_time_(cycle_time), streams_(std::move(streams)) {
        for (std::size_t i = 0; i < streams_.size(); ++i) {
            const AgentStream& s = streams_[i];
            if (s.id != static_cast<int>(i))
                throw std::invalid_argument("stream ids must be 0..n-1 in order");
            if (s.cycle < 1) throw std::invalid_argument("stream cycle must be >= 1");
            if (s.t_start < 0 || s.t_start > s.cycle - 1)
                throw std::invalid_argument("t_start must lie in [0, cycle-1]");
            if (!map_.passable(s.start))
                throw std::invalid_argument("stream " + std::to_string(i) + ": start not passable");
            if (!map_.passable(s.goal))
                throw std::invalid_argument("stream " + std::to_string(i) + ": goal not passable");
        }
    }

    GridMap map_;
    CycleMode mode_;
    int cycle_time_;
    std::vector<AgentStream> streams_;
};

// A stream's vertex sequence p^0..p^{l-1}; consecutive entries are equal
// (wait) or orthogonally adjacent.
using StreamPath = std::vector<Vertex>;

struct Solution {
    std::vector<StreamPath> paths;
};

// Sum of cost: each stream contributes its path length minus one.
inline long long soc(const Solution& sol) {
    long long total = 0;
    for (const auto& p : sol.paths) total += static_cast<long long>(p.size()) - 1;
    return total;
}

inline std::string actions_of(const StreamPath& path) {
    std::string out;
    if (path.empty()) throw std::invalid_argument("actions_of: empty path");
    out.reserve(path.size() - 1);
    for (std::size_t q = 0; q + 1 < path.size(); ++q) {
        int dr = path[q + 1].row - path[q].row;
        int dc = path[q + 1].col - path[q].col;
        char ch = 0;
        for (int a = 0; a < 5; ++a) {
            if (kActionRow[static_cast<std::size_t>(a)] == dr &&
                kActionCol[static_cast<std::size_t>(a)] == dc) {
                ch = kActionChars[static_cast<std::size_t>(a)];
                break;
            }
        }
        if (ch == 0)
            throw std::invalid_argument("actions_of: step " + std::to_string(q) + " is not a unit move");
        out.push_back(ch);
    }
    return out;
}

inline StreamPath path_of(Vertex start, std::string_view actions, const GridMap& m) {
    if (!m.passable(start)) throw ParseError("path start " + to_string(start) + " is not passable");
    StreamPath path;
    path.reserve(actions.size() + 1);
    path.push_back(start);
    Vertex cur = start;
    for (std::size_t q = 0; q < actions.size(); ++q) {
        int a = action_index(actions[q]);
        if (a < 0)
            throw ParseError("step " + std::to_string(q) + ": unknown action '" +
                             std::string(1, actions[q]) + "'");
        Vertex nxt{cur.row + kActionRow[static_cast<std::size_t>(a)],
                   cur.col + kActionCol[static_cast<std::size_t>(a)]};
        if (!m.in_bounds(nxt))
            throw ParseError("step " + std::to_string(q) + ": action '" +
                             std::string(1, actions[q]) + "' leaves the map");
        if (!m.passable(nxt))
            throw ParseError("step " + std::to_string(q) + ": action '" +
                             std::string(1, actions[q]) + "' enters an impassable cell");
        path.push_back(nxt);
        cur = nxt;
    }
    return path;
}

// Unbiased draw from [0, bound). Rejection sampling on raw mt19937 words so
// the result is identical on every platform (uniform_int_distribution is not).
inline int uniform_below(std::mt19937& rng, int bound) {
    if (bound <= 1) return 0;
    const std::uint64_t b = static_cast<std::uint64_t>(bound);
    const std::uint64_t two32 = std::uint64_t{1} << 32;
    const std::uint64_t threshold = two32 - two32 % b;
    while (true) {
        std::uint64_t u = rng();
        if (u < threshold) return static_cast<int>(u % b);
    }
}

// Builds a uniform instance from the first n rows of a benchmark scenario
// file. Row fields: bucket, map, map-width, map-height, start-col, start-row,
// goal-col, goal-row, optimal-distance (ignored). Start times are drawn
// uniformly from [0, c-1] with a deterministic seeded generator, one draw per
// stream in row order.
inline Instance parse_scen(std::string_view text, const GridMap& m, int n, int c,
                           std::uint32_t seed) {
    if (n < 0) throw std::invalid_argument("parse_scen: n must be nonnegative");
    if (c < 1) throw std::invalid_argument("parse_scen: cycle must be >= 1");
    auto lines = detail::split_lines(text);
    if (lines.empty() || lines[0].substr(0, 7) != "version")
        throw ParseError("scen line 1: expected 'version 1'");
    {
        std::string_view rest = lines[0].substr(7);
        while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
        if (rest != "1" && rest != "1.0")
            throw ParseError("scen line 1: unsupported version '" + std::string(rest) + "'");
    }

    std::vector<AgentStream> streams;
    streams.reserve(static_cast<std::size_t>(n));
    std::mt19937 rng(seed);
    int rows_seen = 0;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        std::string_view ln = lines[li];
        if (ln.empty()) continue;
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        while (pos <= ln.size()) {
            std::size_t tab = ln.find('\t', pos);
            if (tab == std::string_view::npos) {
                fields.push_back(ln.substr(pos));
                break;
            }
            fields.push_back(ln.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (fields.size() < 9)
            throw ParseError("scen line " + std::to_string(li + 1) + ": expected 9 tab-separated fields");
        ++rows_seen;
        if (static_cast<int>(streams.size()) >= n) continue;

        auto field_int = [&](std::size_t idx, const char* name) -> long long {
            long long v = 0;
            if (!detail::parse_int(fields[idx], v))
                throw ParseError("scen line " + std::to_string(li + 1) + ": bad " + name);
            return v;
        };
        // Benchmark convention: field 5 is the start column, field 6 the
        // start row (and likewise for the goal).
        Vertex start{static_cast<int>(field_int(5, "start row")),
                     static_cast<int>(field_int(4, "start col"))};
        Vertex goal{static_cast<int>(field_int(7, "goal row")),
                    static_cast<int>(field_int(6, "goal col"))};
        if (!m.in_bounds(start) || !m.in_bounds(goal))
            throw ParseError("scen line " + std::to_string(li + 1) + ": coordinates out of bounds");
        if (!m.passable(start))
            throw ParseError("scen line " + std::to_string(li + 1) + ": start cell is impassable");
        if (!m.passable(goal))
            throw ParseError("scen line " + std::to_string(li + 1) + ": goal cell is impassable");

        AgentStream s;
        s.id = static_cast<int>(streams.size());
        s.start = start;
        s.goal = goal;
        s.t_start = uniform_below(rng, c);
        s.cycle = c;
        streams.push_back(s);
    }
    if (static_cast<int>(streams.size()) < n)
        throw ParseError("scen file has " + std::to_string(rows_seen) + " rows, need " +
                         std::to_string(n));
    return Instance::uniform(m, c, std::move(streams));
}

}  // namespace smapf
