#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smapf {

// Thrown by the map/scenario/instance parsers; the message names the
// offending line, row, or step.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vertex {
    int row = 0;
    int col = 0;

    friend constexpr bool operator==(Vertex a, Vertex b) {
        return a.row == b.row && a.col == b.col;
    }
    friend constexpr bool operator!=(Vertex a, Vertex b) { return !(a == b); }
    friend constexpr bool operator<(Vertex a, Vertex b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    }
};

inline std::string to_string(Vertex v) {
    return "(" + std::to_string(v.row) + "," + std::to_string(v.col) + ")";
}

struct VertexHash {
    std::size_t operator()(Vertex v) const noexcept {
        return (static_cast<std::size_t>(v.row) << 20) ^ static_cast<std::size_t>(v.col);
    }
};

// Move alphabet in canonical expansion order. 'U' decreases the row, 'D'
// increases it, 'L' decreases the column, 'R' increases it, 'W' waits.
inline constexpr std::array<char, 5> kActionChars = {'U', 'D', 'L', 'R', 'W'};
inline constexpr std::array<int, 5> kActionRow = {-1, 1, 0, 0, 0};
inline constexpr std::array<int, 5> kActionCol = {0, 0, -1, 1, 0};
inline constexpr int kWaitAction = 4;

inline int action_index(char a) {
    for (int k = 0; k < 5; ++k) {
        if (kActionChars[static_cast<std::size_t>(k)] == a) return k;
    }
    return -1;
}

// 4-connected grid parsed from a benchmark map file. Immutable after
// construction; safe to share across concurrent solver runs.
class GridMap {
public:
    GridMap(int width, int height, std::vector<std::uint8_t> passable)
        : width_(width), height_(height), passable_(std::move(passable)) {
        if (width_ < 1 || height_ < 1)
            throw std::invalid_argument("grid dimensions must be positive");
        if (passable_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
            throw std::invalid_argument("passable grid has wrong size");
    }

    // Benchmark map format:
    //   type octile / height H / width W / map / H rows of W cells.
    // '.' and 'G' are passable; '@', 'O', 'T', 'S', 'W' are obstacles.
    static GridMap parse(std::string_view text);

    int width() const { return width_; }
    int height() const { return height_; }
    int size() const { return width_ * height_; }

    bool in_bounds(Vertex v) const {
        return v.row >= 0 && v.row < height_ && v.col >= 0 && v.col < width_;
    }
    bool passable(Vertex v) const {
        return in_bounds(v) && passable_[static_cast<std::size_t>(index(v))] != 0;
    }
    bool passable_id(int id) const { return passable_[static_cast<std::size_t>(id)] != 0; }

    int index(Vertex v) const { return v.row * width_ + v.col; }
    Vertex vertex(int id) const { return Vertex{id / width_, id % width_}; }

    // Passable orthogonal neighbours in U,D,L,R order; never contains v.
    std::vector<Vertex> neighbors(Vertex v) const {
        std::vector<Vertex> out;
        out.reserve(4);
        for (int a = 0; a < 4; ++a) {
            Vertex u{v.row + kActionRow[static_cast<std::size_t>(a)],
                     v.col + kActionCol[static_cast<std::size_t>(a)]};
            if (passable(u)) out.push_back(u);
        }
        return out;
    }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> passable_;
};

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    // Tolerate CRLF input.
    for (auto& ln : lines) {
        if (!ln.empty() && ln.back() == '\r') ln.remove_suffix(1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

inline bool parse_int(std::string_view s, long long& out) {
    if (s.empty()) return false;
    long long sign = 1;
    std::size_t i = 0;
    if (s[0] == '-') {
        sign = -1;
        i = 1;
        if (s.size() == 1) return false;
    }
    long long v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
        if (v < 0) return false;
    }
    out = sign * v;
    return true;
}

}  // namespace detail

inline GridMap GridMap::parse(std::string_view text) {
    auto lines = detail::split_lines(text);
    auto fail = [](std::size_t line_no, const std::string& what) -> GridMap {
        throw ParseError("map line " + std::to_string(line_no) + ": " + what);
    };

    if (lines.size() < 4) return fail(lines.size() + 1, "incomplete header");
    if (lines[0] != "type octile") return fail(1, "expected 'type octile'");

    auto header_value = [&](std::size_t idx, std::string_view key) -> long long {
        std::string_view ln = lines[idx];
        if (ln.size() <= key.size() + 1 || ln.substr(0, key.size()) != key || ln[key.size()] != ' ')
            fail(idx + 1, "expected '" + std::string(key) + " <value>'");
        long long v = 0;
        if (!detail::parse_int(ln.substr(key.size() + 1), v) || v < 1)
            fail(idx + 1, "expected positive integer after '" + std::string(key) + "'");
        return v;
    };

    const long long height = header_value(1, "height");
    const long long width = header_value(2, "width");
    if (lines[3] != "map") return fail(4, "expected 'map'");
    if (height > 4096 || width > 4096) return fail(2, "map too large");

    std::vector<std::uint8_t> passable(static_cast<std::size_t>(width * height), 0);
    for (long long r = 0; r < height; ++r) {
        const std::size_t line_no = static_cast<std::size_t>(4 + r + 1);
        if (static_cast<std::size_t>(4 + r) >= lines.size())
            fail(line_no, "missing map row " + std::to_string(r + 1) + " of " + std::to_string(height));
        std::string_view row = lines[static_cast<std::size_t>(4 + r)];
        if (row.size() != static_cast<std::size_t>(width))
            fail(line_no, "expected " + std::to_string(width) + " cells, got " + std::to_string(row.size()));
        for (long long c = 0; c < width; ++c) {
            char ch = row[static_cast<std::size_t>(c)];
            std::uint8_t open = 0;
            switch (ch) {
                case '.':
                case 'G':
                    open = 1;
                    break;
                case '@':
                case 'O':
                case 'T':
                case 'S':
                case 'W':
                    open = 0;
                    break;
                default:
                    fail(line_no, std::string("unknown cell character '") + ch + "'");
            }
            passable[static_cast<std::size_t>(r * width + c)] = open;
        }
    }
    if (lines.size() > static_cast<std::size_t>(4 + height))
        fail(static_cast<std::size_t>(4 + height + 1), "unexpected extra map row");

    return GridMap(static_cast<int>(width), static_cast<int>(height), std::move(passable));
}

// Exact unweighted shortest-path distance from every cell to `goal`;
// -1 marks impassable or unreachable cells.
inline std::vector<int> distance_field(const GridMap& m, Vertex goal) {
    if (!m.passable(goal)) throw std::invalid_argument("distance_field: goal not passable");
    std::vector<int> dist(static_cast<std::size_t>(m.size()), -1);
    std::deque<int> queue;
    dist[static_cast<std::size_t>(m.index(goal))] = 0;
    queue.push_back(m.index(goal));
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        Vertex v = m.vertex(id);
        int d = dist[static_cast<std::size_t>(id)];
        for (Vertex u : m.neighbors(v)) {
            int uid = m.index(u);
            if (dist[static_cast<std::size_t>(uid)] < 0) {
                dist[static_cast<std::size_t>(uid)] = d + 1;
                queue.push_back(uid);
            }
        }
    }
    return dist;
}

}  // namespace smapf
