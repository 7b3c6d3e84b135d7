#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "smapf/instance.hpp"
#include "smapf/solver.hpp"

namespace smapf {

struct BenchRow {
    std::string map;
    std::string scen;
    int n_streams = 0;
    int cycle = 0;
    std::uint32_t seed = 0;
    std::string variant;
    Outcome outcome = Outcome::kTimeout;
    std::optional<long long> soc;
    long long runtime_ms = 0;
    long long ct_expanded = 0;
    long long ct_generated = 0;
    long long low_level_expansions = 0;
};

struct BenchConfig {
    std::string map_path;
    std::string scen_path;
    std::string map_text;   // contents; callers may preload to skip file IO
    std::string scen_text;
    std::vector<int> streams_list;
    std::vector<int> cycle_list;
    int seeds = 4;
    std::uint32_t seed_base = 1;
    std::vector<std::string> variants;
    double timeout_seconds = 60.0;
    int jobs = 1;
};

inline const std::string& csv_header() {
    static const std::string h =
        "map,scen,n_streams,cycle,seed,variant,outcome,soc,runtime_ms,ct_expanded,ct_generated,"
        "low_level_expansions";
    return h;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

}  // namespace detail

inline void write_csv(const std::vector<BenchRow>& rows, std::ostream& os) {
    os << csv_header() << "\n";
    for (const BenchRow& r : rows) {
        os << detail::csv_field(r.map) << ',' << detail::csv_field(r.scen) << ',' << r.n_streams
           << ',' << r.cycle << ',' << r.seed << ',' << r.variant << ',' << to_string(r.outcome)
           << ',';
        if (r.soc) os << *r.soc;
        os << ',' << r.runtime_ms << ',' << r.ct_expanded << ',' << r.ct_generated << ','
           << r.low_level_expansions << "\n";
    }
}

// One row per (streams, cycle, seed, variant) in that canonical order,
// regardless of how many worker threads computed them. Failures become rows,
// never abort the sweep. Timeout rows clamp runtime_ms to the budget.
inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
    const GridMap map = GridMap::parse(cfg.map_text);

    struct Cell {
        int n;
        int cycle;
        std::uint32_t seed;
        std::string variant;
    };
    std::vector<Cell> cells;
    for (int n : cfg.streams_list)
        for (int c : cfg.cycle_list)
            for (int s = 0; s < cfg.seeds; ++s)
                for (const std::string& v : cfg.variants)
                    cells.push_back(Cell{n, c, cfg.seed_base + static_cast<std::uint32_t>(s), v});

    std::vector<BenchRow> rows(cells.size());
    const long long budget_ms = static_cast<long long>(cfg.timeout_seconds * 1000.0);

    auto run_cell = [&](std::size_t idx) {
        const Cell& cell = cells[idx];
        BenchRow row;
        row.map = cfg.map_path;
        row.scen = cfg.scen_path;
        row.n_streams = cell.n;
        row.cycle = cell.cycle;
        row.seed = cell.seed;
        row.variant = cell.variant;
        try {
            Instance inst = parse_scen(cfg.scen_text, map, cell.n, cell.cycle, cell.seed);
            SolverConfig scfg = *config_for_variant(cell.variant);
            scfg.timeout_seconds = cfg.timeout_seconds;
            scfg.rng_seed = cell.seed;
            SolveReport rep = solve(inst, scfg);
            row.outcome = rep.outcome;
            row.soc = rep.soc;
            row.runtime_ms = rep.outcome == Outcome::kTimeout
                                 ? budget_ms
                                 : std::min(budget_ms,
                                            static_cast<long long>(rep.elapsed_seconds * 1000.0));
            row.ct_expanded = rep.ct_expanded;
            row.ct_generated = rep.ct_generated;
            row.low_level_expansions = rep.low_level_expansions;
        } catch (const std::exception&) {
            row.outcome = Outcome::kUnsolvable;
            row.runtime_ms = 0;
        }
        rows[idx] = std::move(row);
    };

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&]() {
                while (true) {
                    const std::size_t idx = next.fetch_add(1);
                    if (idx >= cells.size()) return;
                    run_cell(idx);
                }
            });
        }
        for (auto& t : workers) t.join();
    }
    return rows;
}

// Success rate and mean clamped runtime per (streams, cycle, variant) cell.
inline std::string summarize(const std::vector<BenchRow>& rows) {
    struct Agg {
        long long solved = 0;
        long long total = 0;
        long long runtime_ms = 0;
    };
    std::map<std::tuple<int, int, std::string>, Agg> cells;
    for (const BenchRow& r : rows) {
        Agg& a = cells[{r.n_streams, r.cycle, r.variant}];
        ++a.total;
        if (r.outcome == Outcome::kSolved) ++a.solved;
        a.runtime_ms += r.runtime_ms;
    }
    std::ostringstream os;
    os << "streams cycle variant success_rate mean_runtime_ms\n";
    for (const auto& [key, a] : cells) {
        os << std::get<0>(key) << ' ' << std::get<1>(key) << ' ' << std::get<2>(key) << ' '
           << static_cast<double>(a.solved) / static_cast<double>(a.total) << ' '
           << static_cast<double>(a.runtime_ms) / static_cast<double>(a.total) << "\n";
    }
    return os.str();
}

}  // namespace smapf
