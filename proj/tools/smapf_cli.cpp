// Command-line front end: solve one instance, validate a solution against an
// instance, sweep a benchmark grid into CSV, or compare the periodic solver
// against the finite-horizon baseline.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "smapf/bench.hpp"
#include "smapf/json_io.hpp"
#include "smapf/log.hpp"
#include "smapf/simulator.hpp"
#include "smapf/solver.hpp"
#include "smapf/unrolled_cbs.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnsolvable = 2;
constexpr int kExitTimeout = 3;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw smapf::ParseError("empty list: '" + text + "'");
    return out;
}

struct SolveArgs {
    std::string map_path;
    std::string scen_path;
    std::string instance_path;
    int streams = 0;
    int cycle = 1;
    std::uint32_t seed = 1;
    std::string variant = "a-nd";
    double timeout = 60.0;
    std::string out_path;
    std::string dump_instance_path;
};

int cmd_solve(const SolveArgs& args) {
    smapf::Instance inst = [&] {
        if (!args.instance_path.empty()) return smapf::load_instance_file(args.instance_path);
        if (args.map_path.empty() || args.scen_path.empty())
            throw smapf::ParseError("solve needs --instance or both --map and --scen");
        smapf::GridMap map = smapf::GridMap::parse(smapf::read_file(args.map_path));
        return smapf::parse_scen(smapf::read_file(args.scen_path), map, args.streams, args.cycle,
                                 args.seed);
    }();

    auto cfg_opt = smapf::config_for_variant(args.variant);
    if (!cfg_opt) throw smapf::ParseError("unknown variant '" + args.variant + "'");
    smapf::SolverConfig cfg = *cfg_opt;
    cfg.timeout_seconds = args.timeout;
    cfg.rng_seed = args.seed;

    if (!args.dump_instance_path.empty()) {
        smapf::write_file(args.dump_instance_path,
                          smapf::instance_to_json(inst, args.map_path.empty()
                                                            ? std::string("instance.map")
                                                            : args.map_path)
                              .dump(2) +
                              "\n");
    }

    smapf::log_line(smapf::LogLevel::kInfo,
                    "solve: " + std::to_string(inst.num_streams()) + " streams, variant " +
                        args.variant + ", timeout " + std::to_string(args.timeout) + "s");
    smapf::SolveReport rep = smapf::solve(inst, cfg);
    smapf::log_line(smapf::LogLevel::kDebug,
                    "solve: ct_expanded=" + std::to_string(rep.ct_expanded) +
                        " low_level_expansions=" + std::to_string(rep.low_level_expansions));
    std::cout << "outcome=" << smapf::to_string(rep.outcome);
    if (rep.soc) std::cout << " soc=" << *rep.soc;
    std::cout << " runtime_ms=" << static_cast<long long>(rep.elapsed_seconds * 1000.0)
              << " ct_expanded=" << rep.ct_expanded << " ct_generated=" << rep.ct_generated
              << " low_level_expansions=" << rep.low_level_expansions << " seed=" << rep.seed
              << "\n";
    if (rep.outcome == smapf::Outcome::kSolved && !args.out_path.empty()) {
        smapf::write_file(args.out_path,
                          smapf::solution_to_json(inst, *rep.solution).dump(2) + "\n");
    }
    switch (rep.outcome) {
        case smapf::Outcome::kSolved:
            return kExitOk;
        case smapf::Outcome::kUnsolvable:
            return kExitUnsolvable;
        default:
            return kExitTimeout;
    }
}

struct ValidateArgs {
    std::string instance_path;
    std::string solution_path;
    long long horizon = -1;
};

int cmd_validate(const ValidateArgs& args) {
    smapf::Instance inst = smapf::load_instance_file(args.instance_path);
    smapf::Json sol_json;
    try {
        sol_json = smapf::Json::parse(smapf::read_file(args.solution_path));
    } catch (const smapf::Json::exception& e) {
        throw smapf::ParseError(args.solution_path + ": " + e.what());
    }
    smapf::Solution sol = smapf::solution_from_json(inst, sol_json);
    smapf::CollisionReport report =
        args.horizon >= 0 ? smapf::simulate(inst, sol, args.horizon) : smapf::validate(inst, sol);
    for (const std::string& err : report.structural_errors)
        std::cout << "structural: " << err << "\n";
    for (const smapf::CollisionEvent& e : report.events) std::cout << smapf::to_string(e) << "\n";
    if (report.ok()) {
        std::cout << "valid horizon=" << report.horizon_used << "\n";
        return kExitOk;
    }
    return kExitError;
}

struct BenchArgs {
    std::string map_path;
    std::string scen_path;
    std::string streams_list = "2,4,6";
    std::string cycle_list = "1,2,3,4";
    int seeds = 4;
    std::uint32_t seed_base = 1;
    std::string variants = "all";
    double timeout = 60.0;
    std::string csv_path;
    int jobs = 1;
};

int cmd_bench(const BenchArgs& args) {
    smapf::BenchConfig cfg;
    cfg.map_path = args.map_path;
    cfg.scen_path = args.scen_path;
    cfg.map_text = smapf::read_file(args.map_path);
    cfg.scen_text = smapf::read_file(args.scen_path);
    cfg.streams_list = parse_int_list(args.streams_list);
    cfg.cycle_list = parse_int_list(args.cycle_list);
    cfg.seeds = args.seeds;
    cfg.seed_base = args.seed_base;
    cfg.timeout_seconds = args.timeout;
    cfg.jobs = args.jobs;
    if (args.variants == "all") {
        cfg.variants.assign(smapf::all_variants().begin(), smapf::all_variants().end());
    } else {
        std::stringstream ss(args.variants);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            if (!smapf::config_for_variant(item))
                throw smapf::ParseError("unknown variant '" + item + "'");
            cfg.variants.push_back(item);
        }
        if (cfg.variants.empty()) throw smapf::ParseError("no variants selected");
    }

    smapf::log_line(smapf::LogLevel::kInfo,
                    "bench: " + std::to_string(cfg.streams_list.size() * cfg.cycle_list.size() *
                                               static_cast<std::size_t>(cfg.seeds) *
                                               cfg.variants.size()) +
                        " cells, jobs " + std::to_string(cfg.jobs));
    auto rows = smapf::run_bench(cfg);
    if (!args.csv_path.empty()) {
        std::ofstream out(args.csv_path, std::ios::binary);
        if (!out) throw smapf::ParseError("cannot write " + args.csv_path);
        smapf::write_csv(rows, out);
    } else {
        smapf::write_csv(rows, std::cout);
    }
    std::cout << smapf::summarize(rows);
    return kExitOk;
}

struct CompareArgs {
    std::string instance_path;
    std::string horizons = "3,9,18";
    double timeout = 60.0;
    std::string csv_path;
    std::string variant = "a-nd";
};

int cmd_compare(const CompareArgs& args) {
    smapf::Instance inst = smapf::load_instance_file(args.instance_path);
    auto cfg_opt = smapf::config_for_variant(args.variant);
    if (!cfg_opt) throw smapf::ParseError("unknown variant '" + args.variant + "'");
    smapf::SolverConfig cfg = *cfg_opt;
    cfg.timeout_seconds = args.timeout;
    smapf::SolveReport rep = smapf::solve(inst, cfg);
    if (rep.outcome != smapf::Outcome::kSolved) {
        std::cout << "outcome=" << smapf::to_string(rep.outcome) << "\n";
        return rep.outcome == smapf::Outcome::kUnsolvable ? kExitUnsolvable : kExitTimeout;
    }

    std::ostringstream csv;
    csv << "horizon,n_agents,cbs_soc,ascbs_unrolled_soc,relative_error,cbs_runtime_ms,ascbs_"
           "runtime_ms\n";
    for (int h : parse_int_list(args.horizons)) {
        smapf::CompareRecord rec = smapf::compare(inst, rep, h, args.timeout);
        csv << rec.horizon << ',' << rec.n_agents << ',';
        if (rec.cbs_soc) csv << *rec.cbs_soc;
        csv << ',';
        if (rec.ascbs_unrolled_soc) csv << *rec.ascbs_unrolled_soc;
        csv << ',';
        if (rec.relative_error) csv << *rec.relative_error;
        csv << ',';
        if (rec.cbs_seconds) csv << static_cast<long long>(*rec.cbs_seconds * 1000.0);
        csv << ',' << static_cast<long long>(rec.ascbs_seconds * 1000.0) << "\n";
        if (rec.relative_error && *rec.relative_error < 0.0)
            throw std::logic_error("relative error below zero on an optimally solved pair");
    }
    if (!args.csv_path.empty()) {
        smapf::write_file(args.csv_path, csv.str());
    }
    std::cout << csv.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming multi-agent pathfinding solver"};
    app.require_subcommand(1);

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "solve one instance");
    solve->add_option("--map", solve_args.map_path, "map file");
    solve->add_option("--scen", solve_args.scen_path, "scenario file");
    solve->add_option("--instance", solve_args.instance_path, "instance json (bypasses --map/--scen)");
    solve->add_option("--streams", solve_args.streams, "number of streams from the scenario");
    solve->add_option("--cycle", solve_args.cycle, "cycle time");
    solve->add_option("--seed", solve_args.seed, "seed for start times and k-selection");
    solve->add_option("--variant", solve_args.variant, "a-nd | a-d | ida-nd | ida-d");
    solve->add_option("--timeout", solve_args.timeout, "seconds");
    solve->add_option("--out", solve_args.out_path, "write the solution json here");
    solve->add_option("--dump-instance", solve_args.dump_instance_path,
                      "write the generated instance json here");

    ValidateArgs validate_args;
    CLI::App* validate = app.add_subcommand("validate", "check a solution against an instance");
    validate->add_option("--instance", validate_args.instance_path, "instance json")->required();
    validate->add_option("--solution", validate_args.solution_path, "solution json")->required();
    validate->add_option("--horizon", validate_args.horizon, "simulate this many steps");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "sweep instances into a CSV");
    bench->add_option("--map", bench_args.map_path, "map file")->required();
    bench->add_option("--scen", bench_args.scen_path, "scenario file")->required();
    bench->add_option("--streams-list", bench_args.streams_list, "e.g. 2,4,6");
    bench->add_option("--cycle-list", bench_args.cycle_list, "e.g. 1,2,3,4");
    bench->add_option("--seeds", bench_args.seeds, "seeds per cell");
    bench->add_option("--seed-base", bench_args.seed_base, "first seed");
    bench->add_option("--variants", bench_args.variants, "all or a comma list");
    bench->add_option("--timeout", bench_args.timeout, "seconds per solve");
    bench->add_option("--csv", bench_args.csv_path, "output CSV path");
    bench->add_option("--jobs", bench_args.jobs, "parallel workers");

    CompareArgs compare_args;
    CLI::App* compare = app.add_subcommand("compare-cbs", "compare against the unrolled baseline");
    compare->add_option("--instance", compare_args.instance_path, "instance json")->required();
    compare->add_option("--horizons", compare_args.horizons, "e.g. 3,9,18");
    compare->add_option("--timeout", compare_args.timeout, "seconds per solve");
    compare->add_option("--csv", compare_args.csv_path, "output CSV path");
    compare->add_option("--variant", compare_args.variant, "periodic solver variant");

    try {
        app.parse(argc, argv);
        if (solve->parsed()) return cmd_solve(solve_args);
        if (validate->parsed()) return cmd_validate(validate_args);
        if (bench->parsed()) return cmd_bench(bench_args);
        if (compare->parsed()) return cmd_compare(compare_args);
        return kExitError;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
