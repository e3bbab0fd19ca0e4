// relayrisk: relay-compromise risk assessment over steady-state power flow.
//
//   relayrisk assess    --case data/cases/case30.m --out case30.csv
//   relayrisk count     --case data/cases/case30.m   (or --substations 30 --relays 106)
//   relayrisk pf        --case data/cases/case57.m
//   relayrisk inventory --case data/cases/case30.m --out relays.json

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "relayrisk/case_io.hpp"
#include "relayrisk/errors.hpp"
#include "relayrisk/outage_engine.hpp"
#include "relayrisk/powerflow.hpp"
#include "relayrisk/relays.hpp"
#include "relayrisk/report.hpp"
#include "relayrisk/system_totals.hpp"

namespace fs = std::filesystem;
using namespace relayrisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInput = 2;

struct CommonFlags {
    std::string case_path;
    AssessmentConfig config;
};

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out)
        throw std::runtime_error("write failed for '" + path.string() + "'");
}

fs::path sibling(const fs::path& out, const std::string& suffix)
{
    return out.parent_path() / (out.stem().string() + suffix);
}

void add_solver_flags(CLI::App* cmd, CommonFlags& flags)
{
    auto& solver = flags.config.solver;
    auto& topo = flags.config.topology;
    cmd->add_option("--tol", solver.tolerance, "Mismatch tolerance, p.u.")->capture_default_str();
    cmd->add_option("--max-iter", solver.max_iterations, "Newton iteration limit")->capture_default_str();
    cmd->add_flag("--enforce-q-limits", solver.enforce_q_limits, "Switch PV buses to PQ at reactive limits");
    cmd->add_flag("--promote-slack", solver.promote_slack,
                  "Promote the largest generator when slack generation is tripped");
    cmd->add_option("--distance-scope", topo.distance_scope, "Branches a distance relay trips")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, DistanceScope>{{"lines", DistanceScope::IncidentLines},
                                                 {"outgoing", DistanceScope::OutgoingBranches}},
            CLI::ignore_case));
    cmd->add_flag("--transformer-needs-injection", topo.transformer_needs_injection,
                  "Equip transformer relays only at generation or load substations");
    cmd->add_option("--flow-end", topo.flow_end, "Branch end used for controlled MW")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, FlowEnd>{{"sending", FlowEnd::Sending}, {"receiving", FlowEnd::Receiving}},
            CLI::ignore_case));
}

int run_assess(const CommonFlags& flags, const std::string& out, const std::string& format, bool progress)
{
    AssessmentConfig config = flags.config;
    if (progress) {
        config.progress = [](std::size_t done, std::size_t total) {
            if (done == total || done % 50 == 0)
                std::fprintf(stderr, "\r%zu/%zu scenarios", done, total);
            if (done == total)
                std::fputc('\n', stderr);
        };
    }
    const auto report = run_assessment(fs::path(flags.case_path), config);
    const auto ranking = rank_critical(report);

    if (format == "json") {
        const auto text = report_json(report);
        if (out.empty())
            std::cout << text;
        else
            write_file(out, text);
    } else if (out.empty()) {
        std::cout << report_csv(report);
    } else {
        const fs::path path(out);
        write_file(path, report_csv(report));
        write_file(sibling(path, "_sigma_bins.csv"), sigma_bins_csv(report.histogram));
        write_file(sibling(path, "_sigma_table.csv"), sigma_table_csv(report.histogram));
        write_file(sibling(path, "_ranking.csv"), ranking_csv(report, ranking));
    }

    std::fprintf(stderr, "%s: %zu relays, %zu available, %zu critical\n", report.case_name.c_str(),
                 report.relay_count, report.available_count, report.critical.size());
    for (const auto& [type, share] : ranking.critical_by_type)
        std::fprintf(stderr, "  %-24s %4zu  %5.1f%%\n", to_string(type), share.count, share.percent);
    return kExitOk;
}

int run_count(const CommonFlags& flags, std::optional<unsigned> substations, std::optional<unsigned> relays)
{
    if (!flags.case_path.empty()) {
        const auto net = load_case(flags.case_path);
        const auto base = solve_power_flow(net, flags.config.solver);
        if (base.status != SolveStatus::Converged)
            throw InfeasibleBaseCase(net.name + ": " + to_string(base.status));
        std::cout << "case: " << net.name << '\n'
                  << counts_text(scenario_counts(instantiate_relays(net, base, flags.config.topology)));
    }
    if (substations) {
        for (unsigned k = 1; k <= 3; ++k)
            std::cout << "substation_select_" << k << " (S=" << *substations << "): " << binomial(*substations, k)
                      << '\n';
    }
    if (relays) {
        std::cout << "relay_outage_space (2^" << *relays << "): " << (BigInt(1) << *relays) << '\n';
        for (unsigned k = 1; k <= 3; ++k)
            std::cout << "relay_select_" << k << " (K=" << *relays << "): " << binomial(*relays, k) << '\n';
    }
    return kExitOk;
}

int run_pf(const CommonFlags& flags)
{
    const auto net = load_case(flags.case_path);
    const auto sol = solve_power_flow(net, flags.config.solver);
    std::printf("case: %s\nbuses: %zu  branches: %zu  generators: %zu\nstatus: %s  iterations: %d  max "
                "mismatch: %.3e p.u.\n",
                net.name.c_str(), net.buses.size(), net.branches.size(), net.generators.size(),
                to_string(sol.status), sol.iterations, sol.max_mismatch);
    if (sol.status != SolveStatus::Converged)
        return kExitInfeasible;
    const auto totals = system_totals(net, sol);
    std::printf("generation: %.3f MW (%d units)\nload: %.3f MW (%d loads)\nlosses: %.3f MW\ntransformers: %d\n",
                totals.generation_mw, totals.generator_count, totals.load_mw, totals.load_count,
                totals.losses_mw, totals.transformer_count);
    return kExitOk;
}

int run_inventory(const CommonFlags& flags, const std::string& out)
{
    const auto net = load_case(flags.case_path);
    const auto base = solve_power_flow(net, flags.config.solver);
    if (base.status != SolveStatus::Converged)
        throw InfeasibleBaseCase(net.name + ": " + to_string(base.status));
    const auto text = inventory_json(net, instantiate_relays(net, base, flags.config.topology));
    if (out.empty())
        std::cout << text;
    else
        write_file(out, text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Relay-compromise risk assessment for transmission grids"};
    app.set_config("--config", "", "TOML/INI file with option values");
    app.require_subcommand(1);

    CommonFlags flags;
    std::string out;
    std::string format = "csv";
    bool progress = false;
    std::optional<unsigned> substations, relays;

    auto* assess = app.add_subcommand("assess", "Enumerate relay outages and score every relay");
    assess->add_option("--case", flags.case_path, "Case file (MATPOWER .m or JSON)")->required();
    assess->add_option("--out", out, "Report path; CSV mode also writes _sigma_bins, _sigma_table, _ranking");
    assess->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    assess->add_option("--seed", flags.config.risk.seed, "Master seed for the random scheme")->capture_default_str();
    assess->add_option("--trials", flags.config.risk.trials, "Random-scheme draws averaged per substation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    assess->add_option("--workers", flags.config.workers, "Parallel scenario workers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    assess->add_flag("--progress", progress, "Report scenario progress on stderr");
    assess->add_flag("--strand-home-substation", flags.config.strand_home_substation,
                     "Treat a relay's own bus, when cut off, as a stranded island");
    add_solver_flags(assess, flags);

    auto* count = app.add_subcommand("count", "Report scenario-space sizes");
    count->add_option("--case", flags.case_path, "Case file to derive the relay inventory from");
    count->add_option("--substations", substations, "Substation count for S-select-k");
    count->add_option("--relays", relays, "Relay count for K-select-k");
    add_solver_flags(count, flags);

    auto* pf = app.add_subcommand("pf", "Solve the base case only");
    pf->add_option("--case", flags.case_path, "Case file")->required();
    add_solver_flags(pf, flags);

    auto* inventory = app.add_subcommand("inventory", "List relays and their controllability sets");
    inventory->add_option("--case", flags.case_path, "Case file")->required();
    inventory->add_option("--out", out, "JSON output path");
    add_solver_flags(inventory, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*assess)
            return run_assess(flags, out, format, progress);
        if (*count) {
            if (flags.case_path.empty() && !substations && !relays) {
                std::cerr << "count: give --case, --substations or --relays\n";
                return kExitInput;
            }
            return run_count(flags, substations, relays);
        }
        if (*pf)
            return run_pf(flags);
        if (*inventory)
            return run_inventory(flags, out);
    } catch (const InfeasibleBaseCase& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
