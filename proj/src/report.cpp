#include "relayrisk/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "relayrisk/case_io.hpp"
#include "relayrisk/errors.hpp"
#include "relayrisk/system_totals.hpp"

namespace relayrisk {
namespace {

using nlohmann::ordered_json;

std::map<RelayType, TypeShare> type_breakdown(const std::vector<RiskRecord>& rows,
                                              const std::vector<std::size_t>& picked)
{
    std::map<RelayType, TypeShare> out;
    for (auto i : picked)
        ++out[rows[i].relay_type].count;
    for (auto& [type, share] : out)
        share.percent = 100.0 * static_cast<double>(share.count) / static_cast<double>(picked.size());
    return out;
}

bool inventory_less(const RiskRecord& a, const RiskRecord& b)
{
    if (a.substation != b.substation)
        return a.substation < b.substation;
    return order_of(a.relay_type) < order_of(b.relay_type);
}

const char* status_text(const RiskRecord& r)
{
    if (!r.available || !r.status)
        return "unavailable";
    return to_string(*r.status);
}

template <typename Fn>
decltype(auto) with_context(const std::string& context, Fn&& fn)
{
    try {
        return fn();
    } catch (const DomainError& e) {
        throw DomainError(context + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(context + ": " + e.what());
    }
}

}  // namespace

std::string format_number(double value)
{
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

RiskReport build_report(std::string case_name, std::vector<ScenarioOutcome> outcomes, const RiskOptions& options)
{
    RiskReport report;
    report.case_name = std::move(case_name);
    report.rows = score_outcomes(outcomes, options);
    std::stable_sort(report.rows.begin(), report.rows.end(), inventory_less);
    report.relay_count = report.rows.size();

    std::vector<double> sigmas;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        if (!row.available)
            continue;
        ++report.available_count;
        sigmas.push_back(row.sigma);
        if (row.critical())
            report.critical.push_back(i);
    }
    report.critical_by_type = type_breakdown(report.rows, report.critical);
    report.histogram = sigma_histogram(sigmas);
    return report;
}

RiskReport run_assessment(const Network& net, const AssessmentConfig& config)
{
    const std::string name = net.name.empty() ? "case" : net.name;
    const auto base = solve_power_flow(net, config.solver);
    if (base.status != SolveStatus::Converged)
        throw InfeasibleBaseCase(name + ": " + to_string(base.status));

    return with_context(name, [&] {
        const auto totals = system_totals(net, base);
        const auto relays = instantiate_relays(net, base, config.topology);
        EnumerationOptions eo;
        eo.solver = config.solver;
        eo.workers = config.workers;
        eo.strand_home_substation = config.strand_home_substation;
        eo.progress = config.progress;
        auto report = build_report(name, enumerate_all(net, relays, base, eo), config.risk);
        report.totals = totals;
        return report;
    });
}

RiskReport run_assessment(const std::filesystem::path& case_path, const AssessmentConfig& config)
{
    const Network net = with_context(case_path.string(), [&] { return load_case(case_path); });
    return run_assessment(net, config);
}

Ranking rank_critical(const RiskReport& report)
{
    Ranking ranking;
    std::vector<std::size_t> critical, rest;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        if (!row.available)
            continue;
        (row.critical() ? critical : rest).push_back(i);
    }
    auto by_inventory = [&](std::size_t a, std::size_t b) {
        return inventory_less(report.rows[a], report.rows[b]);
    };
    std::sort(critical.begin(), critical.end(), by_inventory);
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
        const double ra = report.rows[a].r_average;
        const double rb = report.rows[b].r_average;
        if (ra != rb)
            return ra > rb;
        return by_inventory(a, b);
    });
    for (auto i : critical)
        ranking.order.push_back({i, true});
    for (auto i : rest)
        ranking.order.push_back({i, false});
    ranking.critical_by_type = type_breakdown(report.rows, critical);
    return ranking;
}

std::string report_csv(const RiskReport& report)
{
    std::ostringstream out;
    out << "substation,relay_type,available,pr_C,pr_R,pr_E,severity_raw,status,R_C,R_R,R_E,R_avg,sigma,capped\n";
    for (const auto& r : report.rows) {
        out << r.substation << ',' << to_string(r.relay_type) << ',' << (r.available ? "true" : "false") << ','
            << format_number(r.pr_connectivity) << ',' << format_number(r.pr_random) << ','
            << format_number(r.pr_equal) << ',' << format_number(r.severity) << ',' << status_text(r) << ','
            << format_number(r.r_connectivity) << ',' << format_number(r.r_random) << ','
            << format_number(r.r_equal) << ',' << format_number(r.r_average) << ',' << format_number(r.sigma)
            << ',' << (r.capped ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string report_json(const RiskReport& report)
{
    ordered_json doc;
    doc["case"] = report.case_name;
    doc["relay_count"] = report.relay_count;
    doc["available_count"] = report.available_count;
    doc["totals"] = {{"generation_mw", report.totals.generation_mw},
                     {"load_mw", report.totals.load_mw},
                     {"losses_mw", report.totals.losses_mw}};
    auto& rows = doc["rows"] = ordered_json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"substation", r.substation},
                        {"relay_type", to_string(r.relay_type)},
                        {"available", r.available},
                        {"pr_C", r.pr_connectivity},
                        {"pr_R", r.pr_random},
                        {"pr_E", r.pr_equal},
                        {"severity_raw", r.severity},
                        {"status", status_text(r)},
                        {"R_C", r.r_connectivity},
                        {"R_R", r.r_random},
                        {"R_E", r.r_equal},
                        {"R_avg", r.r_average},
                        {"sigma", r.sigma},
                        {"capped", r.capped}});
    }
    auto& critical = doc["critical"] = ordered_json::array();
    for (auto i : report.critical)
        critical.push_back({{"substation", report.rows[i].substation},
                            {"relay_type", to_string(report.rows[i].relay_type)}});
    auto& by_type = doc["critical_by_type"] = ordered_json::object();
    for (const auto& [type, share] : report.critical_by_type)
        by_type[to_string(type)] = {{"count", share.count}, {"percent", share.percent}};

    const auto& h = report.histogram;
    ordered_json bins = ordered_json::array();
    for (const auto& b : h.bins)
        bins.push_back({{"bin_start", b.start}, {"bin_end", b.end}, {"count", b.count}, {"fraction", b.fraction}});
    doc["sigma_histogram"] = {{"le_0.01", h.buckets[0]},
                              {"0.01_to_0.05", h.buckets[1]},
                              {"0.05_to_0.10", h.buckets[2]},
                              {"above_0.10", h.above},
                              {"total", h.total},
                              {"bins", bins}};
    return doc.dump(2) + "\n";
}

std::string sigma_bins_csv(const SigmaHistogram& histogram)
{
    std::ostringstream out;
    out << "bin_start,bin_end,count,fraction\n";
    for (const auto& b : histogram.bins)
        out << format_number(b.start) << ',' << format_number(b.end) << ',' << b.count << ','
            << format_number(b.fraction) << '\n';
    return out.str();
}

std::string sigma_table_csv(const SigmaHistogram& histogram)
{
    std::ostringstream out;
    out << "bucket,lower_exclusive,upper_inclusive,count\n";
    out << "sigma<=0.01,0," << format_number(kSigmaBucketEdges[0]) << ',' << histogram.buckets[0] << '\n';
    out << "0.01<sigma<=0.05," << format_number(kSigmaBucketEdges[0]) << ',' << format_number(kSigmaBucketEdges[1])
        << ',' << histogram.buckets[1] << '\n';
    out << "0.05<sigma<=0.10," << format_number(kSigmaBucketEdges[1]) << ',' << format_number(kSigmaBucketEdges[2])
        << ',' << histogram.buckets[2] << '\n';
    out << "sigma>0.10," << format_number(kSigmaBucketEdges[2]) << ",inf," << histogram.above << '\n';
    out << "total,,," << histogram.total << '\n';
    return out.str();
}

std::string ranking_csv(const RiskReport& report, const Ranking& ranking)
{
    std::ostringstream out;
    out << "rank,substation,relay_type,critical,status,R_avg,sigma\n";
    std::size_t rank = 0;
    for (const auto& entry : ranking.order) {
        const auto& r = report.rows[entry.row];
        out << ++rank << ',' << r.substation << ',' << to_string(r.relay_type) << ','
            << (entry.critical ? "true" : "false") << ',' << status_text(r) << ',' << format_number(r.r_average)
            << ',' << format_number(r.sigma) << '\n';
    }
    return out.str();
}

std::string inventory_json(const Network& net, const RelaySet& relays)
{
    ordered_json doc;
    doc["case"] = net.name;
    doc["relay_count"] = relays.total();
    doc["substation_count"] = relays.substation_count();
    auto& list = doc["relays"] = ordered_json::array();
    for (const auto& relay : relays.relays) {
        ordered_json comps = ordered_json::array();
        for (const auto& c : relay.controllability)
            comps.push_back({{"kind", to_string(c.kind)}, {"id", c.entity_id}});
        list.push_back({{"substation", relay.substation},
                        {"relay_type", to_string(relay.type)},
                        {"available", relay.available},
                        {"controlled_power_mw", relay.controlled_power_mw},
                        {"components", comps}});
    }
    return doc.dump(2) + "\n";
}

std::string counts_text(const ScenarioCounts& counts)
{
    std::ostringstream out;
    out << "substations: " << counts.substation_total << '\n';
    out << "relays: " << counts.relay_total << '\n';
    out << "relay_outage_space (2^sum K_i): " << counts.system_product << '\n';
    out << "consequence_space (prod_i sum_k 2^|C_ik|): " << counts.consequence_product << '\n';
    for (unsigned k = 1; k <= 3; ++k)
        out << "substation_select_" << k << ": " << counts.substation_select[k - 1] << '\n';
    for (unsigned k = 1; k <= 3; ++k)
        out << "relay_select_" << k << ": " << counts.relay_select[k - 1] << '\n';
    return out.str();
}

}  // namespace relayrisk
