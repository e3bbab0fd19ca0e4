#include "relayrisk/risk.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace relayrisk {
namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
double open_unit(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::optional<std::vector<double>> probability_connectivity(std::span<const std::size_t> severe_sizes)
{
    const std::size_t sum = std::accumulate(severe_sizes.begin(), severe_sizes.end(), std::size_t{0});
    if (sum == 0)
        return std::nullopt;
    std::vector<double> pr;
    pr.reserve(severe_sizes.size());
    for (auto s : severe_sizes)
        pr.push_back(static_cast<double>(s) / static_cast<double>(sum));
    return pr;
}

std::vector<double> probability_equal(std::size_t count)
{
    if (count == 0)
        return {};
    return std::vector<double>(count, 1.0 / static_cast<double>(count));
}

RandomDraw scale_draw(std::vector<double> raw, std::uint64_t seed)
{
    RandomDraw d;
    d.seed = seed;
    const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    d.scaled.reserve(raw.size());
    for (double r : raw)
        d.scaled.push_back(r / sum);
    d.raw = std::move(raw);
    return d;
}

RandomDraw probability_random(std::size_t count, std::uint64_t seed)
{
    // mt19937_64's output sequence is fixed by the standard, so draws are
    // reproducible across toolchains.
    std::mt19937_64 engine(seed);
    std::vector<double> raw(count);
    for (auto& r : raw)
        r = open_unit(engine());
    return scale_draw(std::move(raw), seed);
}

std::uint64_t substation_seed(std::uint64_t master, int substation, unsigned trial)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(substation)));
    return splitmix64(h ^ trial);
}

std::optional<double> severity(SolveStatus status, double controlled_mw, double substation_sum_mw,
                               double system_sum_mw)
{
    if (!(substation_sum_mw > 0.0))
        return std::nullopt;
    if (is_diverged(status))
        return system_sum_mw / substation_sum_mw;
    return controlled_mw / substation_sum_mw;
}

RiskValue risk_index(double probability, double severity, bool diverged)
{
    if (diverged)
        return {1.0, true};
    return {probability * severity, false};
}

Spread sigma(double r_connectivity, double r_random, double r_equal)
{
    // Offset form keeps the mean exact when all three agree.
    const double mean = r_connectivity + ((r_random - r_connectivity) + (r_equal - r_connectivity)) / 3.0;
    const double dc = r_connectivity - mean;
    const double dr = r_random - mean;
    const double de = r_equal - mean;
    return {mean, std::sqrt((dc * dc + dr * dr + de * de) / 3.0)};
}

SigmaHistogram sigma_histogram(std::span<const double> sigmas)
{
    SigmaHistogram h;
    h.bins.resize(kSigmaBinCount);
    for (std::size_t i = 0; i < kSigmaBinCount; ++i) {
        h.bins[i].start = static_cast<double>(i) / 40.0;
        h.bins[i].end = static_cast<double>(i + 1) / 40.0;
    }
    for (double s : sigmas) {
        ++h.total;
        if (s <= kSigmaBucketEdges[0]) ++h.buckets[0];
        else if (s <= kSigmaBucketEdges[1]) ++h.buckets[1];
        else if (s <= kSigmaBucketEdges[2]) ++h.buckets[2];
        else ++h.above;

        std::size_t bin = 0;
        while (bin + 1 < kSigmaBinCount && s > h.bins[bin].end)
            ++bin;
        ++h.bins[bin].count;
    }
    for (auto& bin : h.bins)
        bin.fraction = h.total == 0 ? 0.0 : static_cast<double>(bin.count) / static_cast<double>(h.total);
    return h;
}

std::vector<RiskRecord> score_outcomes(std::span<const ScenarioOutcome> outcomes, const RiskOptions& options)
{
    std::vector<RiskRecord> records(outcomes.size());
    std::map<int, std::vector<std::size_t>> by_substation;  // available rows only
    double system_sum = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        auto& rec = records[i];
        rec.substation = o.scenario.substation;
        rec.relay_type = o.scenario.relay_type;
        rec.available = o.available && o.status.has_value();
        rec.status = o.status;
        rec.severe_size = o.severe_size;
        rec.controlled_power_mw = o.controlled_power_mw;
        if (rec.available) {
            by_substation[rec.substation].push_back(i);
            system_sum += o.controlled_power_mw;
        }
    }

    const unsigned trials = std::max(1u, options.trials);
    for (const auto& [substation, rows] : by_substation) {
        std::vector<std::size_t> sizes;
        double substation_sum = 0.0;
        for (auto i : rows) {
            sizes.push_back(outcomes[i].severe_size);
            substation_sum += outcomes[i].controlled_power_mw;
        }
        const auto pr_c = probability_connectivity(sizes);
        const auto pr_e = probability_equal(rows.size());
        std::vector<double> pr_r(rows.size(), 0.0);
        for (unsigned t = 0; t < trials; ++t) {
            const auto draw = probability_random(rows.size(), substation_seed(options.seed, substation, t));
            for (std::size_t j = 0; j < rows.size(); ++j)
                pr_r[j] += draw.scaled[j];
        }
        for (auto& p : pr_r)
            p /= trials;

        for (std::size_t j = 0; j < rows.size(); ++j) {
            auto& rec = records[rows[j]];
            const auto sr = severity(*rec.status, rec.controlled_power_mw, substation_sum, system_sum);
            if (!pr_c || !sr) {
                rec.available = false;
                continue;
            }
            const bool diverged = is_diverged(*rec.status);
            rec.pr_connectivity = (*pr_c)[j];
            rec.pr_random = pr_r[j];
            rec.pr_equal = pr_e[j];
            rec.severity = *sr;
            const auto rc = risk_index(rec.pr_connectivity, *sr, diverged);
            const auto rr = risk_index(rec.pr_random, *sr, diverged);
            const auto re = risk_index(rec.pr_equal, *sr, diverged);
            rec.r_connectivity = rc.value;
            rec.r_random = rr.value;
            rec.r_equal = re.value;
            rec.capped = rc.capped;
            const auto spread = sigma(rc.value, rr.value, re.value);
            rec.r_average = spread.mean;
            rec.sigma = spread.sigma;
        }
    }
    return records;
}

}  // namespace relayrisk
