#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "relayrisk/outage_engine.hpp"
#include "relayrisk/powerflow.hpp"
#include "relayrisk/relays.hpp"

namespace relayrisk {

/// Value written into every score field of a relay that is not available.
inline constexpr double kSentinel = -1.0;

/// |C'_{i,k}| / sum over the substation. Empty when every size is zero.
std::optional<std::vector<double>> probability_connectivity(std::span<const std::size_t> severe_sizes);

std::vector<double> probability_equal(std::size_t count);

struct RandomDraw {
    std::vector<double> raw;     // uniform on the open interval (0, 1)
    std::vector<double> scaled;  // raw / sum(raw)
    std::uint64_t seed = 0;
};

/// `count` seeded uniform draws, normalised to sum to one.
RandomDraw probability_random(std::size_t count, std::uint64_t seed);

/// Normalisation step of the random scheme, exposed for fixed draws.
RandomDraw scale_draw(std::vector<double> raw, std::uint64_t seed = 0);

/// Per-substation seed for the random scheme. Depends only on the master
/// seed, the substation id and the trial number.
std::uint64_t substation_seed(std::uint64_t master, int substation, unsigned trial = 0);

/// Outage severity. Converged: own MW over the substation total. Otherwise:
/// system total over the substation total. Empty when the substation total
/// is zero.
std::optional<double> severity(SolveStatus status, double controlled_mw, double substation_sum_mw,
                               double system_sum_mw);

struct RiskValue {
    double value = 0.0;
    bool capped = false;
};

/// Probability times severity; diverged outcomes are capped at exactly 1.0.
RiskValue risk_index(double probability, double severity, bool diverged);

struct Spread {
    double mean = 0.0;
    double sigma = 0.0;
};

/// Population mean and standard deviation of the three scheme risks.
Spread sigma(double r_connectivity, double r_random, double r_equal);

struct HistogramBin {
    double start = 0.0;
    double end = 0.0;
    std::size_t count = 0;
    double fraction = 0.0;
};

inline constexpr std::array<double, 3> kSigmaBucketEdges = {0.01, 0.05, 0.10};
inline constexpr double kSigmaBinWidth = 0.025;
inline constexpr std::size_t kSigmaBinCount = 20;  // covers [0, 0.5]; sigma of risks in [0,1] stays below 0.472

struct SigmaHistogram {
    /// sigma <= 0.01, 0.01 < sigma <= 0.05, 0.05 < sigma <= 0.10.
    std::array<std::size_t, 3> buckets{};
    std::size_t above = 0;  // sigma > 0.10
    std::size_t total = 0;
    /// Right-closed 0.025-wide bins; the first bin also holds sigma = 0.
    std::vector<HistogramBin> bins;
};

SigmaHistogram sigma_histogram(std::span<const double> sigmas);

struct RiskOptions {
    std::uint64_t seed = 42;
    unsigned trials = 1;  // random-scheme draws averaged per substation
};

struct RiskRecord {
    int substation = 0;
    RelayType relay_type = RelayType::BusDifferential;
    bool available = false;
    std::optional<SolveStatus> status;
    std::size_t severe_size = 0;
    double controlled_power_mw = 0.0;

    // kSentinel everywhere below when !available.
    double pr_connectivity = kSentinel;
    double pr_random = kSentinel;
    double pr_equal = kSentinel;
    double severity = kSentinel;  // uncapped value, audit only
    double r_connectivity = kSentinel;
    double r_random = kSentinel;
    double r_equal = kSentinel;
    double r_average = kSentinel;
    double sigma = kSentinel;
    bool capped = false;

    bool critical() const noexcept { return available && r_average == 1.0; }
};

/// Scores a full enumeration. Records come back in outcome order.
std::vector<RiskRecord> score_outcomes(std::span<const ScenarioOutcome> outcomes,
                                       const RiskOptions& options = {});

}  // namespace relayrisk
