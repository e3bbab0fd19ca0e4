#pragma once

// Second, deliberately naive implementation used to cross-check the engine.
// Shares only the Network data type with the library: its own admittance
// matrix, Gauss-Seidel solver, island search, relay rules and risk formulas.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "relayrisk/network.hpp"

namespace oracle {

using cplx = std::complex<double>;

struct GsResult {
    bool converged = false;
    int sweeps = 0;
    std::vector<cplx> v;          // per bus, zero when de-energized
    std::vector<bool> energized;
    std::vector<double> p_from;   // MW per branch
    std::vector<double> p_to;
    std::vector<double> gen_p;    // MW per generator
};

/// Gauss-Seidel on the island holding the slack bus.
GsResult gauss_seidel(const relayrisk::Network& net, int max_sweeps = 200000, double tol = 1e-13);

struct Relay {
    int bus = 0;
    std::string type;  // "bus_differential", ...
    std::vector<int> branches;  // branch ids
    std::vector<int> gens;      // generator ids
    bool load = false;
    double mw = 0.0;
    std::size_t size() const { return branches.size() + gens.size() + (load ? 1 : 0); }
};

std::vector<Relay> relays(const relayrisk::Network& net, const GsResult& base);

/// "converged", "diverged" or "islanded_infeasible". The relay's own bus may
/// be cut off without stranding anything unless `strand_home` is set.
std::string classify(const relayrisk::Network& net, const Relay& relay, bool promote_slack = false,
                     bool strand_home = false);

struct Row {
    int bus = 0;
    std::string type;
    bool available = false;
    std::string status;
    double mw = 0.0;
    double pr_c = -1, pr_r = -1, pr_e = -1, severity = -1;
    double r_c = -1, r_r = -1, r_e = -1, r_avg = -1, sigma = -1;
};

std::vector<Row> brute_force(const relayrisk::Network& net, std::uint64_t seed, bool promote_slack = false,
                             bool strand_home = false);

}  // namespace oracle
