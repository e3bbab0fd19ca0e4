#include "relayrisk/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <string>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "relayrisk/errors.hpp"

namespace relayrisk {
namespace {

using cplx = std::complex<double>;
using CSparse = Eigen::SparseMatrix<cplx>;
using RSparse = Eigen::SparseMatrix<double>;

struct BranchAdmittance {
    cplx ff, ft, tf, tt;
};

BranchAdmittance branch_admittance(const Branch& br)
{
    const cplx ys = 1.0 / cplx(br.r, br.x);
    const cplx tap = std::polar(br.tap, br.shift_deg * std::numbers::pi / 180.0);
    const cplx ytt = ys + cplx(0.0, br.b / 2.0);
    return {ytt / (tap * std::conj(tap)), -ys / std::conj(tap), -ys / tap, ytt};
}

// Energized-island view of a network: local numbering plus admittance matrix.
struct IslandModel {
    std::vector<std::size_t> global;  // local -> bus position
    std::vector<int> local;           // bus position -> local, -1 when de-energized
    CSparse ybus;
};

IslandModel build_island(const Network& net, const std::vector<bool>& energized)
{
    IslandModel m;
    m.local.assign(net.buses.size(), -1);
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        if (energized[i]) {
            m.local[i] = static_cast<int>(m.global.size());
            m.global.push_back(i);
        }
    }
    const auto n = static_cast<Eigen::Index>(m.global.size());
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(net.branches.size() * 4 + m.global.size());
    for (const auto& br : net.branches) {
        if (!br.in_service)
            continue;
        const int f = m.local[net.bus_index(br.from_bus)];
        const int t = m.local[net.bus_index(br.to_bus)];
        if (f < 0 || t < 0)
            continue;
        const auto y = branch_admittance(br);
        trips.emplace_back(f, f, y.ff);
        trips.emplace_back(f, t, y.ft);
        trips.emplace_back(t, f, y.tf);
        trips.emplace_back(t, t, y.tt);
    }
    for (std::size_t k = 0; k < m.global.size(); ++k) {
        const auto& bus = net.buses[m.global[k]];
        trips.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k),
                           cplx(bus.shunt_g, bus.shunt_b) / net.base_mva);
    }
    m.ybus.resize(n, n);
    m.ybus.setFromTriplets(trips.begin(), trips.end());
    m.ybus.makeCompressed();
    return m;
}

std::vector<cplx> multiply(const CSparse& y, const std::vector<cplx>& v)
{
    std::vector<cplx> out(v.size(), cplx{});
    for (Eigen::Index col = 0; col < y.outerSize(); ++col)
        for (CSparse::InnerIterator it(y, col); it; ++it)
            out[static_cast<std::size_t>(it.row())] += it.value() * v[static_cast<std::size_t>(col)];
    return out;
}

// Newton-Raphson core on one island. Mutates `v` in place.
struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;
};

class NewtonSolver {
public:
    NewtonSolver(const CSparse& ybus, std::vector<cplx>& v, const std::vector<cplx>& sbus,
                 const std::vector<int>& pv, const std::vector<int>& pq)
        : y_(ybus), v_(v), sbus_(sbus), pv_(pv), pq_(pq)
    {
        pos_va_.assign(v.size(), -1);
        pos_vm_.assign(v.size(), -1);
        int k = 0;
        for (int b : pv_) pos_va_[b] = k++;
        for (int b : pq_) pos_va_[b] = k++;
        for (int b : pq_) pos_vm_[b] = k++;
        dim_ = k;
    }

    NewtonResult run(double tolerance, int max_iterations)
    {
        NewtonResult res;
        Eigen::VectorXd f(dim_);
        for (int it = 0;; ++it) {
            const auto current = multiply(y_, v_);
            res.max_mismatch = mismatch(current, f);
            res.iterations = it;
            if (!std::isfinite(res.max_mismatch))
                return res;
            if (res.max_mismatch <= tolerance) {
                res.converged = true;
                return res;
            }
            if (it >= max_iterations)
                return res;

            const RSparse jac = jacobian(current);
            if (!pattern_ready_) {
                lu_.analyzePattern(jac);
                pattern_ready_ = true;
            }
            lu_.factorize(jac);
            if (lu_.info() != Eigen::Success)
                return res;
            const Eigen::VectorXd dx = lu_.solve(-f);
            if (lu_.info() != Eigen::Success || !dx.allFinite())
                return res;
            update(dx);
        }
    }

private:
    double mismatch(const std::vector<cplx>& current, Eigen::VectorXd& f) const
    {
        double worst = 0.0;
        auto mis = [&](int b) { return v_[b] * std::conj(current[b]) - sbus_[b]; };
        for (int b : pv_) {
            f[pos_va_[b]] = mis(b).real();
        }
        for (int b : pq_) {
            const cplx m = mis(b);
            f[pos_va_[b]] = m.real();
            f[pos_vm_[b]] = m.imag();
        }
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (!std::isfinite(f[i]))
                return std::numeric_limits<double>::infinity();
            worst = std::max(worst, std::abs(f[i]));
        }
        return worst;
    }

    RSparse jacobian(const std::vector<cplx>& current) const
    {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(y_.nonZeros()) * 4);
        auto add = [&](int row_b, int col_b, cplx ds_dva, cplx ds_dvm) {
            const int ra = pos_va_[row_b];  // P row
            const int rm = pos_vm_[row_b];  // Q row
            const int ca = pos_va_[col_b];
            const int cm = pos_vm_[col_b];
            if (ra >= 0) {
                if (ca >= 0) trips.emplace_back(ra, ca, ds_dva.real());
                if (cm >= 0) trips.emplace_back(ra, cm, ds_dvm.real());
            }
            if (rm >= 0) {
                if (ca >= 0) trips.emplace_back(rm, ca, ds_dva.imag());
                if (cm >= 0) trips.emplace_back(rm, cm, ds_dvm.imag());
            }
        };
        const cplx j(0.0, 1.0);
        for (Eigen::Index col = 0; col < y_.outerSize(); ++col) {
            const auto k = static_cast<int>(col);
            const cplx vn_k = v_[k] / std::abs(v_[k]);
            for (CSparse::InnerIterator it(y_, col); it; ++it) {
                const auto i = static_cast<int>(it.row());
                const cplx yik = it.value();
                cplx ds_dva = -j * v_[i] * std::conj(yik * v_[k]);
                cplx ds_dvm = v_[i] * std::conj(yik * vn_k);
                if (i == k) {
                    ds_dva += j * v_[i] * std::conj(current[i]);
                    ds_dvm += std::conj(current[i]) * vn_k;
                }
                add(i, k, ds_dva, ds_dvm);
            }
        }
        RSparse jac(dim_, dim_);
        jac.setFromTriplets(trips.begin(), trips.end());
        jac.makeCompressed();
        return jac;
    }

    void update(const Eigen::VectorXd& dx)
    {
        auto apply = [&](int b) {
            double mag = std::abs(v_[b]);
            double ang = std::arg(v_[b]);
            ang += dx[pos_va_[b]];
            if (pos_vm_[b] >= 0)
                mag += dx[pos_vm_[b]];
            v_[b] = std::polar(mag, ang);
        };
        for (int b : pv_) apply(b);
        for (int b : pq_) apply(b);
    }

    const CSparse& y_;
    std::vector<cplx>& v_;
    const std::vector<cplx>& sbus_;
    const std::vector<int>& pv_;
    const std::vector<int>& pq_;
    std::vector<int> pos_va_;
    std::vector<int> pos_vm_;
    int dim_ = 0;
    Eigen::SparseLU<RSparse, Eigen::COLAMDOrdering<int>> lu_;
    bool pattern_ready_ = false;
};

}  // namespace

const char* to_string(SolveStatus status)
{
    switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::Diverged: return "diverged";
    case SolveStatus::IslandedInfeasible: return "islanded_infeasible";
    }
    return "?";
}

std::vector<std::vector<std::size_t>> connected_components(const Network& net)
{
    const std::size_t n = net.buses.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& br : net.branches) {
        if (!br.in_service)
            continue;
        const auto f = net.bus_index(br.from_bus);
        const auto t = net.bus_index(br.to_bus);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<bool> seen(n, false);
    std::vector<std::vector<std::size_t>> comps;
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start])
            continue;
        std::vector<std::size_t> comp{start};
        seen[start] = true;
        for (std::size_t head = 0; head < comp.size(); ++head) {
            for (auto nb : adj[comp[head]]) {
                if (!seen[nb]) {
                    seen[nb] = true;
                    comp.push_back(nb);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

PowerFlowSolution solve_power_flow(const Network& net, const SolverOptions& options)
{
    const std::size_t n = net.buses.size();
    const std::size_t slack = net.slack_index();

    PowerFlowSolution sol;
    sol.energized.assign(n, false);
    for (const auto& comp : connected_components(net)) {
        if (std::binary_search(comp.begin(), comp.end(), slack)) {
            for (auto b : comp)
                sol.energized[b] = true;
        }
    }

    IslandModel island = build_island(net, sol.energized);
    const std::size_t m = island.global.size();

    // Scheduled injections and effective bus roles.
    std::vector<cplx> sbus(m, cplx{});
    std::vector<int> gens_at(m, 0);
    std::vector<double> q_min(m, 0.0), q_max(m, 0.0);
    for (const auto& gen : net.generators) {
        if (!gen.in_service)
            continue;
        const int k = island.local[net.bus_index(gen.bus)];
        if (k < 0)
            continue;
        sbus[k] += cplx(gen.p_out, gen.q_out) / net.base_mva;
        ++gens_at[k];
        q_min[k] += gen.q_min;
        q_max[k] += gen.q_max;
    }
    std::vector<BusKind> role(m);
    std::vector<cplx> v(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& bus = net.buses[island.global[k]];
        sbus[k] -= cplx(bus.load_p, bus.load_q) / net.base_mva;
        role[k] = bus.kind;
        if (role[k] == BusKind::PV && gens_at[k] == 0)
            role[k] = BusKind::PQ;
        v[k] = role[k] == BusKind::PQ ? cplx(1.0, 0.0) : cplx(bus.voltage_setpoint, 0.0);
    }

    std::vector<double> fixed_q(m, std::numeric_limits<double>::quiet_NaN());
    NewtonResult nr;
    for (;;) {
        std::vector<int> pv, pq;
        for (std::size_t k = 0; k < m; ++k) {
            if (role[k] == BusKind::PV) pv.push_back(static_cast<int>(k));
            else if (role[k] == BusKind::PQ) pq.push_back(static_cast<int>(k));
        }
        NewtonSolver newton(island.ybus, v, sbus, pv, pq);
        const int used = sol.iterations;
        nr = newton.run(options.tolerance, options.max_iterations - used);
        sol.iterations = used + nr.iterations;
        if (!nr.converged || !options.enforce_q_limits)
            break;

        // PV -> PQ switching at reactive limits, warm-started from the current state.
        const auto current = multiply(island.ybus, v);
        bool switched = false;
        for (int k : pv) {
            const auto& bus = net.buses[island.global[k]];
            const double qg = (v[k] * std::conj(current[k])).imag() * net.base_mva + bus.load_q;
            double limit = std::numeric_limits<double>::quiet_NaN();
            if (qg > q_max[k] + 1e-9) limit = q_max[k];
            else if (qg < q_min[k] - 1e-9) limit = q_min[k];
            if (std::isnan(limit))
                continue;
            role[k] = BusKind::PQ;
            fixed_q[k] = limit;
            sbus[k] = cplx(sbus[k].real(), (limit - bus.load_q) / net.base_mva);
            switched = true;
        }
        if (!switched)
            break;
    }

    sol.status = nr.converged ? SolveStatus::Converged : SolveStatus::Diverged;
    sol.max_mismatch = nr.max_mismatch;

    sol.vm.assign(n, 0.0);
    sol.va.assign(n, 0.0);
    sol.injection_p.assign(n, 0.0);
    sol.injection_q.assign(n, 0.0);
    sol.branch_flows.assign(net.branches.size(), BranchFlow{});
    sol.gen_p.assign(net.generators.size(), 0.0);
    sol.gen_q.assign(net.generators.size(), 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        sol.vm[island.global[k]] = std::abs(v[k]);
        sol.va[island.global[k]] = std::arg(v[k]);
    }
    if (!nr.converged)
        return sol;

    const auto current = multiply(island.ybus, v);
    std::vector<cplx> injection(m);
    for (std::size_t k = 0; k < m; ++k) {
        injection[k] = v[k] * std::conj(current[k]) * net.base_mva;
        sol.injection_p[island.global[k]] = injection[k].real();
        sol.injection_q[island.global[k]] = injection[k].imag();
    }

    // Generator dispatch: slack takes the active balance on its first unit,
    // reactive output is shared evenly among the units at a bus.
    std::vector<bool> slack_p_assigned(m, false);
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        const auto& gen = net.generators[g];
        if (!gen.in_service)
            continue;
        const int k = island.local[net.bus_index(gen.bus)];
        if (k < 0)
            continue;
        const auto& bus = net.buses[island.global[k]];
        sol.gen_p[g] = gen.p_out;
        sol.gen_q[g] = (injection[k].imag() + bus.load_q) / gens_at[k];
        if (role[k] == BusKind::Slack && !slack_p_assigned[k]) {
            double others = 0.0;
            for (const auto& o : net.generators)
                if (o.in_service && o.bus == gen.bus && &o != &gen)
                    others += o.p_out;
            sol.gen_p[g] = injection[k].real() + bus.load_p - others;
            slack_p_assigned[k] = true;
        }
    }

    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        if (!br.in_service)
            continue;
        const int f = island.local[net.bus_index(br.from_bus)];
        const int t = island.local[net.bus_index(br.to_bus)];
        if (f < 0 || t < 0)
            continue;
        const auto y = branch_admittance(br);
        const cplx sf = v[f] * std::conj(y.ff * v[f] + y.ft * v[t]) * net.base_mva;
        const cplx st = v[t] * std::conj(y.tf * v[f] + y.tt * v[t]) * net.base_mva;
        sol.branch_flows[b] = {sf.real(), sf.imag(), st.real(), st.imag()};
    }
    return sol;
}

double recompute_mismatch_mw(const Network& net, const PowerFlowSolution& sol)
{
    IslandModel island = build_island(net, sol.energized);
    std::vector<cplx> v(island.global.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = std::polar(sol.vm[island.global[k]], sol.va[island.global[k]]);
    const auto current = multiply(island.ybus, v);

    std::vector<double> scheduled(net.buses.size(), 0.0);
    for (const auto& gen : net.generators)
        if (gen.in_service)
            scheduled[net.bus_index(gen.bus)] += gen.p_out;
    double worst = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const auto& bus = net.buses[island.global[k]];
        if (bus.kind == BusKind::Slack)
            continue;
        const double p = (v[k] * std::conj(current[k])).real() * net.base_mva;
        worst = std::max(worst, std::abs(p - (scheduled[island.global[k]] - bus.load_p)));
    }
    return worst;
}

OutageResult apply_outage(const Network& net, std::span<const ComponentRef> removed,
                          const SolverOptions& options)
{
    OutageResult out{net, {}};
    Network& reduced = out.network;

    std::unordered_map<int, std::size_t> branch_pos, gen_pos;
    for (std::size_t i = 0; i < reduced.branches.size(); ++i)
        branch_pos.emplace(reduced.branches[i].id, i);
    for (std::size_t i = 0; i < reduced.generators.size(); ++i)
        gen_pos.emplace(reduced.generators[i].id, i);

    std::set<std::pair<ComponentKind, int>> seen;
    for (const auto& ref : removed) {
        const std::string name = std::string(to_string(ref.kind)) + " " + std::to_string(ref.entity_id);
        const auto key = std::pair{ref.kind == ComponentKind::Transformer ? ComponentKind::Line : ref.kind,
                                   ref.entity_id};
        if (!seen.insert(key).second)
            throw DomainError(name + " removed twice");
        switch (ref.kind) {
        case ComponentKind::Line:
        case ComponentKind::Transformer: {
            auto it = branch_pos.find(ref.entity_id);
            if (it == branch_pos.end())
                throw DomainError("unknown " + name);
            auto& br = reduced.branches[it->second];
            if (br.is_transformer != (ref.kind == ComponentKind::Transformer))
                throw DomainError(name + " has the wrong kind");
            if (!br.in_service)
                throw DomainError(name + " is already out of service");
            br.in_service = false;
            break;
        }
        case ComponentKind::Generator: {
            auto it = gen_pos.find(ref.entity_id);
            if (it == gen_pos.end())
                throw DomainError("unknown " + name);
            auto& gen = reduced.generators[it->second];
            if (!gen.in_service)
                throw DomainError(name + " is already out of service");
            gen.in_service = false;
            break;
        }
        case ComponentKind::Load: {
            auto idx = reduced.find_bus(ref.entity_id);
            if (!idx)
                throw DomainError("unknown " + name);
            auto& bus = reduced.buses[*idx];
            if (!bus.has_load())
                throw DomainError(name + " is already out of service");
            bus.load_p = 0.0;
            bus.load_q = 0.0;
            break;
        }
        }
    }

    auto& report = out.islands;
    const auto comps = connected_components(reduced);
    std::size_t slack = reduced.slack_index();

    auto units_at = [&](const Network& n, int bus_id) {
        return std::count_if(n.generators.begin(), n.generators.end(),
                             [&](const Generator& g) { return g.in_service && g.bus == bus_id; });
    };
    const int slack_id = reduced.buses[slack].id;
    report.slack_generation_lost = units_at(net, slack_id) > 0 && units_at(reduced, slack_id) == 0;
    bool slack_ok = !report.slack_generation_lost;
    if (report.slack_generation_lost && options.promote_slack) {
        // Largest remaining active output takes over, wherever it sits; the
        // retained island follows the new reference bus.
        std::optional<std::size_t> best;
        double best_p = -std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < reduced.buses.size(); ++b) {
            if (reduced.buses[b].kind != BusKind::PV)
                continue;
            double p = 0.0;
            bool any = false;
            for (const auto& gen : reduced.generators) {
                if (gen.in_service && gen.bus == reduced.buses[b].id) {
                    p += gen.p_out;
                    any = true;
                }
            }
            if (any && p > best_p) {
                best_p = p;
                best = b;
            }
        }
        if (best) {
            reduced.buses[slack].kind = BusKind::PQ;
            reduced.buses[*best].kind = BusKind::Slack;
            report.promoted_slack = reduced.buses[*best].id;
            slack = *best;
            slack_ok = true;
        }
    }

    std::vector<bool> has_generation(reduced.buses.size(), false);
    for (const auto& gen : reduced.generators)
        if (gen.in_service && gen.p_out != 0.0)
            has_generation[reduced.bus_index(gen.bus)] = true;

    for (std::size_t c = 0; c < comps.size(); ++c) {
        std::vector<int> ids;
        bool holds_slack = false;
        for (auto b : comps[c]) {
            ids.push_back(reduced.buses[b].id);
            holds_slack = holds_slack || b == slack;
        }
        if (holds_slack) {
            report.slack_island = c;
        } else {
            for (auto b : comps[c])
                if (has_generation[b] || reduced.buses[b].has_load())
                    report.stranded_buses.push_back(reduced.buses[b].id);
        }
        report.islands.push_back(std::move(ids));
    }
    report.infeasible = !report.stranded_buses.empty() || !slack_ok;
    return out;
}

}  // namespace relayrisk
