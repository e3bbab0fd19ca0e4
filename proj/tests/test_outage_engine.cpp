#include <doctest.h>

#include <cmath>
#include <set>

#include "oracle.hpp"
#include "relayrisk/errors.hpp"
#include "relayrisk/outage_engine.hpp"
#include "support.hpp"

using namespace relayrisk;

namespace {

struct Setup {
    Network net;
    PowerFlowSolution base;
    RelaySet relays;
};

Setup setup(const std::filesystem::path& path, const TopologyOptions& topo = {})
{
    Setup s{load_case(path), {}, {}};
    s.base = solve_power_flow(s.net);
    REQUIRE(s.base.status == SolveStatus::Converged);
    s.relays = instantiate_relays(s.net, s.base, topo);
    return s;
}

std::size_t index_of(const RelaySet& set, int substation, RelayType type)
{
    const auto* r = testing::find_relay(set, substation, type);
    REQUIRE(r != nullptr);
    return static_cast<std::size_t>(r - set.relays.data());
}

bool same(const std::vector<ScenarioOutcome>& a, const std::vector<ScenarioOutcome>& b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].scenario.label != b[i].scenario.label || a[i].status != b[i].status ||
            a[i].controlled_power_mw != b[i].controlled_power_mw || a[i].iterations != b[i].iterations ||
            a[i].max_mismatch != b[i].max_mismatch || a[i].scenario.removed != b[i].scenario.removed)
            return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("outage_engine") {

TEST_CASE("outgoing-scope distance relay at 300-bus bus 207")
{
    TopologyOptions topo;
    topo.distance_scope = DistanceScope::OutgoingBranches;
    const auto s = setup(testing::ieee("case300"), topo);
    const auto i = index_of(s.relays, 207, RelayType::DirectionalDistance);
    const auto& relay = s.relays.relays[i];
    CHECK(relay.severe_set.size() == 2);

    const auto strict = evaluate_scenario(s.net, s.base, relay, make_scenario(s.relays, i), {}, true);
    CHECK(strict.status == SolveStatus::IslandedInfeasible);
    CHECK(strict.stranded_buses == 1);

    // By default the relay's own bus is shed, not stranded.
    const auto shed = evaluate_scenario(s.net, s.base, relay, make_scenario(s.relays, i));
    CHECK(shed.status == SolveStatus::Converged);
    CHECK(shed.stranded_buses == 0);
}

TEST_CASE("own bus is shed, neighbours cut off with it are stranded")
{
    const auto s = setup(testing::fixture("five.m"));
    // Distance relay at 5 cuts off only bus 5 and its load.
    const auto at5 = index_of(s.relays, 5, RelayType::DirectionalDistance);
    CHECK(evaluate_scenario(s.net, s.base, s.relays.relays[at5], make_scenario(s.relays, at5)).status ==
          SolveStatus::Converged);
    CHECK(evaluate_scenario(s.net, s.base, s.relays.relays[at5], make_scenario(s.relays, at5), {}, true).status ==
          SolveStatus::IslandedInfeasible);
    // Bus differential at 4 also cuts off the radial load at 5.
    const auto at4 = index_of(s.relays, 4, RelayType::BusDifferential);
    const auto out = evaluate_scenario(s.net, s.base, s.relays.relays[at4], make_scenario(s.relays, at4));
    CHECK(out.status == SolveStatus::IslandedInfeasible);
    CHECK(out.stranded_buses == 1);
    // Losing the slack generator is not rescued by the exemption.
    const auto at1 = index_of(s.relays, 1, RelayType::BusDifferential);
    CHECK(evaluate_scenario(s.net, s.base, s.relays.relays[at1], make_scenario(s.relays, at1)).status ==
          SolveStatus::IslandedInfeasible);
}

TEST_CASE("default distance relay at bus 207 leaves it on the transformer")
{
    const auto s = setup(testing::ieee("case300"));
    const auto i = index_of(s.relays, 207, RelayType::DirectionalDistance);
    const auto out = evaluate_scenario(s.net, s.base, s.relays.relays[i], make_scenario(s.relays, i));
    CHECK(out.status == SolveStatus::Converged);
}

TEST_CASE("unavailable relays cannot be evaluated")
{
    const auto s = setup(testing::ieee("case30"));
    const auto i = index_of(s.relays, 11, RelayType::BusDifferential);
    CHECK_FALSE(s.relays.relays[i].available);
    CHECK_THROWS_AS(evaluate_scenario(s.net, s.base, s.relays.relays[i], make_scenario(s.relays, i)), DomainError);
}

TEST_CASE("switching out dead components leaves the case solvable")
{
    const auto s = setup(testing::ieee("case30"));
    const auto& relay = s.relays.relays[index_of(s.relays, 11, RelayType::BusDifferential)];
    CHECK(controlled_power(s.net, s.base, relay.severe_set, FlowEnd::Sending) < 1e-6);
    const auto out = apply_outage(s.net, relay.severe_set);
    CHECK_FALSE(out.islands.infeasible);
    CHECK(solve_power_flow(out.network).status == SolveStatus::Converged);
}

TEST_CASE("bus differential at the toy load bus")
{
    const auto s = setup(testing::fixture("tri.m"));
    const auto i = index_of(s.relays, 2, RelayType::BusDifferential);
    const auto out = evaluate_scenario(s.net, s.base, s.relays.relays[i], make_scenario(s.relays, i));

    const auto gs = oracle::gauss_seidel(s.net);
    const double by_hand = std::abs(std::max(gs.p_from[0], gs.p_to[0])) +
                           std::abs(std::max(gs.p_from[2], gs.p_to[2])) + 60.0;
    CHECK(out.controlled_power_mw == doctest::Approx(by_hand).epsilon(1e-8));
    CHECK(out.severe_size == 3);

    const auto rows = oracle::relays(s.net, gs);
    auto it = std::find_if(rows.begin(), rows.end(),
                           [](const oracle::Relay& r) { return r.bus == 2 && r.type == "bus_differential"; });
    REQUIRE(it != rows.end());
    CHECK(oracle::classify(s.net, *it) == to_string(*out.status));
}

TEST_CASE("enumeration of the toys equals an independent brute-force loop")
{
    for (const char* name : {"tri.m", "five.m"}) {
        const auto s = setup(testing::fixture(name));
        const auto gs = oracle::gauss_seidel(s.net);
        const auto expected = oracle::relays(s.net, gs);
        for (bool strict : {false, true}) {
            EnumerationOptions eo;
            eo.strand_home_substation = strict;
            const auto outcomes = enumerate_all(s.net, s.relays, s.base, eo);
            REQUIRE(outcomes.size() == expected.size());
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                CAPTURE(outcomes[i].scenario.label);
                CAPTURE(strict);
                CHECK(outcomes[i].scenario.substation == expected[i].bus);
                CHECK(to_string(outcomes[i].scenario.relay_type) == expected[i].type);
                CHECK(outcomes[i].severe_size == expected[i].size());
                CHECK(std::abs(outcomes[i].controlled_power_mw - expected[i].mw) < 1e-6);
                CHECK(to_string(*outcomes[i].status) == oracle::classify(s.net, expected[i], false, strict));
            }
        }
    }
}

TEST_CASE("one relay in, one outcome out")
{
    auto s = setup(testing::fixture("tri.m"));
    RelaySet one;
    one.relays = {s.relays.relays[index_of(s.relays, 3, RelayType::DirectionalDistance)]};
    one.per_substation = {{3, 1}};
    const auto outcomes = enumerate_all(s.net, one, s.base);
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].scenario.label == "3/directional_distance");
    CHECK(outcomes[0].status == SolveStatus::Converged);
}

TEST_CASE("30-bus enumeration covers the inventory once, in order")
{
    const auto s = setup(testing::ieee("case30"));
    const auto outcomes = enumerate_all(s.net, s.relays, s.base);
    REQUIRE(outcomes.size() == s.relays.total());
    std::set<std::string> labels;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        CHECK(labels.insert(o.scenario.label).second);
        CHECK(o.scenario.relay_index == i);
        CHECK(o.available == s.relays.relays[i].available);
        CHECK(o.status.has_value() == o.available);
        CHECK(o.controlled_power_mw >= 0.0);
        if (o.available)
            CHECK_FALSE(o.scenario.removed.empty());
        if (i > 0) {
            const auto& p = outcomes[i - 1].scenario;
            CHECK((p.substation < o.scenario.substation ||
                   (p.substation == o.scenario.substation && order_of(p.relay_type) < order_of(o.scenario.relay_type))));
        }
    }
    for (const auto& g : s.net.generators) {
        auto it = std::find_if(outcomes.begin(), outcomes.end(), [&](const ScenarioOutcome& o) {
            return o.scenario.substation == g.bus && o.scenario.relay_type == RelayType::UnderFrequency;
        });
        CHECK(it != outcomes.end());
    }
}

TEST_CASE("bus differential removes a superset of every other relay")
{
    for (const char* name : {"case39", "case118"}) {
        const auto s = setup(testing::ieee(name));
        std::map<int, std::set<ComponentRef>> bd;
        for (std::size_t i = 0; i < s.relays.total(); ++i) {
            const auto sc = make_scenario(s.relays, i);
            if (sc.relay_type == RelayType::BusDifferential)
                bd[sc.substation] = {sc.removed.begin(), sc.removed.end()};
        }
        for (std::size_t i = 0; i < s.relays.total(); ++i) {
            const auto sc = make_scenario(s.relays, i);
            for (const auto& ref : sc.removed)
                CHECK(bd[sc.substation].count(ref) == 1);
        }
    }
}

TEST_CASE("parallel enumeration matches serial")
{
    const auto s = setup(testing::ieee("case57"));
    EnumerationOptions serial, parallel;
    parallel.workers = 8;
    std::size_t calls = 0;
    parallel.progress = [&](std::size_t, std::size_t) { ++calls; };
    const auto a = enumerate_all(s.net, s.relays, s.base, serial);
    const auto b = enumerate_all(s.net, s.relays, s.base, parallel);
    CHECK(same(a, b));
    CHECK(calls == s.relays.total());
}

TEST_CASE("enumeration refuses a non-converged base")
{
    const auto s = setup(testing::fixture("tri.m"));
    auto bad = s.base;
    bad.status = SolveStatus::Diverged;
    CHECK_THROWS_WITH_AS(enumerate_all(s.net, s.relays, bad), doctest::Contains("base case infeasible"),
                         InfeasibleBaseCase);
}

}
