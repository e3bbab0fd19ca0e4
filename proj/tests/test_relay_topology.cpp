#include <doctest.h>

#include <set>

#include "relayrisk/errors.hpp"
#include "relayrisk/powerflow.hpp"
#include "relayrisk/relays.hpp"
#include "support.hpp"

using namespace relayrisk;

namespace {

using Refs = std::vector<ComponentRef>;

ComponentRef line(int id, int sub) { return {ComponentKind::Line, id, sub}; }
ComponentRef xfmr(int id, int sub) { return {ComponentKind::Transformer, id, sub}; }
ComponentRef gen(int id, int sub) { return {ComponentKind::Generator, id, sub}; }
ComponentRef load(int sub) { return {ComponentKind::Load, sub, sub}; }

Refs sorted(Refs r)
{
    std::sort(r.begin(), r.end());
    return r;
}

struct Solved {
    Network net;
    PowerFlowSolution base;
};

Solved solved(const std::filesystem::path& path)
{
    Solved s{load_case(path), {}};
    s.base = solve_power_flow(s.net);
    REQUIRE(s.base.status == SolveStatus::Converged);
    return s;
}

}  // namespace

TEST_SUITE("relay_topology") {

TEST_CASE("three-bus toy matches the hand enumeration")
{
    const auto s = solved(testing::fixture("tri.m"));
    const auto set = instantiate_relays(s.net, s.base);
    CHECK(set.total() == 9);
    CHECK(set.per_substation == std::map<int, int>{{1, 4}, {2, 3}, {3, 2}});

    using RT = RelayType;
    CHECK(relay_types_at(s.net, 1) ==
          std::vector<RT>{RT::BusDifferential, RT::DirectionalOvercurrent, RT::DirectionalDistance, RT::UnderFrequency});
    CHECK(relay_types_at(s.net, 2) ==
          std::vector<RT>{RT::BusDifferential, RT::DirectionalOvercurrent, RT::DirectionalDistance});
    CHECK(relay_types_at(s.net, 3) == std::vector<RT>{RT::BusDifferential, RT::DirectionalDistance});

    CHECK(controllability_set(s.net, 1, RT::BusDifferential) == sorted({line(1, 1), line(2, 1), gen(1, 1), load(1)}));
    CHECK(controllability_set(s.net, 1, RT::DirectionalOvercurrent) == sorted({gen(1, 1), load(1)}));
    CHECK(controllability_set(s.net, 1, RT::UnderFrequency) == Refs{gen(1, 1)});
    CHECK(controllability_set(s.net, 2, RT::BusDifferential) == sorted({line(1, 2), line(3, 2), load(2)}));
    CHECK(controllability_set(s.net, 2, RT::DirectionalOvercurrent) == Refs{load(2)});
    CHECK(controllability_set(s.net, 3, RT::DirectionalDistance) == sorted({line(2, 3), line(3, 3)}));
    for (const auto& r : set.relays)
        CHECK(r.available);
}

TEST_CASE("bus differential at a bus with two lines, a generator and a load")
{
    const auto net = load_case(testing::fixture("tri.m"));
    CHECK(controllability_set(net, 1, RelayType::BusDifferential).size() == 4);
}

TEST_CASE("30-bus bus 11 carries no power so none of its relays is available")
{
    const auto s = solved(testing::ieee("case30"));
    const auto set = instantiate_relays(s.net, s.base);
    int at_11 = 0;
    for (const auto& r : set.relays) {
        if (r.substation != 11)
            continue;
        ++at_11;
        CHECK_FALSE(r.available);
        CHECK(r.controlled_power_mw < 1e-6);
    }
    CHECK(at_11 > 0);
}

TEST_CASE("bus with a single line and nothing else")
{
    Network net;
    net.buses = {{1, BusKind::Slack, 0, 0, 0, 0, 1.0}, {2, BusKind::PQ, 0, 0, 0, 0, 1.0}};
    net.branches = {{1, 1, 2, 0.01, 0.1, 0, 1.0, 0, false, true}};
    net.generators = {{1, 1, 0.0, 0, -10, 10, true}};
    net.reindex();
    CHECK(relay_types_at(net, 2) == std::vector<RelayType>{RelayType::BusDifferential, RelayType::DirectionalDistance});
}

TEST_CASE("distance and bus differential around the net-source bus 207 of the 300-bus case")
{
    // Bus 207 (the 186th bus row) injects 21 MW through line 290 (206-207)
    // and transformer 356 (114-207).
    const auto s = solved(testing::ieee("case300"));
    CHECK(controllability_set(s.net, 207, RelayType::DirectionalDistance) == Refs{line(290, 207)});
    CHECK(controllability_set(s.net, 207, RelayType::Transformer) == Refs{xfmr(356, 207)});
    CHECK(controllability_set(s.net, 207, RelayType::BusDifferential) ==
          sorted({line(290, 207), xfmr(356, 207), load(207)}));

    TopologyOptions outgoing;
    outgoing.distance_scope = DistanceScope::OutgoingBranches;
    CHECK(controllability_set(s.net, 207, RelayType::DirectionalDistance, outgoing, &s.base) ==
          sorted({line(290, 207), xfmr(356, 207)}));
    CHECK_THROWS_AS(controllability_set(s.net, 207, RelayType::DirectionalDistance, outgoing), DomainError);
}

TEST_CASE("transformer relays can be limited to generation and load substations")
{
    const auto s = solved(testing::ieee("case300"));
    TopologyOptions all, limited;
    limited.transformer_needs_injection = true;
    const auto a = instantiate_relays(s.net, s.base, all);
    const auto b = instantiate_relays(s.net, s.base, limited);
    CHECK(b.total() < a.total());
    for (const auto& r : b.relays) {
        if (r.type != RelayType::Transformer)
            continue;
        const auto& bus = s.net.buses[s.net.bus_index(r.substation)];
        const bool has_gen = std::any_of(s.net.generators.begin(), s.net.generators.end(),
                                         [&](const Generator& g) { return g.in_service && g.bus == bus.id; });
        CHECK((bus.has_load() || has_gen));
    }
}

TEST_CASE("missing relay types are domain errors")
{
    const auto net = load_case(testing::fixture("tri.m"));
    CHECK_THROWS_AS(controllability_set(net, 2, RelayType::UnderFrequency), DomainError);
    CHECK_THROWS_AS(controllability_set(net, 3, RelayType::DirectionalOvercurrent), DomainError);
    CHECK_THROWS_AS(controllability_set(net, 1, RelayType::Transformer), DomainError);
    CHECK_THROWS_AS(controllability_set(net, 42, RelayType::BusDifferential), DomainError);
}

TEST_CASE("relay type names")
{
    for (auto t : kRelayTypeOrder)
        CHECK(relay_type_from_string(to_string(t)) == t);
    CHECK_FALSE(relay_type_from_string("fuse"));
    CHECK(order_of(RelayType::BusDifferential) == 0);
    CHECK(order_of(RelayType::Transformer) == 4);
}

TEST_CASE("scenario-space arithmetic")
{
    CHECK(binomial(30, 3) == 4060);
    CHECK(binomial(106, 3) == 192920);
    CHECK(binomial(5, 0) == 1);
    CHECK(binomial(3, 5) == 0);
    CHECK(binomial(1000, 3) == BigInt(1000) * 999 * 998 / 6);

    RelaySet set;
    set.per_substation = {{1, 2}, {2, 3}};
    const auto c = scenario_counts(set);
    CHECK(c.per_substation.at(1) == 4);
    CHECK(c.per_substation.at(2) == 8);
    CHECK(c.system_product == 32);
}

TEST_CASE("big-integer counts do not overflow")
{
    const auto s = solved(testing::ieee("case300"));
    const auto c = scenario_counts(instantiate_relays(s.net, s.base));
    BigInt product = 1;
    std::size_t k_total = 0;
    for (const auto& [sub, v] : c.per_substation)
        product *= v;
    for (const auto& [sub, k] : instantiate_relays(s.net, s.base).per_substation)
        k_total += static_cast<std::size_t>(k);
    CHECK(c.system_product == product);
    CHECK(c.system_product == (BigInt(1) << k_total));
    CHECK(c.relay_total == k_total);
    CHECK(c.relay_select[2] == binomial(static_cast<unsigned>(k_total), 3));
    CHECK(c.substation_select[2] == binomial(300, 3));
}

TEST_CASE("bus differential covers every other relay at its substation")
{
    for (const char* name : testing::kIeeeCases) {
        CAPTURE(name);
        const auto s = solved(testing::ieee(name));
        const auto set = instantiate_relays(s.net, s.base);
        std::map<int, std::set<ComponentRef>> unions, bd;
        for (const auto& r : set.relays) {
            CHECK(r.severe_set == r.controllability);
            CHECK_FALSE(r.controllability.empty());
            unions[r.substation].insert(r.controllability.begin(), r.controllability.end());
            if (r.type == RelayType::BusDifferential)
                bd[r.substation].insert(r.controllability.begin(), r.controllability.end());
        }
        CHECK(unions == bd);
    }
}

TEST_CASE("every 30-bus generator substation has an under-frequency relay")
{
    const auto s = solved(testing::ieee("case30"));
    const auto set = instantiate_relays(s.net, s.base);
    for (const auto& g : s.net.generators)
        CHECK(testing::find_relay(set, g.bus, RelayType::UnderFrequency) != nullptr);
}

}
