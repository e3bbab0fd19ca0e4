#include "relayrisk/relays.hpp"

#include <algorithm>
#include <cmath>

#include "relayrisk/errors.hpp"

namespace relayrisk {
namespace {

struct LocalComponents {
    std::vector<ComponentRef> lines;
    std::vector<ComponentRef> transformers;
    std::vector<ComponentRef> outgoing;  // branches whose base MW leaves the bus
    std::vector<ComponentRef> generators;
    std::optional<ComponentRef> load;
};

LocalComponents gather(const Network& net, int substation, const PowerFlowSolution* base)
{
    LocalComponents lc;
    for (std::size_t b = 0; b < net.branches.size(); ++b) {
        const auto& br = net.branches[b];
        if (!br.in_service || (br.from_bus != substation && br.to_bus != substation))
            continue;
        const ComponentRef ref{br.is_transformer ? ComponentKind::Transformer : ComponentKind::Line, br.id,
                               substation};
        (br.is_transformer ? lc.transformers : lc.lines).push_back(ref);
        if (base != nullptr) {
            const auto& flow = base->branch_flows[b];
            const double leaving = br.from_bus == substation ? flow.p_from : flow.p_to;
            if (leaving > 0.0)
                lc.outgoing.push_back(ref);
        }
    }
    for (const auto& gen : net.generators)
        if (gen.in_service && gen.bus == substation)
            lc.generators.push_back({ComponentKind::Generator, gen.id, substation});
    if (net.buses[net.bus_index(substation)].has_load())
        lc.load = ComponentRef{ComponentKind::Load, substation, substation};
    return lc;
}

std::vector<ComponentRef> select(const LocalComponents& lc, RelayType type, const TopologyOptions& options)
{
    std::vector<ComponentRef> out;
    auto append = [&out](const std::vector<ComponentRef>& v) { out.insert(out.end(), v.begin(), v.end()); };
    switch (type) {
    case RelayType::BusDifferential:
        append(lc.lines);
        append(lc.transformers);
        append(lc.generators);
        if (lc.load) out.push_back(*lc.load);
        break;
    case RelayType::DirectionalOvercurrent:
        append(lc.generators);
        if (lc.load) out.push_back(*lc.load);
        break;
    case RelayType::DirectionalDistance:
        append(options.distance_scope == DistanceScope::IncidentLines ? lc.lines : lc.outgoing);
        break;
    case RelayType::UnderFrequency:
        append(lc.generators);
        break;
    case RelayType::Transformer:
        if (!options.transformer_needs_injection || lc.load || !lc.generators.empty())
            append(lc.transformers);
        break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

void require_base(const TopologyOptions& options, const PowerFlowSolution* base)
{
    if (options.distance_scope == DistanceScope::OutgoingBranches && base == nullptr)
        throw DomainError("outgoing-branch distance scope needs a base-case solution");
}

}  // namespace

const char* to_string(RelayType type)
{
    switch (type) {
    case RelayType::BusDifferential: return "bus_differential";
    case RelayType::DirectionalOvercurrent: return "directional_overcurrent";
    case RelayType::DirectionalDistance: return "directional_distance";
    case RelayType::UnderFrequency: return "under_frequency";
    case RelayType::Transformer: return "transformer";
    }
    return "?";
}

std::optional<RelayType> relay_type_from_string(std::string_view name)
{
    for (auto t : kRelayTypeOrder)
        if (name == to_string(t))
            return t;
    return std::nullopt;
}

int order_of(RelayType type)
{
    return static_cast<int>(std::find(kRelayTypeOrder.begin(), kRelayTypeOrder.end(), type) -
                            kRelayTypeOrder.begin());
}

std::string RelayInstance::label() const
{
    return std::to_string(substation) + "/" + to_string(type);
}

std::vector<RelayType> relay_types_at(const Network& net, int substation, const TopologyOptions& options,
                                      const PowerFlowSolution* base)
{
    require_base(options, base);
    const auto lc = gather(net, substation, base);
    std::vector<RelayType> types;
    for (auto t : kRelayTypeOrder)
        if (!select(lc, t, options).empty())
            types.push_back(t);
    return types;
}

std::vector<ComponentRef> controllability_set(const Network& net, int substation, RelayType type,
                                              const TopologyOptions& options, const PowerFlowSolution* base)
{
    require_base(options, base);
    auto set = select(gather(net, substation, base), type, options);
    if (set.empty())
        throw DomainError(std::string(to_string(type)) + " relay is not present at substation " +
                          std::to_string(substation));
    return set;
}

double controlled_power(const Network& net, const PowerFlowSolution& base,
                        const std::vector<ComponentRef>& components, FlowEnd end)
{
    double total = 0.0;
    for (const auto& ref : components) {
        switch (ref.kind) {
        case ComponentKind::Line:
        case ComponentKind::Transformer: {
            auto it = std::find_if(net.branches.begin(), net.branches.end(),
                                   [&](const Branch& b) { return b.id == ref.entity_id; });
            if (it == net.branches.end())
                throw DomainError("unknown branch " + std::to_string(ref.entity_id));
            const auto& flow = base.branch_flows[static_cast<std::size_t>(it - net.branches.begin())];
            total += end == FlowEnd::Sending ? std::abs(std::max(flow.p_from, flow.p_to))
                                             : std::abs(std::min(flow.p_from, flow.p_to));
            break;
        }
        case ComponentKind::Generator: {
            auto it = std::find_if(net.generators.begin(), net.generators.end(),
                                   [&](const Generator& g) { return g.id == ref.entity_id; });
            if (it == net.generators.end())
                throw DomainError("unknown generator " + std::to_string(ref.entity_id));
            total += std::abs(base.gen_p[static_cast<std::size_t>(it - net.generators.begin())]);
            break;
        }
        case ComponentKind::Load:
            total += std::abs(net.buses[net.bus_index(ref.entity_id)].load_p);
            break;
        }
    }
    return total;
}

RelaySet instantiate_relays(const Network& net, const PowerFlowSolution& base, const TopologyOptions& options)
{
    std::vector<int> ids;
    ids.reserve(net.buses.size());
    for (const auto& bus : net.buses)
        ids.push_back(bus.id);
    std::sort(ids.begin(), ids.end());

    RelaySet set;
    for (int id : ids) {
        const auto lc = gather(net, id, &base);
        int count = 0;
        for (auto type : kRelayTypeOrder) {
            auto components = select(lc, type, options);
            if (components.empty())
                continue;
            RelayInstance relay;
            relay.substation = id;
            relay.type = type;
            relay.controllability = components;
            relay.severe_set = std::move(components);
            relay.controlled_power_mw = controlled_power(net, base, relay.severe_set, options.flow_end);
            relay.available = relay.controlled_power_mw > options.zero_power_mw;
            set.relays.push_back(std::move(relay));
            ++count;
        }
        if (count > 0)
            set.per_substation[id] = count;
    }
    return set;
}

BigInt binomial(unsigned n, unsigned k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    BigInt r = 1;
    for (unsigned i = 0; i < k; ++i) {
        r *= n - i;
        r /= i + 1;
    }
    return r;
}

ScenarioCounts scenario_counts(const RelaySet& relays)
{
    ScenarioCounts c;
    c.system_product = 1;
    c.consequence_product = 1;
    for (const auto& [sub, k] : relays.per_substation) {
        c.per_substation[sub] = BigInt(1) << k;
        c.system_product *= c.per_substation[sub];
    }
    for (const auto& relay : relays.relays)
        c.consequences[relay.substation] += BigInt(1) << relay.controllability.size();
    for (const auto& [sub, value] : c.consequences)
        c.consequence_product *= value;
    c.relay_total = relays.total();
    c.substation_total = relays.substation_count();
    for (unsigned k = 1; k <= 3; ++k) {
        c.relay_select[k - 1] = binomial(static_cast<unsigned>(c.relay_total), k);
        c.substation_select[k - 1] = binomial(static_cast<unsigned>(c.substation_total), k);
    }
    return c;
}

}  // namespace relayrisk
