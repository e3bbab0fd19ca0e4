#include "relayrisk/network.hpp"

#include <string>
#include <unordered_set>

#include "relayrisk/errors.hpp"

namespace relayrisk {

void Network::reindex()
{
    index_.clear();
    index_.reserve(buses.size());
    for (std::size_t i = 0; i < buses.size(); ++i)
        index_.emplace(buses[i].id, i);
}

std::optional<std::size_t> Network::find_bus(int id) const
{
    auto it = index_.find(id);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

std::size_t Network::bus_index(int id) const
{
    if (auto idx = find_bus(id))
        return *idx;
    throw DomainError("unknown bus " + std::to_string(id));
}

std::size_t Network::slack_index() const
{
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::Slack)
            return i;
    throw DomainError("network has no slack bus");
}

void Network::validate() const
{
    if (!(base_mva > 0.0))
        throw ValidationError("base MVA must be positive");

    std::unordered_set<int> ids;
    int slack_count = 0;
    for (const auto& bus : buses) {
        if (!ids.insert(bus.id).second)
            throw ValidationError("bus " + std::to_string(bus.id) + ": duplicate id");
        if (bus.kind == BusKind::Slack)
            ++slack_count;
        if (bus.kind != BusKind::PQ && !(bus.voltage_setpoint > 0.0))
            throw ValidationError("bus " + std::to_string(bus.id) + ": voltage setpoint must be positive");
    }
    if (slack_count == 0)
        throw ValidationError("no slack bus");
    if (slack_count > 1)
        throw ValidationError("multiple slack buses");
    if (index_.size() != buses.size())
        throw ValidationError("bus index out of date");

    for (const auto& br : branches) {
        const std::string name = "branch " + std::to_string(br.id);
        if (!ids.contains(br.from_bus))
            throw ValidationError(name + ": unknown from bus " + std::to_string(br.from_bus));
        if (!ids.contains(br.to_bus))
            throw ValidationError(name + ": unknown to bus " + std::to_string(br.to_bus));
        if (br.from_bus == br.to_bus)
            throw ValidationError(name + ": both ends on bus " + std::to_string(br.from_bus));
        if (br.r == 0.0 && br.x == 0.0)
            throw ValidationError(name + ": zero series impedance");
        if (!(br.tap > 0.0))
            throw ValidationError(name + ": tap ratio must be positive");
    }

    for (const auto& gen : generators) {
        const std::string name = "generator " + std::to_string(gen.id);
        auto idx = find_bus(gen.bus);
        if (!idx)
            throw ValidationError(name + ": unknown bus " + std::to_string(gen.bus));
        if (gen.in_service && buses[*idx].kind == BusKind::PQ)
            throw ValidationError(name + ": in service at PQ bus " + std::to_string(gen.bus));
    }
}

bool Network::operator==(const Network& other) const
{
    return name == other.name && base_mva == other.base_mva && buses == other.buses &&
           branches == other.branches && generators == other.generators;
}

const char* to_string(ComponentKind kind)
{
    switch (kind) {
    case ComponentKind::Line: return "line";
    case ComponentKind::Transformer: return "transformer";
    case ComponentKind::Generator: return "generator";
    case ComponentKind::Load: return "load";
    }
    return "?";
}

const char* to_string(BusKind kind)
{
    switch (kind) {
    case BusKind::PQ: return "PQ";
    case BusKind::PV: return "PV";
    case BusKind::Slack: return "slack";
    }
    return "?";
}

}  // namespace relayrisk
