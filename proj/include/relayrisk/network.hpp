#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace relayrisk {

enum class BusKind { PQ, PV, Slack };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double load_p = 0.0;            // MW, negative values are net injections
    double load_q = 0.0;            // MVAr
    double shunt_g = 0.0;           // MW consumed at 1 p.u.
    double shunt_b = 0.0;           // MVAr injected at 1 p.u.
    double voltage_setpoint = 1.0;  // p.u., meaningful for PV and slack buses

    /// A bus carries a load component iff either load term is nonzero.
    bool has_load() const noexcept { return load_p != 0.0 || load_q != 0.0; }

    bool operator==(const Bus&) const = default;
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b = 0.0;          // total line charging, p.u.
    double tap = 1.0;        // off-nominal ratio, 1.0 for plain lines
    double shift_deg = 0.0;  // phase shift, degrees
    bool is_transformer = false;
    bool in_service = true;

    bool operator==(const Branch&) const = default;
};

struct Generator {
    int id = 0;
    int bus = 0;
    double p_out = 0.0;  // MW setpoint
    double q_out = 0.0;  // MVAr, used only as a starting guess
    double q_min = 0.0;
    double q_max = 0.0;
    bool in_service = true;

    bool operator==(const Generator&) const = default;
};

/// Electrical grid under study. Buses double as substations.
///
/// Value type: copy it to derive post-outage networks. Call `reindex()` after
/// mutating the bus list; branch and generator edits do not need it.
class Network {
public:
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    void reindex();

    /// Position of bus `id` in `buses`. Throws DomainError on an unknown id.
    std::size_t bus_index(int id) const;
    std::optional<std::size_t> find_bus(int id) const;

    /// Position of the slack bus. Requires a validated network.
    std::size_t slack_index() const;

    /// Throws ValidationError naming the offending entity.
    void validate() const;

    bool operator==(const Network& other) const;

private:
    std::unordered_map<int, std::size_t> index_;
};

/// Electrical element a relay can switch out.
enum class ComponentKind { Line, Transformer, Generator, Load };

/// Reference into a Network. `entity_id` is the branch id for lines and
/// transformers, the generator id for generators, and the bus id for loads.
struct ComponentRef {
    ComponentKind kind = ComponentKind::Line;
    int entity_id = 0;
    int substation = 0;

    auto operator<=>(const ComponentRef&) const = default;
};

const char* to_string(ComponentKind kind);
const char* to_string(BusKind kind);

}  // namespace relayrisk
