#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "relayrisk/network.hpp"
#include "relayrisk/powerflow.hpp"

namespace relayrisk {

enum class RelayType {
    BusDifferential,
    DirectionalOvercurrent,
    DirectionalDistance,
    UnderFrequency,
    Transformer,
};

/// Output order of relays within a substation.
inline constexpr std::array<RelayType, 5> kRelayTypeOrder = {
    RelayType::BusDifferential, RelayType::DirectionalOvercurrent,
    RelayType::DirectionalDistance, RelayType::UnderFrequency, RelayType::Transformer};

const char* to_string(RelayType type);
std::optional<RelayType> relay_type_from_string(std::string_view name);
int order_of(RelayType type);

/// Which end of a branch defines the MW a relay is credited with.
enum class FlowEnd {
    Sending,    // end where active power enters the branch
    Receiving,  // end where it leaves
};

/// What a compromised distance relay trips.
enum class DistanceScope {
    IncidentLines,     // every non-transformer branch at the substation
    OutgoingBranches,  // every branch whose base-case MW leaves the substation
};

struct TopologyOptions {
    FlowEnd flow_end = FlowEnd::Sending;
    DistanceScope distance_scope = DistanceScope::IncidentLines;
    /// Equip transformer relays only at substations with generation or load.
    bool transformer_needs_injection = false;
    /// Relays controlling less than this many MW in the base case are
    /// reported as not available.
    double zero_power_mw = 1e-6;
};

struct RelayInstance {
    int substation = 0;
    RelayType type = RelayType::BusDifferential;
    std::vector<ComponentRef> controllability;
    std::vector<ComponentRef> severe_set;  // worst case: the full controllability set
    double controlled_power_mw = 0.0;      // |P_{i,k}| from the base case
    bool available = true;

    std::string label() const;
};

struct RelaySet {
    std::vector<RelayInstance> relays;  // sorted by (substation, relay type order)
    std::map<int, int> per_substation;  // K_i, instantiated relays at each substation

    std::size_t total() const noexcept { return relays.size(); }
    std::size_t substation_count() const noexcept { return per_substation.size(); }
};

/// Components a relay of `type` at `substation` can switch out.
///
/// Throws DomainError if that relay type is not instantiated there. `base`
/// is required only for DistanceScope::OutgoingBranches.
std::vector<ComponentRef> controllability_set(const Network& net, int substation, RelayType type,
                                              const TopologyOptions& options = {},
                                              const PowerFlowSolution* base = nullptr);

/// Relay types present at a substation under the equipping rules.
std::vector<RelayType> relay_types_at(const Network& net, int substation,
                                      const TopologyOptions& options = {},
                                      const PowerFlowSolution* base = nullptr);

/// Sum of base-case |MW| over `components`.
double controlled_power(const Network& net, const PowerFlowSolution& base,
                        const std::vector<ComponentRef>& components, FlowEnd end);

/// Builds every relay in the network. `base` must be the converged base case.
RelaySet instantiate_relays(const Network& net, const PowerFlowSolution& base,
                            const TopologyOptions& options = {});

using BigInt = boost::multiprecision::cpp_int;

BigInt binomial(unsigned n, unsigned k);

struct ScenarioCounts {
    std::map<int, BigInt> per_substation;         // 2^{K_i}
    BigInt system_product;                        // product of the above = 2^{sum K_i}
    std::map<int, BigInt> consequences;           // sum over relays of 2^{|C_{i,k}|}
    BigInt consequence_product;                   // product of the above
    std::array<BigInt, 3> relay_select{};         // C(K_total, k), k = 1..3
    std::array<BigInt, 3> substation_select{};    // C(S, k), k = 1..3
    std::size_t relay_total = 0;
    std::size_t substation_total = 0;
};

ScenarioCounts scenario_counts(const RelaySet& relays);

}  // namespace relayrisk
