#pragma once

#include <algorithm>
#include <filesystem>
#include <string>

#include "relayrisk/case_io.hpp"
#include "relayrisk/relays.hpp"

namespace testing {

inline std::filesystem::path ieee(const std::string& name)
{
    return std::filesystem::path(RELAYRISK_DATA_DIR) / "cases" / (name + ".m");
}

inline std::filesystem::path fixture(const std::string& name)
{
    return std::filesystem::path(RELAYRISK_FIXTURE_DIR) / name;
}

inline const char* const kIeeeCases[] = {"case30", "case39", "case57", "case118", "case300"};

inline const relayrisk::RelayInstance* find_relay(const relayrisk::RelaySet& set, int substation,
                                                  relayrisk::RelayType type)
{
    auto it = std::find_if(set.relays.begin(), set.relays.end(), [&](const relayrisk::RelayInstance& r) {
        return r.substation == substation && r.type == type;
    });
    return it == set.relays.end() ? nullptr : &*it;
}

inline std::size_t branch_pos(const relayrisk::Network& net, int id)
{
    for (std::size_t i = 0; i < net.branches.size(); ++i)
        if (net.branches[i].id == id)
            return i;
    return net.branches.size();
}

}  // namespace testing
