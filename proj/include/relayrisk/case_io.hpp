#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "relayrisk/network.hpp"

namespace relayrisk {

enum class CaseFormat { Auto, Matpower, Json };

/// Parses a case file. `Auto` picks JSON when the first non-blank character
/// is '{', MATPOWER tabular text otherwise. The result is validated.
Network parse_case(std::string_view text, CaseFormat format = CaseFormat::Auto);

/// Reads and parses a file. The network name defaults to the file stem.
Network load_case(const std::filesystem::path& path);

std::string write_matpower(const Network& net);
std::string write_case_json(const Network& net);

}  // namespace relayrisk
