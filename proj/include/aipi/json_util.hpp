#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace aipi {

using json = nlohmann::json;

/// Canonical text: sorted keys, two-space indent, LF, trailing newline.
/// Numbers must already be rounded with `round9` by the caller (see `num`).
[[nodiscard]] std::string canonical_dump(const json& j);

/// Rounded number, or null for an undefined value.
[[nodiscard]] json num(double x);
[[nodiscard]] json num(const std::optional<double>& x);

}  // namespace aipi
