#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aipi/evidence_model.hpp"
#include "aipi/json_util.hpp"

namespace aipi {

enum class Severity { error, warning };

[[nodiscard]] std::string_view to_string(Severity s) noexcept;

struct Violation {
  Severity severity = Severity::error;
  std::string code;
  std::string file;    // dataset document the offending record belongs to
  std::string record;  // record key, e.g. "S01/PG-01/coder_a"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Referential integrity, value domains and evidence-link rules. These are
/// the checks `parse_dataset` refuses to load past.
[[nodiscard]] std::vector<Violation> structural_violations(const Dataset& d);

/// Every dataset invariant plus the release cutoff (when given). Result is
/// sorted by (file, record, code). Warnings never block scoring.
[[nodiscard]] std::vector<Violation> validate_dataset(const Dataset& d, std::optional<Date> cutoff);

[[nodiscard]] std::size_t count(std::span<const Violation> vs, Severity s);

/// Empty string when `url` is an absolute http(s) URL, else the violation code.
[[nodiscard]] std::string check_public_url(std::string_view url);

[[nodiscard]] json violations_to_json(std::span<const Violation> vs);

}  // namespace aipi
