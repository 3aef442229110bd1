#pragma once

// Evidence link accessibility. Never called while scoring; its report is a
// side output and has no influence on scores or release digests.

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "aipi/evidence_model.hpp"
#include "aipi/json_util.hpp"

namespace aipi {

enum class LinkState { ok, redirect, unreachable, not_attempted };

[[nodiscard]] std::string_view to_string(LinkState s) noexcept;

struct LinkStatus {
  std::string artifact_id;
  std::string url;
  LinkState state = LinkState::not_attempted;
  int http_status = 0;
  std::string detail;
};

struct LinkCheckOptions {
  bool live = false;  // network access only when explicitly enabled
  std::chrono::milliseconds timeout{5000};
};

/// One status per artifact, ordered by artifact_id. 2xx is ok, 3xx redirect,
/// anything else (including transport errors) unreachable.
[[nodiscard]] std::vector<LinkStatus> link_check(const Dataset& d, const LinkCheckOptions& options);

[[nodiscard]] json link_status_to_json(std::span<const LinkStatus> statuses);

}  // namespace aipi
