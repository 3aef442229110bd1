#include "aipi/link_check.hpp"

#include <algorithm>

#include <httplib.h>

#include "aipi/validation.hpp"

namespace aipi {

std::string_view to_string(LinkState s) noexcept {
  switch (s) {
    case LinkState::ok: return "ok";
    case LinkState::redirect: return "redirect";
    case LinkState::unreachable: return "unreachable";
    case LinkState::not_attempted: return "not_attempted";
  }
  return "?";
}

namespace {

/// Splits an absolute http(s) URL into "scheme://authority" and the request target.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto authority_start = url.find("//") + 2;
  const auto path_start = url.find_first_of("/?#", authority_start);
  if (path_start == std::string::npos) return {url, "/"};
  std::string target = url.substr(path_start);
  if (const auto hash = target.find('#'); hash != std::string::npos) target.erase(hash);
  if (target.empty() || target.front() != '/') target.insert(target.begin(), '/');
  return {url.substr(0, path_start), target};
}

LinkStatus probe(const EvidenceArtifact& a, const LinkCheckOptions& options) {
  LinkStatus st{a.artifact_id, a.url, LinkState::unreachable, 0, ""};
  if (std::string code = check_public_url(a.url); !code.empty()) {
    st.detail = code;
    return st;
  }
  const auto [base, target] = split_url(a.url);
  try {
    httplib::Client client(base);
    client.set_follow_location(false);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    auto res = client.Head(target);
    if (!res || res->status == 405 || res->status == 501) res = client.Get(target);  // some hosts reject HEAD
    if (!res) {
      st.detail = httplib::to_string(res.error());
      return st;
    }
    st.http_status = res->status;
    if (res->status >= 200 && res->status < 300) {
      st.state = LinkState::ok;
    } else if (res->status >= 300 && res->status < 400) {
      st.state = LinkState::redirect;
      st.detail = res->get_header_value("Location");
    } else {
      st.detail = "HTTP " + std::to_string(res->status);
    }
  } catch (const std::exception& e) {
    st.detail = e.what();
  }
  return st;
}

}  // namespace

std::vector<LinkStatus> link_check(const Dataset& d, const LinkCheckOptions& options) {
  std::vector<const EvidenceArtifact*> artifacts;
  for (const EvidenceArtifact& a : d.artifacts) artifacts.push_back(&a);
  std::ranges::sort(artifacts, {}, &EvidenceArtifact::artifact_id);

  std::vector<LinkStatus> out;
  for (const EvidenceArtifact* a : artifacts) {
    if (!options.live) {
      out.push_back({a->artifact_id, a->url, LinkState::not_attempted, 0, "offline"});
    } else {
      out.push_back(probe(*a, options));
    }
  }
  return out;
}

json link_status_to_json(std::span<const LinkStatus> statuses) {
  json items = json::array();
  for (const LinkStatus& s : statuses) {
    items.push_back({{"artifact_id", s.artifact_id},
                     {"url", s.url},
                     {"state", to_string(s.state)},
                     {"http_status", s.http_status},
                     {"detail", s.detail}});
  }
  return {{"links", std::move(items)}};
}

}  // namespace aipi
