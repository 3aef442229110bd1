#include "aipi/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace aipi {

std::string_view to_string(Pillar p) noexcept {
  switch (p) {
    case Pillar::PG: return "PG";
    case Pillar::ID: return "ID";
    case Pillar::TR: return "TR";
    case Pillar::AC: return "AC";
  }
  return "?";
}

std::optional<Pillar> parse_pillar(std::string_view text) noexcept {
  for (Pillar p : kPillars) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t pos, std::size_t len, int& out) {
    const char* first = text.data() + pos;
    const char* last = first + len;
    for (const char* c = first; c != last; ++c) {
      if (*c < '0' || *c > '9') return false;
    }
    return std::from_chars(first, last, out).ec == std::errc{};
  };
  int y = 0, m = 0, d = 0;
  if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
  return buf;
}

double round9(double x) noexcept {
  if (!std::isfinite(x)) return x;
  const double r = std::nearbyint(x * 1e9) / 1e9;
  return r == 0.0 ? 0.0 : r;  // no negative zero in output
}

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace aipi
