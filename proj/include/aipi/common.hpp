#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace aipi {

/// Error carrying a stable machine-readable code (e.g. "E_KIND_MISMATCH").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  [[nodiscard]] const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

enum class Pillar { PG, ID, TR, AC };

inline constexpr std::array<Pillar, 4> kPillars{Pillar::PG, Pillar::ID, Pillar::TR, Pillar::AC};

template <class T>
using PerPillar = std::array<T, 4>;

[[nodiscard]] constexpr std::size_t index_of(Pillar p) noexcept { return static_cast<std::size_t>(p); }

[[nodiscard]] std::string_view to_string(Pillar p) noexcept;
[[nodiscard]] std::optional<Pillar> parse_pillar(std::string_view text) noexcept;

/// Calendar date, no time component. Text form is ISO-8601 `YYYY-MM-DD`.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}

  /// Strict parse; rejects anything that is not exactly `YYYY-MM-DD` naming a real day.
  [[nodiscard]] static std::optional<Date> parse(std::string_view text);

  [[nodiscard]] std::string str() const;
  [[nodiscard]] std::chrono::year_month_day ymd() const noexcept { return ymd_; }

  friend auto operator<=>(const Date& a, const Date& b) noexcept {
    return std::chrono::sys_days{a.ymd_} <=> std::chrono::sys_days{b.ymd_};
  }
  friend bool operator==(const Date& a, const Date& b) noexcept { return a.ymd_ == b.ymd_; }

 private:
  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1}, std::chrono::day{1}};
};

/// Rounds to 9 decimal places, ties to even. Every published number passes through here.
[[nodiscard]] double round9(double x) noexcept;

/// Shortest decimal text that round-trips the double.
[[nodiscard]] std::string format_number(double x);

}  // namespace aipi
