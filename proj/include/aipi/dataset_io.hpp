#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aipi/evidence_model.hpp"

namespace aipi {

inline constexpr std::array<std::string_view, 4> kDatasetFiles{"indicators.json", "subjects.json",
                                                                "artifacts.json", "codes.json"};

/// One problem found while loading. `line` is only known for syntax errors
/// (1-based, 0 otherwise); `where` is a JSON pointer or record key.
struct ParseIssue {
  std::string code;
  std::string file;
  std::size_t line = 0;
  std::string where;
  std::string message;
};

/// Loading is all-or-nothing; every issue found is carried here.
class ParseError : public Error {
 public:
  explicit ParseError(std::vector<ParseIssue> issues);
  [[nodiscard]] const std::vector<ParseIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ParseIssue> issues_;
};

/// File name -> document bytes.
using DocumentSet = std::map<std::string, std::string, std::less<>>;

/// Parses the four dataset documents into a linked, canonically ordered
/// Dataset. Closed schema: unknown fields are rejected. Throws ParseError.
[[nodiscard]] Dataset parse_dataset(const DocumentSet& documents);

/// Reads the four documents from `dir` and parses them.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& dir);

/// Canonical JSON documents; `parse_dataset(serialize_dataset(d)) == d` for
/// any valid canonical dataset.
[[nodiscard]] DocumentSet serialize_dataset(const Dataset& d);

[[nodiscard]] std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view bytes);

}  // namespace aipi
