#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "aipi/evidence_model.hpp"
#include "aipi/rng.hpp"

namespace aipi::testing {

struct RandomDatasetOptions {
  std::size_t min_subjects = 2, max_subjects = 20;
  std::size_t min_indicators = 4, max_indicators = 40;
  bool second_coders = true;
};

/// A valid random dataset: every pillar has an indicator, systems hang off
/// providers, unknown rate drawn per dataset from [0, 1].
Dataset random_dataset(SplitMix64& rng, const RandomDatasetOptions& options = {});

RawCode raw(std::string subject, std::string indicator, std::string coder, CodeValue value,
            EvidenceClass cls = EvidenceClass::primary_attributable, bool stale = false);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Source tree root, baked in at configure time.
std::filesystem::path source_dir();

}  // namespace aipi::testing
