#pragma once

// Dataset ingestion and the synthetic meta-analysis generator.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "bfsens/model.hpp"

namespace bfsens {

// JSON object with n1, mean1, sd1, n2, mean2, sd2. Throws ValidationError
// naming the missing or invalid field.
TTestData parse_ttest_json(const std::string& text);
TTestData read_ttest_json(const std::filesystem::path& path);

// CSV with header "effect,se"; row order is preserved. Errors name the row.
MetaData read_meta_csv(std::istream& in);
MetaData read_meta_csv(const std::filesystem::path& path);
void write_meta_csv(std::ostream& out, const MetaData& data);

struct SyntheticMetaSpec {
  int k = 9;
  double mu = 0.2;
  double tau = 0.05;
  Interval se_range{0.08, 0.2};
  std::uint64_t seed = 20240101;

  void validate() const;
};

// y_i ~ N(mu, se_i^2 + tau^2), se_i equispaced over se_range (ascending).
MetaData gen_synthetic_meta(const SyntheticMetaSpec& spec);

}  // namespace bfsens
