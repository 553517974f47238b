#pragma once

// Acceptance suite shared by `validate` and the acceptance test binary.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bfsens::app {

struct Criterion {
  int id = 0;
  std::string name;
  std::string summary;
};

const std::vector<Criterion>& criteria();

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  // Deterministic: measured values and thresholds, never wall times.
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::string ttest_data;
  std::string meta_data;
  std::filesystem::path artifacts;  // per-criterion CSVs land here
  std::vector<int> criteria;        // ids to run, in order
};

// Runs the selected criteria. An exception inside a criterion marks it failed
// with the message as detail; the remaining criteria still run.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log);

// Columns: criterion, name, status, detail.
void write_report_csv(std::ostream& out, const std::vector<CriterionResult>& results);
void write_report_json(std::ostream& out, const std::vector<CriterionResult>& results);

// Byte comparison of two directory trees. Returns the relative paths that are
// missing on either side or differ; `ignore` names files skipped by filename.
std::vector<std::string> compare_trees(const std::filesystem::path& a, const std::filesystem::path& b,
                                       const std::vector<std::string>& ignore = {});

}  // namespace bfsens::app
