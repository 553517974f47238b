// Runs `bfsens validate` as a subprocess and prints one line per criterion.
// Exits nonzero if any criterion fails or is missing from the report.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "acceptance.hpp"

namespace fs = std::filesystem;

int main() {
  const fs::path work = fs::temp_directory_path() / "bfsens_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path out = work / "out";

  const std::string cmd = std::string("\"") + BFSENS_CLI_PATH + "\" validate --out \"" + out.string() + "\" > \"" +
                          (work / "validate.log").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  const int rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

  std::ifstream in(out / "validation_report.json");
  if (!in) {
    std::cout << "FAIL validate produced no report (exit " << rc << ", log in " << (work / "validate.log") << ")\n";
    return 1;
  }
  const auto report = nlohmann::json::parse(in);

  bool all = true;
  for (const auto& c : bfsens::app::criteria()) {
    const nlohmann::json* row = nullptr;
    for (const auto& r : report.at("criteria"))
      if (r.at("criterion").get<int>() == c.id) row = &r;
    const bool pass = row && row->at("status") == "pass";
    all = all && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.id << ' ' << c.name << ": "
              << (row ? row->at("detail").get<std::string>() : std::string("missing from report")) << '\n';
  }
  if (all != (rc == 0)) {
    std::cout << "FAIL exit code " << rc << " disagrees with the report\n";
    return 1;
  }
  return all ? 0 : 1;
}
