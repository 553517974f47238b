#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "commands.hpp"

namespace {

const char* describe(const std::string& name) {
  if (name == "curve") return "one-dimensional sensitivity curve with the quadrature reference";
  if (name == "surface") return "two-dimensional sensitivity surface for the informed t-test";
  if (name == "mcmc-study") return "curve error against the number of posterior draws";
  if (name == "bma") return "inclusion Bayes factor curve for the four-model meta-analysis";
  if (name == "gen-meta") return "write a synthetic meta-analysis dataset";
  return "run the acceptance criteria and write a report";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bfsens::app;

  CLI::App app{"Prior sensitivity curves for Bayes factors from a single extended-model fit"};
  app.require_subcommand(1);

  std::optional<std::string> config;
  Overrides ov;
  std::optional<std::string> estimators;
  bool list = false;

  for (const char* name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", config, "JSON config; keys override the built-in defaults");
    sub->add_option("--seed", ov.seed, "base RNG seed");
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--estimators", estimators, "comma-separated estimators (kde, iwmde, iwmde-conditional, cmde, trunc-normal)");
    sub->add_option("--strategy", ov.strategy, "bma encompassing strategy: bridge, product-space or both");
    sub->add_flag("--force", ov.force, "proceed with unconverged MCMC draws");
    if (std::string(name) == "validate") sub->add_flag("--list", list, "print the acceptance criteria and exit");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  if (list) {
    for (const auto& c : criteria()) std::cout << c.id << '\t' << c.name << '\t' << c.summary << '\n';
    return 0;
  }
  if (estimators) {
    std::vector<std::string> v;
    std::string item;
    for (char c : *estimators + ",") {
      if (c != ',') {
        item += c;
      } else if (!item.empty()) {
        v.push_back(item);
        item.clear();
      }
    }
    ov.estimators = v;
  }

  Json cfg;
  try {
    cfg = resolve_config(subcommand, config ? std::optional<std::filesystem::path>(*config) : std::nullopt, ov);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return run_subcommand(subcommand, cfg, std::cout, std::cerr);
}
