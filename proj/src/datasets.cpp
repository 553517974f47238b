#include "bfsens/datasets.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/random/normal_distribution.hpp>
#include <json.hpp>

#include "bfsens/csv.hpp"
#include "bfsens/error.hpp"
#include "bfsens/rng.hpp"

namespace bfsens {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* name) {
  const auto it = obj.find(name);
  if (it == obj.end()) throw ValidationError(std::string("t-test data: missing field '") + name + "'");
  if (!it->is_number()) throw ValidationError(std::string("t-test data: field '") + name + "' is not a number");
  return *it;
}

int integer_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number_integer()) throw ValidationError(std::string("t-test data: field '") + name + "' is not an integer");
  return v.get<int>();
}

}  // namespace

TTestData parse_ttest_json(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("t-test data: malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ValidationError("t-test data: expected a JSON object");
  TTestData d;
  d.n1 = integer_field(obj, "n1");
  d.mean1 = field(obj, "mean1").get<double>();
  d.sd1 = field(obj, "sd1").get<double>();
  d.n2 = integer_field(obj, "n2");
  d.mean2 = field(obj, "mean2").get<double>();
  d.sd2 = field(obj, "sd2").get<double>();
  d.validate();
  return d;
}

TTestData read_ttest_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open t-test data file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ttest_json(ss.str());
}

MetaData read_meta_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  const std::size_t ec = t.column("effect");
  const std::size_t sc = t.column("se");
  if (t.rows.empty()) throw ValidationError("meta-analysis data has no rows");
  MetaData d;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string ctx = "meta-analysis row " + std::to_string(r + 1);
    const double y = csv::parse_double(t.rows[r][ec], ctx);
    const double se = csv::parse_double(t.rows[r][sc], ctx);
    if (!std::isfinite(y)) throw ValidationError(ctx + ": effect must be finite");
    if (!(se > 0.0) || !std::isfinite(se)) throw ValidationError(ctx + ": se must be positive");
    d.effects.push_back(y);
    d.ses.push_back(se);
  }
  return d;
}

MetaData read_meta_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open meta-analysis data file " + path.string());
  return read_meta_csv(in);
}

void write_meta_csv(std::ostream& out, const MetaData& data) {
  out << "effect,se\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out << csv::format_double(data.effects[i]) << ',' << csv::format_double(data.ses[i]) << '\n';
}

void SyntheticMetaSpec::validate() const {
  if (k < 1) throw ValidationError("synthetic meta-analysis: K must be at least 1");
  if (!(se_range.lower > 0.0) || !(se_range.upper >= se_range.lower) || !std::isfinite(se_range.upper))
    throw ValidationError("synthetic meta-analysis: se range must be positive and ordered");
  if (!(tau >= 0.0) || !std::isfinite(tau) || !std::isfinite(mu))
    throw ValidationError("synthetic meta-analysis: mu must be finite and tau nonnegative");
}

MetaData gen_synthetic_meta(const SyntheticMetaSpec& spec) {
  spec.validate();
  Philox4x32 rng(spec.seed, 0);
  boost::random::normal_distribution<double> z(0.0, 1.0);
  MetaData d;
  for (int i = 0; i < spec.k; ++i) {
    const double se = spec.k == 1 ? spec.se_range.lower
                                  : spec.se_range.lower + spec.se_range.width() * i / (spec.k - 1);
    d.ses.push_back(se);
    d.effects.push_back(spec.mu + std::sqrt(se * se + spec.tau * spec.tau) * z(rng));
  }
  return d;
}

}  // namespace bfsens
