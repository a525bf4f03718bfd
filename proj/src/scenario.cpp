#include "ptc/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "ptc/errors.hpp"

namespace ptc {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  std::size_t line;
};

struct Section {
  std::string name;
  std::size_t line;
  std::map<std::string, Entry> keys;
};

class Parser {
 public:
  explicit Parser(std::string path) : path_(std::move(path)) {}

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ConfigError(path_, line, msg);
  }

  double number(const Entry& e, const std::string& key) const {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      fail(e.line, "'" + key + "' expects a number, got '" + e.value + "'");
    }
    return v;
  }

  std::uint64_t integer(const Entry& e, const std::string& key) const {
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      fail(e.line, "'" + key + "' expects a nonnegative integer, got '" + e.value + "'");
    }
    return v;
  }

  std::vector<Section> read(std::istream& in) {
    std::vector<Section> sections;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']') fail(line, "unterminated section header");
        const std::string name = trim(text.substr(1, text.size() - 2));
        if (name != "hypothesis" && name != "experiment") fail(line, "unknown section [" + name + "]");
        sections.push_back({name, line, {}});
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) fail(line, "expected 'key = value'");
      if (sections.empty()) fail(line, "key outside of any section");
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty()) fail(line, "empty key");
      if (value.empty()) fail(line, "empty value for '" + key + "'");
      auto& keys = sections.back().keys;
      if (keys.count(key)) fail(line, "duplicate key '" + key + "'");
      keys[key] = {value, line};
    }
    return sections;
  }

 private:
  std::string path_;
};

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& path) {
  Parser parser(path);
  const auto sections = parser.read(in);

  Scenario out;
  out.path = path;
  std::vector<std::optional<double>> priors;
  std::vector<std::size_t> prior_lines;
  bool seen_experiment = false;

  for (const auto& sec : sections) {
    auto get = [&](const std::string& key) -> const Entry* {
      auto it = sec.keys.find(key);
      return it == sec.keys.end() ? nullptr : &it->second;
    };
    if (sec.name == "experiment") {
      if (seen_experiment) parser.fail(sec.line, "duplicate [experiment] section");
      seen_experiment = true;
      auto& d = out.defaults;
      for (const auto& [key, entry] : sec.keys) {
        if (key == "runs") {
          d.runs = parser.integer(entry, key);
        } else if (key == "realizations") {
          d.realizations = parser.integer(entry, key);
        } else if (key == "seed") {
          d.seed = parser.integer(entry, key);
        } else if (key == "sampling_period") {
          d.sampling_period = parser.number(entry, key);
          if (!(*d.sampling_period > 0.0)) parser.fail(entry.line, "sampling_period must be positive");
        } else if (key == "gamma") {
          d.gamma = parser.number(entry, key);
          if (!(*d.gamma >= 0.0)) parser.fail(entry.line, "gamma must be nonnegative");
        } else if (key == "max_periods") {
          d.max_periods = parser.integer(entry, key);
          if (*d.max_periods == 0) parser.fail(entry.line, "max_periods must be at least 1");
        } else {
          parser.fail(entry.line, "unknown key '" + key + "' in [experiment]");
        }
      }
      continue;
    }

    for (const auto& [key, entry] : sec.keys) {
      if (key != "label" && key != "shape" && key != "rate" && key != "rate_low" && key != "rate_high" &&
          key != "prior") {
        parser.fail(entry.line, "unknown key '" + key + "' in [hypothesis]");
      }
    }
    const Entry* shape = get("shape");
    if (!shape) parser.fail(sec.line, "hypothesis is missing 'shape'");
    const double alpha = parser.number(*shape, "shape");
    if (!(alpha > 0.0)) parser.fail(shape->line, "shape must be positive");

    std::string label = get("label") ? get("label")->value : "H" + std::to_string(out.set.models.size() + 1);
    const Entry* rate = get("rate");
    const Entry* low = get("rate_low");
    const Entry* high = get("rate_high");
    if (rate && (low || high)) parser.fail(rate->line, "give either 'rate' or 'rate_low'/'rate_high', not both");
    if (rate) {
      const double beta = parser.number(*rate, "rate");
      if (!(beta > 0.0)) parser.fail(rate->line, "rate must be positive");
      out.set.models.push_back(HypothesisModel::fixed(alpha, beta, label));
    } else if (low && high) {
      const double l = parser.number(*low, "rate_low");
      const double h = parser.number(*high, "rate_high");
      if (!(l > 0.0)) parser.fail(low->line, "rate_low must be positive");
      if (!(h > l)) parser.fail(high->line, "rate_high must exceed rate_low");
      out.set.models.push_back(HypothesisModel::uniform(alpha, l, h, label));
    } else {
      parser.fail(sec.line, "hypothesis needs 'rate' or both 'rate_low' and 'rate_high'");
    }

    const Entry* prior = get("prior");
    if (prior) {
      const double p = parser.number(*prior, "prior");
      if (!(p > 0.0)) parser.fail(prior->line, "prior must be positive");
      priors.emplace_back(p);
    } else {
      priors.emplace_back(std::nullopt);
    }
    prior_lines.push_back(prior ? prior->line : sec.line);
  }

  if (out.set.models.empty()) parser.fail(0, "no [hypothesis] sections");

  std::size_t given = 0;
  for (const auto& p : priors) given += p.has_value();
  if (given == 0) {
    out.set.priors.assign(priors.size(), 1.0 / static_cast<double>(priors.size()));
  } else if (given != priors.size()) {
    for (std::size_t i = 0; i < priors.size(); ++i) {
      if (!priors[i]) parser.fail(prior_lines[i], "prior missing; give it on every hypothesis or on none");
    }
  } else {
    double sum = 0.0;
    for (const auto& p : priors) sum += *p;
    if (std::fabs(sum - 1.0) > 1e-6) {
      parser.fail(prior_lines.back(), "priors sum to " + std::to_string(sum) + ", expected 1");
    }
    for (const auto& p : priors) out.set.priors.push_back(*p / sum);
  }
  return out;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  return parse_scenario(in, path);
}

}  // namespace ptc
