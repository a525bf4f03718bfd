#pragma once

// Scenario files: INI-style key/value text describing a hypothesis set.
//
//   # comment
//   [hypothesis]
//   label = exponential
//   shape = 1
//   rate = 0.4            (or rate_low / rate_high for a uniform rate prior)
//   prior = 0.5           (optional; omit on every hypothesis for equal priors)
//
//   [experiment]          (optional defaults for the CLI)
//   runs = 50
//   realizations = 2000
//   seed = 1
//   sampling_period = 0.5
//   gamma = 0.1
//   max_periods = 10000
//
// Units are seconds and 1/seconds. Priors given in the file must sum to one
// within 1e-6 and are then renormalized.

#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include "ptc/traffic.hpp"

namespace ptc {

struct ExperimentDefaults {
  std::optional<std::size_t> runs;
  std::optional<std::size_t> realizations;
  std::optional<std::uint64_t> seed;
  std::optional<double> sampling_period;
  std::optional<double> gamma;
  std::optional<std::size_t> max_periods;
};

struct Scenario {
  std::string path;
  HypothesisSet set;
  ExperimentDefaults defaults;
};

/// Parses scenario text; `path` is used only in error messages.
Scenario parse_scenario(std::istream& in, const std::string& path = "<input>");
Scenario load_scenario(const std::string& path);

}  // namespace ptc
