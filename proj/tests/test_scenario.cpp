#include <doctest.h>

#include <sstream>

#include "ptc/errors.hpp"
#include "ptc/scenario.hpp"
#include "support.hpp"

using namespace ptc;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "inline.cfg");
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

bool same(const HypothesisSet& a, const HypothesisSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a.models[j].shape != b.models[j].shape || a.models[j].rate_spec != b.models[j].rate_spec) return false;
    if (std::fabs(a.priors[j] - b.priors[j]) > 1e-15) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("bundled scenarios reproduce the parameter tables") {
    CHECK(same(load_scenario(fixtures::scenario_path("test1")).set, fixtures::test1()));
    CHECK(same(load_scenario(fixtures::scenario_path("test2")).set, fixtures::test2()));
    CHECK(same(load_scenario(fixtures::scenario_path("test1_fluct")).set, fixtures::test1_fluct()));
    CHECK(same(load_scenario(fixtures::scenario_path("test2_fluct")).set, fixtures::test2_fluct()));
    CHECK(load_scenario(fixtures::scenario_path("test1")).set.models[1].label == "erlang");
  }

  TEST_CASE("priors and experiment defaults") {
    const auto s = parse(
        "# two hypotheses\n"
        "[hypothesis]\nshape = 1\nrate = 0.5\nprior = 0.25\n"
        "[hypothesis]\nshape = 2\nrate_low = 0.1\nrate_high = 0.3\nprior = 0.75\n"
        "[experiment]\nruns = 7\nseed = 42\nsampling_period = 0.5\n");
    CHECK(s.set.priors[0] == doctest::Approx(0.25));
    CHECK(s.set.models[1].prior().high == 0.3);
    CHECK(*s.defaults.runs == 7);
    CHECK(*s.defaults.seed == 42);
    CHECK(*s.defaults.sampling_period == 0.5);
    CHECK_FALSE(s.defaults.realizations.has_value());
  }

  TEST_CASE("errors are anchored to lines") {
    CHECK(error_line("[hypothesis]\nshape = 1\nrate = abc\n") == 3);
    CHECK(error_line("[hypothesis]\nshape = 1\n") == 1);
    CHECK(error_line("[hypothesis]\nshape = -1\nrate = 1\n") == 2);
    CHECK(error_line("[hypothesis]\nshape = 1\nrate = 1\nrate_low = 0.5\nrate_high = 2\n") == 3);
    CHECK(error_line("[hypothesis]\nshape = 1\nrate_low = 0.5\nrate_high = 0.2\n") == 4);
    CHECK(error_line("[hypothesis]\nshape = 1\nrate = 1\ncolour = red\n") == 4);
    CHECK(error_line("shape = 1\n") == 1);
    CHECK(error_line("[hypotheses]\n") == 1);
    CHECK(error_line("[hypothesis]\nshape = 1\nshape = 2\nrate = 1\n") == 3);
    CHECK(error_line("[hypothesis]\nshape 1\n") == 2);
    CHECK(error_line("[hypothesis]\nshape = 1\nrate = 1\nprior = 0.3\n[hypothesis]\nshape = 2\nrate = 1\nprior = 0.3\n") ==
          8);
    CHECK(error_line("[hypothesis]\nshape = 1\nrate = 1\nprior = 0.5\n[hypothesis]\nshape = 2\nrate = 1\n") == 5);
    CHECK(error_line("[experiment]\nruns = -3\n") == 2);
    CHECK(error_line("") == 0);
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.cfg"), ConfigError);
  }
}
