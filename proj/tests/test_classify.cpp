#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ptc/analysis.hpp"
#include "ptc/classify.hpp"
#include "ptc/errors.hpp"
#include "ptc/parallel.hpp"
#include "support.hpp"

using namespace ptc;

namespace {

struct Estimate {
  double pc;
  double mean_periods;
  double se() const { return std::sqrt(pc * (1 - pc) / 10000.0); }
};

Estimate accuracy(Method m, const HypothesisSet& set, const TrialSetup& setup, std::size_t trials,
                  std::uint64_t seed) {
  std::vector<char> ok(trials);
  std::vector<std::size_t> used(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    const auto o = simulate_trial(m, set, setup, rng);
    ok[t] = o.correct();
    used[t] = o.decision.periods_used;
  });
  const double n = static_cast<double>(trials);
  return {std::accumulate(ok.begin(), ok.end(), 0.0) / n, std::accumulate(used.begin(), used.end(), 0.0) / n};
}

// Fixed-size accuracy at a fractional period count, by linear interpolation.
double accuracy_at(Method m, const HypothesisSet& set, double n, std::size_t trials, std::uint64_t seed) {
  TrialSetup s;
  s.n_periods = static_cast<std::size_t>(std::floor(n));
  const double lo = s.n_periods >= 1 ? accuracy(m, set, s, trials, seed).pc : 1.0 / set.size();
  s.n_periods += 1;
  const double hi = accuracy(m, set, s, trials, seed).pc;
  const double f = n - std::floor(n);
  return (1 - f) * lo + f * hi;
}

double posterior_sum(const Decision& d) { return std::accumulate(d.posteriors.begin(), d.posteriors.end(), 0.0); }

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("single hypothesis always wins") {
    const auto one = HypothesisSet::equiprobable({HypothesisModel::fixed(2, 0.3)});
    const std::vector<double> x{1.0, 4.0, 0.2};
    CHECK(mlc({x, PeriodKind::on}, one).chosen == 0);
    CHECK(etc_mlc({x, PeriodKind::on}, one).chosen == 0);
    CHECK(mlc({x, PeriodKind::on}, one).posteriors[0] == 1.0);
  }

  TEST_CASE("mlc accuracy under H_1 matches its analytic term") {
    const auto set = fixtures::test1();
    const double expected = analytical_pc_mlc_given(set, 20)[0];
    const auto p = set.params()[0];
    std::size_t hits = 0;
    const std::size_t trials = 10000;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(31, t));
      hits += mlc(generate_periods(p, 20, rng), set).chosen == 0;
    }
    CHECK(std::fabs(static_cast<double>(hits) / trials - expected) < 0.02);
  }

  TEST_CASE("mlc decision is invariant to a common prior scale") {
    auto a = fixtures::test1();
    a.priors = {0.2, 0.3, 0.5};
    auto b = a;
    double s = 0.0;
    for (auto& p : b.priors) s += (p *= 7.3);
    for (auto& p : b.priors) p /= s;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      Rng rng(seed);
      const auto x = generate_periods(GammaParams{1.2, 0.4}, 5, rng);
      CHECK(mlc(x, a).chosen == mlc(x, b).chosen);
    }
  }

  TEST_CASE("msprt with a huge threshold stops after one period") {
    const auto set = fixtures::test1();
    MsprtConfig cfg;
    cfg.gamma_threshold = 1e6;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      const auto x = generate_periods(GammaParams{2, 0.3}, 10, rng).values;
      const auto d = msprt(vector_source(x), set, cfg);
      CHECK(d.periods_used == 1);
      CHECK(d.stopped);
      CHECK(d.chosen == mlc({{x[0]}, PeriodKind::on}, set).chosen);
    }
  }

  TEST_CASE("msprt on indistinguishable hypotheses runs to the cap") {
    const auto set = HypothesisSet::equiprobable({HypothesisModel::fixed(2, 0.3), HypothesisModel::fixed(2, 0.3)});
    MsprtConfig cfg;
    cfg.gamma_threshold = 0.5;
    cfg.max_periods = 50;
    Rng rng(3);
    const auto x = generate_periods(GammaParams{2, 0.3}, 60, rng).values;
    const auto d = msprt(vector_source(x), set, cfg);
    CHECK_FALSE(d.stopped);
    CHECK(d.periods_used == 50);
    CHECK(d.posteriors[0] == doctest::Approx(0.5));
  }

  TEST_CASE("msprt errors when the stream runs dry") {
    MsprtConfig cfg;
    cfg.gamma_threshold = 1e-6;
    const std::vector<double> x{1.0, 2.0};
    CHECK_THROWS_AS(msprt(vector_source(x), fixtures::test1(), cfg), DomainError);
    cfg.max_periods = 0;
    CHECK_THROWS_AS(msprt(vector_source(x), fixtures::test1(), cfg), DomainError);
  }

  TEST_CASE("msprt mean stopping time does not grow with gamma") {
    const auto set = fixtures::test1();
    double prev = 1e300;
    for (double g : {0.01, 0.1, 1.0, 10.0}) {
      TrialSetup s;
      s.msprt.gamma_threshold = g;
      const double n = accuracy(Method::msprt, set, s, 10000, 32).mean_periods;
      CHECK(n <= prev);
      prev = n;
    }
  }

  TEST_CASE("sweep_gamma") {
    const auto set = fixtures::test1();
    SweepOptions opt;
    opt.method = Method::msprt;
    opt.trials = 10000;
    opt.seed = 33;
    MsprtConfig cfg;

    const auto floor = sweep_gamma(set, 1.0 / 3.0, cfg, opt);
    CHECK(floor.reachable);
    CHECK(floor.steps == 1);
    CHECK(floor.gamma == opt.gamma_start);

    const auto r = sweep_gamma(set, 0.95, cfg, opt);
    REQUIRE(r.reachable);
    TrialSetup s;
    s.msprt.gamma_threshold = r.gamma;
    const auto check = accuracy(Method::msprt, set, s, 10000, 34);
    CHECK(check.pc >= 0.95 - r.ci_halfwidth - 3 * check.se());

    cfg.max_periods = 5;
    opt.trials = 2000;
    CHECK_FALSE(sweep_gamma(set, 0.999999, cfg, opt).reachable);
    CHECK_THROWS_AS(sweep_gamma(set, 1.5, cfg, opt), DomainError);
    opt.method = Method::mlc;
    CHECK_THROWS_AS(sweep_gamma(set, 0.9, cfg, opt), DomainError);
  }

  TEST_CASE("noisy mlc reduces to mlc for a tiny sampling period") {
    const auto set = fixtures::test1();
    std::size_t agree = 0;
    const std::size_t trials = 10000;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(35, t));
      const auto x = generate_periods(set.params()[t % 3], 10, rng);
      const auto y = inject_sampling_noise(x, 1e-6, rng);
      agree += mlc(x, set).chosen == mlc_noisy(y, set).chosen;
    }
    CHECK(static_cast<double>(agree) / trials >= 0.999);
  }

  TEST_CASE("noisy mlc accuracy does not grow with the sampling period") {
    const auto set = fixtures::test1();
    double prev = 1.0;
    for (double ts : {0.5, 1.0, 2.0, 4.0}) {
      TrialSetup s;
      s.n_periods = 10;
      s.sampling_period = ts;
      const auto e = accuracy(Method::mlc_noisy, set, s, 10000, 36);
      CHECK(e.pc <= prev + 2 * e.se());
      prev = e.pc;
    }
  }

  TEST_CASE("noisy classifiers accept negative estimates above -T_s") {
    const auto set = fixtures::test1();
    const double ts = 1.0;
    const auto d = mlc_noisy({{-ts / 2, 3.0, 1.5}, ts}, set);
    for (double s : d.log_scores) CHECK(std::isfinite(s));
    const auto p = set.params();
    const double expect0 = std::log(set.priors[0]) + std::log(noisy_gamma_pdf(-0.5, p[0], ts)) +
                           std::log(noisy_gamma_pdf(3.0, p[0], ts)) + std::log(noisy_gamma_pdf(1.5, p[0], ts));
    CHECK(d.log_scores[0] == doctest::Approx(expect0).epsilon(1e-12));
    CHECK_THROWS_AS(mlc_noisy({{-ts, 3.0}, ts}, set), DomainError);
    CHECK_THROWS_AS(mlc({{-0.5, 3.0}, PeriodKind::on}, set), DomainError);
  }

  TEST_CASE("mle_rate") {
    CHECK(mle_rate({{2.0, 2.0, 2.0}, PeriodKind::on}, 1.0) == doctest::Approx(0.5));
    // Under a wrong shape the inverse estimate tends to (a_j / a_k) / b_j.
    Rng rng(37);
    const GammaParams truth{2.0, 0.8};
    const auto x = generate_periods(truth, 100000, rng);
    const double inv = 1.0 / mle_rate(x, 0.5);
    CHECK(std::fabs(inv / ((2.0 / 0.5) / 0.8) - 1.0) < 0.01);
    // Variance of the inverse estimate at n = 1000.
    std::vector<double> v;
    for (int r = 0; r < 3000; ++r) v.push_back(1.0 / mle_rate(generate_periods(truth, 1000, rng), 0.5));
    double m = 0, s = 0;
    for (double e : v) m += e;
    m /= v.size();
    for (double e : v) s += (e - m) * (e - m);
    s /= (v.size() - 1);
    const double expected = truth.shape / (truth.rate * truth.rate) / (1000.0 * 0.25);
    CHECK(std::fabs(s / expected - 1.0) < 0.1);
    CHECK_THROWS_AS(mle_rate({{}, PeriodKind::on}, 1.0), DomainError);
  }

  TEST_CASE("etc mlc matches its analysis on Test II and trails perfect-parameter mlc on Test I") {
    TrialSetup s;
    s.n_periods = 100;
    const auto e = accuracy(Method::etc_mlc, fixtures::test2(), s, 10000, 38);
    CHECK(std::fabs(e.pc - analytical_pc_etc(fixtures::test2(), 100)) < 0.03);
    s.n_periods = 60;
    const auto etc = accuracy(Method::etc_mlc, fixtures::test1(), s, 10000, 39);
    const auto perfect = accuracy(Method::mlc, fixtures::test1(), s, 10000, 39);
    CHECK(etc.pc <= perfect.pc);
  }

  TEST_CASE("etc msprt") {
    const auto set = fixtures::test2();
    MsprtConfig cfg;
    cfg.gamma_threshold = 1e6;
    const std::vector<double> x{2.0, 3.0};
    const auto d = etc_msprt(vector_source(x), set, cfg);
    CHECK(d.periods_used == 1);
    CHECK(posterior_sum(d) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : d.posteriors) CHECK(std::isfinite(p));
  }

  TEST_CASE("etc msprt beats etc mlc on Test II at matched period counts") {
    const auto set = fixtures::test2();
    TrialSetup s;
    s.msprt.gamma_threshold = 0.1;
    const auto seq = accuracy(Method::etc_msprt, set, s, 10000, 40);
    const double fixed = accuracy_at(Method::etc_mlc, set, seq.mean_periods, 10000, 41);
    CHECK(seq.pc >= fixed);
  }

  TEST_CASE("alf with a collapsed prior agrees with mlc") {
    const auto fixed = fixtures::test1();
    std::vector<HypothesisModel> models;
    for (const auto& m : fixed.models) {
      const double b = m.params().rate;
      models.push_back(HypothesisModel::uniform(m.shape, b, b * (1 + 1e-9)));
    }
    const auto narrow = HypothesisSet::equiprobable(models);
    std::size_t agree = 0;
    const std::size_t trials = 10000;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(42, t));
      const auto x = generate_periods(fixed.params()[t % 3], 8, rng);
      agree += mlc(x, fixed).chosen == alf_mlc(x, narrow).chosen;
    }
    CHECK(static_cast<double>(agree) / trials >= 0.999);
  }

  TEST_CASE("method compatibility") {
    TrialSetup s;
    CHECK_THROWS_AS(check_compatible(Method::alf_mlc, fixtures::test1(), s), DomainError);
    CHECK_THROWS_AS(check_compatible(Method::mlc, fixtures::test1_fluct(), s), DomainError);
    CHECK_THROWS_AS(check_compatible(Method::mlc_noisy, fixtures::test1(), s), DomainError);
    CHECK_NOTHROW(check_compatible(Method::etc_mlc, fixtures::test1_fluct(), s));
    CHECK(method_from_string("msprt-noisy") == Method::msprt_noisy);
    CHECK_THROWS_AS(method_from_string("bayes"), DomainError);
    for (auto m : {Method::mlc, Method::msprt, Method::mlc_noisy, Method::msprt_noisy, Method::etc_mlc,
                   Method::etc_msprt, Method::alf_mlc, Method::alf_msprt}) {
      CHECK(method_from_string(to_string(m)) == m);
    }
  }
}

TEST_SUITE("properties") {
  TEST_CASE("log-domain scores stay finite over 10^4 periods") {
    for (auto set : {fixtures::test1(), fixtures::test2()}) {
      Rng rng(43);
      const auto x = generate_periods(set.params()[1], 10000, rng);
      for (const auto& d : {mlc(x, set), etc_mlc(x, set)}) {
        for (double s : d.log_scores) CHECK(std::isfinite(s));
        CHECK(posterior_sum(d) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(d.chosen == 1);
      }
    }
  }

  TEST_CASE("posteriors sum to one at every sequential step") {
    const auto set = fixtures::test1();
    Rng rng(44);
    const auto x = generate_periods(GammaParams{1, 0.4}, 200, rng).values;
    for (std::size_t k = 1; k <= x.size(); k += 7) {
      MsprtConfig cfg;
      cfg.gamma_threshold = 0.0;
      cfg.max_periods = k;
      for (const auto& d : {msprt(vector_source(x), set, cfg), etc_msprt(vector_source(x), set, cfg)}) {
        CHECK(std::fabs(posterior_sum(d) - 1.0) <= 1e-9);
      }
    }
  }

  TEST_CASE("msprt stopping time is monotone in gamma along a path") {
    const auto set = fixtures::test2();
    const double grid[] = {0.001, 0.01, 0.05, 0.1, 0.3, 1.0, 3.0};
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      Rng rng(seed);
      const auto x = generate_periods(set.params()[seed % 3], 2000, rng).values;
      std::size_t prev = 0;
      for (double g : grid) {
        MsprtConfig cfg;
        cfg.gamma_threshold = g;
        cfg.max_periods = 2000;
        const auto d = msprt(vector_source(x), set, cfg);
        if (g != grid[0]) CHECK(d.periods_used <= prev);
        prev = d.periods_used;
      }
    }
  }

  TEST_CASE("hypothesis draws follow the priors") {
    auto set = fixtures::test1();
    set.priors = {0.2, 0.3, 0.5};
    TrialSetup s;
    s.n_periods = 1;
    std::vector<double> counts(3, 0.0);
    const std::size_t trials = 100000;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(45, t));
      counts[simulate_trial(Method::mlc, set, s, rng).truth] += 1;
    }
    for (std::size_t j = 0; j < 3; ++j) {
      const double p = set.priors[j];
      CHECK(fixtures::within_3se(counts[j] / trials, p, std::sqrt(p * (1 - p) / trials)));
    }
  }
}
