#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mirage/analysis/analysis.hpp"
#include "mirage/errors.hpp"

using namespace mirage;
using namespace mirage::analysis;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("occupancy_stats against hand-computed values") {
  const std::vector<std::uint32_t> v = {2, 4, 4, 4, 5, 5, 7, 9};
  const OccupancyStats s = occupancy_stats(v);
  CHECK(s.buckets == 8);
  CHECK(s.total == 40);
  CHECK(s.mean == 5.0);
  // Sum of squared deviations 32, n - 1 = 7.
  CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)));
  CHECK(s.max == 9);
  CHECK(s.exceedance_count == 0);  // threshold 5 + 6 * sqrt(5) = 18.4

  std::vector<std::uint32_t> spike(100, 1);
  spike[3] = 8;  // mean 1.07, threshold ~7.27
  CHECK(occupancy_stats(spike).exceedance_count == 1);

  const OccupancyStats empty = occupancy_stats({});
  CHECK(empty.buckets == 0);
  CHECK(empty.mean == 0.0);
}

TEST_CASE("poisson_expectation") {
  const auto p = poisson_expectation(1'000'000, 16384);
  CHECK(p.mu == doctest::Approx(61.04).epsilon(1e-3));
  CHECK(p.sigma == doctest::Approx(7.81).epsilon(1e-3));
  CHECK(p.six_sigma_bound == doctest::Approx(107.9).epsilon(1e-3));
  // Direct formula to 1e-9 relative error.
  const double mu = 1e6 / 16384.0;
  CHECK(std::abs(p.mu - mu) / mu < 1e-9);
  CHECK(std::abs(p.sigma - std::sqrt(mu)) / std::sqrt(mu) < 1e-9);
  CHECK(std::abs(p.six_sigma_bound - (mu + 6 * std::sqrt(mu))) / p.six_sigma_bound < 1e-9);

  const auto zero = poisson_expectation(0, 10);
  CHECK(zero.mu == 0.0);
  CHECK(zero.sigma == 0.0);
  CHECK(zero.six_sigma_bound == 0.0);
  const auto single = poisson_expectation(49, 1);
  CHECK(single.mu == 49.0);
  CHECK(single.sigma == 7.0);
  CHECK_THROWS_AS(poisson_expectation(5, 0), ConfigError);
}

TEST_CASE("chi_square_uniform") {
  const std::vector<std::uint64_t> flat = {10, 10, 10, 10};
  CHECK(chi_square_uniform(flat).statistic == 0.0);
  CHECK(chi_square_uniform(flat).p_value == doctest::Approx(1.0));
  // Two cells 60/40: statistic (10^2 + 10^2) / 50 = 4, dof 1, p = 0.0455.
  const std::vector<std::uint64_t> skew = {60, 40};
  const ChiSquare r = chi_square_uniform(skew);
  CHECK(r.statistic == doctest::Approx(4.0));
  CHECK(r.dof == 1);
  CHECK(r.p_value == doctest::Approx(0.0455).epsilon(0.01));
}

TEST_CASE("linear_fit against the closed-form least-squares solution") {
  const std::vector<double> x = {9, 10, 11, 12, 13, 14};
  const std::vector<double> y = {223e3, 257e3, 290e3, 323e3, 356e3, 388e3};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const LinearFit f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(sxy / sxx));
  CHECK(f.intercept == doctest::Approx(my - sxy / sxx * mx));
  CHECK(f.r_squared == doctest::Approx(sxy * sxy / (sxx * syy)));

  const std::vector<double> exp_y = {1, 10, 100, 1000, 10000, 100000};
  CHECK(linear_fit(x, exp_y).r_squared < 0.9);

  const std::vector<double> one = {1};
  const std::vector<double> same_x = {3, 3, 3};
  CHECK_THROWS_AS(linear_fit(one, one), ConfigError);
  CHECK_THROWS_AS(linear_fit(same_x, same_x), ConfigError);
}

TEST_CASE("ks_statistic") {
  const std::vector<std::uint32_t> a = {1, 2, 3, 4};
  const std::vector<std::uint32_t> b = {3, 4, 5, 6};
  CHECK(ks_statistic(a, a) == 0.0);
  CHECK(ks_statistic(a, b) == doctest::Approx(0.5));
  const std::vector<std::uint32_t> c = {1, 1, 1, 1};
  const std::vector<std::uint32_t> d = {2, 2, 2, 2};
  CHECK(ks_statistic(c, d) == doctest::Approx(1.0));
}

TEST_CASE("BugCompat parsing") {
  BugCompat bc;
  CHECK_FALSE(bc.any());
  bc.enable("buggy-present");
  bc.enable("no-global-evict");
  CHECK(bc.names() == std::vector<std::string>{"no-global-evict", "buggy-present"});
  CHECK_FALSE(bc.all());
  bc.enable("bernoulli-init");
  CHECK(bc.all());
  CHECK_THROWS_AS(bc.enable("everything"), ConfigError);
}

TEST_CASE("uniformity experiment: correct ciphers are Poisson-like, the defective one is not") {
  using K = ciphers::BlockCipherKind;
  for (K k : {K::kAes128, K::kPrince64, K::kPresent80}) {
    CAPTURE(ciphers::to_string(k));
    const auto r = uniformity_experiment(k, 200'000, 4096, 3, ciphers::CipherPolicy::kStandardOnly);
    CHECK(r.stats.total == 200'000);
    const double sigma = std::sqrt(200'000.0 / 4096);
    CHECK(r.stats.stddev > 0.85 * sigma);
    CHECK(r.stats.stddev < 1.15 * sigma);
    CHECK(r.stats.exceedance_count == 0);
  }
  const auto bad = uniformity_experiment(K::kBuggyPresent80, 200'000, 4096, 3,
                                         ciphers::CipherPolicy::kAllowBuggyPresent);
  CHECK(bad.stats.total == 200'000);
  CHECK(bad.stats.stddev > 2 * std::sqrt(200'000.0 / 4096));

  const std::vector<UniformityResult> results = {bad};
  std::ostringstream stats, hist;
  write_uniformity_stats_csv(stats, results);
  write_uniformity_histogram_csv(hist, results);
  const auto s = lines(stats.str());
  CHECK(s[0] == "cipher,n_addresses,num_sets,mean,stddev,max,exceedance_count,poisson_sigma,six_sigma_bound");
  CHECK(s[1].rfind("buggy-present80,200000,4096,", 0) == 0);
  const auto h = lines(hist.str());
  CHECK(h[0] == "cipher,set_index,count");
  CHECK(h.size() == 4097);
}

TEST_CASE("fig6 experiment runs both modes and is reproducible") {
  Fig6Spec spec;
  spec.base.buckets_per_skew = 256;
  spec.base.max_throws = 20'000;
  spec.bug_compat_max_throws = 20'000;
  spec.correct_ways = {9, 10};
  spec.bug_compat_ways = {9, 10, 11};
  spec.trials = 3;
  const Fig6Result a = fig6_experiment(spec);
  spec.threads = 2;
  const Fig6Result b = fig6_experiment(spec);
  std::ostringstream ca, cb, ma;
  write_fig6_csv(ca, a);
  write_fig6_csv(cb, b);
  write_fig6_medians_csv(ma, a);
  CHECK(ca.str() == cb.str());
  const auto rows = lines(ca.str());
  CHECK(rows[0] == "mode,ways,trial,seed,spilled,throws_before_spill,capacity_violation");
  CHECK(rows.size() == 1 + 6 + 9);
  CHECK(rows[1].rfind("correct,9,0,", 0) == 0);
  CHECK(rows.back().rfind("bug_compat,11,2,", 0) == 0);
  const auto med = lines(ma.str());
  CHECK(med[0] == "mode,ways,trials,spilled_trials,median_throws_before_spill");
  CHECK(med.size() == 1 + 2 + 3);
  // Different seed streams per mode.
  CHECK(a.correct.rows[0].seed != a.bug_compat.rows[0].seed);
}

TEST_CASE("fig7 experiment: correct mode sees no SAE, full bug-compat does") {
  Fig7Spec spec;
  spec.cache_bytes = {256u << 10, 512u << 10};
  spec.trials = 2;
  spec.max_references = 100'000;
  spec.base.cipher = ciphers::BlockCipherKind::kPrince64;
  const auto correct = fig7_experiment(spec);
  REQUIRE(correct.size() == 4);
  for (const auto& r : correct) {
    CHECK_FALSE(r.first_sae.has_value());
    CHECK(r.references == spec.max_references);
    CHECK_FALSE(r.capacity_violation_index.has_value());
  }
  CHECK(correct[0].capacity_lines == 4096);
  CHECK(correct[2].capacity_lines == 8192);

  spec.bug_compat = {true, true, true};
  const auto buggy = fig7_experiment(spec);
  for (const auto& r : buggy) {
    CHECK(r.first_sae.has_value());
    CHECK(r.capacity_violation_index.has_value());
  }
  // Larger cache survives longer.
  CHECK(*buggy[2].first_sae + *buggy[3].first_sae > *buggy[0].first_sae + *buggy[1].first_sae);

  std::ostringstream a, b;
  write_fig7_csv(a, buggy);
  write_fig7_csv(b, fig7_experiment(spec));
  CHECK(a.str() == b.str());
  const auto rows = lines(a.str());
  CHECK(rows[0] == "cache_size,capacity_lines,trial,seed,sae_observed,refs_before_first_sae,capacity_violation_index");
  CHECK(rows[1].rfind("262144,4096,0,", 0) == 0);

  std::ostringstream censored;
  write_fig7_csv(censored, correct);
  const auto c = lines(censored.str());
  CHECK(c[1].substr(c[1].size() - 10) == ",0,100000,");

  spec.cache_bytes.clear();
  CHECK_THROWS_AS(fig7_experiment(spec), ConfigError);
}

TEST_CASE("init-occupancy experiment at reduced geometry") {
  InitOccupancySpec spec;
  spec.base.sets_per_skew = 1024;
  spec.base.data_store_capacity = 16384;
  spec.base.cipher = ciphers::BlockCipherKind::kPrince64;
  spec.trials = 4;
  const auto r = init_occupancy_experiment(spec);
  REQUIRE(r.trials.size() == 4);
  REQUIRE(r.buggy_histogram.size() == 2048);
  REQUIRE(r.correct_histogram.size() == 2048);
  CHECK(std::accumulate(r.buggy_histogram.begin(), r.buggy_histogram.end(), std::uint64_t{0}) ==
        r.trials[0].buggy_valid);
  CHECK(std::accumulate(r.correct_histogram.begin(), r.correct_histogram.end(), std::uint64_t{0}) ==
        r.trials[0].correct_valid);
  for (const auto& t : r.trials) {
    CHECK(t.correct_valid == 16384);
    CHECK(t.correct_full_sets == 0);
    CHECK(t.buggy_max <= 14);
  }
  CHECK(r.total_correct_full_sets() == 0);

  std::ostringstream trials, hist;
  write_init_trials_csv(trials, r);
  write_occupancy_histogram_csv(hist, r.buggy_histogram, r.sets_per_skew);
  CHECK(lines(trials.str())[0] ==
        "trial,seed,buggy_valid,buggy_full_sets,buggy_max,correct_valid,correct_full_sets,correct_max");
  const auto h = lines(hist.str());
  CHECK(h[0] == "set_index,skew,valid_count");
  CHECK(h[1].rfind("0,0,", 0) == 0);
  CHECK(h[1025].rfind("0,1,", 0) == 0);
}

TEST_CASE("outcome log writer") {
  std::ostringstream out;
  OutcomeLogWriter w(out);
  cache::InstallOutcome o;
  o.kind = cache::OutcomeKind::kMissWithGlobalEviction;
  w(0, o, 0);
  CHECK(out.str() == "reference_index,outcome_kind,sae_cumulative\n0,miss_global_eviction,0\n");
}

TEST_CASE("manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "mirage_manifest_test";
  std::filesystem::create_directories(dir);
  RunManifest m;
  m.subcommand = "fig7";
  m.seed = 5;
  m.bug_compat.enable("buggy-present");
  m.outputs = {"fig7.csv"};
  write_manifest(dir / "manifest.json", m);
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["subcommand"] == "fig7");
  CHECK(j["seed"] == 5);
  CHECK(j["bug_compat"]["enabled"] == true);
  CHECK(j["bug_compat"]["modes"][0] == "buggy-present");
  CHECK(j["git_revision"].is_string());
  CHECK_THROWS(write_manifest(dir / "missing" / "x" / "manifest.json", m));
  std::filesystem::remove_all(dir);
}
