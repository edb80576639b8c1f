#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirage/bnb/bnb.hpp"
#include "mirage/cache/mirage_cache.hpp"
#include "mirage/ciphers/cipher_kind.hpp"

namespace mirage::analysis {

// ---- statistics ---------------------------------------------------------

struct OccupancyStats {
  std::uint64_t buckets = 0;
  std::uint64_t total = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation
  std::uint32_t max = 0;
  // Buckets strictly above mean + 6 * sqrt(mean).
  std::uint64_t exceedance_count = 0;
};

OccupancyStats occupancy_stats(std::span<const std::uint32_t> counts);

struct PoissonExpectation {
  double mu = 0.0;
  double sigma = 0.0;
  double six_sigma_bound = 0.0;
};

// Throws ConfigError when num_buckets == 0.
PoissonExpectation poisson_expectation(std::uint64_t total_balls, std::uint64_t num_buckets);

struct ChiSquare {
  double statistic = 0.0;
  std::uint64_t dof = 0;
  double p_value = 1.0;
};

// Goodness of fit of `counts` against equal expected counts.
ChiSquare chi_square_uniform(std::span<const std::uint64_t> counts);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};

// Least-squares y = intercept + slope * x. Needs >= 2 distinct x values.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| over integer data.
double ks_statistic(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// ---- bug-compat selection ----------------------------------------------

struct BugCompat {
  bool no_global_evict = false;
  bool bernoulli_init = false;
  bool buggy_present = false;

  bool any() const { return no_global_evict || bernoulli_init || buggy_present; }
  bool all() const { return no_global_evict && bernoulli_init && buggy_present; }
  // Flag spellings as accepted on the command line, in a fixed order.
  std::vector<std::string> names() const;
  // Accepts "no-global-evict", "bernoulli-init", "buggy-present".
  void enable(std::string_view name);
};

// ---- experiments --------------------------------------------------------

struct UniformityResult {
  ciphers::BlockCipherKind cipher{};
  std::uint64_t n_addresses = 0;
  std::vector<std::uint32_t> histogram;  // per set, skew 0
  OccupancyStats stats;
};

// Keys come from derive_seed(seed, 0), addresses from derive_seed(seed, 1).
UniformityResult uniformity_experiment(ciphers::BlockCipherKind cipher, std::uint64_t n_addresses,
                                       std::uint32_t num_sets, std::uint64_t seed,
                                       ciphers::CipherPolicy policy);

// Columns: cipher,n_addresses,num_sets,mean,stddev,max,exceedance_count,poisson_sigma,six_sigma_bound
void write_uniformity_stats_csv(std::ostream& out, std::span<const UniformityResult> results);
// Columns: cipher,set_index,count
void write_uniformity_histogram_csv(std::ostream& out, std::span<const UniformityResult> results);

struct Fig6Spec {
  bnb::BnbConfig base;  // remove_ball_enabled is set per mode
  std::vector<std::uint32_t> correct_ways{9, 10, 11, 12, 13, 14};
  std::vector<std::uint32_t> bug_compat_ways{9, 10, 11, 12, 13, 14};
  std::uint32_t trials = 30;
  // Steady-state budget in bug-compat mode, where spills come early.
  std::uint64_t bug_compat_max_throws = 100'000'000;
  unsigned threads = 1;
};

struct Fig6Result {
  bnb::SweepTable correct;
  bnb::SweepTable bug_compat;
};

// Both sweeps use base.rng_seed; bug-compat trial seeds are offset so the two
// modes never share a stream.
Fig6Result fig6_experiment(const Fig6Spec& spec);

// Columns: mode,ways,trial,seed,spilled,throws_before_spill,capacity_violation
void write_fig6_csv(std::ostream& out, const Fig6Result& result);
// Columns: mode,ways,trials,spilled_trials,median_throws_before_spill
void write_fig6_medians_csv(std::ostream& out, const Fig6Result& result);

struct Fig7Spec {
  cache::CacheConfig base;  // way split and cipher; geometry comes from cache_bytes
  std::vector<std::uint64_t> cache_bytes{1u << 20, 2u << 20, 4u << 20, 8u << 20, 16u << 20};
  std::uint32_t trials = 5;
  std::uint64_t max_references = 100'000'000;
  BugCompat bug_compat;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct Fig7Row {
  std::uint64_t cache_bytes = 0;
  std::uint64_t capacity_lines = 0;
  std::uint32_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t references = 0;  // references performed
  std::optional<std::uint64_t> first_sae;
  std::optional<std::uint64_t> capacity_violation_index;
  std::uint64_t detached_tags_at_init = 0;
};

// Per (size, trial): build the cache, initialize it (init_valid to capacity,
// or Bernoulli p = 0.5 under bernoulli-init), then issue random references
// until the first SAE or max_references.
std::vector<Fig7Row> fig7_experiment(const Fig7Spec& spec);

// Columns: cache_size,capacity_lines,trial,seed,sae_observed,refs_before_first_sae,
//          capacity_violation_index
// refs_before_first_sae is the budget for censored (no SAE) rows.
void write_fig7_csv(std::ostream& out, std::span<const Fig7Row> rows);

struct InitOccupancySpec {
  cache::CacheConfig base;
  std::uint32_t trials = 100;
  double p = 0.5;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct InitOccupancyTrial {
  std::uint32_t trial = 0;
  std::uint64_t seed = 0;
  std::uint64_t buggy_valid = 0;
  std::uint64_t buggy_full_sets = 0;
  std::uint32_t buggy_max = 0;
  std::uint64_t correct_valid = 0;
  std::uint64_t correct_full_sets = 0;
  std::uint32_t correct_max = 0;
};

struct InitOccupancyResult {
  std::vector<InitOccupancyTrial> trials;
  // Per-set histograms of trial 0.
  std::vector<std::uint32_t> buggy_histogram;
  std::vector<std::uint32_t> correct_histogram;
  std::uint32_t sets_per_skew = 0;

  double mean_buggy_full_sets() const;
  std::uint64_t total_correct_full_sets() const;
};

InitOccupancyResult init_occupancy_experiment(const InitOccupancySpec& spec);

// Columns: trial,seed,buggy_valid,buggy_full_sets,buggy_max,correct_valid,correct_full_sets,correct_max
void write_init_trials_csv(std::ostream& out, const InitOccupancyResult& result);

// Columns: set_index,skew,valid_count (both skews, skew 0 first)
void write_occupancy_histogram_csv(std::ostream& out, std::span<const std::uint32_t> histogram,
                                   std::uint32_t sets_per_skew);

// Columns: reference_index,outcome_kind,sae_cumulative
class OutcomeLogWriter {
 public:
  explicit OutcomeLogWriter(std::ostream& out);
  void operator()(std::uint64_t index, const cache::InstallOutcome& outcome,
                  std::uint64_t sae_cumulative);

 private:
  std::ostream* out_;
};

// ---- run manifest -------------------------------------------------------

struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  BugCompat bug_compat;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> outputs;
  double wall_time_seconds = 0.0;
  int exit_code = 0;
};

std::string git_revision();

// Throws std::runtime_error on I/O failure.
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace mirage::analysis
