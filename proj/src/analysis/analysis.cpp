#include "mirage/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/statistics/linear_regression.hpp>

#include "mirage/ciphers/index_derivation.hpp"
#include "mirage/errors.hpp"
#include "mirage/parallel.hpp"
#include "mirage/rng.hpp"

#ifndef MIRAGE_GIT_REVISION
#define MIRAGE_GIT_REVISION "unknown"
#endif

namespace mirage::analysis {

OccupancyStats occupancy_stats(std::span<const std::uint32_t> counts) {
  OccupancyStats s;
  s.buckets = counts.size();
  if (counts.empty()) return s;
  s.total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  s.mean = static_cast<double>(s.total) / static_cast<double>(s.buckets);
  s.max = *std::max_element(counts.begin(), counts.end());
  if (s.buckets > 1) {
    double ss = 0.0;
    for (std::uint32_t c : counts) ss += (c - s.mean) * (c - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.buckets - 1));
  }
  const double threshold = s.mean + 6.0 * std::sqrt(s.mean);
  s.exceedance_count = static_cast<std::uint64_t>(
      std::count_if(counts.begin(), counts.end(), [&](std::uint32_t c) { return c > threshold; }));
  return s;
}

PoissonExpectation poisson_expectation(std::uint64_t total_balls, std::uint64_t num_buckets) {
  if (num_buckets == 0) throw ConfigError("poisson_expectation: num_buckets must be positive");
  PoissonExpectation p;
  p.mu = static_cast<double>(total_balls) / static_cast<double>(num_buckets);
  p.sigma = std::sqrt(p.mu);
  p.six_sigma_bound = p.mu + 6.0 * p.sigma;
  return p;
}

ChiSquare chi_square_uniform(std::span<const std::uint64_t> counts) {
  ChiSquare r;
  if (counts.size() < 2) return r;
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total == 0.0) return r;
  const double expected = total / static_cast<double>(counts.size());
  for (std::uint64_t c : counts) r.statistic += (c - expected) * (c - expected) / expected;
  r.dof = counts.size() - 1;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("linear_fit needs two equally sized samples of at least 2 points");
  }
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    throw ConfigError("linear_fit needs at least two distinct x values");
  }
  const std::vector<double> xv(x.begin(), x.end()), yv(y.begin(), y.end());
  auto [c0, c1, r2] =
      boost::math::statistics::simple_ordinary_least_squares_with_R_squared(xv, yv);
  return {c0, c1, r2};
}

double ks_statistic(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<std::uint32_t> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() || j < sb.size()) {
    // Step past every copy of the next value in either sample.
    const std::uint32_t v = (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    const double fa = static_cast<double>(i) / sa.size();
    const double fb = static_cast<double>(j) / sb.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

std::vector<std::string> BugCompat::names() const {
  std::vector<std::string> out;
  if (no_global_evict) out.emplace_back("no-global-evict");
  if (bernoulli_init) out.emplace_back("bernoulli-init");
  if (buggy_present) out.emplace_back("buggy-present");
  return out;
}

void BugCompat::enable(std::string_view name) {
  if (name == "no-global-evict") {
    no_global_evict = true;
  } else if (name == "bernoulli-init") {
    bernoulli_init = true;
  } else if (name == "buggy-present") {
    buggy_present = true;
  } else {
    throw ConfigError("unknown bug-compat mode '" + std::string(name) +
                      "' (expected no-global-evict, bernoulli-init or buggy-present)");
  }
}

// ---- uniformity ---------------------------------------------------------

UniformityResult uniformity_experiment(ciphers::BlockCipherKind cipher, std::uint64_t n_addresses,
                                       std::uint32_t num_sets, std::uint64_t seed,
                                       ciphers::CipherPolicy policy) {
  const auto index = ciphers::IndexDerivation::with_random_keys(cipher, num_sets,
                                                                derive_seed(seed, 0), policy);
  UniformityResult r;
  r.cipher = cipher;
  r.n_addresses = n_addresses;
  r.histogram.assign(num_sets, 0);
  Xoshiro256 addresses(derive_seed(seed, 1));
  for (std::uint64_t i = 0; i < n_addresses; ++i) ++r.histogram[index.set_index(0, addresses())];
  r.stats = occupancy_stats(r.histogram);
  return r;
}

void write_uniformity_stats_csv(std::ostream& out, std::span<const UniformityResult> results) {
  out << "cipher,n_addresses,num_sets,mean,stddev,max,exceedance_count,poisson_sigma,"
         "six_sigma_bound\n";
  for (const auto& r : results) {
    const auto p = poisson_expectation(r.n_addresses, r.histogram.size());
    out << ciphers::to_string(r.cipher) << ',' << r.n_addresses << ',' << r.histogram.size() << ','
        << std::fixed << std::setprecision(6) << r.stats.mean << ',' << r.stats.stddev << ','
        << r.stats.max << ',' << r.stats.exceedance_count << ',' << p.sigma << ','
        << p.six_sigma_bound << '\n';
    out.unsetf(std::ios::floatfield);
  }
}

void write_uniformity_histogram_csv(std::ostream& out, std::span<const UniformityResult> results) {
  out << "cipher,set_index,count\n";
  for (const auto& r : results) {
    const std::string_view name = ciphers::to_string(r.cipher);
    for (std::size_t i = 0; i < r.histogram.size(); ++i) {
      out << name << ',' << i << ',' << r.histogram[i] << '\n';
    }
  }
}

// ---- fig6 ---------------------------------------------------------------

namespace {
constexpr std::uint64_t kBugCompatStream = 0xB6;
}

Fig6Result fig6_experiment(const Fig6Spec& spec) {
  Fig6Result r;
  bnb::BnbConfig correct = spec.base;
  correct.remove_ball_enabled = true;
  correct.validate();
  r.correct = bnb::bnb_sweep(spec.correct_ways, spec.trials, correct, spec.threads);

  bnb::BnbConfig buggy = spec.base;
  buggy.remove_ball_enabled = false;
  buggy.max_throws = spec.bug_compat_max_throws;
  buggy.rng_seed = derive_seed(spec.base.rng_seed, kBugCompatStream);
  buggy.validate();
  r.bug_compat = bnb::bnb_sweep(spec.bug_compat_ways, spec.trials, buggy, spec.threads);
  return r;
}

void write_fig6_csv(std::ostream& out, const Fig6Result& result) {
  out << "mode,ways,trial,seed,spilled,throws_before_spill,capacity_violation\n";
  auto rows = [&](const char* mode, const bnb::SweepTable& t) {
    for (const auto& r : t.rows) {
      out << mode << ',' << r.ways << ',' << r.trial << ',' << r.seed << ','
          << (r.result.spilled ? 1 : 0) << ',' << r.result.throws_before_spill << ','
          << (r.result.capacity_violation ? 1 : 0) << '\n';
    }
  };
  rows("correct", result.correct);
  rows("bug_compat", result.bug_compat);
}

void write_fig6_medians_csv(std::ostream& out, const Fig6Result& result) {
  out << "mode,ways,trials,spilled_trials,median_throws_before_spill\n";
  auto rows = [&](const char* mode, const bnb::SweepTable& t) {
    for (std::uint32_t w : t.ways()) {
      const auto n = std::count_if(t.rows.begin(), t.rows.end(),
                                   [&](const bnb::SweepRow& r) { return r.ways == w; });
      out << mode << ',' << w << ',' << n << ',' << t.spilled_trials(w) << ',' << std::fixed
          << std::setprecision(1) << t.median_throws(w) << '\n';
      out.unsetf(std::ios::floatfield);
    }
  };
  rows("correct", result.correct);
  rows("bug_compat", result.bug_compat);
}

// ---- fig7 ---------------------------------------------------------------

std::vector<Fig7Row> fig7_experiment(const Fig7Spec& spec) {
  if (spec.cache_bytes.empty()) throw ConfigError("fig7 needs at least one cache size");
  const BugCompat& bc = spec.bug_compat;

  std::vector<cache::CacheConfig> configs;
  for (std::uint64_t bytes : spec.cache_bytes) {
    cache::CacheConfig c = cache::CacheConfig::for_capacity_bytes(bytes, spec.base);
    if (bc.buggy_present) {
      c.cipher = ciphers::BlockCipherKind::kBuggyPresent80;
      c.allow_buggy_present = true;
    }
    c.allow_bernoulli_init = bc.bernoulli_init;
    if (bc.no_global_evict) {
      c.global_evictions_enabled = false;
      // Keep going past a full data store so the SAE regime is observable.
      c.enforce_capacity = false;
    }
    c.validate();
    configs.push_back(c);
  }

  std::vector<Fig7Row> rows(configs.size() * spec.trials);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (std::uint32_t t = 0; t < spec.trials; ++t) {
      Fig7Row& r = rows[i * spec.trials + t];
      r.cache_bytes = spec.cache_bytes[i];
      r.capacity_lines = configs[i].data_store_capacity;
      r.trial = t;
      r.seed = derive_seed(spec.seed, i * spec.trials + t);
    }
  }

  parallel_for(rows.size(), spec.threads, [&](std::size_t k) {
    Fig7Row& r = rows[k];
    cache::CacheConfig c = configs[k / spec.trials];
    c.rng_seed = r.seed;
    cache::MirageCache cache(c);
    if (bc.bernoulli_init) {
      r.detached_tags_at_init = cache.init_buggy_bernoulli(0.5);
    } else {
      cache.init_valid(c.data_store_capacity, derive_seed(r.seed, 2));
    }
    cache::RunOptions opt;
    opt.address_seed = derive_seed(r.seed, 3);
    opt.stop_at_first_sae = true;
    const auto log = cache.run_references(spec.max_references, opt);
    r.references = log.references;
    r.first_sae = log.first_sae_index;
    r.capacity_violation_index = log.capacity_violation_index;
  });
  return rows;
}

void write_fig7_csv(std::ostream& out, std::span<const Fig7Row> rows) {
  out << "cache_size,capacity_lines,trial,seed,sae_observed,refs_before_first_sae,"
         "capacity_violation_index\n";
  for (const auto& r : rows) {
    out << r.cache_bytes << ',' << r.capacity_lines << ',' << r.trial << ',' << r.seed << ','
        << (r.first_sae ? 1 : 0) << ',' << (r.first_sae ? *r.first_sae : r.references) << ',';
    if (r.capacity_violation_index) out << *r.capacity_violation_index;
    out << '\n';
  }
}

// ---- init occupancy -----------------------------------------------------

double InitOccupancyResult::mean_buggy_full_sets() const {
  if (trials.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : trials) sum += static_cast<double>(t.buggy_full_sets);
  return sum / static_cast<double>(trials.size());
}

std::uint64_t InitOccupancyResult::total_correct_full_sets() const {
  std::uint64_t sum = 0;
  for (const auto& t : trials) sum += t.correct_full_sets;
  return sum;
}

InitOccupancyResult init_occupancy_experiment(const InitOccupancySpec& spec) {
  spec.base.validate();
  const std::uint32_t ways = spec.base.ways_per_skew();
  InitOccupancyResult result;
  result.sets_per_skew = spec.base.sets_per_skew;
  result.trials.resize(spec.trials);

  auto summarize = [&](const std::vector<std::uint32_t>& h, std::uint64_t& full,
                       std::uint32_t& max) {
    full = static_cast<std::uint64_t>(std::count(h.begin(), h.end(), ways));
    max = h.empty() ? 0 : *std::max_element(h.begin(), h.end());
  };

  parallel_for(spec.trials, spec.threads, [&](std::size_t k) {
    InitOccupancyTrial& t = result.trials[k];
    t.trial = static_cast<std::uint32_t>(k);
    t.seed = derive_seed(spec.seed, k);

    cache::CacheConfig buggy = spec.base;
    buggy.allow_bernoulli_init = true;
    buggy.rng_seed = t.seed;
    cache::MirageCache b(buggy);
    b.init_buggy_bernoulli(spec.p);
    const auto bh = b.occupancy_histogram();
    t.buggy_valid = b.valid_tags();
    summarize(bh, t.buggy_full_sets, t.buggy_max);

    cache::CacheConfig correct = spec.base;
    correct.rng_seed = derive_seed(t.seed, 1);
    cache::MirageCache c(correct);
    c.init_valid(correct.data_store_capacity, derive_seed(t.seed, 2));
    const auto ch = c.occupancy_histogram();
    t.correct_valid = c.valid_tags();
    summarize(ch, t.correct_full_sets, t.correct_max);

    if (k == 0) {
      result.buggy_histogram = bh;
      result.correct_histogram = ch;
    }
  });
  return result;
}

void write_init_trials_csv(std::ostream& out, const InitOccupancyResult& result) {
  out << "trial,seed,buggy_valid,buggy_full_sets,buggy_max,correct_valid,correct_full_sets,"
         "correct_max\n";
  for (const auto& t : result.trials) {
    out << t.trial << ',' << t.seed << ',' << t.buggy_valid << ',' << t.buggy_full_sets << ','
        << t.buggy_max << ',' << t.correct_valid << ',' << t.correct_full_sets << ','
        << t.correct_max << '\n';
  }
}

void write_occupancy_histogram_csv(std::ostream& out, std::span<const std::uint32_t> histogram,
                                   std::uint32_t sets_per_skew) {
  out << "set_index,skew,valid_count\n";
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    out << i % sets_per_skew << ',' << i / sets_per_skew << ',' << histogram[i] << '\n';
  }
}

OutcomeLogWriter::OutcomeLogWriter(std::ostream& out) : out_(&out) {
  *out_ << "reference_index,outcome_kind,sae_cumulative\n";
}

void OutcomeLogWriter::operator()(std::uint64_t index, const cache::InstallOutcome& outcome,
                                  std::uint64_t sae_cumulative) {
  *out_ << index << ',' << cache::to_string(outcome.kind) << ',' << sae_cumulative << '\n';
}

// ---- manifest -----------------------------------------------------------

std::string git_revision() { return MIRAGE_GIT_REVISION; }

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["format"] = "mirage-run-manifest";
  j["version"] = 1;
  j["subcommand"] = m.subcommand;
  j["argv"] = m.argv;
  j["seed"] = m.seed;
  j["bug_compat"] = {{"enabled", m.bug_compat.any()}, {"modes", m.bug_compat.names()}};
  j["parameters"] = m.parameters;
  j["outputs"] = m.outputs;
  j["git_revision"] = git_revision();
  j["wall_time_seconds"] = m.wall_time_seconds;
  j["exit_code"] = m.exit_code;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace mirage::analysis
