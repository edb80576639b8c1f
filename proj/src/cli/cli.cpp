#include "mirage/cli/cli.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mirage/analysis/analysis.hpp"
#include "mirage/bnb/bnb.hpp"
#include "mirage/cache/mirage_cache.hpp"
#include "mirage/ciphers/known_answer.hpp"
#include "mirage/errors.hpp"
#include "mirage/parallel.hpp"

namespace mirage::cli {
namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t parse_count(std::string_view text) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec == std::errc{} && end == text.data() + text.size()) return v;

  double d = 0.0;
  auto [dend, dec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (text.empty() || dec != std::errc{} || dend != text.data() + text.size()) {
    throw ConfigError("not a count: '" + std::string(text) + "'");
  }
  if (d < 0.0 || d != std::floor(d) || d >= 0x1p64) {
    throw ConfigError("count must be a non-negative integer: '" + std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::uint64_t parse_size_bytes(std::string_view text) {
  std::size_t digits = 0;
  while (digits < text.size() && (std::isdigit(static_cast<unsigned char>(text[digits])) ||
                                  text[digits] == '.' || text[digits] == 'e')) {
    ++digits;
  }
  std::string unit(text.substr(digits));
  for (char& c : unit) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::uint64_t shift = 0;
  if (unit.empty() || unit == "B") {
    shift = 0;
  } else if (unit == "K" || unit == "KB" || unit == "KIB") {
    shift = 10;
  } else if (unit == "M" || unit == "MB" || unit == "MIB") {
    shift = 20;
  } else if (unit == "G" || unit == "GB" || unit == "GIB") {
    shift = 30;
  } else {
    throw ConfigError("unknown size unit in '" + std::string(text) + "'");
  }
  const std::uint64_t n = parse_count(text.substr(0, digits));
  if (n > (~std::uint64_t{0} >> shift)) throw ConfigError("size too large: " + std::string(text));
  return n << shift;
}

namespace {

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rewrites "1e8"-style input to plain digits before CLI11 converts it.
CLI::Validator count_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          s = std::to_string(parse_count(s));
          return {};
        } catch (const ConfigError& e) {
          return e.what();
        }
      },
      "COUNT");
}

CLI::Validator size_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        try {
          s = std::to_string(parse_size_bytes(s));
          return {};
        } catch (const ConfigError& e) {
          return e.what();
        }
      },
      "SIZE");
}

struct Common {
  std::uint64_t seed = 1;
  std::string out_dir;
  std::uint32_t trials = 0;  // 0: per-subcommand default
  unsigned threads = default_threads();
  bool full_scale = false;
  std::vector<std::string> bug_compat_names;
  analysis::BugCompat bug_compat;

  std::uint32_t trials_or(std::uint32_t normal, std::uint32_t full) const {
    return trials != 0 ? trials : (full_scale ? full : normal);
  }
};

struct Geometry {
  std::uint32_t sets_per_skew = 16384;
  std::uint32_t base_ways = 8;
  std::uint32_t extra_ways = 6;
  std::uint64_t capacity = 0;  // 0: 2 * sets_per_skew * base_ways
  std::string cipher = "aes128";

  cache::CacheConfig to_config(const analysis::BugCompat& bc, std::uint64_t seed) const {
    cache::CacheConfig c;
    c.sets_per_skew = sets_per_skew;
    c.base_ways_per_skew = base_ways;
    c.extra_ways_per_skew = extra_ways;
    c.data_store_capacity = capacity != 0
                                ? capacity
                                : std::uint64_t{cache::CacheConfig::kSkews} * sets_per_skew * base_ways;
    c.cipher = parse_cipher(cipher);
    if (bc.buggy_present) {
      c.cipher = ciphers::BlockCipherKind::kBuggyPresent80;
      c.allow_buggy_present = true;
    }
    c.global_evictions_enabled = !bc.no_global_evict;
    c.allow_bernoulli_init = bc.bernoulli_init;
    c.rng_seed = seed;
    c.validate();
    return c;
  }

  static ciphers::BlockCipherKind parse_cipher(const std::string& name) {
    const auto kind = ciphers::parse_cipher_kind(name);
    if (!kind) throw ConfigError("unknown cipher '" + name + "'");
    if (*kind == ciphers::BlockCipherKind::kBuggyPresent80) {
      throw ConfigError("select the defective PRESENT with --bug-compat=buggy-present");
    }
    return *kind;
  }
};

json config_json(const cache::CacheConfig& c) {
  return {{"sets_per_skew", c.sets_per_skew},
          {"base_ways_per_skew", c.base_ways_per_skew},
          {"extra_ways_per_skew", c.extra_ways_per_skew},
          {"data_store_capacity", c.data_store_capacity},
          {"cipher", std::string(ciphers::to_string(c.cipher))},
          {"global_evictions_enabled", c.global_evictions_enabled},
          {"enforce_capacity", c.enforce_capacity},
          {"allow_buggy_present", c.allow_buggy_present},
          {"allow_bernoulli_init", c.allow_bernoulli_init},
          {"rng_seed", c.rng_seed}};
}

json config_json(const bnb::BnbConfig& c) {
  return {{"buckets_per_skew", c.buckets_per_skew},
          {"capacity_per_bucket", c.capacity_per_bucket},
          {"average_load", c.average_load},
          {"max_throws", c.max_throws},
          {"remove_ball_enabled", c.remove_ball_enabled},
          {"rng_seed", c.rng_seed}};
}

void reject_bug_compat(const Common& common, const char* subcommand) {
  if (common.bug_compat.any()) {
    throw ConfigError(std::string("--bug-compat does not apply to '") + subcommand + "'");
  }
}

// Owns the output directory and the manifest for one run.
class RunDir {
 public:
  RunDir(const Common& common, std::string subcommand, const std::vector<std::string>& argv)
      : dir_(common.out_dir.empty() ? fs::path("mirage-runs") / subcommand : fs::path(common.out_dir)),
        start_(std::chrono::steady_clock::now()) {
    manifest_.subcommand = std::move(subcommand);
    manifest_.argv = argv;
    manifest_.seed = common.seed;
    manifest_.bug_compat = common.bug_compat;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw IoFailure("cannot create output directory " + dir_.string() +
                      (ec ? ": " + ec.message() : ""));
    }
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name);
    if (!f) throw IoFailure("cannot write " + (dir_ / name).string());
    manifest_.outputs.push_back(name);
    return f;
  }

  static void close(std::ofstream& f, const std::string& name) {
    f.close();
    if (!f) throw IoFailure("write failed: " + name);
  }

  json& parameters() { return manifest_.parameters; }
  const fs::path& dir() const { return dir_; }

  void finish(int exit_code) {
    manifest_.exit_code = exit_code;
    manifest_.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    try {
      analysis::write_manifest(dir_ / "manifest.json", manifest_);
    } catch (const std::runtime_error& e) {
      throw IoFailure(e.what());
    }
  }

 private:
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  analysis::RunManifest manifest_;
};

template <typename Writer>
void write_file(RunDir& run, const std::string& name, Writer&& writer) {
  auto f = run.open(name);
  writer(f);
  RunDir::close(f, name);
}

// ---- subcommands ----------------------------------------------------------

struct BnbOptions {
  std::uint32_t ways = 14;
  std::uint32_t buckets_per_skew = 16384;
  std::uint32_t average_load = 8;
  std::uint64_t throws = 0;
};

int run_bnb(const Common& common, const BnbOptions& o, const std::vector<std::string>& argv,
            std::ostream& out) {
  if (common.bug_compat.bernoulli_init || common.bug_compat.buggy_present) {
    throw ConfigError("bnb only supports --bug-compat=no-global-evict (no ball removal)");
  }
  bnb::BnbConfig cfg;
  cfg.buckets_per_skew = o.buckets_per_skew;
  cfg.capacity_per_bucket = o.ways;
  cfg.average_load = o.average_load;
  cfg.max_throws = o.throws != 0 ? o.throws : (common.full_scale ? 1'000'000'000 : 10'000'000);
  cfg.remove_ball_enabled = !common.bug_compat.no_global_evict;
  cfg.rng_seed = common.seed;
  cfg.validate();
  const std::uint32_t trials = common.trials_or(1, 5);

  RunDir run(common, "bnb", argv);
  run.parameters() = {{"config", config_json(cfg)}, {"trials", trials}, {"threads", common.threads}};
  const std::uint32_t ways[] = {o.ways};
  const auto table = bnb::bnb_sweep(ways, trials, cfg, common.threads);
  write_file(run, "bnb.csv", [&](std::ostream& f) { bnb::write_sweep_csv(f, table); });
  write_file(run, "bnb_medians.csv", [&](std::ostream& f) { bnb::write_median_csv(f, table); });

  std::size_t violations = 0;
  for (const auto& r : table.rows) {
    violations += r.result.capacity_violation;
    out << "trial " << r.trial << ": "
        << (r.result.spilled ? "spill after " : "no spill in ") << r.result.throws_before_spill
        << " throws" << (r.result.capacity_violation ? " (capacity violated)" : "") << '\n';
  }
  const int code = violations > 0 ? kExitCapacityViolation : kExitOk;
  if (violations > 0) {
    out << "capacity assertion: " << violations << " trial(s) held more than " << cfg.total_balls()
        << " balls\n";
  }
  run.finish(code);
  return code;
}

struct CacheOptions {
  Geometry geometry;
  std::uint64_t refs = 0;
  std::string init = "full";
  std::string source = "random";
  bool log_outcomes = false;
  bool snapshot = false;
};

int run_cache(const Common& common, const CacheOptions& o, const std::vector<std::string>& argv,
              std::ostream& out) {
  const cache::CacheConfig cfg = o.geometry.to_config(common.bug_compat, common.seed);
  const std::uint64_t refs =
      o.refs != 0 ? o.refs : (common.full_scale ? 100'000'000 : 1'000'000);

  RunDir run(common, "cache", argv);
  run.parameters() = {{"config", config_json(cfg)},
                      {"references", refs},
                      {"init", common.bug_compat.bernoulli_init ? "bernoulli" : o.init},
                      {"address_source", o.source}};

  cache::MirageCache cache(cfg);
  std::uint64_t detached = 0;
  if (common.bug_compat.bernoulli_init) {
    detached = cache.init_buggy_bernoulli(0.5);
  } else if (o.init == "full") {
    cache.init_valid(cfg.data_store_capacity, derive_seed(common.seed, 2));
  }

  cache::RunOptions ropt;
  ropt.address_seed = derive_seed(common.seed, 3);
  ropt.source = o.source == "recycled" ? cache::AddressSource::kRecycledMix
                                       : cache::AddressSource::kRandom;
  std::ofstream outcomes;
  std::optional<analysis::OutcomeLogWriter> log_writer;
  if (o.log_outcomes) {
    outcomes = run.open("outcomes.csv");
    log_writer.emplace(outcomes);
    ropt.on_outcome = std::ref(*log_writer);
  }
  const auto log = cache.run_references(refs, ropt);
  if (o.log_outcomes) RunDir::close(outcomes, "outcomes.csv");

  write_file(run, "cache_summary.csv", [&](std::ostream& f) {
    f << "references,hits,miss_installed,miss_global_eviction,set_associative_evictions,"
         "first_sae_index,capacity_violation_index,data_occupancy,valid_tags,detached_tags\n";
    f << log.references << ',' << log.kind_counts[0] << ',' << log.kind_counts[1] << ','
      << log.kind_counts[2] << ',' << log.kind_counts[3] << ',';
    if (log.first_sae_index) f << *log.first_sae_index;
    f << ',';
    if (log.capacity_violation_index) f << *log.capacity_violation_index;
    f << ',' << cache.data_occupancy() << ',' << cache.valid_tags() << ',' << cache.detached_tags()
      << '\n';
  });
  write_file(run, "occupancy.csv", [&](std::ostream& f) {
    analysis::write_occupancy_histogram_csv(f, cache.occupancy_histogram(), cfg.sets_per_skew);
  });
  if (o.snapshot) {
    write_file(run, "snapshot.json", [&](std::ostream& f) { cache.write_snapshot(f); });
  }

  out << log.references << " references, " << log.sae_count << " set-associative evictions";
  if (log.first_sae_index) out << " (first at reference " << *log.first_sae_index << ")";
  out << '\n';
  if (detached > 0) out << detached << " tags initialized without a data entry\n";
  int code = kExitOk;
  if (log.capacity_violation_index) {
    out << "capacity assertion: data store of " << cfg.data_store_capacity
        << " lines exhausted at reference " << *log.capacity_violation_index << '\n';
    code = kExitCapacityViolation;
  }
  run.finish(code);
  return code;
}

struct UniformityOptions {
  std::vector<std::string> ciphers{"aes128", "prince64", "present80"};
  std::uint64_t addresses = 1'000'000;
  std::uint32_t sets = 16384;
};

int run_uniformity(const Common& common, const UniformityOptions& o,
                   const std::vector<std::string>& argv, std::ostream& out) {
  if (common.bug_compat.no_global_evict || common.bug_compat.bernoulli_init) {
    throw ConfigError("uniformity only supports --bug-compat=buggy-present");
  }
  std::vector<ciphers::BlockCipherKind> kinds;
  for (const auto& name : o.ciphers) kinds.push_back(Geometry::parse_cipher(name));
  if (common.bug_compat.buggy_present) kinds.push_back(ciphers::BlockCipherKind::kBuggyPresent80);
  const auto policy = common.bug_compat.buggy_present ? ciphers::CipherPolicy::kAllowBuggyPresent
                                                      : ciphers::CipherPolicy::kStandardOnly;

  RunDir run(common, "uniformity", argv);
  json names = json::array();
  for (auto k : kinds) names.push_back(std::string(ciphers::to_string(k)));
  run.parameters() = {{"ciphers", names}, {"addresses", o.addresses}, {"num_sets", o.sets}};

  std::vector<analysis::UniformityResult> results(kinds.size());
  parallel_for(kinds.size(), common.threads, [&](std::size_t i) {
    results[i] = analysis::uniformity_experiment(kinds[i], o.addresses, o.sets, common.seed, policy);
  });
  write_file(run, "uniformity_stats.csv",
             [&](std::ostream& f) { analysis::write_uniformity_stats_csv(f, results); });
  write_file(run, "uniformity_histogram.csv",
             [&](std::ostream& f) { analysis::write_uniformity_histogram_csv(f, results); });
  for (const auto& r : results) {
    out << ciphers::to_string(r.cipher) << ": mean " << r.stats.mean << ", stddev "
        << r.stats.stddev << ", max " << r.stats.max << ", above 6-sigma "
        << r.stats.exceedance_count << '\n';
  }
  run.finish(kExitOk);
  return kExitOk;
}

int run_init_occupancy(const Common& common, const Geometry& g,
                       const std::vector<std::string>& argv, std::ostream& out) {
  reject_bug_compat(common, "init-occupancy");
  analysis::InitOccupancySpec spec;
  spec.base = g.to_config({}, common.seed);
  spec.trials = common.trials_or(20, 100);
  spec.seed = common.seed;
  spec.threads = common.threads;

  RunDir run(common, "init-occupancy", argv);
  run.parameters() = {{"config", config_json(spec.base)}, {"trials", spec.trials}, {"p", spec.p}};
  const auto r = analysis::init_occupancy_experiment(spec);
  write_file(run, "init_trials.csv", [&](std::ostream& f) { analysis::write_init_trials_csv(f, r); });
  write_file(run, "init_occupancy_buggy.csv", [&](std::ostream& f) {
    analysis::write_occupancy_histogram_csv(f, r.buggy_histogram, r.sets_per_skew);
  });
  write_file(run, "init_occupancy_correct.csv", [&](std::ostream& f) {
    analysis::write_occupancy_histogram_csv(f, r.correct_histogram, r.sets_per_skew);
  });
  out << "Bernoulli init: mean full sets " << r.mean_buggy_full_sets() << " over " << spec.trials
      << " trials\ncorrect init: " << r.total_correct_full_sets() << " full sets in total\n";
  run.finish(kExitOk);
  return kExitOk;
}

struct Fig6Options {
  std::vector<std::uint32_t> ways{9, 10, 11, 12, 13, 14};
  std::uint32_t buckets_per_skew = 16384;
  std::uint32_t average_load = 8;
  std::uint64_t throws = 0;
};

int run_fig6(const Common& common, const Fig6Options& o, const std::vector<std::string>& argv,
             std::ostream& out) {
  reject_bug_compat(common, "fig6 (it always runs both modes)");
  analysis::Fig6Spec spec;
  spec.base.buckets_per_skew = o.buckets_per_skew;
  spec.base.average_load = o.average_load;
  spec.base.max_throws = o.throws != 0 ? o.throws : (common.full_scale ? 1'000'000'000 : 10'000'000);
  spec.base.rng_seed = common.seed;
  spec.correct_ways = spec.bug_compat_ways = o.ways;
  spec.trials = common.trials_or(10, 30);
  spec.threads = common.threads;

  RunDir run(common, "fig6", argv);
  run.parameters() = {{"config", config_json(spec.base)},
                      {"ways", o.ways},
                      {"trials", spec.trials},
                      {"bug_compat_max_throws", spec.bug_compat_max_throws}};
  const auto r = analysis::fig6_experiment(spec);
  write_file(run, "fig6.csv", [&](std::ostream& f) { analysis::write_fig6_csv(f, r); });
  write_file(run, "fig6_medians.csv",
             [&](std::ostream& f) { analysis::write_fig6_medians_csv(f, r); });
  for (std::uint32_t w : o.ways) {
    out << "W=" << w << ": median " << r.correct.median_throws(w) << " (correct, "
        << r.correct.spilled_trials(w) << '/' << spec.trials << " spilled), "
        << r.bug_compat.median_throws(w) << " (bug-compat)\n";
  }
  run.finish(kExitOk);
  return kExitOk;
}

struct Fig7Options {
  Geometry geometry;
  std::vector<std::uint64_t> sizes;
  std::uint64_t refs = 0;
};

int run_fig7(const Common& common, const Fig7Options& o, const std::vector<std::string>& argv,
             std::ostream& out) {
  analysis::Fig7Spec spec;
  spec.base = o.geometry.to_config({}, common.seed);
  if (!o.sizes.empty()) spec.cache_bytes = o.sizes;
  spec.trials = common.trials_or(3, 5);
  spec.max_references = o.refs != 0 ? o.refs : (common.full_scale ? 100'000'000 : 1'000'000);
  spec.bug_compat = common.bug_compat;
  spec.seed = common.seed;
  spec.threads = common.threads;

  RunDir run(common, "fig7", argv);
  run.parameters() = {{"base_config", config_json(spec.base)},
                      {"cache_bytes", spec.cache_bytes},
                      {"trials", spec.trials},
                      {"max_references", spec.max_references}};
  const auto rows = analysis::fig7_experiment(spec);
  write_file(run, "fig7.csv", [&](std::ostream& f) { analysis::write_fig7_csv(f, rows); });
  for (const auto& r : rows) {
    out << (r.cache_bytes >> 10) << " KiB trial " << r.trial << ": ";
    if (r.first_sae) {
      out << "first SAE at reference " << *r.first_sae << '\n';
    } else {
      out << "no SAE in " << r.references << " references\n";
    }
  }
  run.finish(kExitOk);
  return kExitOk;
}

int run_ciphers_kat(const Common& common, const std::string& vectors_dir,
                    const std::vector<std::string>& argv, std::ostream& out) {
  reject_bug_compat(common, "ciphers-kat (it always checks the defective PRESENT)");
  using K = ciphers::BlockCipherKind;
  const std::pair<K, const char*> suites[] = {{K::kPresent80, "present80.kat"},
                                              {K::kPrince64, "prince64.kat"},
                                              {K::kAes128, "aes128.kat"},
                                              {K::kBuggyPresent80, "buggy_present80.kat"}};
  RunDir run(common, "ciphers-kat", argv);
  run.parameters() = {{"vectors_dir", vectors_dir}};

  bool verdict = true;
  auto f = run.open("kat.csv");
  f << "cipher,key,plaintext,expected,actual,match\n";
  for (const auto& [kind, file] : suites) {
    std::vector<ciphers::KnownAnswer> vectors = ciphers::builtin_vectors(kind);
    if (!vectors_dir.empty()) {
      const fs::path p = fs::path(vectors_dir) / file;
      if (!fs::exists(p)) throw IoFailure("missing vector file " + p.string());
      vectors = ciphers::load_vectors(p);
    }
    std::size_t matched = 0;
    for (const auto& v : vectors) {
      const std::string actual = ciphers::evaluate(kind, v);
      const bool match = actual == v.ciphertext_hex;
      matched += match;
      f << ciphers::to_string(kind) << ',' << v.key_hex << ',' << v.plaintext_hex << ','
        << v.ciphertext_hex << ',' << actual << ',' << (match ? 1 : 0) << '\n';
    }
    const bool all = !vectors.empty() && matched == vectors.size();
    const bool expected_to_match = kind != K::kBuggyPresent80;
    const bool ok = expected_to_match ? all : matched < vectors.size();
    verdict = verdict && ok;
    out << (ok ? "PASS " : "FAIL ") << ciphers::to_string(kind) << ": " << matched << '/'
        << vectors.size() << " vectors match"
        << (expected_to_match ? "" : " (defective cipher must not match)") << '\n';
  }
  RunDir::close(f, "kat.csv");
  const int code = verdict ? kExitOk : kExitCheckFailed;
  run.finish(code);
  return code;
}

void add_geometry(CLI::App* sub, Geometry& g) {
  sub->add_option("--sets-per-skew", g.sets_per_skew, "Sets per skew (power of two)")
      ->transform(count_validator());
  sub->add_option("--base-ways", g.base_ways, "Base ways per skew");
  sub->add_option("--extra-ways", g.extra_ways, "Extra (invalid-provisioned) ways per skew");
  sub->add_option("--capacity", g.capacity,
                  "Data-store lines; 0 means 2 * sets-per-skew * base-ways")
      ->transform(count_validator());
  sub->add_option("--cipher", g.cipher, "Index cipher: aes128, prince64 or present80");
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MIRAGE randomized-LLC simulator and experiment harness", "mirage"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Base RNG seed");
  app.add_option("--out-dir", common.out_dir, "Output directory (default mirage-runs/<subcommand>)");
  app.add_option("--trials", common.trials, "Trials; 0 selects the subcommand default")
      ->transform(count_validator());
  app.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--full-scale", common.full_scale, "Use the large default budgets");
  app.add_option("--bug-compat", common.bug_compat_names,
                 "Reproduce a known simulator bug (repeatable)")
      ->check(CLI::IsMember({"no-global-evict", "bernoulli-init", "buggy-present"}));

  BnbOptions bnb_opt;
  auto* bnb_cmd = app.add_subcommand("bnb", "Buckets-and-balls spill experiment");
  bnb_cmd->add_option("--ways", bnb_opt.ways, "Bucket capacity (ways per skew)");
  bnb_cmd->add_option("--buckets-per-skew", bnb_opt.buckets_per_skew, "Buckets per skew")
      ->transform(count_validator());
  bnb_cmd->add_option("--average-load", bnb_opt.average_load, "Balls per bucket on average");
  bnb_cmd->add_option("--throws", bnb_opt.throws,
                      "Steady-state throw budget; 0 means 1e7 (1e9 with --full-scale)")
      ->transform(count_validator());

  CacheOptions cache_opt;
  auto* cache_cmd = app.add_subcommand("cache", "Run random references through one cache");
  add_geometry(cache_cmd, cache_opt.geometry);
  cache_cmd->add_option("--refs", cache_opt.refs,
                        "References; 0 means 1e6 (1e8 with --full-scale)")
      ->transform(count_validator());
  cache_cmd->add_option("--init", cache_opt.init, "Initial state: full or empty")
      ->check(CLI::IsMember({"full", "empty"}));
  cache_cmd->add_option("--source", cache_opt.source, "Address source: random or recycled")
      ->check(CLI::IsMember({"random", "recycled"}));
  cache_cmd->add_flag("--log-outcomes", cache_opt.log_outcomes, "Write outcomes.csv");
  cache_cmd->add_flag("--snapshot", cache_opt.snapshot, "Write snapshot.json of the final state");

  UniformityOptions uni_opt;
  auto* uni_cmd = app.add_subcommand("uniformity", "Set-index distribution per cipher");
  uni_cmd->add_option("--cipher", uni_opt.ciphers, "Ciphers to test (repeatable)");
  uni_cmd->add_option("--addresses", uni_opt.addresses, "Random addresses")
      ->transform(count_validator());
  uni_cmd->add_option("--sets", uni_opt.sets, "Number of sets")->transform(count_validator());

  Geometry init_geom;
  auto* init_cmd =
      app.add_subcommand("init-occupancy", "Bernoulli vs install-based tag initialization");
  add_geometry(init_cmd, init_geom);

  Fig6Options fig6_opt;
  auto* fig6_cmd = app.add_subcommand("fig6", "Throws before spill vs ways, both modes");
  fig6_cmd->add_option("--ways", fig6_opt.ways, "Ways to sweep");
  fig6_cmd->add_option("--buckets-per-skew", fig6_opt.buckets_per_skew, "Buckets per skew")
      ->transform(count_validator());
  fig6_cmd->add_option("--average-load", fig6_opt.average_load, "Balls per bucket on average");
  fig6_cmd->add_option("--throws", fig6_opt.throws,
                       "Correct-mode throw budget; 0 means 1e7 (1e9 with --full-scale)")
      ->transform(count_validator());

  Fig7Options fig7_opt;
  auto* fig7_cmd = app.add_subcommand("fig7", "References before first SAE vs cache size");
  add_geometry(fig7_cmd, fig7_opt.geometry);
  fig7_cmd->add_option("--sizes", fig7_opt.sizes, "Cache sizes (default 1M 2M 4M 8M 16M)")
      ->transform(size_validator());
  fig7_cmd->add_option("--refs", fig7_opt.refs,
                       "Reference budget; 0 means 1e6 (1e8 with --full-scale)")
      ->transform(count_validator());

  std::string vectors_dir;
  auto* kat_cmd = app.add_subcommand("ciphers-kat", "Known-answer tests for every cipher");
  kat_cmd->add_option("--vectors-dir", vectors_dir,
                      "Directory with <cipher>.kat files (default: built-in vectors)");

  std::vector<std::string> parse_args(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(parse_args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    for (const auto& name : common.bug_compat_names) common.bug_compat.enable(name);
    if (common.bug_compat.any()) {
      err << "*** BUG-COMPAT MODE:";
      for (const auto& n : common.bug_compat.names()) err << ' ' << n;
      err << " -- results reproduce a known defect ***\n";
    }
    if (*bnb_cmd) return run_bnb(common, bnb_opt, args, out);
    if (*cache_cmd) return run_cache(common, cache_opt, args, out);
    if (*uni_cmd) return run_uniformity(common, uni_opt, args, out);
    if (*init_cmd) return run_init_occupancy(common, init_geom, args, out);
    if (*fig6_cmd) return run_fig6(common, fig6_opt, args, out);
    if (*fig7_cmd) return run_fig7(common, fig7_opt, args, out);
    if (*kat_cmd) return run_ciphers_kat(common, vectors_dir, args, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const UsageError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const CapacityViolation& e) {
    err << "capacity assertion: " << e.what() << '\n';
    return kExitCapacityViolation;
  } catch (const IoFailure& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIoError;
  }
  return kExitConfigError;
}

int parse_and_dispatch(int argc, const char* const* argv) {
  return parse_and_dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace mirage::cli
