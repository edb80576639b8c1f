#include "mirage/bnb/bnb.hpp"

#include <algorithm>
#include <cassert>
#include <iomanip>
#include <ostream>
#include <string>

#include "mirage/errors.hpp"
#include "mirage/parallel.hpp"

namespace mirage::bnb {

void BnbConfig::validate() const {
  if (buckets_per_skew == 0) throw ConfigError("buckets_per_skew must be positive");
  if (average_load == 0) throw ConfigError("average_load must be positive");
  if (capacity_per_bucket < average_load) {
    throw ConfigError("capacity_per_bucket (" + std::to_string(capacity_per_bucket) +
                      ") must be >= average_load (" + std::to_string(average_load) + ")");
  }
}

BucketModel::BucketModel(const BnbConfig& config)
    : buckets_per_skew_(config.buckets_per_skew),
      capacity_(config.capacity_per_bucket),
      counts_(config.num_buckets(), 0) {
  ball_bucket_.reserve(config.total_balls());
}

bool BucketModel::throw_ball(Xoshiro256& rng) {
  const auto a = static_cast<std::uint32_t>(rng.below(buckets_per_skew_));
  const auto b = buckets_per_skew_ + static_cast<std::uint32_t>(rng.below(buckets_per_skew_));
  std::uint32_t chosen;
  if (counts_[a] != counts_[b]) {
    chosen = counts_[a] < counts_[b] ? a : b;
  } else {
    chosen = rng.coin() ? a : b;
  }
  if (counts_[chosen] >= capacity_) return false;
  ++counts_[chosen];
  ball_bucket_.push_back(chosen);
  return true;
}

std::uint32_t BucketModel::remove_random_ball(Xoshiro256& rng) {
  assert(!ball_bucket_.empty());
  const std::size_t victim = rng.below(ball_bucket_.size());
  const std::uint32_t bucket = ball_bucket_[victim];
  --counts_[bucket];
  ball_bucket_[victim] = ball_bucket_.back();
  ball_bucket_.pop_back();
  return bucket;
}

bool BucketModel::consistent() const {
  std::vector<std::uint32_t> recount(counts_.size(), 0);
  for (std::uint32_t b : ball_bucket_) {
    if (b >= recount.size()) return false;
    ++recount[b];
  }
  if (recount != counts_) return false;
  return std::all_of(counts_.begin(), counts_.end(),
                     [this](std::uint32_t c) { return c <= capacity_; });
}

FillOutcome bnb_fill(const BnbConfig& config, Xoshiro256& rng) {
  config.validate();
  FillOutcome out{BucketModel(config), std::nullopt};
  const std::uint64_t total = config.total_balls();
  for (std::uint64_t i = 0; i < total; ++i) {
    if (!out.model.throw_ball(rng)) {
      out.spill_at = i;
      break;
    }
  }
  return out;
}

SpillResult bnb_run(const BnbConfig& config) {
  Xoshiro256 rng(config.rng_seed);
  FillOutcome fill = bnb_fill(config, rng);
  BucketModel& model = fill.model;
  const std::uint64_t total = config.total_balls();

  SpillResult result;
  if (fill.spill_at) {
    result.spilled = true;
    result.spilled_during_fill = true;
    result.throws_before_spill = *fill.spill_at;
    result.balls_in_model_at_end = model.balls();
    return result;
  }

  std::uint64_t throws = total;
  for (std::uint64_t t = 0; t < config.max_throws; ++t) {
    if (config.remove_ball_enabled) model.remove_random_ball(rng);
    if (!model.throw_ball(rng)) {
      result.spilled = true;
      break;
    }
    ++throws;
    if (model.balls() > total) {
      if (config.remove_ball_enabled) {
        throw CapacityViolation("bucket model holds more balls than its capacity",
                                model.balls(), total);
      }
      result.capacity_violation = true;
    }
  }
  result.throws_before_spill = throws;
  result.balls_in_model_at_end = model.balls();
  return result;
}

std::vector<std::uint32_t> SweepTable::ways() const {
  std::vector<std::uint32_t> out;
  for (const auto& r : rows) {
    if (out.empty() || out.back() != r.ways) out.push_back(r.ways);
  }
  return out;
}

double SweepTable::median_throws(std::uint32_t w) const {
  std::vector<std::uint64_t> v;
  for (const auto& r : rows) {
    if (r.ways == w) v.push_back(r.result.throws_before_spill);
  }
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return static_cast<double>(v[n / 2]);
  return (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

std::size_t SweepTable::spilled_trials(std::uint32_t w) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [w](const SweepRow& r) {
    return r.ways == w && r.result.spilled;
  }));
}

SweepTable bnb_sweep(std::span<const std::uint32_t> ways, std::uint32_t trials,
                     const BnbConfig& base, unsigned threads) {
  for (std::uint32_t w : ways) {
    if (w <= base.average_load) {
      throw ConfigError("swept ways must exceed the average load; got " + std::to_string(w));
    }
  }
  SweepTable table;
  table.rows.resize(ways.size() * trials);
  for (std::size_t i = 0; i < ways.size(); ++i) {
    for (std::uint32_t t = 0; t < trials; ++t) {
      const std::size_t k = i * trials + t;
      table.rows[k].ways = ways[i];
      table.rows[k].trial = t;
      table.rows[k].seed = derive_seed(base.rng_seed, k);
    }
  }
  parallel_for(table.rows.size(), threads, [&](std::size_t k) {
    BnbConfig cfg = base;
    cfg.capacity_per_bucket = table.rows[k].ways;
    cfg.rng_seed = table.rows[k].seed;
    table.rows[k].result = bnb_run(cfg);
  });
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  out << "ways,trial,seed,spilled,throws_before_spill,capacity_violation\n";
  for (const auto& r : table.rows) {
    out << r.ways << ',' << r.trial << ',' << r.seed << ',' << (r.result.spilled ? 1 : 0) << ','
        << r.result.throws_before_spill << ',' << (r.result.capacity_violation ? 1 : 0) << '\n';
  }
}

void write_median_csv(std::ostream& out, const SweepTable& table) {
  out << "ways,trials,spilled_trials,median_throws_before_spill\n";
  for (std::uint32_t w : table.ways()) {
    std::size_t n = 0;
    for (const auto& r : table.rows) n += (r.ways == w);
    out << w << ',' << n << ',' << table.spilled_trials(w) << ',' << std::fixed
        << std::setprecision(1) << table.median_throws(w) << '\n';
    out.unsetf(std::ios::floatfield);
    out.precision(6);
  }
}

}  // namespace mirage::bnb
