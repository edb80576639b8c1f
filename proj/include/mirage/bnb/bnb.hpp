#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mirage/rng.hpp"

namespace mirage::bnb {

// Buckets-and-balls abstraction of a two-skew MIRAGE tag store: buckets are
// sets, balls are resident lines, capacity_per_bucket is ways per skew.
struct BnbConfig {
  static constexpr std::uint32_t kSkews = 2;

  std::uint32_t buckets_per_skew = 16384;
  std::uint32_t capacity_per_bucket = 14;
  std::uint32_t average_load = 8;
  // Steady-state throw budget after the fill phase.
  std::uint64_t max_throws = 100'000'000;
  // false reproduces the model without ball removal (bug-compat).
  bool remove_ball_enabled = true;
  std::uint64_t rng_seed = 1;

  std::uint32_t num_buckets() const { return buckets_per_skew * kSkews; }
  std::uint64_t total_balls() const {
    return std::uint64_t{buckets_per_skew} * kSkews * average_load;
  }

  // Throws ConfigError.
  void validate() const;
};

struct SpillResult {
  bool spilled = false;
  bool spilled_during_fill = false;
  // Throws completed before the spilling throw, counted from the empty model
  // (fill throws included). Equals the number of throws performed when the
  // run did not spill.
  std::uint64_t throws_before_spill = 0;
  // On a steady-state spill in correct mode the throw's removal has already
  // happened, so this is total_balls - 1.
  std::uint64_t balls_in_model_at_end = 0;
  // Balls exceeded total_balls at some point (only without removal).
  bool capacity_violation = false;

  friend bool operator==(const SpillResult&, const SpillResult&) = default;
};

class BucketModel {
 public:
  explicit BucketModel(const BnbConfig& config);

  // Power-of-two-choices insert: one uniform bucket per skew, the less
  // occupied one wins, ties broken by a fair coin. Returns false (and leaves
  // the model unchanged) when both candidates hold capacity_per_bucket balls.
  bool throw_ball(Xoshiro256& rng);

  // Removes one ball chosen uniformly over all balls. Returns its bucket.
  std::uint32_t remove_random_ball(Xoshiro256& rng);

  std::span<const std::uint32_t> occupancy() const { return counts_; }
  std::uint64_t balls() const { return ball_bucket_.size(); }
  std::uint32_t capacity() const { return capacity_; }

  // Full scan: per-bucket counts agree with the ball list and none exceeds
  // capacity.
  bool consistent() const;

 private:
  std::uint32_t buckets_per_skew_;
  std::uint32_t capacity_;
  std::vector<std::uint32_t> counts_;
  // Bucket of every resident ball; a ball's id is its position here.
  std::vector<std::uint32_t> ball_bucket_;
};

struct FillOutcome {
  BucketModel model;
  // Index (0-based) of the fill throw that spilled, if any.
  std::optional<std::uint64_t> spill_at;
};

// Inserts total_balls balls into an empty model with no removal.
FillOutcome bnb_fill(const BnbConfig& config, Xoshiro256& rng);

// Fill followed by up to max_throws steady-state throws.
SpillResult bnb_run(const BnbConfig& config);

struct SweepRow {
  std::uint32_t ways = 0;
  std::uint32_t trial = 0;
  std::uint64_t seed = 0;
  SpillResult result;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // ordered by (ways, trial)

  std::vector<std::uint32_t> ways() const;
  // Median of throws_before_spill at `ways`; unspilled trials count at their
  // budget (censored).
  double median_throws(std::uint32_t ways) const;
  std::size_t spilled_trials(std::uint32_t ways) const;
};

// Runs bnb_run for every W in `ways` and trial in [0, trials). Trial seeds
// are derive_seed(base.rng_seed, k) with k the flat (ways, trial) index.
SweepTable bnb_sweep(std::span<const std::uint32_t> ways, std::uint32_t trials,
                     const BnbConfig& base, unsigned threads);

// Columns: ways,trial,seed,spilled,throws_before_spill,capacity_violation
void write_sweep_csv(std::ostream& out, const SweepTable& table);
// Columns: ways,trials,spilled_trials,median_throws_before_spill
void write_median_csv(std::ostream& out, const SweepTable& table);

}  // namespace mirage::bnb
