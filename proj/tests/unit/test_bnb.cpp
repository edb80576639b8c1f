#include <doctest.h>

#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "mirage/bnb/bnb.hpp"
#include "mirage/errors.hpp"

using namespace mirage;
using namespace mirage::bnb;

namespace {

BnbConfig small_config() {
  BnbConfig c;
  c.buckets_per_skew = 64;
  c.capacity_per_bucket = 6;
  c.average_load = 4;
  c.max_throws = 10'000;
  return c;
}

std::uint64_t sum(std::span<const std::uint32_t> v) {
  return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

}  // namespace

TEST_CASE("config validation") {
  BnbConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.num_buckets() == 32768);
  CHECK(c.total_balls() == 262144);
  c.capacity_per_bucket = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.buckets_per_skew = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.average_load = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("conservation and per-bucket bound over a random insert/remove trace") {
  const BnbConfig c = small_config();
  BucketModel m(c);
  Xoshiro256 rng(1);
  std::uint64_t expected = 0;
  for (int op = 0; op < 20'000; ++op) {
    if (expected > 0 && rng.coin()) {
      m.remove_random_ball(rng);
      --expected;
    } else if (m.throw_ball(rng)) {
      ++expected;
    }
    REQUIRE(m.balls() == expected);
    REQUIRE(sum(m.occupancy()) == expected);
  }
  CHECK(m.consistent());
  for (std::uint32_t v : m.occupancy()) CHECK(v <= c.capacity_per_bucket);
}

TEST_CASE("throw_ball picks the less loaded candidate") {
  // Replays the documented draw order (skew-0 bucket, skew-1 bucket, coin on
  // ties) on a copy of the generator.
  BnbConfig c = small_config();
  c.capacity_per_bucket = 50;
  BucketModel m(c);
  Xoshiro256 rng(2);
  for (int i = 0; i < 5'000; ++i) {
    Xoshiro256 replay = rng;
    const std::uint32_t a = static_cast<std::uint32_t>(replay.below(c.buckets_per_skew));
    const std::uint32_t b =
        c.buckets_per_skew + static_cast<std::uint32_t>(replay.below(c.buckets_per_skew));
    const auto before = std::vector<std::uint32_t>(m.occupancy().begin(), m.occupancy().end());
    std::uint32_t want;
    if (before[a] != before[b]) {
      want = before[a] < before[b] ? a : b;
    } else {
      want = replay.coin() ? a : b;
    }
    REQUIRE(m.throw_ball(rng));
    for (std::uint32_t k = 0; k < before.size(); ++k) {
      REQUIRE(m.occupancy()[k] == before[k] + (k == want ? 1 : 0));
    }
  }
}

TEST_CASE("spill leaves the model unchanged") {
  BnbConfig c = small_config();
  c.buckets_per_skew = 1;
  c.capacity_per_bucket = 2;
  c.average_load = 2;
  BucketModel m(c);
  Xoshiro256 rng(3);
  for (int i = 0; i < 4; ++i) REQUIRE(m.throw_ball(rng));
  CHECK_FALSE(m.throw_ball(rng));
  CHECK(m.balls() == 4);
  CHECK(m.consistent());
}

TEST_CASE("remove_random_ball is uniform over balls (chi-square)") {
  // P(bucket) must be count / total. Repeat removal from copies of one state.
  BnbConfig c = small_config();
  c.buckets_per_skew = 8;
  c.capacity_per_bucket = 14;
  c.average_load = 8;
  BucketModel base(c);
  Xoshiro256 rng(4);
  while (base.balls() < c.total_balls()) REQUIRE(base.throw_ball(rng));

  constexpr int kReps = 100'000;
  std::map<std::uint32_t, int> hits;
  for (int i = 0; i < kReps; ++i) {
    BucketModel copy = base;
    ++hits[copy.remove_random_ball(rng)];
  }
  double chi2 = 0;
  int cells = 0;
  for (std::uint32_t b = 0; b < base.occupancy().size(); ++b) {
    const double expected = double(kReps) * base.occupancy()[b] / double(base.balls());
    if (expected == 0) {
      CHECK(hits[b] == 0);
      continue;
    }
    chi2 += (hits[b] - expected) * (hits[b] - expected) / expected;
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("bnb_run is deterministic per seed") {
  BnbConfig c;
  c.max_throws = 100'000;
  c.rng_seed = 17;
  CHECK(bnb_run(c) == bnb_run(c));
  BnbConfig d = c;
  d.rng_seed = 18;
  d.capacity_per_bucket = 10;
  c.capacity_per_bucket = 10;
  CHECK(bnb_run(c).throws_before_spill != bnb_run(d).throws_before_spill);
}

TEST_CASE("correct mode at 14 ways does not spill in a short run") {
  BnbConfig c;
  c.max_throws = 1'000'000;
  const SpillResult r = bnb_run(c);
  CHECK_FALSE(r.spilled);
  CHECK_FALSE(r.capacity_violation);
  CHECK(r.throws_before_spill == c.total_balls() + c.max_throws);
  CHECK(r.balls_in_model_at_end == c.total_balls());
}

TEST_CASE("spill during fill") {
  BnbConfig c;
  c.capacity_per_bucket = 8;  // no headroom: spills before the fill completes
  const SpillResult r = bnb_run(c);
  CHECK(r.spilled);
  CHECK(r.spilled_during_fill);
  CHECK(r.throws_before_spill < c.total_balls());
  CHECK(r.balls_in_model_at_end == r.throws_before_spill);
}

TEST_CASE("steady-state spill in correct mode ends one ball short") {
  BnbConfig c;
  c.capacity_per_bucket = 11;
  c.rng_seed = 5;
  const SpillResult r = bnb_run(c);
  REQUIRE(r.spilled);
  CHECK_FALSE(r.spilled_during_fill);
  CHECK(r.throws_before_spill > c.total_balls());
  CHECK(r.balls_in_model_at_end == c.total_balls() - 1);
}

TEST_CASE("without removal the model overflows its capacity before spilling") {
  BnbConfig c;
  c.remove_ball_enabled = false;
  const SpillResult r = bnb_run(c);
  CHECK(r.spilled);
  CHECK(r.capacity_violation);
  CHECK(r.throws_before_spill > c.total_balls());
  CHECK(r.balls_in_model_at_end == r.throws_before_spill);
}

TEST_CASE("ball removal relieves pressure once the fill completes") {
  // At 11 ways every trial outlives the fill phase, where the two modes differ.
  BnbConfig c;
  c.capacity_per_bucket = 11;
  const std::uint32_t ways[] = {11};
  const SweepTable correct = bnb_sweep(ways, 9, c, 1);
  c.remove_ball_enabled = false;
  c.rng_seed = 99;
  const SweepTable buggy = bnb_sweep(ways, 9, c, 1);
  CHECK(correct.median_throws(11) > buggy.median_throws(11));
}

TEST_CASE("sweep layout, seeds, medians and thread independence") {
  BnbConfig c = small_config();
  c.rng_seed = 123;
  const std::uint32_t ways[] = {5, 6};
  const SweepTable t1 = bnb_sweep(ways, 4, c, 1);
  const SweepTable t3 = bnb_sweep(ways, 4, c, 3);
  REQUIRE(t1.rows.size() == 8);
  for (std::size_t k = 0; k < t1.rows.size(); ++k) {
    CHECK(t1.rows[k].ways == ways[k / 4]);
    CHECK(t1.rows[k].trial == k % 4);
    CHECK(t1.rows[k].seed == derive_seed(123, k));
    CHECK(t1.rows[k].result == t3.rows[k].result);
  }
  CHECK(t1.ways() == std::vector<std::uint32_t>{5, 6});

  std::vector<std::uint64_t> v;
  for (const auto& r : t1.rows) {
    if (r.ways == 5) v.push_back(r.result.throws_before_spill);
  }
  std::sort(v.begin(), v.end());
  CHECK(t1.median_throws(5) == doctest::Approx((v[1] + v[2]) / 2.0));
  CHECK(t1.median_throws(7) == 0.0);

  const std::uint32_t bad[] = {4};
  CHECK_THROWS_AS(bnb_sweep(bad, 1, c, 1), ConfigError);
}

TEST_CASE("sweep CSV formats") {
  BnbConfig c = small_config();
  const std::uint32_t ways[] = {5};
  const SweepTable t = bnb_sweep(ways, 3, c, 1);
  std::ostringstream rows, medians;
  write_sweep_csv(rows, t);
  write_median_csv(medians, t);
  std::string line;
  std::istringstream r(rows.str());
  std::getline(r, line);
  CHECK(line == "ways,trial,seed,spilled,throws_before_spill,capacity_violation");
  int n = 0;
  while (std::getline(r, line)) ++n;
  CHECK(n == 3);
  std::istringstream m(medians.str());
  std::getline(m, line);
  CHECK(line == "ways,trials,spilled_trials,median_throws_before_spill");
  std::getline(m, line);
  CHECK(line.rfind("5,3,", 0) == 0);
  CHECK(line.find('.') != std::string::npos);
}
