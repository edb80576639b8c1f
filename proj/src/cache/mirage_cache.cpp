#include "mirage/cache/mirage_cache.hpp"

#include <bit>
#include <cassert>
#include <iostream>
#include <string>

#include <json.hpp>

#include "mirage/errors.hpp"

namespace mirage::cache {
namespace {

// Stream ids for seeds derived from CacheConfig::rng_seed.
constexpr std::uint64_t kKeyStream = 0;
constexpr std::uint64_t kPolicyStream = 1;

ciphers::CipherPolicy cipher_policy(const CacheConfig& c) {
  return c.allow_buggy_present ? ciphers::CipherPolicy::kAllowBuggyPresent
                               : ciphers::CipherPolicy::kStandardOnly;
}

const CacheConfig& validated(const CacheConfig& c) {
  c.validate();
  return c;
}

}  // namespace

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kHit:
      return "hit";
    case OutcomeKind::kMissInstalled:
      return "miss_installed";
    case OutcomeKind::kMissWithGlobalEviction:
      return "miss_global_eviction";
    case OutcomeKind::kSetAssociativeEviction:
      return "set_associative_eviction";
  }
  return "unknown";
}

CacheConfig CacheConfig::for_capacity_bytes(std::uint64_t bytes, CacheConfig base) {
  base.data_store_capacity = bytes / kLineBytes;
  const std::uint64_t sets = base.data_store_capacity / (std::uint64_t{kSkews} * base.base_ways_per_skew);
  if (sets == 0 || sets > 0xFFFF'FFFFu) {
    throw ConfigError("cache size " + std::to_string(bytes) + " B gives no usable geometry");
  }
  base.sets_per_skew = static_cast<std::uint32_t>(sets);
  return base;
}

CacheConfig CacheConfig::for_capacity_bytes(std::uint64_t bytes) {
  return for_capacity_bytes(bytes, CacheConfig{});
}

void CacheConfig::validate() const {
  if (sets_per_skew == 0 || !std::has_single_bit(sets_per_skew)) {
    throw ConfigError("sets_per_skew must be a power of two, got " + std::to_string(sets_per_skew));
  }
  if (ways_per_skew() == 0) throw ConfigError("ways_per_skew must be positive");
  if (data_store_capacity == 0) throw ConfigError("data_store_capacity must be positive");
  if (total_tag_slots() >= kNullIndex || data_store_capacity >= kNullIndex) {
    throw ConfigError("geometry too large for 32-bit pointers");
  }
  if (total_tag_slots() <= data_store_capacity) {
    throw ConfigError("tag store (" + std::to_string(total_tag_slots()) +
                      " slots) must be larger than the data store (" +
                      std::to_string(data_store_capacity) + " lines)");
  }
  if (cipher == ciphers::BlockCipherKind::kBuggyPresent80 && !allow_buggy_present) {
    throw ConfigError("buggy-present cipher requires the buggy-present bug-compat flag");
  }
}

MirageCache::MirageCache(const CacheConfig& config)
    : config_(validated(config)),
      index_(ciphers::IndexDerivation::with_random_keys(
          config.cipher, config.sets_per_skew, derive_seed(config.rng_seed, kKeyStream),
          cipher_policy(config))),
      ways_(config.ways_per_skew()),
      tags_(config.total_tag_slots()),
      set_valid_(config.num_sets(), 0),
      data_(config.data_store_capacity),
      occupied_pos_(config.data_store_capacity, kNullIndex),
      rng_(derive_seed(config.rng_seed, kPolicyStream)) {
  free_.reserve(config.data_store_capacity);
  occupied_.reserve(config.data_store_capacity);
  for (std::uint64_t d = config.data_store_capacity; d-- > 0;) {
    free_.push_back(static_cast<std::uint32_t>(d));
  }
}

TagSlot MirageCache::slot_of(std::uint32_t flat_index) const {
  const std::uint32_t set_id = flat_index / ways_;
  return {set_id / config_.sets_per_skew, set_id % config_.sets_per_skew, flat_index % ways_};
}

std::uint32_t MirageCache::allocate_data(std::uint32_t tag_index) {
  if (free_.empty()) {
    throw CapacityViolation("data store exhausted: install would exceed " +
                                std::to_string(config_.data_store_capacity) + " lines",
                            occupied_.size() + 1, config_.data_store_capacity);
  }
  const std::uint32_t d = free_.back();
  free_.pop_back();
  data_[d].rptr = tag_index;
  occupied_pos_[d] = static_cast<std::uint32_t>(occupied_.size());
  occupied_.push_back(d);
  return d;
}

void MirageCache::free_data(std::uint32_t d) {
  const std::uint32_t pos = occupied_pos_[d];
  const std::uint32_t last = occupied_.back();
  occupied_[pos] = last;
  occupied_pos_[last] = pos;
  occupied_.pop_back();
  occupied_pos_[d] = kNullIndex;
  data_[d].rptr = kNullIndex;
  free_.push_back(d);
}

void MirageCache::invalidate(std::uint32_t tag_index) {
  TagEntry& t = tags_[tag_index];
  assert(t.valid);
  if (t.fptr != kNullIndex) {
    free_data(t.fptr);
  } else {
    --detached_tags_;
  }
  t.valid = false;
  t.fptr = kNullIndex;
  --set_valid_[tag_index / ways_];
  --valid_tags_;
}

InstallOutcome MirageCache::install(std::uint64_t line_address) {
  const std::uint32_t sets = config_.sets_per_skew;
  const std::array<std::uint32_t, 2> set_id = {index_.set_index(0, line_address),
                                               sets + index_.set_index(1, line_address)};
  InstallOutcome out;

  for (std::uint32_t id : set_id) {
    const std::uint32_t base = id * ways_;
    for (std::uint32_t w = 0; w < ways_; ++w) {
      const TagEntry& t = tags_[base + w];
      if (t.valid && t.tag == line_address) {
        out.kind = OutcomeKind::kHit;
        out.candidate_valid = {set_valid_[set_id[0]], set_valid_[set_id[1]]};
        return out;
      }
    }
  }

  bool evicted_globally = false;
  if (config_.global_evictions_enabled && occupied_.size() >= config_.data_store_capacity) {
    out.evicted_address = global_evict();
    evicted_globally = true;
  }

  const std::uint32_t v0 = set_valid_[set_id[0]];
  const std::uint32_t v1 = set_valid_[set_id[1]];
  out.candidate_valid = {v0, v1};
  const std::uint32_t skew = v0 < v1 ? 0 : (v1 < v0 ? 1 : (rng_.coin() ? 0 : 1));
  const std::uint32_t base = set_id[skew] * ways_;

  std::uint32_t way = 0;
  if (set_valid_[set_id[skew]] < ways_) {
    while (tags_[base + way].valid) ++way;
    out.kind = evicted_globally ? OutcomeKind::kMissWithGlobalEviction : OutcomeKind::kMissInstalled;
  } else {
    // Both candidates full: the chosen set has the fewest valid tags.
    assert(v0 == ways_ && v1 == ways_);
    way = static_cast<std::uint32_t>(rng_.below(ways_));
    out.kind = OutcomeKind::kSetAssociativeEviction;
    out.evicted_address = tags_[base + way].tag;
    invalidate(base + way);
  }

  std::uint32_t d = kNullIndex;
  if (free_.empty() && !config_.enforce_capacity && !config_.global_evictions_enabled) {
    out.over_capacity = true;
    ++detached_tags_;
  } else {
    d = allocate_data(base + way);
  }
  TagEntry& t = tags_[base + way];
  t.valid = true;
  t.tag = line_address;
  t.fptr = d;
  ++set_valid_[set_id[skew]];
  ++valid_tags_;
  return out;
}

std::uint64_t MirageCache::global_evict() {
  if (occupied_.empty()) throw UsageError("global_evict on an empty data store");
  const std::uint32_t d = occupied_[rng_.below(occupied_.size())];
  const std::uint32_t tag_index = data_[d].rptr;
  const std::uint64_t address = tags_[tag_index].tag;
  invalidate(tag_index);
  return address;
}

void MirageCache::init_valid(std::uint64_t k, std::uint64_t address_seed) {
  if (!is_fresh()) throw UsageError("init_valid requires a fresh cache");
  if (k > config_.data_store_capacity) {
    throw UsageError("init_valid: k = " + std::to_string(k) + " exceeds data-store capacity " +
                     std::to_string(config_.data_store_capacity));
  }
  Xoshiro256 addresses(address_seed);
  for (std::uint64_t installed = 0; installed < k;) {
    if (install(addresses()).kind != OutcomeKind::kHit) ++installed;
  }
}

std::uint64_t MirageCache::init_buggy_bernoulli(double p) {
  if (!config_.allow_bernoulli_init) {
    throw ConfigError("Bernoulli tag initialization requires the bernoulli-init bug-compat flag");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("probability must be in [0, 1]");
  if (!is_fresh()) throw UsageError("init_buggy_bernoulli requires a fresh cache");

  for (std::uint32_t i = 0; i < tags_.size(); ++i) {
    if (!(rng_.uniform01() < p)) continue;
    TagEntry& t = tags_[i];
    t.valid = true;
    t.tag = rng_();
    if (!free_.empty()) {
      t.fptr = allocate_data(i);
    } else {
      t.fptr = kNullIndex;
      ++detached_tags_;
    }
    ++set_valid_[i / ways_];
    ++valid_tags_;
  }
  if (detached_tags_ > 0) {
    std::clog << "WARNING: Bernoulli initialization produced " << valid_tags_
              << " valid tags for a data store of " << config_.data_store_capacity << " lines; "
              << detached_tags_ << " tags have no data entry\n";
  }
  return detached_tags_;
}

ReferenceLog MirageCache::run_references(std::uint64_t n, const RunOptions& options) {
  constexpr std::size_t kRecent = 4096;
  ReferenceLog log;
  Xoshiro256 addresses(options.address_seed);
  std::vector<std::uint64_t> recent;
  std::size_t recent_next = 0;

  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t address;
    if (options.source == AddressSource::kRecycledMix && !recent.empty() && addresses.coin()) {
      address = recent[addresses.below(recent.size())];
    } else {
      address = addresses();
      if (options.source == AddressSource::kRecycledMix) {
        if (recent.size() < kRecent) {
          recent.push_back(address);
        } else {
          recent[recent_next] = address;
          recent_next = (recent_next + 1) % kRecent;
        }
      }
    }

    InstallOutcome out;
    try {
      out = install(address);
    } catch (const CapacityViolation&) {
      log.capacity_violation_index = i;
      break;
    }
    if (out.over_capacity && !log.capacity_violation_index) log.capacity_violation_index = i;
    ++log.references;
    ++log.kind_counts[static_cast<std::size_t>(out.kind)];
    if (out.kind == OutcomeKind::kSetAssociativeEviction) {
      ++log.sae_count;
      if (!log.first_sae_index) log.first_sae_index = i;
    }
    if (options.on_outcome) options.on_outcome(i, out, log.sae_count);
    if (options.stop_at_first_sae && log.first_sae_index) break;
  }
  return log;
}

std::vector<std::uint32_t> MirageCache::occupancy_histogram() const { return set_valid_; }

bool MirageCache::check_invariants() const {
  std::vector<std::uint32_t> per_set(set_valid_.size(), 0);
  std::uint64_t valid = 0, detached = 0, linked = 0;
  for (std::uint32_t i = 0; i < tags_.size(); ++i) {
    const TagEntry& t = tags_[i];
    if (!t.valid) {
      if (t.fptr != kNullIndex) return false;
      continue;
    }
    ++valid;
    ++per_set[i / ways_];
    if (t.fptr == kNullIndex) {
      ++detached;
      continue;
    }
    if (t.fptr >= data_.size() || data_[t.fptr].rptr != i) return false;
    ++linked;
  }
  if (valid != valid_tags_ || detached != detached_tags_ || per_set != set_valid_) return false;
  for (std::uint32_t c : set_valid_) {
    if (c > ways_) return false;
  }

  std::uint64_t occupied = 0;
  for (std::uint32_t d = 0; d < data_.size(); ++d) {
    const DataEntry& e = data_[d];
    if (!e.occupied()) {
      if (occupied_pos_[d] != kNullIndex) return false;
      continue;
    }
    ++occupied;
    if (e.rptr >= tags_.size() || !tags_[e.rptr].valid || tags_[e.rptr].fptr != d) return false;
    if (occupied_pos_[d] >= occupied_.size() || occupied_[occupied_pos_[d]] != d) return false;
  }
  return occupied == linked && occupied == occupied_.size() &&
         occupied + free_.size() == config_.data_store_capacity &&
         occupied <= config_.data_store_capacity;
}

void MirageCache::write_snapshot(std::ostream& out) const {
  nlohmann::json j;
  j["format"] = "mirage-cache-snapshot";
  j["version"] = 1;
  j["config"] = {
      {"sets_per_skew", config_.sets_per_skew},
      {"base_ways_per_skew", config_.base_ways_per_skew},
      {"extra_ways_per_skew", config_.extra_ways_per_skew},
      {"data_store_capacity", config_.data_store_capacity},
      {"cipher", std::string(ciphers::to_string(config_.cipher))},
      {"global_evictions_enabled", config_.global_evictions_enabled},
      {"enforce_capacity", config_.enforce_capacity},
      {"rng_seed", config_.rng_seed},
  };
  // tags: [skew, set, way, address, fptr or -1]; data: [index, skew, set, way]
  auto& tags = j["tags"] = nlohmann::json::array();
  for (std::uint32_t i = 0; i < tags_.size(); ++i) {
    if (!tags_[i].valid) continue;
    const TagSlot s = slot_of(i);
    tags.push_back({s.skew, s.set, s.way, tags_[i].tag,
                    tags_[i].fptr == kNullIndex ? std::int64_t{-1} : std::int64_t{tags_[i].fptr}});
  }
  auto& data = j["data"] = nlohmann::json::array();
  for (std::uint32_t d = 0; d < data_.size(); ++d) {
    if (!data_[d].occupied()) continue;
    const TagSlot s = slot_of(data_[d].rptr);
    data.push_back({d, s.skew, s.set, s.way});
  }
  out << j.dump() << '\n';
}

}  // namespace mirage::cache
