#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mirage/ciphers/index_derivation.hpp"
#include "mirage/rng.hpp"

namespace mirage::cache {

struct CacheConfig {
  static constexpr std::uint32_t kSkews = 2;
  static constexpr std::uint32_t kLineBytes = 64;

  std::uint32_t sets_per_skew = 16384;
  std::uint32_t base_ways_per_skew = 8;
  std::uint32_t extra_ways_per_skew = 6;
  std::uint64_t data_store_capacity = 262'144;
  ciphers::BlockCipherKind cipher = ciphers::BlockCipherKind::kAes128;
  bool global_evictions_enabled = true;
  // Bug-compat opt-ins. Each must be set explicitly.
  bool allow_buggy_present = false;
  bool allow_bernoulli_init = false;
  // Only consulted when global evictions are off. false lets installs run
  // past a full data store (the surplus tags get no data entry), the way the
  // original simulator behaved with no data store at all.
  bool enforce_capacity = true;
  std::uint64_t rng_seed = 1;

  std::uint32_t ways_per_skew() const { return base_ways_per_skew + extra_ways_per_skew; }
  std::uint64_t total_tag_slots() const {
    return std::uint64_t{kSkews} * sets_per_skew * ways_per_skew();
  }
  std::uint32_t num_sets() const { return kSkews * sets_per_skew; }

  // Geometry of a `bytes`-sized LLC with 64 B lines and the current way
  // split: capacity = bytes / 64, sets_per_skew = capacity / (2 * base).
  static CacheConfig for_capacity_bytes(std::uint64_t bytes, CacheConfig base);
  static CacheConfig for_capacity_bytes(std::uint64_t bytes);

  // Throws ConfigError.
  void validate() const;
};

inline constexpr std::uint32_t kNullIndex = 0xFFFF'FFFFu;

struct TagEntry {
  std::uint64_t tag = 0;  // full line address
  std::uint32_t fptr = kNullIndex;
  bool valid = false;
};

struct TagSlot {
  std::uint32_t skew = 0;
  std::uint32_t set = 0;
  std::uint32_t way = 0;
  friend bool operator==(const TagSlot&, const TagSlot&) = default;
};

struct DataEntry {
  // Flat tag-store index of the owning tag, kNullIndex when free.
  std::uint32_t rptr = kNullIndex;
  bool occupied() const { return rptr != kNullIndex; }
};

enum class OutcomeKind : std::uint8_t {
  kHit,
  kMissInstalled,
  kMissWithGlobalEviction,
  kSetAssociativeEviction,
};

const char* to_string(OutcomeKind kind);

struct InstallOutcome {
  OutcomeKind kind = OutcomeKind::kHit;
  // Line evicted by this install (set-associative victim takes precedence
  // over the global-eviction victim).
  std::optional<std::uint64_t> evicted_address;
  // Valid tags in the skew-0 / skew-1 candidate sets when the install
  // decision was made.
  std::array<std::uint32_t, 2> candidate_valid{0, 0};
  // Installed with no data entry because the data store was full
  // (enforce_capacity = false only).
  bool over_capacity = false;
};

enum class AddressSource {
  kRandom,
  // Half the references re-use one of the last 4096 addresses issued.
  kRecycledMix,
};

struct ReferenceLog {
  std::uint64_t references = 0;
  std::array<std::uint64_t, 4> kind_counts{};  // indexed by OutcomeKind
  std::uint64_t sae_count = 0;
  std::optional<std::uint64_t> first_sae_index;
  // Reference that first found the data store exhausted (bug-compat). With
  // enforce_capacity the run stops there.
  std::optional<std::uint64_t> capacity_violation_index;
};

struct RunOptions {
  AddressSource source = AddressSource::kRandom;
  std::uint64_t address_seed = 0;
  bool stop_at_first_sae = false;
  // Called after every reference with (reference_index, outcome, sae_cumulative).
  std::function<void(std::uint64_t, const InstallOutcome&, std::uint64_t)> on_outcome;
};

class MirageCache {
 public:
  // All tags invalid, data store empty. Throws ConfigError.
  explicit MirageCache(const CacheConfig& config);

  const CacheConfig& config() const { return config_; }

  InstallOutcome install(std::uint64_t line_address);

  // Evicts a uniformly random resident line and its tag. Throws UsageError
  // when the data store is empty.
  std::uint64_t global_evict();

  // Installs k distinct random addresses through install(). Requires a fresh
  // cache and k <= data_store_capacity.
  void init_valid(std::uint64_t k, std::uint64_t address_seed);

  // Marks each tag valid independently with probability p (bug-compat).
  // Returns the number of tags that could not be given a data entry.
  std::uint64_t init_buggy_bernoulli(double p = 0.5);

  ReferenceLog run_references(std::uint64_t n, const RunOptions& options);

  // Valid tags per set: skew 0 sets followed by skew 1 sets.
  std::vector<std::uint32_t> occupancy_histogram() const;

  std::uint64_t data_occupancy() const { return occupied_.size(); }
  std::uint64_t valid_tags() const { return valid_tags_; }
  std::uint64_t detached_tags() const { return detached_tags_; }
  bool is_fresh() const { return valid_tags_ == 0 && occupied_.empty(); }

  const TagEntry& tag(const TagSlot& slot) const { return tags_[flat(slot)]; }
  const DataEntry& data(std::uint32_t index) const { return data_[index]; }
  TagSlot slot_of(std::uint32_t flat_index) const;

  // Full scan of the forward/reverse pointer bijection, valid counts and
  // per-set bounds.
  bool check_invariants() const;

  // Versioned JSON snapshot of all valid tags and occupied data entries.
  void write_snapshot(std::ostream& out) const;

 private:
  std::uint32_t flat(const TagSlot& s) const {
    return (s.skew * config_.sets_per_skew + s.set) * ways_ + s.way;
  }
  std::uint32_t set_base(std::uint32_t skew, std::uint32_t set) const {
    return (skew * config_.sets_per_skew + set) * ways_;
  }
  std::uint32_t allocate_data(std::uint32_t tag_index);
  void free_data(std::uint32_t data_index);
  void invalidate(std::uint32_t tag_index);

  CacheConfig config_;
  ciphers::IndexDerivation index_;
  std::uint32_t ways_;
  std::vector<TagEntry> tags_;
  std::vector<std::uint32_t> set_valid_;  // valid tags per set
  std::vector<DataEntry> data_;
  std::vector<std::uint32_t> free_;           // free data entries (stack)
  std::vector<std::uint32_t> occupied_;       // occupied data entries
  std::vector<std::uint32_t> occupied_pos_;   // position of entry in occupied_
  std::uint64_t valid_tags_ = 0;
  std::uint64_t detached_tags_ = 0;
  Xoshiro256 rng_;
};

}  // namespace mirage::cache
