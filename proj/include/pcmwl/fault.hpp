#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcmwl/core.hpp"
#include "pcmwl/metrics.hpp"

namespace pcmwl {

/// ECP_k: up to k failed cells per block are repaired by pointers.
struct EcpConfig {
  std::uint32_t k = 0;
};

inline constexpr std::uint64_t kNoData = ~std::uint64_t{0};

/// A block's wear state. `limits` holds the integer endurances of its k+1
/// weakest cells in ascending order: a cell survives exactly `limit` writes
/// and fails on write limit+1. An empty span means the block never fails.
struct BlockState {
  std::uint64_t wear = 0;
  std::span<const std::uint64_t> limits;
  std::uint32_t failed_bits = 0;
  bool mapped_out = false;
  std::uint64_t data_tag = kNoData;
};

/// One write with read-after-write verification. Returns the number of
/// cells that failed on this write. Throws StateError on a retired block.
std::uint32_t register_write(BlockState& b);

enum class Correctability { correctable, uncorrectable };

inline Correctability check_correctable(const BlockState& b, EcpConfig ecp) {
  return b.failed_bits >= ecp.k + 1 ? Correctability::uncorrectable
                                    : Correctability::correctable;
}

/// failed_bits recomputed from scratch.
std::uint32_t count_failed_bits(std::uint64_t wear, std::span<const std::uint64_t> limits);

/// Integer endurance of a sampled threshold (floor, infinity saturates).
std::uint64_t endurance_limit(double threshold);

/// Physical rows of a bank with their endurance, wear and data tags. Every
/// array write goes through write(), which keeps the wear scope statistics
/// and queues rows that just became uncorrectable.
class BlockArray {
 public:
  /// Samples k+1 thresholds per row from `rng` unless the model is unbounded.
  BlockArray(std::uint64_t rows, const EnduranceModel& model, std::uint32_t bits_per_block,
             EcpConfig ecp, Rng& rng);

  std::uint64_t size() const { return blocks_.size(); }
  BlockState& at(PhysicalRow r) { return blocks_.at(r.value); }
  const BlockState& at(PhysicalRow r) const { return blocks_.at(r.value); }
  EcpConfig ecp() const { return ecp_; }

  /// Apply one array write. Throws StateError on a retired row.
  void write(PhysicalRow r);
  /// Mark a row retired; it receives no wear from now on.
  void retire(PhysicalRow r);

  /// Rows that became uncorrectable since the last call, in write order.
  std::vector<PhysicalRow> take_failures();
  bool has_failures() const { return !pending_.empty(); }

  std::uint64_t array_writes() const { return array_writes_; }

  void set_scope(std::uint64_t first_row, std::uint64_t rows);
  const ScopeMoments& scope() const { return scope_; }

  std::vector<std::uint64_t> wear_counts(std::uint64_t first_row, std::uint64_t rows) const;

 private:
  std::vector<BlockState> blocks_;
  std::vector<std::uint64_t> limit_storage_;
  EcpConfig ecp_;
  std::vector<PhysicalRow> pending_;
  std::uint64_t array_writes_ = 0;
  ScopeMoments scope_;
};

/// Logical addresses still in the usable address space.
class AddressSpace {
 public:
  explicit AddressSpace(std::uint64_t addresses);

  bool live(LogicalAddress a) const { return live_.at(a.value) != 0; }
  std::uint64_t total() const { return live_.size(); }
  std::uint64_t live_count() const { return live_count_; }
  /// Remove one address; throws StateError if it is already mapped out.
  void map_out(LogicalAddress a);

  double usable_capacity() const {
    return static_cast<double>(live_count_) / static_cast<double>(live_.size());
  }

  /// Uniform live address by rejection; nullopt when nothing is live.
  std::optional<LogicalAddress> sample_live(Rng& rng) const;

 private:
  std::vector<std::uint8_t> live_;
  std::uint64_t live_count_;
};

/// Maps out the aligned page of `page_blocks` addresses containing `a`.
/// Throws StateError if any address of the page is already out.
/// Returns the number of addresses removed.
std::uint64_t map_out_page(AddressSpace& space, LogicalAddress a, std::uint32_t page_blocks);

}  // namespace pcmwl
