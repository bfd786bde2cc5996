#include "pcmwl/fault.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pcmwl {

std::uint32_t register_write(BlockState& b) {
  if (b.mapped_out) throw StateError("write to a retired block");
  ++b.wear;
  std::uint32_t newly = 0;
  while (b.failed_bits < b.limits.size() && b.wear > b.limits[b.failed_bits]) {
    ++b.failed_bits;
    ++newly;
  }
  return newly;
}

std::uint32_t count_failed_bits(std::uint64_t wear, std::span<const std::uint64_t> limits) {
  return static_cast<std::uint32_t>(
      std::count_if(limits.begin(), limits.end(), [wear](std::uint64_t l) { return wear > l; }));
}

std::uint64_t endurance_limit(double threshold) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (!(threshold < 1.8e19)) return kMax;
  return static_cast<std::uint64_t>(std::floor(threshold));
}

BlockArray::BlockArray(std::uint64_t rows, const EnduranceModel& model,
                       std::uint32_t bits_per_block, EcpConfig ecp, Rng& rng)
    : blocks_(rows), ecp_(ecp) {
  model.validate();
  if (std::uint64_t{ecp.k} + 1 > bits_per_block) {
    throw ConfigError("ecp_k must be smaller than bits_per_block");
  }
  if (model.unbounded()) return;
  const std::size_t per_block = std::size_t{ecp.k} + 1;
  limit_storage_.resize(rows * per_block);
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto thresholds = sample_block_thresholds(rng, model, bits_per_block, ecp.k);
    std::uint64_t* dst = limit_storage_.data() + r * per_block;
    for (std::size_t j = 0; j < per_block; ++j) dst[j] = endurance_limit(thresholds[j]);
    blocks_[r].limits = std::span<const std::uint64_t>(dst, per_block);
  }
}

void BlockArray::write(PhysicalRow r) {
  BlockState& b = blocks_.at(r.value);
  const std::uint64_t old = b.wear;
  const bool was_correctable = check_correctable(b, ecp_) == Correctability::correctable;
  register_write(b);
  ++array_writes_;
  if (scope_.contains(r.value)) scope_.bump(old);
  if (was_correctable && check_correctable(b, ecp_) == Correctability::uncorrectable) {
    pending_.push_back(r);
  }
}

void BlockArray::retire(PhysicalRow r) { blocks_.at(r.value).mapped_out = true; }

std::vector<PhysicalRow> BlockArray::take_failures() {
  std::vector<PhysicalRow> out;
  out.swap(pending_);
  return out;
}

void BlockArray::set_scope(std::uint64_t first_row, std::uint64_t rows) {
  if (first_row + rows > blocks_.size()) throw ConfigError("wear scope exceeds the bank");
  scope_ = ScopeMoments(first_row, rows);
  for (std::uint64_t r = first_row; r < first_row + rows; ++r) scope_.add_row(blocks_[r].wear);
}

std::vector<std::uint64_t> BlockArray::wear_counts(std::uint64_t first_row,
                                                   std::uint64_t rows) const {
  std::vector<std::uint64_t> out;
  out.reserve(rows);
  for (std::uint64_t r = first_row; r < first_row + rows; ++r) out.push_back(blocks_.at(r).wear);
  return out;
}

AddressSpace::AddressSpace(std::uint64_t addresses)
    : live_(addresses, 1), live_count_(addresses) {
  if (addresses == 0) throw ConfigError("empty address space");
}

void AddressSpace::map_out(LogicalAddress a) {
  auto& flag = live_.at(a.value);
  if (!flag) throw StateError("address " + std::to_string(a.value) + " already mapped out");
  flag = 0;
  --live_count_;
}

std::optional<LogicalAddress> AddressSpace::sample_live(Rng& rng) const {
  if (live_count_ == 0) return std::nullopt;
  for (;;) {
    const LogicalAddress a{rng.uniform_below(live_.size())};
    if (live_[a.value]) return a;
  }
}

std::uint64_t map_out_page(AddressSpace& space, LogicalAddress a, std::uint32_t page_blocks) {
  if (page_blocks == 0) throw ConfigError("page_blocks must be positive");
  const std::uint64_t first = a.value / page_blocks * page_blocks;
  const std::uint64_t last = std::min<std::uint64_t>(first + page_blocks, space.total());
  for (std::uint64_t x = first; x < last; ++x) {
    if (!space.live(LogicalAddress{x})) {
      throw StateError("page containing address " + std::to_string(a.value) +
                       " is already mapped out");
    }
  }
  for (std::uint64_t x = first; x < last; ++x) space.map_out(LogicalAddress{x});
  return last - first;
}

}  // namespace pcmwl
