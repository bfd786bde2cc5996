#include "pcmwl/baselines.hpp"

#include <algorithm>
#include <bit>

namespace pcmwl {

SrRegion::SrRegion(std::uint64_t size, std::uint64_t interval) : size_(size), interval_(interval) {
  if (size == 0 || !std::has_single_bit(size)) {
    throw ConfigError("security refresh region size must be a power of two");
  }
  if (interval == 0) throw ConfigError("security refresh interval must be positive");
}

std::uint64_t SrRegion::inverse(std::uint64_t x) const {
  const std::uint64_t via_cur = x ^ k_cur_;
  if (refreshed(via_cur)) return via_cur;
  return x ^ k_prev_;
}

std::optional<SrRegion::Move> SrRegion::refresh_step(Rng& rng) {
  std::optional<Move> move;
  const std::uint64_t m = sp_;
  const std::uint64_t partner = m ^ k_prev_ ^ k_cur_;
  if (partner > m) {
    move = Move{m, partner, m ^ k_cur_, m ^ k_prev_};
  }
  if (++sp_ == size_) {
    k_prev_ = k_cur_;
    k_cur_ = rng.uniform_below(size_);
    sp_ = 0;
    ++rounds_;
  }
  return move;
}

void SrRegion::set_state(std::uint64_t k_prev, std::uint64_t k_cur, std::uint64_t sp) {
  if (k_prev >= size_ || k_cur >= size_ || sp > size_) {
    throw std::out_of_range("security refresh state out of range");
  }
  k_prev_ = k_prev;
  k_cur_ = k_cur;
  sp_ = sp;
}

void write_or_absorb(PhysicalRow row, BlockArray& blocks, WriteOutcome& out) {
  if (blocks.at(row).mapped_out) {
    out.absorbed = true;
    return;
  }
  blocks.write(row);
  out.physical_targets.push_back(row);
}

SrOneLevel::SrOneLevel(const Geometry& geometry, std::uint64_t interval) : geometry_(geometry) {
  regions_.reserve(geometry.subarrays());
  for (std::uint32_t s = 0; s < geometry.subarrays(); ++s) {
    regions_.emplace_back(geometry.rows_per_subarray(), interval);
  }
}

PhysicalRow SrOneLevel::translate(LogicalAddress a) const {
  const auto [s, m] = geometry_.decompose(a);
  return PhysicalRow{geometry_.compose(s, static_cast<std::uint32_t>(regions_[s].translate(m))).value};
}

LogicalAddress SrOneLevel::resident(PhysicalRow row) const {
  const auto [s, x] = geometry_.decompose(LogicalAddress{row.value});
  return geometry_.compose(s, static_cast<std::uint32_t>(regions_[s].inverse(x)));
}

void SrOneLevel::on_write(LogicalAddress a, Rng& rng, BlockArray& blocks, const AddressSpace& space,
                          WriteOutcome& out) {
  const auto s = geometry_.decompose(a).first;
  write_or_absorb(translate(a), blocks, out);
  SrRegion& region = regions_[s];
  if (!region.count_write()) return;
  out.sr_refresh_steps += 1;
  if (const auto move = region.refresh_step(rng)) {
    const std::uint64_t base = std::uint64_t{s} * geometry_.rows_per_subarray();
    apply_refresh_move(
        *move, [base](std::uint64_t x) { return PhysicalRow{base + x}; },
        [base](std::uint64_t m) { return LogicalAddress{base + m}; }, blocks, space, out);
  }
}

SrTwoLevel::SrTwoLevel(const Geometry& geometry, std::uint64_t inner_interval,
                       std::uint64_t outer_interval)
    : geometry_(geometry), outer_(geometry.total_rows(), outer_interval) {
  inner_.reserve(geometry.subarrays());
  for (std::uint32_t g = 0; g < geometry.subarrays(); ++g) {
    inner_.emplace_back(geometry.rows_per_subarray(), inner_interval);
  }
}

PhysicalRow SrTwoLevel::physical_of_intermediate(std::uint64_t x) const {
  const auto [g, m] = geometry_.decompose(LogicalAddress{x});
  return PhysicalRow{geometry_.compose(g, static_cast<std::uint32_t>(inner_[g].translate(m))).value};
}

PhysicalRow SrTwoLevel::translate(LogicalAddress a) const {
  return physical_of_intermediate(outer_.translate(a.value));
}

LogicalAddress SrTwoLevel::resident(PhysicalRow row) const {
  const auto [g, y] = geometry_.decompose(LogicalAddress{row.value});
  const LogicalAddress x = geometry_.compose(g, static_cast<std::uint32_t>(inner_[g].inverse(y)));
  return LogicalAddress{outer_.inverse(x.value)};
}

void SrTwoLevel::on_write(LogicalAddress a, Rng& rng, BlockArray& blocks, const AddressSpace& space,
                          WriteOutcome& out) {
  const std::uint64_t x = outer_.translate(a.value);
  const auto g = geometry_.decompose(LogicalAddress{x}).first;
  write_or_absorb(physical_of_intermediate(x), blocks, out);

  if (outer_.count_write()) {
    out.sr_refresh_steps += 1;
    if (const auto move = outer_.refresh_step(rng)) {
      apply_refresh_move(
          *move, [this](std::uint64_t y) { return physical_of_intermediate(y); },
          [](std::uint64_t m) { return LogicalAddress{m}; }, blocks, space, out);
    }
  }
  SrRegion& inner = inner_[g];
  if (inner.count_write()) {
    out.sr_refresh_steps += 1;
    if (const auto move = inner.refresh_step(rng)) {
      const std::uint64_t base = std::uint64_t{g} * geometry_.rows_per_subarray();
      apply_refresh_move(
          *move, [base](std::uint64_t y) { return PhysicalRow{base + y}; },
          [this, base](std::uint64_t m) { return LogicalAddress{outer_.inverse(base + m)}; },
          blocks, space, out);
    }
  }
}

void NoLeveling::on_write(LogicalAddress a, BlockArray& blocks, WriteOutcome& out) const {
  write_or_absorb(translate(a), blocks, out);
}

IdealLeveling::IdealLeveling(std::uint64_t rows) : live_(rows) {
  for (std::uint64_t r = 0; r < rows; ++r) live_[r] = r;
}

void IdealLeveling::on_write(BlockArray& blocks, WriteOutcome& out) {
  if (live_.empty()) throw StateError("no live rows left");
  const PhysicalRow row{live_[writes_ % live_.size()]};
  ++writes_;
  blocks.write(row);
  out.physical_targets.push_back(row);
}

void IdealLeveling::remove_rows(std::uint64_t first, std::uint64_t count) {
  std::erase_if(live_, [&](std::uint64_t r) { return r >= first && r < first + count; });
}

FailureResult handle_failure_page_mapout(PhysicalRow failed, LogicalAddress resident,
                                         std::uint32_t page_blocks, BlockArray& blocks,
                                         AddressSpace& space) {
  blocks.retire(failed);
  FailureResult result;
  result.action = FailureAction::mapped_out;
  result.address = resident;
  if (space.live(resident)) {
    result.addresses_mapped_out = map_out_page(space, resident, page_blocks);
  }
  return result;
}

}  // namespace pcmwl
