#include "pcmwl/wolfram.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace pcmwl {

WolframLeveler::WolframLeveler(const Geometry& geometry, WolframPolicy policy,
                               std::uint32_t spares_per_subarray)
    : geometry_(geometry),
      policy_(policy),
      rows_per_physical_(geometry.rows_per_subarray() + spares_per_subarray),
      global_(geometry.subarrays(), geometry.subarrays()) {
  policy_.validate();
  if (std::uint64_t{geometry.rows_per_subarray()} + spares_per_subarray > 0xFFFFFFFFull) {
    throw ConfigError("spares_per_subarray overflows the decoder");
  }
  locals_.reserve(geometry.subarrays());
  for (std::uint32_t s = 0; s < geometry.subarrays(); ++s) {
    locals_.emplace_back(rows_per_physical_, geometry.rows_per_subarray());
  }
}

void WolframLeveler::init_data_tags(BlockArray& blocks) const {
  for (std::uint32_t ps = 0; ps < geometry_.subarrays(); ++ps) {
    const auto s = global_.row(ps).stored_address;
    for (std::uint32_t i = 0; i < rows_per_physical_; ++i) {
      const auto r = locals_[ps].row(i).stored_address;
      blocks.at(physical(ps, i)).data_tag =
          (s && r) ? geometry_.compose(*s, *r).value : kNoData;
    }
  }
}

std::uint32_t WolframLeveler::physical_subarray_of(std::uint32_t logical_subarray) const {
  // Subarrays are never mapped out, so the global lookup always matches.
  return *global_.lookup(logical_subarray);
}

std::optional<PhysicalRow> WolframLeveler::lookup(LogicalAddress a) const {
  const auto [s, r] = geometry_.decompose(a);
  const std::uint32_t ps = physical_subarray_of(s);
  const auto row = locals_[ps].lookup(r);
  if (!row) return std::nullopt;
  return physical(ps, *row);
}

std::optional<LogicalAddress> WolframLeveler::resident(PhysicalRow row) const {
  const auto ps = static_cast<std::uint32_t>(row.value / rows_per_physical_);
  const auto i = static_cast<std::uint32_t>(row.value % rows_per_physical_);
  const auto s = global_.row(ps).stored_address;
  const auto r = locals_.at(ps).row(i).stored_address;
  if (!s || !r) return std::nullopt;
  return geometry_.compose(*s, *r);
}

void WolframLeveler::on_write(LogicalAddress a, Rng& rng, BlockArray& blocks, WriteOutcome& out) {
  const auto home = lookup(a);
  if (!home) throw StateError("demand write to mapped-out address " + std::to_string(a.value));

  out.decision = draw_decision(rng, policy_);
  if (out.decision == Decision::block_swap) {
    if (const auto partner = retry_on_mapped_out(a, rng, out.mapped_out_retries)) {
      remap_swap_blocks(a, *partner, blocks, out);
      return;
    }
    out.no_partner = true;
  } else if (out.decision == Decision::subarray_swap) {
    const auto s = geometry_.decompose(a).first;
    if (const auto partner = pick_partner_subarray(s, rng)) {
      remap_swap_subarrays(s, *partner, blocks, out);
      return;
    }
    out.no_partner = true;
  }
  blocks.write(*home);
  out.physical_targets.push_back(*home);
}

void WolframLeveler::remap_swap_blocks(LogicalAddress demand, LogicalAddress partner,
                                       BlockArray& blocks, WriteOutcome& out) {
  const auto [s1, r1] = geometry_.decompose(demand);
  const auto [s2, r2] = geometry_.decompose(partner);
  if (s1 != s2) throw std::invalid_argument("block swap across subarrays");
  Prad& local = locals_[physical_subarray_of(s1)];
  const auto p1 = lookup(demand);
  const auto p2 = lookup(partner);
  // Throws before any wear is applied if either side is mapped out.
  local.reprogram_swap(r1, r2);

  auto& tag1 = blocks.at(*p1).data_tag;
  auto& tag2 = blocks.at(*p2).data_tag;
  std::swap(tag1, tag2);
  // Demand data goes straight into the partner's old row; the swap buffer
  // writes the partner's data back into the demand's old row.
  blocks.write(*p2);
  blocks.write(*p1);
  out.physical_targets.push_back(*p2);
  out.physical_targets.push_back(*p1);
  out.extra_array_writes += 1;
  out.buffered_writes += 2;
  out.decoder_swaps += 1;
}

bool WolframLeveler::can_swap_subarrays(std::uint32_t s1, std::uint32_t s2) const {
  const Prad& l1 = locals_[physical_subarray_of(s1)];
  const Prad& l2 = locals_[physical_subarray_of(s2)];
  return l1.mapped_count() <= l2.enabled_count() && l2.mapped_count() <= l1.enabled_count();
}

void WolframLeveler::remap_swap_subarrays(std::uint32_t s1, std::uint32_t s2, BlockArray& blocks,
                                          WriteOutcome& out) {
  if (s1 == s2) throw std::invalid_argument("subarray swap with itself");
  if (!can_swap_subarrays(s1, s2)) throw StateError("subarrays cannot host each other's rows");
  const std::uint32_t ps1 = physical_subarray_of(s1);
  const std::uint32_t ps2 = physical_subarray_of(s2);
  Prad& l1 = locals_[ps1];
  Prad& l2 = locals_[ps2];

  std::uint64_t writes = 0;
  auto rewrite = [&](PhysicalRow row) {
    blocks.write(row);
    out.physical_targets.push_back(row);
    ++out.buffered_writes;
    ++writes;
  };

  // Rows live on both sides trade places at their current local rows, so
  // neither local decoder changes. Rows live on one side only need a local
  // decoder entry on the other side.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> only1;  // (address, row in ps1)
  std::vector<std::pair<std::uint32_t, std::uint32_t>> only2;
  for (std::uint32_t r = 0; r < geometry_.rows_per_subarray(); ++r) {
    const auto i1 = l1.lookup(r);
    const auto i2 = l2.lookup(r);
    if (i1 && i2) {
      const PhysicalRow p1 = physical(ps1, *i1);
      const PhysicalRow p2 = physical(ps2, *i2);
      std::swap(blocks.at(p1).data_tag, blocks.at(p2).data_tag);
      rewrite(p1);
      rewrite(p2);
    } else if (i1) {
      only1.emplace_back(r, *i1);
    } else if (i2) {
      only2.emplace_back(r, *i2);
    }
  }

  const std::size_t paired = std::min(only1.size(), only2.size());
  for (std::size_t j = 0; j < paired; ++j) {
    const auto [a1, i1] = only1[j];
    const auto [a2, i2] = only2[j];
    l1.reassign(i1, a2);
    l2.reassign(i2, a1);
    const PhysicalRow p1 = physical(ps1, i1);
    const PhysicalRow p2 = physical(ps2, i2);
    std::swap(blocks.at(p1).data_tag, blocks.at(p2).data_tag);
    rewrite(p1);
    rewrite(p2);
    out.local_row_reprograms += 2;
  }
  auto move_leftovers = [&](const auto& leftovers, Prad& from, std::uint32_t from_ps, Prad& to,
                            std::uint32_t to_ps) {
    for (std::size_t j = paired; j < leftovers.size(); ++j) {
      const auto [address, row] = leftovers[j];
      const std::uint32_t dest = *to.lowest_empty_row();
      from.erase(row);
      to.program(dest, address);
      const PhysicalRow src = physical(from_ps, row);
      const PhysicalRow dst = physical(to_ps, dest);
      blocks.at(dst).data_tag = blocks.at(src).data_tag;
      blocks.at(src).data_tag = kNoData;
      rewrite(dst);
      out.local_row_reprograms += 1;
    }
  };
  move_leftovers(only1, l1, ps1, l2, ps2);
  move_leftovers(only2, l2, ps2, l1, ps1);

  global_.reprogram_swap(s1, s2);
  out.global_decoder_swaps += 1;
  // The demand write is merged into the rewrite of its own block.
  out.extra_array_writes += writes - 1;
}

std::optional<LogicalAddress> WolframLeveler::retry_on_mapped_out(LogicalAddress source, Rng& rng,
                                                                  std::uint64_t& retries) const {
  const auto [s, r] = geometry_.decompose(source);
  const Prad& local = locals_[physical_subarray_of(s)];
  const bool source_live = local.lookup(r).has_value();
  if (local.mapped_count() <= (source_live ? 1u : 0u)) return std::nullopt;
  const std::uint32_t rows = geometry_.rows_per_subarray();
  for (;;) {
    auto x = static_cast<std::uint32_t>(rng.uniform_below(rows - 1));
    if (x >= r) ++x;
    if (local.lookup(x)) return geometry_.compose(s, x);
    ++retries;
  }
}

std::optional<std::uint32_t> WolframLeveler::pick_partner_subarray(std::uint32_t s, Rng& rng) const {
  std::vector<std::uint32_t> candidates;
  candidates.reserve(geometry_.subarrays());
  for (std::uint32_t t = 0; t < geometry_.subarrays(); ++t) {
    if (t != s && can_swap_subarrays(s, t)) candidates.push_back(t);
  }
  if (candidates.empty()) return std::nullopt;
  return candidates[rng.uniform_below(candidates.size())];
}

FailureResult WolframLeveler::handle_failure(PhysicalRow failed, BlockArray& blocks,
                                             AddressSpace& space) {
  const auto ps = static_cast<std::uint32_t>(failed.value / rows_per_physical_);
  const auto i = static_cast<std::uint32_t>(failed.value % rows_per_physical_);
  const auto address = resident(failed);
  if (!address) throw StateError("failed row holds no address");

  FailureResult result;
  result.address = *address;
  blocks.retire(failed);
  const auto outcome = locals_.at(ps).disable_and_remap(i);
  if (const auto* moved = std::get_if<Remapped>(&outcome)) {
    const PhysicalRow dest = physical(ps, moved->new_row);
    blocks.at(dest).data_tag = blocks.at(failed).data_tag;
    blocks.at(failed).data_tag = kNoData;
    blocks.write(dest);
    result.action = FailureAction::remapped;
    result.new_row = dest;
    result.array_writes = 1;
  } else {
    blocks.at(failed).data_tag = kNoData;
    space.map_out(*address);
    result.action = FailureAction::mapped_out;
    result.addresses_mapped_out = 1;
  }
  return result;
}

}  // namespace pcmwl
