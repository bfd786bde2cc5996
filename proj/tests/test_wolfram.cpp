#include <doctest.h>

#include <limits>

#include "pcmwl/wolfram.hpp"
#include "properties.hpp"

using namespace pcmwl;

namespace {

EnduranceModel never() {
  EnduranceModel m;
  m.mean = std::numeric_limits<double>::infinity();
  return m;
}

struct Rig {
  Geometry g;
  Rng rng{1};
  BlockArray blocks;
  AddressSpace space;
  WolframLeveler lv;
  Rig(std::uint32_t s, std::uint32_t r, std::uint32_t spares, WolframPolicy p = {},
      EnduranceModel m = never())
      : g(build_geometry(s, r, 64)),
        blocks(std::uint64_t{s} * (r + spares), m, 64, EcpConfig{}, rng),
        space(g.total_rows()),
        lv(g, p, spares) {
    lv.init_data_tags(blocks);
  }
};

}  // namespace

TEST_CASE("block swap merges the demand write") {
  Rig t(1, 8, 0);
  WriteOutcome out;
  t.lv.remap_swap_blocks(LogicalAddress{2}, LogicalAddress{6}, t.blocks, out);
  CHECK(t.lv.lookup(LogicalAddress{2})->value == 6);
  CHECK(t.lv.lookup(LogicalAddress{6})->value == 2);
  CHECK(out.extra_array_writes == 1);
  CHECK(out.physical_targets.size() == 2);
  CHECK(out.physical_targets[0].value == 6);
  CHECK(t.blocks.at(PhysicalRow{6}).data_tag == 2);
  CHECK(t.blocks.at(PhysicalRow{2}).wear == 1);
  CHECK(t.blocks.at(PhysicalRow{6}).wear == 1);
  CHECK_THROWS_AS(t.lv.remap_swap_blocks(LogicalAddress{2}, LogicalAddress{2}, t.blocks, out),
                  std::invalid_argument);
}

TEST_CASE("subarray swap on 2x4 rewrites every row") {
  Rig t(2, 4, 0);
  WriteOutcome out;
  t.lv.remap_swap_subarrays(0, 1, t.blocks, out);
  // Enumerated by hand: 4 + 4 row rewrites, one of them carries the demand.
  CHECK(out.physical_targets.size() == 8);
  CHECK(out.extra_array_writes == 2 * 4 - 1);
  CHECK(out.global_decoder_swaps == 1);
  CHECK(t.lv.physical_subarray_of(0) == 1);
  for (std::uint64_t a = 0; a < 8; ++a) {
    const auto row = t.lv.lookup(LogicalAddress{a});
    REQUIRE(row);
    CHECK(row->value / 4 == 1 - a / 4);
    CHECK(t.blocks.at(*row).data_tag == a);
  }
  for (std::uint64_t r = 0; r < 8; ++r) CHECK(t.blocks.at(PhysicalRow{r}).wear == 1);
}

TEST_CASE("subarray swap at full scale costs 2R - 1 extra writes") {
  Rig t(2, 512, 0);
  WriteOutcome out;
  t.lv.remap_swap_subarrays(0, 1, t.blocks, out);
  CHECK(out.extra_array_writes == 1023);
  CHECK(out.global_decoder_swaps == 1);
}

TEST_CASE("no-swap decision writes the demand row only") {
  Rig t(2, 8, 0, WolframPolicy{0.0, 0.0});
  WriteOutcome out;
  t.lv.on_write(LogicalAddress{11}, t.rng, t.blocks, out);
  CHECK(out.decision == Decision::none);
  CHECK(out.extra_array_writes == 0);
  REQUIRE(out.physical_targets.size() == 1);
  CHECK(out.physical_targets[0].value == 11);
}

TEST_CASE("failure remaps into a spare row") {
  Rig t(1, 4, 1);
  const auto r = t.lv.handle_failure(PhysicalRow{2}, t.blocks, t.space);
  CHECK(r.action == FailureAction::remapped);
  CHECK(r.new_row.value == 4);
  CHECK(r.array_writes == 1);
  CHECK(t.lv.lookup(LogicalAddress{2})->value == 4);
  CHECK(t.blocks.at(PhysicalRow{4}).data_tag == 2);
  CHECK(t.space.live(LogicalAddress{2}));
}

TEST_CASE("failure without a spare maps the address out") {
  Rig t(1, 4, 0);
  const auto r = t.lv.handle_failure(PhysicalRow{1}, t.blocks, t.space);
  CHECK(r.action == FailureAction::mapped_out);
  CHECK(r.addresses_mapped_out == 1);
  CHECK_FALSE(t.lv.lookup(LogicalAddress{1}).has_value());
  CHECK_FALSE(t.space.live(LogicalAddress{1}));
  WriteOutcome out;
  CHECK_THROWS_AS(t.lv.on_write(LogicalAddress{1}, t.rng, t.blocks, out), StateError);
}

TEST_CASE("partner selection skips mapped-out addresses") {
  Rig t(1, 4, 0);
  t.lv.handle_failure(PhysicalRow{1}, t.blocks, t.space);
  t.lv.handle_failure(PhysicalRow{2}, t.blocks, t.space);
  std::uint64_t retries = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = t.lv.retry_on_mapped_out(LogicalAddress{0}, t.rng, retries);
    REQUIRE(p);
    CHECK(p->value == 3);
  }
  CHECK(retries > 0);
  t.lv.handle_failure(PhysicalRow{3}, t.blocks, t.space);
  CHECK_FALSE(t.lv.retry_on_mapped_out(LogicalAddress{0}, t.rng, retries).has_value());
}

TEST_CASE("subarray swap with mapped-out rows preserves every live address") {
  Rig t(2, 4, 1);
  // Each side loses a different logical row after burning its spare.
  t.lv.handle_failure(PhysicalRow{0}, t.blocks, t.space);
  t.lv.handle_failure(PhysicalRow{4}, t.blocks, t.space);
  t.lv.handle_failure(PhysicalRow{6}, t.blocks, t.space);
  t.lv.handle_failure(PhysicalRow{9}, t.blocks, t.space);
  CHECK_FALSE(t.space.live(LogicalAddress{0}));
  CHECK_FALSE(t.space.live(LogicalAddress{5}));
  REQUIRE(t.lv.can_swap_subarrays(0, 1));
  WriteOutcome out;
  t.lv.remap_swap_subarrays(0, 1, t.blocks, out);
  for (std::uint64_t a = 0; a < 8; ++a) {
    const auto row = t.lv.lookup(LogicalAddress{a});
    CHECK(row.has_value() == t.space.live(LogicalAddress{a}));
    if (row) CHECK(t.blocks.at(*row).data_tag == a);
  }
  CHECK(out.extra_array_writes + 1 == out.physical_targets.size());
}

TEST_CASE("data tags are conserved under 100k mixed swaps and failures") {
  CHECK(props::data_tag_conservation(100000, 5) == "");
}
