#include <doctest.h>

#include <limits>
#include <set>

#include "pcmwl/baselines.hpp"
#include "properties.hpp"

using namespace pcmwl;

TEST_CASE("security refresh translation example") {
  SrRegion r(8, 1);
  r.set_state(0, 5, 3);
  CHECK(r.translate(2) == 7);
  CHECK(r.translate(3) == 3);  // 3^5 = 6 >= sp: not yet refreshed
  CHECK(r.inverse(7) == 2);
}

TEST_CASE("refresh step at sp = 0 swaps physical blocks 0 and 5") {
  SrRegion r(8, 1);
  r.set_state(0, 5, 0);
  Rng rng(1);
  const auto mv = r.refresh_step(rng);
  REQUIRE(mv);
  CHECK(std::set<std::uint64_t>{mv->dest_a, mv->dest_b} == std::set<std::uint64_t>{0, 5});
  CHECK(r.sp() == 1);
  // Step at sp = 5: partner 0 was already handled.
  r.set_state(0, 5, 5);
  CHECK_FALSE(r.refresh_step(rng).has_value());
}

TEST_CASE("region rejects bad sizes") {
  CHECK_THROWS_AS(SrRegion(6, 1), ConfigError);
  CHECK_THROWS_AS(SrRegion(8, 0), ConfigError);
}

TEST_CASE("full-round relocation, R = 8") { CHECK(props::sr_full_round_relocation(8, 1) == ""); }
TEST_CASE("full-round relocation, R = 64") { CHECK(props::sr_full_round_relocation(64, 2) == ""); }

namespace {
EnduranceModel never() {
  EnduranceModel m;
  m.mean = std::numeric_limits<double>::infinity();
  return m;
}
}  // namespace

TEST_CASE("one-level SR refreshes every interval writes") {
  const Geometry g = build_geometry(2, 8, 16);
  Rng rng(3);
  BlockArray blocks(16, never(), 16, EcpConfig{}, rng);
  AddressSpace space(16);
  SrOneLevel sr(g, 4);
  std::uint64_t extra = 0, steps = 0, swaps = 0;
  for (int i = 0; i < 400; ++i) {
    WriteOutcome out;
    sr.on_write(LogicalAddress{9}, rng, blocks, space, out);
    extra += out.extra_array_writes;
    steps += out.sr_refresh_steps;
    swaps += out.sr_swap_steps;
    CHECK(out.physical_targets.front().value / 8 == 1);
  }
  CHECK(steps == 100);
  CHECK(extra == 2 * swaps);
  CHECK(blocks.array_writes() == 400 + extra);
  CHECK(sr.region(0).sp() == 0);
}

TEST_CASE("two-level SR translation is a bijection in every state") {
  const Geometry g = build_geometry(4, 8, 16);
  SrTwoLevel sr(g, 2, 3);
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    sr.outer_mut().set_state(rng.uniform_below(32), rng.uniform_below(32), rng.uniform_below(33));
    for (std::uint32_t i = 0; i < 4; ++i) {
      sr.inner_mut(i).set_state(rng.uniform_below(8), rng.uniform_below(8), rng.uniform_below(9));
    }
    std::set<std::uint64_t> rows;
    for (std::uint64_t a = 0; a < 32; ++a) {
      const auto p = sr.translate(LogicalAddress{a});
      rows.insert(p.value);
      CHECK(sr.resident(p).value == a);
    }
    CHECK(rows.size() == 32);
  }
}

TEST_CASE("two-level SR keeps data consistent while running") {
  const Geometry g = build_geometry(4, 8, 16);
  Rng rng(5);
  BlockArray blocks(32, never(), 16, EcpConfig{}, rng);
  AddressSpace space(32);
  SrTwoLevel sr(g, 2, 3);
  std::uint64_t extra = 0, swaps = 0;
  for (int i = 0; i < 20000; ++i) {
    WriteOutcome out;
    sr.on_write(LogicalAddress{rng.uniform_below(32)}, rng, blocks, space, out);
    extra += out.extra_array_writes;
    swaps += out.sr_swap_steps;
  }
  CHECK(extra == 2 * swaps);
  CHECK(sr.outer().rounds() > 0);
}

TEST_CASE("demand writes to retired rows are absorbed") {
  Rng rng(1);
  BlockArray blocks(4, never(), 16, EcpConfig{}, rng);
  blocks.retire(PhysicalRow{2});
  WriteOutcome out;
  write_or_absorb(PhysicalRow{2}, blocks, out);
  CHECK(out.absorbed);
  CHECK(blocks.array_writes() == 0);
}

TEST_CASE("no-leveling and ideal leveling") {
  Rng rng(1);
  BlockArray blocks(8, never(), 16, EcpConfig{}, rng);
  NoLeveling none;
  WriteOutcome out;
  none.on_write(LogicalAddress{5}, blocks, out);
  CHECK(blocks.at(PhysicalRow{5}).wear == 1);

  IdealLeveling ideal(8);
  ideal.remove_rows(4, 4);
  CHECK(ideal.live_rows() == 4);
  for (int i = 0; i < 8; ++i) {
    out.clear();
    ideal.on_write(blocks, out);
    CHECK(out.physical_targets.front().value < 4);
  }
  CHECK(blocks.at(PhysicalRow{0}).wear == 2);
}

TEST_CASE("page map-out retires the row and the aligned page") {
  Rng rng(1);
  BlockArray blocks(16, never(), 16, EcpConfig{}, rng);
  AddressSpace space(16);
  const auto r = handle_failure_page_mapout(PhysicalRow{3}, LogicalAddress{6}, 4, blocks, space);
  CHECK(r.addresses_mapped_out == 4);
  CHECK(blocks.at(PhysicalRow{3}).mapped_out);
  for (std::uint64_t a = 4; a < 8; ++a) CHECK_FALSE(space.live(LogicalAddress{a}));
  const auto again = handle_failure_page_mapout(PhysicalRow{4}, LogicalAddress{5}, 4, blocks, space);
  CHECK(again.addresses_mapped_out == 0);
}
