#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pcmwl/engine.hpp"
#include "properties.hpp"

using namespace pcmwl;
namespace fs = std::filesystem;

namespace {

SimConfig small(Scheme s) {
  SimConfig c;
  c.geometry = build_geometry(4, 64, 256);
  c.scheme = s;
  c.endurance.mean = 300;
  c.policy = WolframPolicy{0.05, 0.002};
  c.sr_inner_interval = 8;
  c.sr_outer_interval = 4;
  c.checkpoint_interval = 50;
  return c;
}

}  // namespace

TEST_CASE("zero-variance attack without leveling maps out at write 101") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig c = small(Scheme::none);
    c.endurance = EnduranceModel{100, 0.0};
    c.seed = seed;
    c.max_writes = 1000;
    const auto r = run(c);
    CHECK(r.first_mapout_write == 101u);
    CHECK(r.counters.blocks_mapped_out >= 4);
  }
}

TEST_CASE("energy of one block write") {
  OperationCounts ops;
  ops.array_writes = 1;
  CHECK(estimate_energy(ops, build_geometry(1, 1, 8192)) == doctest::Approx(137789.44));
  Counters c;
  c.array_writes = 3;
  c.buffered_writes = 2;
  const auto o = operation_counts(c);
  CHECK(o.buffer_reads == 2);
  CHECK(o.buffer_writes == 2);
  CHECK(o.array_reads == 0);
}

TEST_CASE("trace parsing") {
  std::istringstream in("3\n9\n3\n");
  const auto w = Workload::parse_trace(in);
  REQUIRE(w.trace_addresses().size() == 3);
  CHECK(w.trace_addresses()[1].value == 9);
  std::istringstream bad("3\n# note\n\nx7\n");
  try {
    Workload::parse_trace(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("trace workload ends the run when exhausted") {
  const fs::path p = fs::temp_directory_path() / "pcmwl_trace.txt";
  std::ofstream(p) << "3\n9\n3\n";
  SimConfig c = small(Scheme::none);
  c.workload = WorkloadKind::trace;
  c.trace_file = p;
  const auto r = run(c);
  CHECK(r.counters.demand_writes == 3);
  CHECK(r.histogram.at(3) == 2);
  CHECK(r.histogram.at(9) == 1);
  CHECK_FALSE(r.lifetime_writes.has_value());

  std::ofstream(p) << "3\n9999\n";
  CHECK_THROWS_AS(run(c), ConfigError);
  fs::remove(p);
}

TEST_CASE("uniform workload and redirect after map-out") {
  SimConfig c = small(Scheme::none);
  c.workload = WorkloadKind::uniform;
  c.max_writes = 2000;
  c.endurance.mean = 1e9;
  const auto r = run(c);
  CHECK(r.counters.demand_writes == 2000);

  SimConfig a = small(Scheme::none);
  a.endurance = EnduranceModel{50, 0.0};
  a.max_writes = 100;
  const auto ra = run(a);
  CHECK(ra.counters.redirects == 1);
}

TEST_CASE("accounting identities across schemes") {
  for (Scheme s : {Scheme::wolfram, Scheme::sr1, Scheme::sr2, Scheme::none, Scheme::ideal}) {
    CAPTURE(to_string(s));
    SimConfig c = small(s);
    c.spares_per_subarray = s == Scheme::wolfram ? 2 : 0;
    c.ecp.k = 1;
    const auto r = run(c);
    const auto& k = r.counters;
    CHECK(r.lifetime_writes.has_value());
    CHECK(k.array_writes + k.absorbed_writes == k.demand_writes + k.extra_array_writes);
    if (s == Scheme::wolfram) {
      CHECK(k.extra_array_writes ==
            k.block_swaps + (k.subarray_swap_writes - k.subarray_swaps) + k.failure_remaps);
      CHECK(k.sr_refresh_steps == 0);
    } else if (s == Scheme::sr1 || s == Scheme::sr2) {
      CHECK(k.extra_array_writes == 2 * k.sr_swap_steps);
    } else {
      CHECK(k.extra_array_writes == 0);
    }
  }
}

TEST_CASE("series shape") {
  SimConfig c = small(Scheme::wolfram);
  const auto r = run(c);
  REQUIRE_FALSE(r.cov_series.empty());
  CHECK(r.capacity_series.front() == CapacitySample{0, 1.0});
  for (std::size_t i = 1; i < r.capacity_series.size(); ++i) {
    CHECK(r.capacity_series[i].usable_fraction <= r.capacity_series[i - 1].usable_fraction);
    CHECK(r.capacity_series[i].writes > r.capacity_series[i - 1].writes);
  }
  for (std::size_t i = 0; i + 1 < r.cov_series.size(); ++i) {
    CHECK(r.cov_series[i].writes == (i + 1) * c.checkpoint_interval);
  }
  CHECK(r.capacity_series.back().usable_fraction < c.decommission_fraction);
  CHECK(r.capacity_series.back().writes == *r.lifetime_writes);
  CHECK(r.histogram.size() == 64);
}

TEST_CASE("max_writes and stop_at_cov_drop end the run") {
  SimConfig c = small(Scheme::wolfram);
  c.endurance.mean = INFINITY;
  c.max_writes = 777;
  auto r = run(c);
  CHECK(r.counters.demand_writes == 777);
  CHECK_FALSE(r.lifetime_writes.has_value());
  c.max_writes = 1000000;
  c.stop_at_cov_drop = 0.9;
  r = run(c);
  const auto drop = writes_to_cov_drop(r.cov_series, 0.9);
  REQUIRE(drop);
  CHECK(r.counters.demand_writes == *drop);
}

TEST_CASE("ideal leveling has the lowest CoV at every checkpoint") {
  std::vector<std::vector<CovSample>> others;
  SimConfig base = small(Scheme::ideal);
  base.endurance.mean = INFINITY;
  base.max_writes = 20000;
  base.cov_scope = CovScope::bank;
  const auto ideal = run(base);
  for (Scheme s : {Scheme::wolfram, Scheme::sr1, Scheme::sr2, Scheme::none}) {
    SimConfig c = base;
    c.scheme = s;
    const auto r = run(c);
    REQUIRE(r.cov_series.size() == ideal.cov_series.size());
    for (std::size_t i = 0; i < r.cov_series.size(); ++i) {
      CHECK(ideal.cov_series[i].cov <= r.cov_series[i].cov + 1e-12);
    }
  }
}

TEST_CASE("attacked scope follows the target across subarray swaps") {
  SimConfig c = small(Scheme::wolfram);
  c.endurance.mean = INFINITY;
  c.policy = WolframPolicy{0.01, 0.005};
  c.cov_scope = CovScope::attacked;
  c.max_writes = 20000;
  const auto r = run(c);
  CHECK(r.counters.subarray_swaps > 0);
  CHECK(r.histogram.size() == 64);
}

TEST_CASE("config validation") {
  SimConfig c = small(Scheme::sr1);
  c.geometry = build_geometry(4, 48, 256);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small(Scheme::sr2);
  c.geometry = build_geometry(3, 64, 256);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small(Scheme::wolfram);
  c.attack_address = 256;
  CHECK_THROWS_AS(run(c), ConfigError);
  c = small(Scheme::wolfram);
  c.decommission_fraction = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("run_trials keeps input order and matches sequential runs") {
  std::vector<SimConfig> cs;
  for (std::uint64_t s = 1; s <= 6; ++s) {
    SimConfig c = small(s % 2 ? Scheme::wolfram : Scheme::sr1);
    c.seed = s;
    cs.push_back(c);
  }
  const auto par = run_trials(cs, 3);
  for (std::size_t i = 0; i < cs.size(); ++i) CHECK(par[i] == run(cs[i]));
}

TEST_CASE("seed determinism") { CHECK(props::seed_determinism() == ""); }
