#include "pcmwl/engine.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>
#include <type_traits>
#include <variant>

#include "pcmwl/baselines.hpp"
#include "pcmwl/wolfram.hpp"

namespace pcmwl {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::wolfram: return "wolfram";
    case Scheme::sr1: return "sr1";
    case Scheme::sr2: return "sr2";
    case Scheme::none: return "none";
    case Scheme::ideal: return "ideal";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::wolfram, Scheme::sr1, Scheme::sr2, Scheme::none, Scheme::ideal}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("scheme: unknown scheme '" + name + "'");
}

const char* to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::attack: return "attack";
    case WorkloadKind::uniform: return "uniform";
    case WorkloadKind::trace: return "trace";
  }
  return "?";
}

WorkloadKind parse_workload(const std::string& name) {
  for (WorkloadKind k : {WorkloadKind::attack, WorkloadKind::uniform, WorkloadKind::trace}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("workload: unknown workload '" + name + "'");
}

// ---------------------------------------------------------------------------
// Workload

Workload Workload::attack(LogicalAddress target) {
  Workload w;
  w.kind_ = WorkloadKind::attack;
  w.target_ = target;
  return w;
}

Workload Workload::uniform(std::uint64_t addresses) {
  Workload w;
  w.kind_ = WorkloadKind::uniform;
  w.addresses_ = addresses;
  return w;
}

Workload Workload::trace(std::vector<LogicalAddress> addresses) {
  Workload w;
  w.kind_ = WorkloadKind::trace;
  w.trace_ = std::move(addresses);
  return w;
}

Workload Workload::parse_trace(std::istream& in) {
  std::vector<LogicalAddress> addresses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view token(line.data() + first, last - first + 1);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ParseError("trace line " + std::to_string(line_no) + ": expected a decimal address, got '" +
                           std::string(token) + "'",
                       line_no);
    }
    addresses.push_back(LogicalAddress{value});
  }
  return trace(std::move(addresses));
}

Workload Workload::from_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  return parse_trace(in);
}

std::optional<LogicalAddress> Workload::next(const AddressSpace& space, Rng& rng) {
  switch (kind_) {
    case WorkloadKind::attack:
      if (!space.live(target_)) {
        const auto replacement = space.sample_live(rng);
        if (!replacement) return std::nullopt;
        target_ = *replacement;
        ++redirects_;
      }
      return target_;
    case WorkloadKind::uniform:
      return space.sample_live(rng);
    case WorkloadKind::trace: {
      if (cursor_ >= trace_.size()) return std::nullopt;
      const LogicalAddress a = trace_[cursor_++];
      if (space.live(a)) return a;
      ++redirects_;
      return space.sample_live(rng);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Configuration

void SimConfig::validate() const {
  endurance.validate();
  policy.validate();
  const std::uint64_t r = geometry.rows_per_subarray();
  if (!(decommission_fraction > 0 && decommission_fraction <= 1)) {
    throw ConfigError("decommission_fraction must be in (0, 1]");
  }
  if (checkpoint_interval == 0) throw ConfigError("checkpoint_interval must be at least 1");
  if (max_writes == 0) throw ConfigError("max_writes must be at least 1");
  if (page_blocks == 0) throw ConfigError("page_blocks must be at least 1");
  if (std::uint64_t{ecp.k} + 1 > geometry.bits_per_block()) {
    throw ConfigError("ecp_k must be smaller than bits_per_block");
  }
  if (r + spares_per_subarray > 0xFFFFFFFFull) throw ConfigError("spares_per_subarray too large");
  if (scheme == Scheme::sr1 || scheme == Scheme::sr2) {
    if (!std::has_single_bit(r)) throw ConfigError("rows_per_subarray must be a power of two for SR");
    if (sr_inner_interval == 0) throw ConfigError("sr_inner_interval must be at least 1");
  }
  if (scheme == Scheme::sr2) {
    if (!std::has_single_bit(geometry.total_rows())) {
      throw ConfigError("subarrays must be a power of two for two-level SR");
    }
    if (sr_outer_interval == 0) throw ConfigError("sr_outer_interval must be at least 1");
  }
  if (attack_address >= geometry.total_rows()) throw ConfigError("attack_address out of range");
  if (workload == WorkloadKind::trace && trace_file.empty()) {
    throw ConfigError("trace_file is required for the trace workload");
  }
  if (!(stop_at_cov_drop >= 0 && stop_at_cov_drop < 1)) {
    throw ConfigError("stop_at_cov_drop must be in [0, 1)");
  }
}

Workload make_workload(const SimConfig& config) {
  switch (config.workload) {
    case WorkloadKind::attack: return Workload::attack(LogicalAddress{config.attack_address});
    case WorkloadKind::uniform: return Workload::uniform(config.geometry.total_rows());
    case WorkloadKind::trace: {
      Workload w = Workload::from_trace_file(config.trace_file);
      for (const auto a : w.trace_addresses()) {
        if (a.value >= config.geometry.total_rows()) {
          throw ConfigError("trace address " + std::to_string(a.value) + " out of range");
        }
      }
      return w;
    }
  }
  throw ConfigError("unknown workload");
}

// ---------------------------------------------------------------------------
// Energy

OperationCounts operation_counts(const Counters& c) {
  OperationCounts ops;
  ops.array_writes = c.array_writes;
  ops.buffer_reads = c.buffered_writes;
  ops.buffer_writes = c.buffered_writes;
  return ops;
}

double estimate_energy(const OperationCounts& ops, const Geometry& geometry,
                       const EnergyParams& params) {
  const double bits = geometry.bits_per_block();
  return bits * (static_cast<double>(ops.array_writes) * params.array_write +
                 static_cast<double>(ops.array_reads) * params.array_read +
                 static_cast<double>(ops.buffer_reads) * params.buffer_read +
                 static_cast<double>(ops.buffer_writes) * params.buffer_write);
}

// ---------------------------------------------------------------------------
// Main loop

namespace {

using LevelerState = std::variant<WolframLeveler, SrOneLevel, SrTwoLevel, NoLeveling, IdealLeveling>;

LevelerState make_leveler(const SimConfig& c) {
  switch (c.scheme) {
    case Scheme::wolfram: return WolframLeveler(c.geometry, c.policy, c.spares_per_subarray);
    case Scheme::sr1: return SrOneLevel(c.geometry, c.sr_inner_interval);
    case Scheme::sr2: return SrTwoLevel(c.geometry, c.sr_inner_interval, c.sr_outer_interval);
    case Scheme::none: return NoLeveling{};
    case Scheme::ideal: return IdealLeveling(c.geometry.total_rows());
  }
  throw ConfigError("unknown scheme");
}

class Simulation {
 public:
  explicit Simulation(const SimConfig& config)
      : config_(config),
        endurance_rng_(config.seed, 1),
        leveler_rng_(config.seed, 2),
        workload_rng_(config.seed, 3),
        rows_per_physical_(config.geometry.rows_per_subarray() +
                           (config.scheme == Scheme::wolfram ? config.spares_per_subarray : 0)),
        blocks_(std::uint64_t{config.geometry.subarrays()} * rows_per_physical_, config.endurance,
                config.geometry.bits_per_block(), config.ecp, endurance_rng_),
        space_(config.geometry.total_rows()),
        leveler_(make_leveler(config)),
        workload_(make_workload(config)) {
    if (const auto* w = std::get_if<WolframLeveler>(&leveler_)) w->init_data_tags(blocks_);
    if (config.cov_scope == CovScope::bank) {
      blocks_.set_scope(0, blocks_.size());
    } else {
      // Every scheme starts from the identity placement, so the attacked
      // address's initial physical subarray is its logical subarray.
      const std::uint64_t s = config.workload == WorkloadKind::attack
                                  ? config.attack_address / config.geometry.rows_per_subarray()
                                  : 0;
      blocks_.set_scope(s * rows_per_physical_, rows_per_physical_);
    }
    result_.scheme = to_string(config.scheme);
    result_.seed = config.seed;
  }

  SimResult run() {
    const std::uint64_t interval = config_.checkpoint_interval;
    Counters& c = result_.counters;
    result_.capacity_series.push_back({0, space_.usable_capacity()});
    WriteOutcome out;

    while (c.demand_writes < config_.max_writes) {
      const auto target = workload_.next(space_, workload_rng_);
      if (!target) break;
      out.clear();
      dispatch_write(*target, out);
      ++c.demand_writes;
      accumulate(out);
      drain_failures();

      const bool below = space_.usable_capacity() < config_.decommission_fraction;
      if (c.demand_writes % interval == 0 || below) checkpoint();
      if (below) {
        result_.lifetime_writes = c.demand_writes;
        break;
      }
      if (space_.live_count() == 0) break;
      if (cov_drop_reached()) break;
    }
    if (result_.capacity_series.back().writes != c.demand_writes) {
      result_.capacity_series.push_back({c.demand_writes, space_.usable_capacity()});
    }

    c.array_writes = blocks_.array_writes();
    c.redirects = workload_.redirects();
    result_.histogram_first_row = blocks_.scope().first_row();
    result_.histogram = blocks_.wear_counts(blocks_.scope().first_row(), blocks_.scope().rows());
    result_.energy_pj = estimate_energy(operation_counts(c), config_.geometry);
    return std::move(result_);
  }

 private:
  void dispatch_write(LogicalAddress a, WriteOutcome& out) {
    std::visit(
        [&](auto& lv) {
          using T = std::decay_t<decltype(lv)>;
          if constexpr (std::is_same_v<T, WolframLeveler>) {
            lv.on_write(a, leveler_rng_, blocks_, out);
          } else if constexpr (std::is_same_v<T, SrOneLevel> || std::is_same_v<T, SrTwoLevel>) {
            lv.on_write(a, leveler_rng_, blocks_, space_, out);
          } else if constexpr (std::is_same_v<T, NoLeveling>) {
            lv.on_write(a, blocks_, out);
          } else {
            lv.on_write(blocks_, out);
          }
        },
        leveler_);
  }

  FailureResult handle_failure(PhysicalRow row) {
    return std::visit(
        [&](auto& lv) -> FailureResult {
          using T = std::decay_t<decltype(lv)>;
          if constexpr (std::is_same_v<T, WolframLeveler>) {
            return lv.handle_failure(row, blocks_, space_);
          } else if constexpr (std::is_same_v<T, IdealLeveling>) {
            const std::uint64_t page = config_.page_blocks;
            lv.remove_rows(row.value / page * page, page);
            return handle_failure_page_mapout(row, LogicalAddress{row.value}, config_.page_blocks,
                                              blocks_, space_);
          } else {
            return handle_failure_page_mapout(row, lv.resident(row), config_.page_blocks, blocks_,
                                              space_);
          }
        },
        leveler_);
  }

  void accumulate(const WriteOutcome& out) {
    Counters& c = result_.counters;
    c.extra_array_writes += out.extra_array_writes;
    c.decoder_reprograms_local += out.decoder_swaps + out.local_row_reprograms;
    c.decoder_reprograms_global += out.global_decoder_swaps;
    c.block_swaps += out.decoder_swaps;
    c.subarray_swaps += out.global_decoder_swaps;
    if (out.global_decoder_swaps > 0) c.subarray_swap_writes += out.physical_targets.size();
    c.sr_refresh_steps += out.sr_refresh_steps;
    c.sr_swap_steps += out.sr_swap_steps;
    c.mapped_out_retries += out.mapped_out_retries;
    c.no_partner += out.no_partner ? 1 : 0;
    c.absorbed_writes += out.absorbed ? 1 : 0;
    c.buffered_writes += out.buffered_writes;
  }

  void drain_failures() {
    Counters& c = result_.counters;
    // Recovery writes can fail in turn, so loop until nothing is pending.
    while (blocks_.has_failures()) {
      for (const PhysicalRow row : blocks_.take_failures()) {
        const FailureResult fr = handle_failure(row);
        if (fr.action == FailureAction::remapped) {
          ++c.failure_remaps;
          ++c.decoder_reprograms_local;
          c.extra_array_writes += fr.array_writes;
        }
        if (fr.addresses_mapped_out > 0) {
          c.blocks_mapped_out += fr.addresses_mapped_out;
          if (!result_.first_mapout_write) result_.first_mapout_write = c.demand_writes;
        }
      }
    }
  }

  // Physical subarray currently holding the attack target.
  std::uint64_t attacked_subarray() const {
    const LogicalAddress a = workload_.target();
    const std::uint64_t row = std::visit(
        [&](const auto& lv) -> std::uint64_t {
          using T = std::decay_t<decltype(lv)>;
          if constexpr (std::is_same_v<T, WolframLeveler>) {
            const auto p = lv.lookup(a);
            return p ? p->value : blocks_.scope().first_row();
          } else if constexpr (std::is_same_v<T, IdealLeveling>) {
            return blocks_.scope().first_row();
          } else {
            return lv.translate(a).value;
          }
        },
        leveler_);
    return row / rows_per_physical_;
  }

  void checkpoint() {
    if (config_.cov_scope == CovScope::attacked && config_.workload == WorkloadKind::attack) {
      const std::uint64_t first = attacked_subarray() * rows_per_physical_;
      if (first != blocks_.scope().first_row()) blocks_.set_scope(first, rows_per_physical_);
    }
    const std::uint64_t w = result_.counters.demand_writes;
    result_.cov_series.push_back({w, blocks_.scope().cov()});
    result_.capacity_series.push_back({w, space_.usable_capacity()});
  }

  bool cov_drop_reached() const {
    if (config_.stop_at_cov_drop <= 0 || result_.cov_series.empty()) return false;
    const auto& s = result_.cov_series;
    return s.back().cov <= (1.0 - config_.stop_at_cov_drop) * s.front().cov &&
           s.back().writes == result_.counters.demand_writes;
  }

  const SimConfig& config_;
  Rng endurance_rng_;
  Rng leveler_rng_;
  Rng workload_rng_;
  std::uint32_t rows_per_physical_;
  BlockArray blocks_;
  AddressSpace space_;
  LevelerState leveler_;
  Workload workload_;
  SimResult result_;
};

}  // namespace

SimResult run(const SimConfig& config) {
  config.validate();
  Simulation sim(config);
  return sim.run();
}

std::vector<SimResult> run_trials(std::span<const SimConfig> configs, unsigned threads) {
  std::vector<SimResult> results(configs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, configs.size())));

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(configs.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        results[i] = run(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace pcmwl
