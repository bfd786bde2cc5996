#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcmwl/core.hpp"
#include "pcmwl/fault.hpp"
#include "pcmwl/metrics.hpp"

namespace pcmwl {

enum class Scheme { wolfram, sr1, sr2, none, ideal };
enum class WorkloadKind { attack, uniform, trace };
/// Rows the CoV series is computed over: the physical subarray initially
/// holding the attack target, the one holding it at each checkpoint, or the
/// whole bank.
enum class CovScope { subarray, attacked, bank };

const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& name);
const char* to_string(WorkloadKind k);
WorkloadKind parse_workload(const std::string& name);

/// Thrown for malformed trace files; the message carries the line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Stream of demand-write targets. When a target has been mapped out the
/// write is redirected to a uniformly random live address: the attack
/// re-targets for good (the attacker's page was retired and re-backed),
/// a trace redirects that one write, the uniform stream simply redraws.
class Workload {
 public:
  static Workload attack(LogicalAddress target);
  static Workload uniform(std::uint64_t addresses);
  static Workload trace(std::vector<LogicalAddress> addresses);
  /// One decimal address per line; blank lines and '#' comments allowed.
  static Workload from_trace_file(const std::filesystem::path& path);
  static Workload parse_trace(std::istream& in);

  /// nullopt when a trace is exhausted or nothing is live.
  std::optional<LogicalAddress> next(const AddressSpace& space, Rng& rng);

  WorkloadKind kind() const { return kind_; }
  std::uint64_t redirects() const { return redirects_; }
  /// Current attack target (attack workload only).
  LogicalAddress target() const { return target_; }
  const std::vector<LogicalAddress>& trace_addresses() const { return trace_; }

 private:
  WorkloadKind kind_ = WorkloadKind::attack;
  LogicalAddress target_;
  std::uint64_t addresses_ = 0;
  std::vector<LogicalAddress> trace_;
  std::size_t cursor_ = 0;
  std::uint64_t redirects_ = 0;
};

struct SimConfig {
  Geometry geometry = build_geometry(2048, 512, 8192);
  EnduranceModel endurance;
  Scheme scheme = Scheme::wolfram;
  WolframPolicy policy;
  std::uint64_t sr_inner_interval = 200;
  std::uint64_t sr_outer_interval = 100;
  EcpConfig ecp;
  std::uint32_t spares_per_subarray = 0;
  std::uint32_t page_blocks = 4;
  double decommission_fraction = 0.5;
  std::uint64_t checkpoint_interval = 100;
  std::uint64_t max_writes = 1'000'000'000;
  WorkloadKind workload = WorkloadKind::attack;
  std::uint64_t attack_address = 0;
  std::filesystem::path trace_file;
  std::uint64_t seed = 1;
  CovScope cov_scope = CovScope::subarray;
  /// Stop once the scope CoV has dropped by this fraction; 0 disables.
  double stop_at_cov_drop = 0.0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

Workload make_workload(const SimConfig& config);

struct Counters {
  std::uint64_t demand_writes = 0;
  std::uint64_t array_writes = 0;
  std::uint64_t extra_array_writes = 0;
  std::uint64_t decoder_reprograms_local = 0;
  std::uint64_t decoder_reprograms_global = 0;
  std::uint64_t block_swaps = 0;
  std::uint64_t subarray_swaps = 0;
  std::uint64_t subarray_swap_writes = 0;
  std::uint64_t failure_remaps = 0;
  std::uint64_t sr_refresh_steps = 0;
  std::uint64_t sr_swap_steps = 0;
  std::uint64_t mapped_out_retries = 0;
  std::uint64_t blocks_mapped_out = 0;
  std::uint64_t redirects = 0;
  std::uint64_t absorbed_writes = 0;
  std::uint64_t no_partner = 0;
  std::uint64_t buffered_writes = 0;

  friend bool operator==(const Counters&, const Counters&) = default;
};

struct EnergyParams {
  double array_read = 2.47;  // pJ/bit
  double array_write = 16.82;
  double buffer_read = 0.93;
  double buffer_write = 1.03;
};

/// Array and buffer traffic behind a run.
struct OperationCounts {
  std::uint64_t array_writes = 0;
  std::uint64_t array_reads = 0;
  std::uint64_t buffer_reads = 0;
  std::uint64_t buffer_writes = 0;
};

OperationCounts operation_counts(const Counters& c);
double estimate_energy(const OperationCounts& ops, const Geometry& geometry,
                       const EnergyParams& params = {});

struct SimResult {
  std::string scheme;
  std::uint64_t seed = 0;
  /// Demand writes served when usable capacity fell below the
  /// decommission fraction; absent if the run ended first.
  std::optional<std::uint64_t> lifetime_writes;
  /// Demand write (1-based) during which the first address was mapped out.
  std::optional<std::uint64_t> first_mapout_write;
  Counters counters;
  std::vector<CovSample> cov_series;
  std::vector<CapacitySample> capacity_series;
  std::uint64_t histogram_first_row = 0;
  std::vector<std::uint64_t> histogram;  // per-row write counts over the scope
  double energy_pj = 0.0;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

SimResult run(const SimConfig& config);

/// Runs independent trials on a thread pool; results keep the input order.
std::vector<SimResult> run_trials(std::span<const SimConfig> configs, unsigned threads = 0);

}  // namespace pcmwl
