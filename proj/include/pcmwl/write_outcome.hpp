#pragma once

#include <cstdint>
#include <vector>

#include "pcmwl/core.hpp"

namespace pcmwl {

/// What one demand write cost. Reused across writes; clear() keeps capacity.
struct WriteOutcome {
  Decision decision = Decision::none;
  /// Rows that received an array write, demand write included.
  std::vector<PhysicalRow> physical_targets;
  std::uint64_t extra_array_writes = 0;
  std::uint32_t decoder_swaps = 0;         // local, block granularity
  std::uint32_t global_decoder_swaps = 0;  // subarray granularity
  std::uint64_t local_row_reprograms = 0;  // local rows rewritten during a subarray swap
  std::uint64_t mapped_out_retries = 0;
  bool no_partner = false;
  /// Writes whose data passed through the row/swap buffers (swap traffic).
  std::uint64_t buffered_writes = 0;
  std::uint32_t sr_refresh_steps = 0;
  std::uint32_t sr_swap_steps = 0;
  /// Demand write landed on a retired row and was absorbed without wear.
  bool absorbed = false;

  void clear() {
    decision = Decision::none;
    physical_targets.clear();
    extra_array_writes = 0;
    decoder_swaps = 0;
    global_decoder_swaps = 0;
    local_row_reprograms = 0;
    mapped_out_retries = 0;
    no_partner = false;
    buffered_writes = 0;
    sr_refresh_steps = 0;
    sr_swap_steps = 0;
    absorbed = false;
  }
};

enum class FailureAction { remapped, mapped_out };

struct FailureResult {
  FailureAction action = FailureAction::mapped_out;
  LogicalAddress address;
  /// Row the data moved to (remapped only).
  PhysicalRow new_row;
  /// Addresses removed from the address space.
  std::uint64_t addresses_mapped_out = 0;
  /// Array writes spent on recovery.
  std::uint64_t array_writes = 0;
};

}  // namespace pcmwl
