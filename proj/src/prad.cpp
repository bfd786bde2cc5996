#include "pcmwl/prad.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

#include "pcmwl/core.hpp"

namespace pcmwl {

Prad::Prad(std::uint32_t rows, std::uint32_t programmed)
    : rows_(rows), index_(programmed) {
  if (programmed > rows) throw ConfigError("decoder has fewer rows than addresses");
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (r < programmed) {
      rows_[r].stored_address = r;
      rows_[r].program_count = 1;
      index_[r] = r;
    } else {
      empty_rows_.insert(r);
    }
  }
  mapped_ = programmed;
  enabled_ = rows;
}

std::optional<std::uint32_t> Prad::lookup(std::uint32_t address) const {
  if (address >= index_.size() || index_[address] == kUnmapped) return std::nullopt;
  return index_[address];
}

void Prad::reprogram_swap(std::uint32_t a1, std::uint32_t a2) {
  if (a1 == a2) throw std::invalid_argument("decoder swap of an address with itself");
  const auto r1 = lookup(a1);
  const auto r2 = lookup(a2);
  if (!r1 || !r2) throw StateError("decoder swap involves a mapped-out address");
  rows_[*r1].stored_address = a2;
  rows_[*r2].stored_address = a1;
  ++rows_[*r1].program_count;
  ++rows_[*r2].program_count;
  index_[a1] = *r2;
  index_[a2] = *r1;
}

std::variant<Remapped, NoEmptyRow> Prad::disable_and_remap(std::uint32_t failed_row) {
  DecoderRow& failed = rows_.at(failed_row);
  if (!failed.enabled) {
    throw StateError("decoder row " + std::to_string(failed_row) + " already disabled");
  }
  if (!failed.stored_address) {
    throw StateError("decoder row " + std::to_string(failed_row) + " stores no address");
  }
  const std::uint32_t address = *failed.stored_address;
  failed.enabled = false;
  failed.stored_address.reset();
  --enabled_;
  index_[address] = kUnmapped;
  --mapped_;

  const auto spare = lowest_empty_row();
  if (!spare) return NoEmptyRow{};
  program(*spare, address);
  return Remapped{*spare};
}

void Prad::program(std::uint32_t row, std::uint32_t address) {
  DecoderRow& r = rows_.at(row);
  if (!r.enabled || r.stored_address) throw StateError("program target row is not empty");
  if (address >= index_.size()) throw std::out_of_range("decoder address out of range");
  if (index_[address] != kUnmapped) throw StateError("address already mapped");
  r.stored_address = address;
  ++r.program_count;
  index_[address] = row;
  empty_rows_.erase(row);
  ++mapped_;
}

void Prad::erase(std::uint32_t row) {
  DecoderRow& r = rows_.at(row);
  if (!r.enabled || !r.stored_address) throw StateError("erase of a row that stores nothing");
  index_[*r.stored_address] = kUnmapped;
  r.stored_address.reset();
  empty_rows_.insert(row);
  --mapped_;
}

void Prad::reassign(std::uint32_t row, std::uint32_t new_address) {
  DecoderRow& r = rows_.at(row);
  if (!r.enabled || !r.stored_address) throw StateError("reassign of a row that stores nothing");
  if (new_address >= index_.size()) throw std::out_of_range("decoder address out of range");
  if (index_[new_address] != kUnmapped) throw StateError("address already mapped");
  index_[*r.stored_address] = kUnmapped;
  r.stored_address = new_address;
  ++r.program_count;
  index_[new_address] = row;
}

std::optional<std::uint32_t> Prad::lowest_empty_row() const {
  if (empty_rows_.empty()) return std::nullopt;
  return *empty_rows_.begin();
}

std::uint64_t Prad::total_program_count() const {
  return std::accumulate(rows_.begin(), rows_.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const DecoderRow& r) { return acc + r.program_count; });
}

}  // namespace pcmwl
