#include "pcmwl/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pcmwl/engine.hpp"

namespace pcmwl {

double cov(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("cov of an empty list");
  long double sum = 0;
  for (const auto c : counts) sum += c;
  const long double n = static_cast<long double>(counts.size());
  const long double mean = sum / n;
  if (mean == 0) return 0.0;
  long double ss = 0;
  for (const auto c : counts) {
    const long double d = c - mean;
    ss += d * d;
  }
  return static_cast<double>(std::sqrt(ss / n) / mean);
}

std::optional<std::uint64_t> writes_to_cov_drop(std::span<const CovSample> series, double drop) {
  if (series.empty()) throw std::invalid_argument("empty CoV series");
  const double threshold = (1.0 - drop) * series.front().cov;
  for (const auto& s : series) {
    if (s.cov <= threshold) return s.writes;
  }
  return std::nullopt;
}

double ScopeMoments::cov() const {
  if (rows_ == 0 || sum_ == 0) return 0.0;
  const uint128 s = sum_;
  const uint128 nq = static_cast<uint128>(rows_) * sum_sq_;
  const uint128 diff = nq - s * s;  // n*Q >= S^2 always
  return static_cast<double>(std::sqrt(static_cast<long double>(diff)) /
                             static_cast<long double>(sum_));
}

std::string format_decimal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  std::string s(buf, ptr);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error(path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  return rows;
}

template <class T>
T parse_number(const std::string& s, const std::filesystem::path& path) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(path.string() + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void emit_series_csv(const SimResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    const auto path = out_dir / "cov.csv";
    auto out = open_out(path);
    out << "writes,cov\n";
    for (const auto& s : result.cov_series) out << s.writes << ',' << format_decimal(s.cov) << '\n';
    finish(out, path);
  }
  {
    const auto path = out_dir / "capacity.csv";
    auto out = open_out(path);
    out << "writes,usable_fraction\n";
    for (const auto& s : result.capacity_series) {
      out << s.writes << ',' << format_decimal(s.usable_fraction) << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = out_dir / "histogram.csv";
    auto out = open_out(path);
    out << "row_id,write_count\n";
    for (std::size_t i = 0; i < result.histogram.size(); ++i) {
      out << result.histogram_first_row + i << ',' << result.histogram[i] << '\n';
    }
    finish(out, path);
  }
}

std::string summary_header() {
  return "scheme,seed,lifetime_writes,demand_writes,extra_array_writes,decoder_reprograms_local,"
         "decoder_reprograms_global,mapped_out_retries,blocks_mapped_out,energy_pj";
}

std::string summary_row(const SimResult& r) {
  std::ostringstream os;
  const Counters& c = r.counters;
  os << r.scheme << ',' << r.seed << ',';
  if (r.lifetime_writes) os << *r.lifetime_writes;
  os << ',' << c.demand_writes << ',' << c.extra_array_writes << ',' << c.decoder_reprograms_local
     << ',' << c.decoder_reprograms_global << ',' << c.mapped_out_retries << ','
     << c.blocks_mapped_out << ',' << format_decimal(r.energy_pj);
  return os.str();
}

void emit_summary_csv(std::span<const SimResult> results, const std::filesystem::path& path) {
  std::string text = summary_header() + "\n";
  for (const auto& r : results) text += summary_row(r) + "\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

void emit_csv(const SimResult& result, const std::filesystem::path& out_dir) {
  emit_series_csv(result, out_dir);
  emit_summary_csv(std::span<const SimResult>(&result, 1), out_dir / "summary.csv");
}

std::vector<CovSample> read_cov_csv(const std::filesystem::path& path) {
  std::vector<CovSample> out;
  for (const auto& f : read_rows(path, "writes,cov")) {
    if (f.size() != 2) throw std::runtime_error(path.string() + ": expected 2 fields");
    out.push_back({parse_number<std::uint64_t>(f[0], path), parse_number<double>(f[1], path)});
  }
  return out;
}

std::vector<CapacitySample> read_capacity_csv(const std::filesystem::path& path) {
  std::vector<CapacitySample> out;
  for (const auto& f : read_rows(path, "writes,usable_fraction")) {
    if (f.size() != 2) throw std::runtime_error(path.string() + ": expected 2 fields");
    out.push_back({parse_number<std::uint64_t>(f[0], path), parse_number<double>(f[1], path)});
  }
  return out;
}

}  // namespace pcmwl
