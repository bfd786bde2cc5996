#include "pcmwl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace pcmwl {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec == std::errc() && ptr == v.data() + v.size()) return out;
  // Accept integral scientific notation such as 1e9.
  double d = 0;
  const auto [p2, e2] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (e2 == std::errc() && p2 == v.data() + v.size() && d >= 0 && d < 1.8e19 && std::floor(d) == d) {
    return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

std::uint32_t to_u32(const std::string& key, const std::string& v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 0xFFFFFFFFull) throw ConfigError(key + ": value too large");
  return static_cast<std::uint32_t>(x);
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

using Setter = std::function<void(SimConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"subarrays",
       [](SimConfig& c, const auto& k, const auto& v) {
         c.geometry = build_geometry(to_u32(k, v), c.geometry.rows_per_subarray(),
                                     c.geometry.bits_per_block());
       }},
      {"rows_per_subarray",
       [](SimConfig& c, const auto& k, const auto& v) {
         c.geometry = build_geometry(c.geometry.subarrays(), to_u32(k, v), c.geometry.bits_per_block());
       }},
      {"bits_per_block",
       [](SimConfig& c, const auto& k, const auto& v) {
         c.geometry = build_geometry(c.geometry.subarrays(), c.geometry.rows_per_subarray(), to_u32(k, v));
       }},
      {"endurance_mean", [](SimConfig& c, const auto& k, const auto& v) { c.endurance.mean = to_double(k, v); }},
      {"endurance_cov", [](SimConfig& c, const auto& k, const auto& v) { c.endurance.cov = to_double(k, v); }},
      {"sampling_mode",
       [](SimConfig& c, const auto& k, const auto& v) {
         if (v == "exact") c.endurance.mode = SamplingMode::exact;
         else if (v == "order_statistic") c.endurance.mode = SamplingMode::order_statistic;
         else throw ConfigError(k + ": expected exact or order_statistic");
       }},
      {"scheme",
       [](SimConfig& c, const auto&, const auto& v) { c.scheme = parse_scheme(v); }},
      {"sigma1", [](SimConfig& c, const auto& k, const auto& v) { c.policy.sigma1 = to_double(k, v); }},
      {"sigma2", [](SimConfig& c, const auto& k, const auto& v) { c.policy.sigma2 = to_double(k, v); }},
      {"sr_inner_interval",
       [](SimConfig& c, const auto& k, const auto& v) { c.sr_inner_interval = to_u64(k, v); }},
      {"sr_outer_interval",
       [](SimConfig& c, const auto& k, const auto& v) { c.sr_outer_interval = to_u64(k, v); }},
      {"ecp_k", [](SimConfig& c, const auto& k, const auto& v) { c.ecp.k = to_u32(k, v); }},
      {"spares_per_subarray",
       [](SimConfig& c, const auto& k, const auto& v) { c.spares_per_subarray = to_u32(k, v); }},
      {"page_blocks", [](SimConfig& c, const auto& k, const auto& v) { c.page_blocks = to_u32(k, v); }},
      {"decommission_fraction",
       [](SimConfig& c, const auto& k, const auto& v) { c.decommission_fraction = to_double(k, v); }},
      {"checkpoint_interval",
       [](SimConfig& c, const auto& k, const auto& v) { c.checkpoint_interval = to_u64(k, v); }},
      {"max_writes", [](SimConfig& c, const auto& k, const auto& v) { c.max_writes = to_u64(k, v); }},
      {"workload",
       [](SimConfig& c, const auto&, const auto& v) { c.workload = parse_workload(v); }},
      {"attack_address",
       [](SimConfig& c, const auto& k, const auto& v) { c.attack_address = to_u64(k, v); }},
      {"trace_file", [](SimConfig& c, const auto&, const auto& v) { c.trace_file = v; }},
      {"seed", [](SimConfig& c, const auto& k, const auto& v) { c.seed = to_u64(k, v); }},
      {"cov_scope",
       [](SimConfig& c, const auto& k, const auto& v) {
         if (v == "subarray") c.cov_scope = CovScope::subarray;
         else if (v == "attacked") c.cov_scope = CovScope::attacked;
         else if (v == "bank") c.cov_scope = CovScope::bank;
         else throw ConfigError(k + ": expected subarray, attacked or bank");
       }},
      {"stop_at_cov_drop",
       [](SimConfig& c, const auto& k, const auto& v) { c.stop_at_cov_drop = to_double(k, v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
  }();
  return keys;
}

void apply_key(SimConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second(config, key, value);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.rfind(key, 0) == 0) throw;
    throw ConfigError(key + ": " + what);
  }
}

SimConfig parse_config(std::istream& in) {
  SimConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": empty key or value", line_no);
    }
    try {
      apply_key(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

SimConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

}  // namespace pcmwl
