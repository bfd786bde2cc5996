// Command-line front end: single runs, multi-seed comparisons, sweeps.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "pcmwl/config.hpp"
#include "pcmwl/engine.hpp"
#include "pcmwl/metrics.hpp"

namespace {

using namespace pcmwl;

struct Common {
  std::string config_path;
  std::string out = "out";
  std::string workload;
  std::string attack_address;
  std::string sigma1, sigma2, ecp_k, max_writes;
  std::vector<std::string> sets;
  unsigned threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value config file");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--workload", c.workload, "attack | uniform | trace");
  app->add_option("--attack-address", c.attack_address, "attacked logical address");
  app->add_option("--sigma1", c.sigma1, "block swap probability");
  app->add_option("--sigma2", c.sigma2, "subarray swap probability");
  app->add_option("--ecp-k", c.ecp_k, "ECP pointers per block");
  app->add_option("--max-writes", c.max_writes, "demand write cap");
  app->add_option("--set", c.sets, "extra override key=value (repeatable)");
  app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

SimConfig base_config(const Common& c) {
  SimConfig config = c.config_path.empty() ? SimConfig{} : parse_config(std::filesystem::path(c.config_path));
  if (!c.workload.empty()) apply_key(config, "workload", c.workload);
  if (!c.attack_address.empty()) apply_key(config, "attack_address", c.attack_address);
  if (!c.sigma1.empty()) apply_key(config, "sigma1", c.sigma1);
  if (!c.sigma2.empty()) apply_key(config, "sigma2", c.sigma2);
  if (!c.ecp_k.empty()) apply_key(config, "ecp_k", c.ecp_k);
  if (!c.max_writes.empty()) apply_key(config, "max_writes", c.max_writes);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    apply_key(config, s.substr(0, eq), s.substr(eq + 1));
  }
  return config;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

// "1..30" (inclusive), "1,2,5" or a single value.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    const auto dots = part.find("..");
    auto num = [&](const std::string& t) {
      std::size_t used = 0;
      const auto v = std::stoull(t, &used);
      if (used != t.size()) throw ConfigError("seeds: bad value '" + part + "'");
      return static_cast<std::uint64_t>(v);
    };
    try {
      if (dots == std::string::npos) {
        seeds.push_back(num(part));
      } else {
        const auto lo = num(part.substr(0, dots));
        const auto hi = num(part.substr(dots + 2));
        if (hi < lo) throw ConfigError("seeds: empty range '" + part + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("seeds: bad value '" + part + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("seeds: no seeds given");
  return seeds;
}

std::optional<double> median_lifetime(const std::vector<const SimResult*>& results) {
  std::vector<double> v;
  for (const auto* r : results) {
    if (r->lifetime_writes) v.push_back(static_cast<double>(*r->lifetime_writes));
  }
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_run(const Common& c, const std::string& seed, const std::string& scheme) {
  SimConfig config = base_config(c);
  if (!seed.empty()) apply_key(config, "seed", seed);
  if (!scheme.empty()) apply_key(config, "scheme", scheme);
  config.validate();
  const SimResult r = run(config);
  emit_csv(r, c.out);
  std::cout << summary_header() << '\n' << summary_row(r) << '\n';
  return 0;
}

int cmd_compare(const Common& c, const std::string& seeds_arg, const std::string& schemes_arg) {
  const SimConfig base = base_config(c);
  const auto seeds = parse_seeds(seeds_arg);
  const auto schemes = split(schemes_arg, ',');
  if (schemes.empty()) throw ConfigError("schemes: no schemes given");
  std::vector<SimConfig> configs;
  for (const auto& scheme : schemes) {
    for (const auto seed : seeds) {
      SimConfig cfg = base;
      apply_key(cfg, "scheme", scheme);
      cfg.seed = seed;
      cfg.validate();
      configs.push_back(cfg);
    }
  }
  const auto results = run_trials(configs, c.threads);
  const std::filesystem::path out(c.out);
  for (const auto& r : results) {
    emit_series_csv(r, out / (r.scheme + "_seed" + std::to_string(r.seed)));
  }
  emit_summary_csv(results, out / "summary.csv");

  std::map<std::string, std::optional<double>> medians;
  for (const auto& scheme : schemes) {
    std::vector<const SimResult*> mine;
    for (const auto& r : results) {
      if (r.scheme == scheme) mine.push_back(&r);
    }
    medians[scheme] = median_lifetime(mine);
    std::vector<double> drops;
    for (const auto* r : mine) {
      if (r->cov_series.empty()) continue;
      if (const auto d = writes_to_cov_drop(r->cov_series, 0.9)) {
        drops.push_back(static_cast<double>(*d));
      }
    }
    std::sort(drops.begin(), drops.end());
    std::cout << scheme << " 90% CoV drop reached in " << drops.size() << "/" << mine.size()
              << " trials";
    if (!drops.empty()) std::cout << ", median over those " << format_decimal(drops[drops.size() / 2]);
    std::cout << '\n';
    std::cout << scheme << " median lifetime: "
              << (medians[scheme] ? format_decimal(*medians[scheme]) : std::string("not reached"))
              << '\n';
  }
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    for (std::size_t j = i + 1; j < schemes.size(); ++j) {
      const auto& a = medians[schemes[i]];
      const auto& b = medians[schemes[j]];
      std::cout << schemes[i] << "/" << schemes[j] << " lifetime ratio: "
                << (a && b && *b > 0 ? format_decimal(*a / *b) : std::string("n/a")) << '\n';
    }
  }
  return 0;
}

int cmd_sweep(const Common& c, const std::string& key, const std::string& values_arg,
              const std::string& seeds_arg, const std::string& scheme) {
  const SimConfig base = base_config(c);
  const auto values = split(values_arg, ',');
  if (values.empty()) throw ConfigError("values: no values given");
  const auto seeds = parse_seeds(seeds_arg);
  std::vector<SimConfig> configs;
  for (const auto& value : values) {
    for (const auto seed : seeds) {
      SimConfig cfg = base;
      if (!scheme.empty()) apply_key(cfg, "scheme", scheme);
      apply_key(cfg, key, value);
      cfg.seed = seed;
      cfg.validate();
      configs.push_back(cfg);
    }
  }
  const auto results = run_trials(configs, c.threads);
  const std::filesystem::path out(c.out);
  for (std::size_t v = 0; v < values.size(); ++v) {
    const auto dir = out / (key + "=" + values[v]);
    const auto first = results.begin() + static_cast<std::ptrdiff_t>(v * seeds.size());
    std::vector<SimResult> group(first, first + static_cast<std::ptrdiff_t>(seeds.size()));
    if (seeds.size() == 1) {
      emit_series_csv(group.front(), dir);
    } else {
      for (const auto& r : group) emit_series_csv(r, dir / ("seed" + std::to_string(r.seed)));
    }
    emit_summary_csv(group, dir / "summary.csv");
    std::cout << key << "=" << values[v] << ": " << dir.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCM lifetime simulator"};
  app.require_subcommand(1);

  Common run_opts, compare_opts, sweep_opts;
  std::string run_seed, run_scheme;
  auto* run_cmd = app.add_subcommand("run", "run one trial and write CSVs");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--seed", run_seed, "trial seed");
  run_cmd->add_option("--scheme", run_scheme, "wolfram | sr1 | sr2 | none | ideal");

  std::string compare_seeds = "1", compare_schemes = "wolfram,sr1,sr2";
  auto* compare_cmd = app.add_subcommand("compare", "run schemes x seeds and report lifetime ratios");
  add_common(compare_cmd, compare_opts);
  compare_cmd->add_option("--seeds,--seed", compare_seeds, "seed list or range a..b");
  compare_cmd->add_option("--schemes,--scheme", compare_schemes, "comma-separated schemes");

  std::string sweep_key, sweep_values, sweep_seeds = "1", sweep_scheme;
  auto* sweep_cmd = app.add_subcommand("sweep", "vary one config key");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--key", sweep_key, "config key")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds,--seed", sweep_seeds, "seed list or range a..b");
  sweep_cmd->add_option("--scheme", sweep_scheme, "scheme override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(run_opts, run_seed, run_scheme);
    if (*compare_cmd) return cmd_compare(compare_opts, compare_seeds, compare_schemes);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_key, sweep_values, sweep_seeds, sweep_scheme);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
