#include "pcmwl/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

namespace pcmwl {

Geometry build_geometry(std::uint64_t subarrays, std::uint64_t rows_per_subarray,
                        std::uint64_t bits_per_block) {
  constexpr std::uint64_t kMax32 = std::numeric_limits<std::uint32_t>::max();
  if (subarrays == 0 || rows_per_subarray == 0 || bits_per_block == 0) {
    throw ConfigError("geometry dimensions must be positive");
  }
  if (subarrays > kMax32 || rows_per_subarray > kMax32 || bits_per_block > kMax32) {
    throw ConfigError("geometry dimension overflows 32 bits");
  }
  if (subarrays * rows_per_subarray > kMax32) {
    throw ConfigError("total_rows overflows 32 bits");
  }
  Geometry g;
  g.subarrays_ = static_cast<std::uint32_t>(subarrays);
  g.rows_per_subarray_ = static_cast<std::uint32_t>(rows_per_subarray);
  g.bits_per_block_ = static_cast<std::uint32_t>(bits_per_block);
  return g;
}

bool EnduranceModel::unbounded() const { return std::isinf(mean) && mean > 0; }

void EnduranceModel::validate() const {
  if (!(mean > 0)) throw ConfigError("endurance_mean must be positive");
  if (!(cov >= 0 && cov < 1)) throw ConfigError("endurance_cov must be in [0, 1)");
}

void WolframPolicy::validate() const {
  if (!(sigma1 >= 0 && sigma1 <= 1)) throw ConfigError("sigma1 must be in [0, 1]");
  if (!(sigma2 >= 0 && sigma2 <= 1)) throw ConfigError("sigma2 must be in [0, 1]");
  if (sigma2 > sigma1) throw ConfigError("sigma2 must not exceed sigma1");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream + 0x5851F42D4C957F2DULL))) {}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  // Rejection keeps the result exactly uniform.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

namespace {

class TruncatedNormal {
 public:
  explicit TruncatedNormal(const EnduranceModel& m)
      : mean_(m.mean), sd_(m.mean * m.cov) {
    if (sd_ > 0) {
      lower_p_ = boost::math::cdf(std_normal_, (1.0 - mean_) / sd_);
    }
  }

  /// Maps u in (0, 1) to the truncated distribution.
  double quantile(double u) const {
    if (sd_ == 0) return std::max(mean_, 1.0);
    double p = lower_p_ + u * (1.0 - lower_p_);
    p = std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    return std::max(1.0, mean_ + sd_ * boost::math::quantile(std_normal_, p));
  }

 private:
  boost::math::normal_distribution<double> std_normal_{0.0, 1.0};
  double mean_;
  double sd_;
  double lower_p_ = 0.0;
};

}  // namespace

std::vector<double> sample_block_thresholds(Rng& rng, const EnduranceModel& model,
                                            std::uint64_t cells, std::uint32_t k) {
  model.validate();
  const std::uint64_t want = std::uint64_t{k} + 1;
  if (cells < want) throw ConfigError("block has fewer cells than k+1");
  if (model.unbounded()) {
    return std::vector<double>(want, std::numeric_limits<double>::infinity());
  }

  const TruncatedNormal dist(model);
  std::vector<double> out;
  if (model.mode == SamplingMode::exact) {
    std::vector<double> all(cells);
    for (auto& v : all) v = dist.quantile(rng.uniform_open());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(want), all.end());
    out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(want));
    return out;
  }

  // Successive uniform order statistics: given U(j), the next one is the
  // minimum of the remaining n-j uniforms on (U(j), 1).
  out.reserve(want);
  double u = 0.0;
  for (std::uint64_t j = 0; j < want; ++j) {
    const double remaining = static_cast<double>(cells - j);
    const double v = rng.uniform_open0();
    u += (1.0 - u) * -std::expm1(std::log(v) / remaining);
    out.push_back(dist.quantile(std::min(u, std::nextafter(1.0, 0.0))));
  }
  // Clamping at 1 and rounding can only produce ties, never inversions, but
  // keep the contract explicit.
  std::sort(out.begin(), out.end());
  return out;
}

Decision draw_decision(Rng& rng, const WolframPolicy& policy) {
  const double u = rng.uniform01();
  if (policy.sigma2 > 0 && u <= policy.sigma2) return Decision::subarray_swap;
  if (policy.sigma1 > 0 && u <= policy.sigma1) return Decision::block_swap;
  return Decision::none;
}

const char* to_string(Decision d) {
  switch (d) {
    case Decision::none: return "none";
    case Decision::block_swap: return "block_swap";
    case Decision::subarray_swap: return "subarray_swap";
  }
  return "?";
}

}  // namespace pcmwl
