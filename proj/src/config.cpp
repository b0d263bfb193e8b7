#include "semamark/config.hpp"

#include <cstdio>
#include <stdexcept>

#include "semamark/rng.hpp"

namespace semamark {

void WatermarkConfig::validate() const {
  if (!(gamma_gen > 0.0 && gamma_gen < 1.0)) {
    throw std::invalid_argument("gamma_gen must lie in (0, 1)");
  }
  if (!(gamma_detect > 0.0 && gamma_detect < 1.0)) {
    throw std::invalid_argument("gamma_detect must lie in (0, 1)");
  }
  if (delta < 0.0) {
    throw std::invalid_argument("delta must be non-negative");
  }
  if (m < 1) {
    throw std::invalid_argument("m must be at least 1");
  }
  if (K < 2) {
    throw std::invalid_argument("K must be at least 2");
  }
  if (Q < 0) {
    throw std::invalid_argument("Q must be non-negative");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (!(tau > 0.0)) {
    throw std::invalid_argument("tau must be positive");
  }
}

std::uint64_t config_hash(const WatermarkConfig& cfg) {
  char buf[256];
  const int n = std::snprintf(buf, sizeof(buf),
                              "g=%.17g;gd=%.17g;d=%.17g;m=%d;K=%d;Q=%d;s=%.17g;t=%.17g;kfp=%016llx",
                              cfg.gamma_gen, cfg.gamma_detect, cfg.delta, cfg.m, cfg.K,
                              cfg.Q, cfg.sigma, cfg.tau,
                              static_cast<unsigned long long>(cfg.key.fingerprint()));
  return murmur3_x64_128(buf, static_cast<std::size_t>(n), 0).h1;
}

std::string config_hash_hex(const WatermarkConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return std::string(buf);
}

}  // namespace semamark
