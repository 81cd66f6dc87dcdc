#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "subdim/errors.hpp"

namespace subdim {

/// Derives an independent stream seed from a base seed and a stream index.
///
/// Uses the splitmix64 finalizer over seed + (stream+1)·golden-gamma, the
/// standard recipe for splitting one user seed into per-replicate streams.
/// The +1 keeps stream 0 distinct from the base seed itself.
[[nodiscard]] inline std::uint64_t derive_seed(std::uint64_t seed,
                                               std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic random generator: mt19937_64 core with explicitly coded
/// transforms (polar Gaussian, Marsaglia–Tsang Gamma) so that streams are
/// reproducible bit-for-bit regardless of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw on [0, 1) with 53-bit resolution.
  [[nodiscard]] double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw (polar Box–Muller with cached spare).
  [[nodiscard]] double normal() {
    if (hasSpare_) {
      hasSpare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    hasSpare_ = true;
    return u * f;
  }

  /// Gamma(shape, scale) draw via Marsaglia–Tsang squeeze; shape < 1 is
  /// boosted through the Gamma(shape+1)·U^{1/shape} identity.
  [[nodiscard]] double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) {
      throw ParameterError("gamma draw requires shape > 0 and scale > 0");
    }
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) {
        return d * v * scale;
      }
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return d * v * scale;
      }
    }
  }

  /// Chi-squared draw with nu degrees of freedom.
  [[nodiscard]] double chi_squared(double nu) { return gamma(0.5 * nu, 2.0); }

  /// Vector of independent standard normals.
  [[nodiscard]] Eigen::VectorXd normal_vector(Eigen::Index m) {
    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      out(i) = normal();
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool hasSpare_ = false;
};

}  // namespace subdim
