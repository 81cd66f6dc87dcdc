#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "subdim/core.hpp"
#include "subdim/errors.hpp"
#include "subdim/hypotests.hpp"
#include "subdim/measures.hpp"
#include "subdim/nulldist.hpp"
#include "subdim/rng.hpp"
#include "subdim/theory.hpp"

namespace subdim {

/// Equicorrelation matrix: unit diagonal, constant off-diagonal rho.
[[nodiscard]] inline Eigen::MatrixXd equicorrelation(int p, double rho = 0.5) {
  if (p < 1) {
    throw ParameterError("equicorrelation requires p >= 1");
  }
  if (p >= 2 && !(rho > -1.0 / (p - 1) && rho < 1.0)) {
    throw ParameterError("equicorrelation(" + std::to_string(p) +
                         ") needs rho in (-1/(p-1), 1)");
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Constant(p, p, rho);
  s.diagonal().setOnes();
  return s;
}

/// Gaussian N(mu, sigma).
struct GaussianFamily {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

/// Multivariate t with location xi, dispersion omega, degrees of freedom nu.
struct StudentTFamily {
  Eigen::VectorXd xi;
  Eigen::MatrixXd omega;
  double nu = 0.0;
};

/// Elliptical exponential-power family with density proportional to
/// exp(−(mahalanobis²)^nu / 2).
struct ExponentialPowerFamily {
  Eigen::VectorXd xi;
  Eigen::MatrixXd omega;
  double nu = 0.0;
};

/// Benchmark composite: coordinates 1..q follow the designated non-Gaussian
/// block, coordinates q+1..p an independent equicorrelated Gaussian block.
/// model 1 = skew-normal slant `param`, model 2 = t with nu = `param`,
/// model 3 = skew-t with nu = `param` and slant 1/`param`.
struct CompositeModel {
  int model = 1;
  int p = 0;
  int q = 0;
  double param = 0.0;
  double rho = 0.5;
};

using FamilySpec = std::variant<GaussianFamily, StudentTFamily,
                                ExponentialPowerFamily, SkewNormalSpec,
                                SkewTSpec, CompositeModel>;

/// The non-Gaussian q-block of a composite model as a standalone family.
[[nodiscard]] inline FamilySpec inner_family(const CompositeModel& m) {
  if (m.model < 1 || m.model > 3) {
    throw ParameterError("composite model must be 1, 2, or 3");
  }
  if (m.p < 2 || m.q < 1 || m.q >= m.p) {
    throw ParameterError("composite model needs 1 <= q < p with p >= 2");
  }
  if (!(m.param > 0.0)) {
    throw ParameterError("composite model parameter must be positive");
  }
  const Eigen::MatrixXd omega = equicorrelation(m.q, m.rho);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.q);
  if (m.model == 1) {
    return SkewNormalSpec{omega, Eigen::VectorXd::Constant(m.q, m.param),
                          zero};
  }
  if (m.model == 2) {
    return StudentTFamily{zero, omega, m.param};
  }
  return SkewTSpec{omega, Eigen::VectorXd::Constant(m.q, 1.0 / m.param),
                   m.param, zero};
}

namespace detail {

[[nodiscard]] inline Eigen::VectorXd location_or_zero(
    const Eigen::VectorXd& xi, Eigen::Index p, const char* family) {
  if (xi.size() == 0) {
    return Eigen::VectorXd::Zero(p);
  }
  if (xi.size() != p) {
    throw ParameterError(std::string(family) +
                         ": location length does not match dispersion size");
  }
  return xi;
}

[[nodiscard]] inline Eigen::MatrixXd dispersion_factor(
    const Eigen::MatrixXd& omega, const char* family) {
  if (omega.rows() != omega.cols() || omega.rows() < 1) {
    throw ParameterError(std::string(family) +
                         ": dispersion must be a square matrix");
  }
  return cholesky_factor(omega);
}

[[nodiscard]] inline Eigen::VectorXd unit_direction(Rng& rng, Eigen::Index p) {
  Eigen::VectorXd g;
  double norm = 0.0;
  do {
    g = rng.normal_vector(p);
    norm = g.norm();
  } while (!(norm > 0.0));
  return g / norm;
}

}  // namespace detail

/// Draws an n×p sample from the family. Deterministic given the seed: one
/// generator drives the whole call, rows in order, and within a row the
/// coordinate normals come first, then any auxiliary draws (selection normal,
/// chi-squared divisor, radial gamma).
[[nodiscard]] inline Eigen::MatrixXd sample(const FamilySpec& spec, int n,
                                            std::uint64_t seed);

namespace detail {

[[nodiscard]] inline Eigen::MatrixXd sample_gaussian(const GaussianFamily& f,
                                                     int n, Rng& rng) {
  const Eigen::MatrixXd l = dispersion_factor(f.sigma, "gaussian");
  const Eigen::VectorXd mu = location_or_zero(f.mu, l.rows(), "gaussian");
  Eigen::MatrixXd x(n, l.rows());
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd z =
        l.triangularView<Eigen::Lower>() * rng.normal_vector(l.rows());
    x.row(j) = (mu + z).transpose();
  }
  return x;
}

[[nodiscard]] inline Eigen::MatrixXd sample_student_t(const StudentTFamily& f,
                                                      int n, Rng& rng) {
  if (!(f.nu > 0.0)) {
    throw ParameterError("t family needs nu > 0");
  }
  const Eigen::MatrixXd l = dispersion_factor(f.omega, "t");
  const Eigen::VectorXd xi = location_or_zero(f.xi, l.rows(), "t");
  Eigen::MatrixXd x(n, l.rows());
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd z =
        l.triangularView<Eigen::Lower>() * rng.normal_vector(l.rows());
    const double v = rng.chi_squared(f.nu);
    x.row(j) = (xi + z / std::sqrt(v / f.nu)).transpose();
  }
  return x;
}

[[nodiscard]] inline Eigen::MatrixXd sample_exponential_power(
    const ExponentialPowerFamily& f, int n, Rng& rng) {
  if (!(f.nu > 0.0)) {
    throw ParameterError("exponential-power family needs nu > 0");
  }
  const Eigen::MatrixXd l = dispersion_factor(f.omega, "exponential-power");
  const Eigen::VectorXd xi =
      location_or_zero(f.xi, l.rows(), "exponential-power");
  const double p = static_cast<double>(l.rows());
  Eigen::MatrixXd x(n, l.rows());
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd dir = unit_direction(rng, l.rows());
    const double v = rng.gamma(p / (2.0 * f.nu), 2.0);
    const double r = std::pow(v, 1.0 / (2.0 * f.nu));
    const Eigen::VectorXd scaled = l.triangularView<Eigen::Lower>() * dir;
    x.row(j) = (xi + r * scaled).transpose();
  }
  return x;
}

/// Sign-selection sampler for the skew-normal: Z ~ N(0, Ω), W ~ N(0, 1),
/// X = ξ + (W ≤ λᵀZ ? Z : −Z), which realizes density 2·φ(z; Ω)·Φ(λᵀz).
[[nodiscard]] inline Eigen::VectorXd sn_core_draw(
    const Eigen::MatrixXd& l, const Eigen::VectorXd& lambda, Rng& rng) {
  const Eigen::VectorXd z =
      l.triangularView<Eigen::Lower>() * rng.normal_vector(l.rows());
  const double w = rng.normal();
  return w <= lambda.dot(z) ? z : Eigen::VectorXd(-z);
}

[[nodiscard]] inline Eigen::MatrixXd sample_skew_normal(
    const SkewNormalSpec& f, int n, Rng& rng) {
  const Eigen::MatrixXd l = dispersion_factor(f.omega, "skew-normal");
  if (f.lambda.size() != l.rows()) {
    throw ParameterError("skew-normal: slant length does not match omega");
  }
  const Eigen::VectorXd xi = location_or_zero(f.xi, l.rows(), "skew-normal");
  Eigen::MatrixXd x(n, l.rows());
  for (int j = 0; j < n; ++j) {
    x.row(j) = (xi + sn_core_draw(l, f.lambda, rng)).transpose();
  }
  return x;
}

[[nodiscard]] inline Eigen::MatrixXd sample_skew_t(const SkewTSpec& f, int n,
                                                   Rng& rng) {
  if (!(f.nu > 0.0)) {
    throw ParameterError("skew-t family needs nu > 0");
  }
  const Eigen::MatrixXd l = dispersion_factor(f.omega, "skew-t");
  if (f.alpha.size() != l.rows()) {
    throw ParameterError("skew-t: slant length does not match omega");
  }
  const Eigen::VectorXd xi = location_or_zero(f.xi, l.rows(), "skew-t");
  Eigen::MatrixXd x(n, l.rows());
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd s = sn_core_draw(l, f.alpha, rng);
    const double v = rng.chi_squared(f.nu);
    x.row(j) = (xi + s / std::sqrt(v / f.nu)).transpose();
  }
  return x;
}

[[nodiscard]] inline Eigen::MatrixXd sample_composite(const CompositeModel& m,
                                                      int n,
                                                      std::uint64_t seed) {
  const FamilySpec inner = inner_family(m);
  const Eigen::MatrixXd block1 = sample(inner, n, derive_seed(seed, 1));
  const GaussianFamily tail{Eigen::VectorXd::Zero(m.p - m.q),
                            equicorrelation(m.p - m.q, m.rho)};
  const Eigen::MatrixXd block2 =
      sample(FamilySpec(tail), n, derive_seed(seed, 2));
  Eigen::MatrixXd x(n, m.p);
  x.leftCols(m.q) = block1;
  x.rightCols(m.p - m.q) = block2;
  return x;
}

}  // namespace detail

inline Eigen::MatrixXd sample(const FamilySpec& spec, int n,
                              std::uint64_t seed) {
  if (n < 1) {
    throw ParameterError("sample size must be >= 1");
  }
  if (const auto* composite = std::get_if<CompositeModel>(&spec)) {
    return detail::sample_composite(*composite, n, seed);
  }
  Rng rng(seed);
  return std::visit(
      [&](const auto& f) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianFamily>) {
          return detail::sample_gaussian(f, n, rng);
        } else if constexpr (std::is_same_v<T, StudentTFamily>) {
          return detail::sample_student_t(f, n, rng);
        } else if constexpr (std::is_same_v<T, ExponentialPowerFamily>) {
          return detail::sample_exponential_power(f, n, rng);
        } else if constexpr (std::is_same_v<T, SkewNormalSpec>) {
          return detail::sample_skew_normal(f, n, rng);
        } else if constexpr (std::is_same_v<T, SkewTSpec>) {
          return detail::sample_skew_t(f, n, rng);
        } else {
          throw ContractViolationError("unreachable family branch");
        }
      },
      spec);
}

/// Which test a study selector runs.
enum class TestKind { MaxS, MaxK, MaxSK, MardiaS, MardiaK };

struct TestSelector {
  TestKind kind = TestKind::MaxS;
  std::optional<int> q0;
  std::string name;
};

/// Parses "maxs", "maxk", "maxsk" (optionally suffixed "-<q0>"),
/// "mardia-s", "mardia-k".
[[nodiscard]] inline TestSelector parse_test_selector(const std::string& text) {
  TestSelector out;
  out.name = text;
  if (text == "mardia-s") {
    out.kind = TestKind::MardiaS;
    return out;
  }
  if (text == "mardia-k") {
    out.kind = TestKind::MardiaK;
    return out;
  }
  std::string base = text;
  const std::size_t dash = text.find('-');
  if (dash != std::string::npos) {
    base = text.substr(0, dash);
    const std::string suffix = text.substr(dash + 1);
    int q0 = 0;
    const auto [ptr, ec] =
        std::from_chars(suffix.data(), suffix.data() + suffix.size(), q0);
    if (ec != std::errc() || ptr != suffix.data() + suffix.size() || q0 < 1) {
      throw ConfigError("unknown test selector '" + text + "'");
    }
    out.q0 = q0;
  }
  if (base == "maxs") {
    out.kind = TestKind::MaxS;
  } else if (base == "maxk") {
    out.kind = TestKind::MaxK;
  } else if (base == "maxsk") {
    out.kind = TestKind::MaxSK;
  } else {
    throw ConfigError("unknown test selector '" + text + "'");
  }
  return out;
}

/// One row of a size/power/detection study.
struct ExperimentResult {
  std::string testName;
  double nominalLevel = 0.05;
  double rejectionRate = 0.0;
  int replicates = 0;
  double mcStandardError = 0.0;
  /// Detection studies only: proportion of replicates flagging each catalog
  /// index / cardinality (denominator = all replicates; zero entries kept).
  std::map<int, double> detectionHistogram;
  std::map<int, double> qHistogram;
};

/// Dimension of the data a family spec generates.
[[nodiscard]] inline int family_dimension(const FamilySpec& spec) {
  return std::visit(
      [](const auto& f) -> int {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, GaussianFamily>) {
          return static_cast<int>(f.sigma.rows());
        } else if constexpr (std::is_same_v<T, CompositeModel>) {
          return f.p;
        } else {
          return static_cast<int>(f.omega.rows());
        }
      },
      spec);
}

namespace detail {

/// Replicated study engine. For every replicate, data get seed
/// derive_seed(seed, 2r) and the null draws derive_seed(seed, 2r+1); the
/// global null models are estimated once and every requested scope (global
/// or fixed cardinality) reads its marginal law off the same draws, which is
/// exact because a fixed-q model is a principal sub-block of the global one.
[[nodiscard]] inline std::vector<ExperimentResult> run_study(
    const std::vector<TestSelector>& tests, const FamilySpec& family, int n,
    int replicates, std::uint64_t seed, int reps, double level,
    unsigned threads, bool withDetection, ExperimentResult* detectionOut) {
  if (replicates < 1) {
    throw ParameterError("replicates must be >= 1");
  }
  validate_test_args(reps, level);
  if (tests.empty() && !withDetection) {
    throw ConfigError("study needs at least one test selector");
  }
  const int p = family_dimension(family);

  bool needSkew = withDetection;
  bool needKurt = withDetection;
  std::set<int> skewScopes;
  std::set<int> kurtScopes;
  if (withDetection) {
    skewScopes.insert(0);
    kurtScopes.insert(0);
  }
  for (const TestSelector& t : tests) {
    if (t.q0 && (*t.q0 < 1 || *t.q0 > p)) {
      throw InvalidDimensionError("test '" + t.name + "': q0 outside [1, " +
                                  std::to_string(p) + "]");
    }
    const int scope = t.q0 ? *t.q0 : 0;
    if (t.kind == TestKind::MaxS || t.kind == TestKind::MaxSK) {
      needSkew = true;
      skewScopes.insert(scope);
    }
    if (t.kind == TestKind::MaxK || t.kind == TestKind::MaxSK) {
      needKurt = true;
      kurtScopes.insert(scope);
    }
  }

  std::vector<int> rejections(tests.size(), 0);
  std::map<int, int> indexCounts;
  std::map<int, int> qCounts;
  int triggered = 0;

  for (int r = 0; r < replicates; ++r) {
    const std::uint64_t dataSeed = derive_seed(seed, 2 * static_cast<std::uint64_t>(r));
    const std::uint64_t nullSeed =
        derive_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1);
    const Dataset data(sample(family, n, dataSeed));
    const MeasureReport report =
        measure_report(data, DegeneratePolicy::Throw, threads);
    const SubsetCatalog catalog = enumerate_subsets(p);

    std::map<int, std::vector<double>> skewDraws;
    if (needSkew) {
      const SkewNullModel model =
          build_skew_null(data, catalog.entries(), threads);
      std::map<int, std::vector<BlockSpan>> layouts;
      for (int scope : skewScopes) {
        std::vector<BlockSpan> layout;
        for (const BlockSpan& span : model.blockLayout) {
          if (scope == 0 || span.subset.q() == scope) {
            layout.push_back(span);
          }
        }
        layouts.emplace(scope, std::move(layout));
        skewDraws[scope].resize(static_cast<std::size_t>(reps));
      }
      const Eigen::MatrixXd a =
          psd_sampling_factor(model.omegaHat, "skew null dispersion");
      parallel_for(static_cast<std::size_t>(reps), threads,
                   [&](std::size_t r2) {
                     Rng rng(derive_seed(nullSeed, r2));
                     const Eigen::VectorXd w = a * rng.normal_vector(a.cols());
                     for (const auto& [scope, layout] : layouts) {
                       skewDraws[scope][r2] = G_statistic(w, layout);
                     }
                   });
    }

    std::map<int, std::vector<double>> kurtDraws;
    if (needKurt) {
      const KurtNullModel model =
          build_kurt_null(data, catalog.entries(), threads);
      std::map<int, std::vector<int>> columns;
      for (int scope : kurtScopes) {
        std::vector<int> cols;
        for (std::size_t i = 0; i < model.layout.size(); ++i) {
          if (scope == 0 || model.layout[i].q() == scope) {
            cols.push_back(static_cast<int>(i));
          }
        }
        columns.emplace(scope, std::move(cols));
        kurtDraws[scope].resize(static_cast<std::size_t>(reps));
      }
      const Eigen::MatrixXd a =
          psd_sampling_factor(model.gammaHat, "kurt null dispersion");
      parallel_for(static_cast<std::size_t>(reps), threads,
                   [&](std::size_t r2) {
                     Rng rng(derive_seed(nullSeed, r2));
                     const Eigen::VectorXd w = a * rng.normal_vector(a.cols());
                     for (const auto& [scope, cols] : columns) {
                       double best = 0.0;
                       for (int c : cols) {
                         best = std::max(best, std::abs(w(c)));
                       }
                       kurtDraws[scope][r2] = best;
                     }
                   });
    }

    const auto skew_pvalue = [&](std::optional<int> q0) {
      const double stat = max_statistics(report, q0).maxS.value;
      return strictly_larger_pvalue(skewDraws.at(q0 ? *q0 : 0), stat);
    };
    const auto kurt_pvalue = [&](std::optional<int> q0) {
      const double stat = max_statistics(report, q0).maxK.value;
      return strictly_larger_pvalue(kurtDraws.at(q0 ? *q0 : 0), stat);
    };

    for (std::size_t t = 0; t < tests.size(); ++t) {
      const TestSelector& sel = tests[t];
      bool rejected = false;
      switch (sel.kind) {
        case TestKind::MaxS:
          rejected = skew_pvalue(sel.q0) < level;
          break;
        case TestKind::MaxK:
          rejected = kurt_pvalue(sel.q0) < level;
          break;
        case TestKind::MaxSK:
          rejected = skew_pvalue(sel.q0) < level / 2.0 ||
                     kurt_pvalue(sel.q0) < level / 2.0;
          break;
        case TestKind::MardiaS:
          rejected = mardia_skewness_test(data, level).rejected;
          break;
        case TestKind::MardiaK:
          rejected = mardia_kurtosis_test(data, level).rejected;
          break;
      }
      if (rejected) {
        ++rejections[t];
      }
    }

    if (withDetection) {
      const DetectionReport det = detection_decide(
          skew_pvalue(std::nullopt), kurt_pvalue(std::nullopt), level,
          report.maxS.argmax, report.maxKAbs.argmax);
      if (det.triggered && det.unionSubset) {
        ++triggered;
        ++indexCounts[subset_index(*det.unionSubset, p)];
        ++qCounts[det.unionSubset->q()];
      }
    }
  }

  const auto rate_of = [&](int count) {
    return static_cast<double>(count) / static_cast<double>(replicates);
  };
  std::vector<ExperimentResult> results(tests.size());
  for (std::size_t t = 0; t < tests.size(); ++t) {
    results[t].testName = tests[t].name;
    results[t].nominalLevel = level;
    results[t].replicates = replicates;
    results[t].rejectionRate = rate_of(rejections[t]);
    results[t].mcStandardError =
        std::sqrt(results[t].rejectionRate * (1.0 - results[t].rejectionRate) /
                  static_cast<double>(replicates));
  }
  if (withDetection && detectionOut != nullptr) {
    detectionOut->testName = "detect";
    detectionOut->nominalLevel = level;
    detectionOut->replicates = replicates;
    detectionOut->rejectionRate = rate_of(triggered);
    detectionOut->mcStandardError = std::sqrt(
        detectionOut->rejectionRate * (1.0 - detectionOut->rejectionRate) /
        static_cast<double>(replicates));
    const int catalogSize = static_cast<int>(enumerate_subsets(p).size());
    for (int i = 1; i <= catalogSize; ++i) {
      detectionOut->detectionHistogram[i] = rate_of(indexCounts[i]);
    }
    for (int q = 1; q <= p; ++q) {
      detectionOut->qHistogram[q] = rate_of(qCounts[q]);
    }
  }
  return results;
}

}  // namespace detail

/// Empirical size of the selected tests under a Gaussian family.
[[nodiscard]] inline std::vector<ExperimentResult> estimate_size(
    const std::vector<TestSelector>& tests, const GaussianFamily& family,
    int n, int replicates, std::uint64_t seed, int reps = 1000,
    double level = 0.05, unsigned threads = 1) {
  return detail::run_study(tests, FamilySpec(family), n, replicates, seed,
                           reps, level, threads, false, nullptr);
}

/// Empirical power of the selected tests under a composite alternative.
[[nodiscard]] inline std::vector<ExperimentResult> estimate_power(
    const std::vector<TestSelector>& tests, const CompositeModel& model,
    int n, int replicates, std::uint64_t seed, int reps = 1000,
    double level = 0.05, unsigned threads = 1) {
  return detail::run_study(tests, FamilySpec(model), n, replicates, seed,
                           reps, level, threads, false, nullptr);
}

/// Detection study under a composite alternative: how often the recipe
/// triggers and which subset it flags (histograms over the full catalog and
/// over cardinalities, denominator = all replicates).
[[nodiscard]] inline ExperimentResult detection_study(
    const CompositeModel& model, int n, int replicates, std::uint64_t seed,
    int reps = 1000, double level = 0.05, unsigned threads = 1) {
  ExperimentResult out;
  (void)detail::run_study({}, FamilySpec(model), n, replicates, seed, reps,
                          level, threads, true, &out);
  return out;
}

}  // namespace subdim
