#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subdim/core.hpp"
#include "subdim/errors.hpp"
#include "subdim/parallel.hpp"

namespace subdim {

namespace detail {

/// Centered-and-whitened rows: Z with row j = L⁻¹(x_j − x̄), where S = LLᵀ is
/// the sample covariance (divisor n−1). The Mahalanobis cross-products are
/// then plain inner products of Z rows.
[[nodiscard]] inline Eigen::MatrixXd whitened_rows(const Dataset& d) {
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  if (n < p + 2) {
    throw InsufficientSampleError("whitening needs n >= q + 2 (n = " +
                                  std::to_string(n) + ", q = " +
                                  std::to_string(p) + ")");
  }
  const Eigen::RowVectorXd mean = d.values().colwise().mean();
  const Eigen::MatrixXd centered = d.values().rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  Eigen::MatrixXd L;
  try {
    L = cholesky_factor(cov);
  } catch (const DegenerateDataError&) {
    throw DegenerateDataError("singular sample covariance (q = " +
                              std::to_string(p) + ")");
  }
  // Z = C·L⁻ᵀ  ⇔  Zᵀ = L⁻¹·Cᵀ.
  return L.triangularView<Eigen::Lower>()
      .solve(centered.transpose())
      .transpose();
}

/// Sample size above which b1 switches from the O(n²) Gram route to the
/// algebraically identical O(n·q³) third-moment-tensor route.
inline constexpr Eigen::Index kB1GramRouteMaxN = 4096;

/// Skewness estimate from pre-whitened rows.
[[nodiscard]] inline double b1_from_whitened(const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index q = z.cols();
  double b1 = 0.0;
  if (n <= kB1GramRouteMaxN) {
    // Elementwise cube of the whitened Gram matrix, summed.
    const Eigen::MatrixXd g = z * z.transpose();
    b1 = g.array().cube().sum() / (static_cast<double>(n) * static_cast<double>(n));
  } else {
    // b1 = Σ_abc T²_abc with T = n⁻¹ Σ_j z_j ⊗ z_j ⊗ z_j; avoids the n×n Gram.
    for (Eigen::Index a = 0; a < q; ++a) {
      const Eigen::MatrixXd za =
          z.array().colwise() * z.col(a).array();  // n×q, rows z_ja·z_j
      const Eigen::MatrixXd ta = (z.transpose() * za) / static_cast<double>(n);
      b1 += ta.squaredNorm();
    }
  }
  if (b1 < 0.0) {
    if (b1 >= -1e-10) {
      return 0.0;
    }
    throw ContractViolationError("negative skewness estimate " +
                                 std::to_string(b1));
  }
  return b1;
}

/// Kurtosis estimate from pre-whitened rows.
[[nodiscard]] inline double b2_from_whitened(const Eigen::MatrixXd& z) {
  return z.rowwise().squaredNorm().array().square().sum() /
         static_cast<double>(z.rows());
}

}  // namespace detail

/// Sample Mardia skewness: n⁻² ΣΣ {(X_j−X̄)ᵀS⁻¹(X_k−X̄)}³.
[[nodiscard]] inline double b1_sample(const Dataset& d) {
  return detail::b1_from_whitened(detail::whitened_rows(d));
}

/// Sample Mardia kurtosis: n⁻¹ Σ {(X_j−X̄)ᵀS⁻¹(X_j−X̄)}².
[[nodiscard]] inline double b2_sample(const Dataset& d) {
  return detail::b2_from_whitened(detail::whitened_rows(d));
}

/// Centered and scaled skewness statistic:
/// (n·b1 − q(q+1)(q+2)) / √(12·q(q+1)(q+2)).
[[nodiscard]] inline double standardize_b1(double b1, Eigen::Index n, int q) {
  const double c = static_cast<double>(q) * (q + 1) * (q + 2);
  return (static_cast<double>(n) * b1 - c) / std::sqrt(12.0 * c);
}

/// Centered and scaled kurtosis statistic:
/// (b2 − q(q+2)) / √(8·q(q+2)/n).
[[nodiscard]] inline double standardize_b2(double b2, Eigen::Index n, int q) {
  const double c = static_cast<double>(q) * (q + 2);
  return (b2 - c) / std::sqrt(8.0 * c / static_cast<double>(n));
}

/// Raw skewness/kurtosis pair for one subset.
struct MeasurePair {
  double b1 = std::numeric_limits<double>::quiet_NaN();
  double b2 = std::numeric_limits<double>::quiet_NaN();
  Subset subset{std::vector<int>{1}};
};

/// Standardized pair for one subset.
struct StandardizedPair {
  double tildeB1 = std::numeric_limits<double>::quiet_NaN();
  double tildeB2 = std::numeric_limits<double>::quiet_NaN();
  Subset subset{std::vector<int>{1}};
};

/// A maximum statistic with its achieving subset. catalogIndex == 0 marks an
/// empty scope (every candidate subset was degenerate).
struct MaxStat {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::optional<Subset> argmax;
  int catalogIndex = 0;
};

/// What to do with subsets whose covariance is singular.
enum class DegeneratePolicy {
  Throw,     ///< fail, naming the first degenerate subset in catalog order
  MarkNull,  ///< record NaN measures and exclude from max statistics
};

/// All sub-dimensional measures of a dataset, in catalog order.
struct MeasureReport {
  Eigen::Index n = 0;
  int p = 0;
  std::vector<MeasurePair> pairs;
  std::vector<StandardizedPair> standardized;
  std::vector<int> degenerateIndices;  ///< 1-based catalog indices (MarkNull)
  MaxStat maxS;
  MaxStat maxKAbs;
  std::vector<MaxStat> perQMaxS;     ///< entry q−1 covers cardinality q
  std::vector<MaxStat> perQMaxKAbs;  ///< entry q−1 covers cardinality q
};

/// Computes every subset's measures, standardized statistics, and max
/// statistics. Per-subset work may fan out over `threads`; results are
/// assembled in catalog order regardless of schedule.
[[nodiscard]] inline MeasureReport measure_report(
    const Dataset& d, DegeneratePolicy policy = DegeneratePolicy::Throw,
    unsigned threads = 1) {
  const SubsetCatalog catalog = enumerate_subsets(static_cast<int>(d.p()));
  const std::size_t m = catalog.size();

  MeasureReport report;
  report.n = d.n();
  report.p = catalog.p();
  report.pairs.resize(m);
  report.standardized.resize(m);

  std::vector<std::string> failures(m);
  std::vector<bool> failed(m, false);
  parallel_for(m, threads, [&](std::size_t i) {
    const Subset& s = catalog.entries()[i];
    report.pairs[i].subset = s;
    report.standardized[i].subset = s;
    try {
      const Eigen::MatrixXd z = detail::whitened_rows(project(d, s));
      const double b1 = detail::b1_from_whitened(z);
      const double b2 = detail::b2_from_whitened(z);
      report.pairs[i].b1 = b1;
      report.pairs[i].b2 = b2;
      report.standardized[i].tildeB1 = standardize_b1(b1, d.n(), s.q());
      report.standardized[i].tildeB2 = standardize_b2(b2, d.n(), s.q());
    } catch (const DegenerateDataError& e) {
      failed[i] = true;
      failures[i] = e.what();
    } catch (const InsufficientSampleError& e) {
      failed[i] = true;
      failures[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < m; ++i) {
    if (!failed[i]) {
      continue;
    }
    const std::string message =
        "subset " + catalog.entries()[i].label() + ": " + failures[i];
    if (policy == DegeneratePolicy::Throw) {
      throw DegenerateDataError(message);
    }
    report.degenerateIndices.push_back(static_cast<int>(i) + 1);
  }

  report.perQMaxS.resize(static_cast<std::size_t>(report.p));
  report.perQMaxKAbs.resize(static_cast<std::size_t>(report.p));
  // Strictly-greater scans in catalog order implement the smallest-index
  // tie-break.
  for (std::size_t i = 0; i < m; ++i) {
    if (failed[i]) {
      continue;
    }
    const Subset& s = catalog.entries()[i];
    const int catalogIndex = static_cast<int>(i) + 1;
    const double vS = report.standardized[i].tildeB1;
    const double vK = std::abs(report.standardized[i].tildeB2);
    auto consider = [&](MaxStat& slot, double v) {
      if (slot.catalogIndex == 0 || v > slot.value) {
        slot.value = v;
        slot.argmax = s;
        slot.catalogIndex = catalogIndex;
      }
    };
    consider(report.maxS, vS);
    consider(report.maxKAbs, vK);
    consider(report.perQMaxS[static_cast<std::size_t>(s.q()) - 1], vS);
    consider(report.perQMaxKAbs[static_cast<std::size_t>(s.q()) - 1], vK);
  }
  if (report.maxS.catalogIndex == 0) {
    throw DegenerateDataError("every subset is degenerate");
  }
  return report;
}

/// Global or fixed-cardinality max statistics of a report.
struct MaxStatistics {
  MaxStat maxS;
  MaxStat maxK;
};

/// Extracts the max statistics, optionally restricted to cardinality q0.
[[nodiscard]] inline MaxStatistics max_statistics(
    const MeasureReport& r, std::optional<int> q0 = std::nullopt) {
  if (!q0.has_value()) {
    return MaxStatistics{r.maxS, r.maxKAbs};
  }
  if (*q0 < 1 || *q0 > r.p) {
    throw InvalidDimensionError("q0 = " + std::to_string(*q0) +
                                " outside [1," + std::to_string(r.p) + "]");
  }
  return MaxStatistics{r.perQMaxS[static_cast<std::size_t>(*q0) - 1],
                       r.perQMaxKAbs[static_cast<std::size_t>(*q0) - 1]};
}

}  // namespace subdim
