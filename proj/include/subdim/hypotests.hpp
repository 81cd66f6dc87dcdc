#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "subdim/core.hpp"
#include "subdim/errors.hpp"
#include "subdim/measures.hpp"
#include "subdim/nulldist.hpp"

namespace subdim {

/// Outcome of one hypothesis test.
struct TestReport {
  std::string testName;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double pValue = std::numeric_limits<double>::quiet_NaN();
  int reps = 0;  ///< Monte Carlo null size; 0 for closed-form references
  double level = 0.05;
  bool rejected = false;
  std::optional<Subset> argmaxSubset;
  int argmaxIndex = 0;  ///< 1-based catalog index; 0 when not applicable
  std::optional<double> subPValueS;  ///< composite tests only
  std::optional<double> subPValueK;  ///< composite tests only
  std::optional<int> q0;             ///< fixed-cardinality tests only
  std::uint64_t seed = 0;
};

namespace detail {

inline void validate_test_args(int reps, double level) {
  if (reps < 1) {
    throw ParameterError("reps must be >= 1");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("level must lie strictly inside (0, 1)");
  }
}

[[nodiscard]] inline std::vector<Subset> scope_subsets(int p,
                                                       std::optional<int> q0) {
  if (q0 && (*q0 < 1 || *q0 > p)) {
    throw InvalidDimensionError("q0 = " + std::to_string(*q0) +
                                " outside [1, p] with p = " +
                                std::to_string(p));
  }
  const SubsetCatalog catalog = enumerate_subsets(p);
  if (!q0) {
    return catalog.entries();
  }
  std::vector<Subset> out;
  for (const Subset& s : catalog.entries()) {
    if (s.q() == *q0) {
      out.push_back(s);
    }
  }
  return out;
}

/// Monte Carlo p-value: proportion of null draws strictly larger than the
/// observed statistic.
[[nodiscard]] inline double strictly_larger_pvalue(
    const std::vector<double>& draws, double statistic) {
  std::size_t count = 0;
  for (double v : draws) {
    if (v > statistic) {
      ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(draws.size());
}

/// Shared body of the max-skewness tests. When `pre` is non-null the caller's
/// measure report is reused instead of recomputing all subset measures.
[[nodiscard]] inline TestReport run_max_s(const Dataset& d,
                                          std::optional<int> q0, int reps,
                                          std::uint64_t seed, double level,
                                          unsigned threads,
                                          const MeasureReport* pre = nullptr) {
  validate_test_args(reps, level);
  MeasureReport local;
  if (pre == nullptr) {
    local = measure_report(d, DegeneratePolicy::Throw, threads);
    pre = &local;
  }
  const MaxStat stat = max_statistics(*pre, q0).maxS;
  const SkewNullModel model =
      build_skew_null(d, scope_subsets(static_cast<int>(d.p()), q0), threads);
  const NullDraws draws = sample_skew_null(model, reps, seed, threads);
  TestReport out;
  out.testName = q0 ? "maxs-q" : "maxs";
  out.statistic = stat.value;
  out.pValue = strictly_larger_pvalue(draws.values, stat.value);
  out.reps = reps;
  out.level = level;
  out.rejected = out.pValue < level;
  out.argmaxSubset = stat.argmax;
  out.argmaxIndex = stat.catalogIndex;
  out.q0 = q0;
  out.seed = seed;
  return out;
}

/// Shared body of the max-kurtosis tests.
[[nodiscard]] inline TestReport run_max_k(const Dataset& d,
                                          std::optional<int> q0, int reps,
                                          std::uint64_t seed, double level,
                                          unsigned threads,
                                          const MeasureReport* pre = nullptr) {
  validate_test_args(reps, level);
  MeasureReport local;
  if (pre == nullptr) {
    local = measure_report(d, DegeneratePolicy::Throw, threads);
    pre = &local;
  }
  const MaxStat stat = max_statistics(*pre, q0).maxK;
  const KurtNullModel model =
      build_kurt_null(d, scope_subsets(static_cast<int>(d.p()), q0), threads);
  const NullDraws draws = sample_kurt_null(model, reps, seed, threads);
  TestReport out;
  out.testName = q0 ? "maxk-q" : "maxk";
  out.statistic = stat.value;
  out.pValue = strictly_larger_pvalue(draws.values, stat.value);
  out.reps = reps;
  out.level = level;
  out.rejected = out.pValue < level;
  out.argmaxSubset = stat.argmax;
  out.argmaxIndex = stat.catalogIndex;
  out.q0 = q0;
  out.seed = seed;
  return out;
}

/// Shared body of the Bonferroni composite: both halves reuse one measure
/// report and the same seed, and the half with the smaller p-value (ties to
/// skewness) supplies the reported statistic and argmax.
[[nodiscard]] inline TestReport run_max_sk(const Dataset& d,
                                           std::optional<int> q0, int reps,
                                           std::uint64_t seed, double level,
                                           unsigned threads) {
  validate_test_args(reps, level);
  const MeasureReport rep = measure_report(d, DegeneratePolicy::Throw, threads);
  const TestReport s = run_max_s(d, q0, reps, seed, level, threads, &rep);
  const TestReport k = run_max_k(d, q0, reps, seed, level, threads, &rep);
  TestReport out;
  out.testName = q0 ? "maxsk-q" : "maxsk";
  out.pValue = std::min(1.0, 2.0 * std::min(s.pValue, k.pValue));
  out.reps = reps;
  out.level = level;
  out.rejected = s.pValue < level / 2.0 || k.pValue < level / 2.0;
  out.subPValueS = s.pValue;
  out.subPValueK = k.pValue;
  const TestReport& driver = k.pValue < s.pValue ? k : s;
  out.statistic = driver.statistic;
  out.argmaxSubset = driver.argmaxSubset;
  out.argmaxIndex = driver.argmaxIndex;
  out.q0 = q0;
  out.seed = seed;
  return out;
}

}  // namespace detail

/// MaxS over every proper subset cardinality.
[[nodiscard]] inline TestReport max_s_test(const Dataset& d, int reps,
                                           std::uint64_t seed,
                                           double level = 0.05,
                                           unsigned threads = 1) {
  return detail::run_max_s(d, std::nullopt, reps, seed, level, threads);
}

/// MaxS restricted to subsets of cardinality q0.
[[nodiscard]] inline TestReport max_s_q_test(const Dataset& d, int q0,
                                             int reps, std::uint64_t seed,
                                             double level = 0.05,
                                             unsigned threads = 1) {
  return detail::run_max_s(d, q0, reps, seed, level, threads);
}

/// MaxK over every proper subset cardinality.
[[nodiscard]] inline TestReport max_k_test(const Dataset& d, int reps,
                                           std::uint64_t seed,
                                           double level = 0.05,
                                           unsigned threads = 1) {
  return detail::run_max_k(d, std::nullopt, reps, seed, level, threads);
}

/// MaxK restricted to subsets of cardinality q0.
[[nodiscard]] inline TestReport max_k_q_test(const Dataset& d, int q0,
                                             int reps, std::uint64_t seed,
                                             double level = 0.05,
                                             unsigned threads = 1) {
  return detail::run_max_k(d, q0, reps, seed, level, threads);
}

/// Bonferroni combination of MaxS and MaxK: rejects when either sub-test's
/// p-value falls below level/2; reported p-value is min(1, 2·min(pS, pK)),
/// so (rejected ⇔ pValue < level) holds exactly.
[[nodiscard]] inline TestReport max_sk_test(const Dataset& d, int reps,
                                            std::uint64_t seed,
                                            double level = 0.05,
                                            unsigned threads = 1) {
  return detail::run_max_sk(d, std::nullopt, reps, seed, level, threads);
}

/// Fixed-cardinality Bonferroni combination.
[[nodiscard]] inline TestReport max_sk_q_test(const Dataset& d, int q0,
                                              int reps, std::uint64_t seed,
                                              double level = 0.05,
                                              unsigned threads = 1) {
  return detail::run_max_sk(d, q0, reps, seed, level, threads);
}

namespace detail {

[[nodiscard]] inline std::optional<Subset> full_subset_if_enumerable(int p) {
  if (p > kMaxEnumerationP) {
    return std::nullopt;
  }
  std::vector<int> idx(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    idx[static_cast<std::size_t>(i)] = i + 1;
  }
  return Subset(std::move(idx));
}

}  // namespace detail

/// Classical full-dimension skewness reference: n·b1/6 against the upper tail
/// of chi-squared with p(p+1)(p+2)/6 degrees of freedom.
[[nodiscard]] inline TestReport mardia_skewness_test(const Dataset& d,
                                                     double level = 0.05) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("level must lie strictly inside (0, 1)");
  }
  const double n = static_cast<double>(d.n());
  const double p = static_cast<double>(d.p());
  const double df = p * (p + 1.0) * (p + 2.0) / 6.0;
  TestReport out;
  out.testName = "mardia-s";
  out.statistic = n * b1_sample(d) / 6.0;
  out.pValue = boost::math::gamma_q(df / 2.0, out.statistic / 2.0);
  out.reps = 0;
  out.level = level;
  out.rejected = out.pValue < level;
  out.argmaxSubset = detail::full_subset_if_enumerable(static_cast<int>(d.p()));
  out.argmaxIndex =
      out.argmaxSubset
          ? subset_index(*out.argmaxSubset, static_cast<int>(d.p()))
          : 0;
  return out;
}

/// Classical full-dimension kurtosis reference: two-sided standard normal
/// test of the standardized b2.
[[nodiscard]] inline TestReport mardia_kurtosis_test(const Dataset& d,
                                                     double level = 0.05) {
  if (!(level > 0.0 && level < 1.0)) {
    throw ParameterError("level must lie strictly inside (0, 1)");
  }
  TestReport out;
  out.testName = "mardia-k";
  out.statistic = standardize_b2(b2_sample(d), d.n(), static_cast<int>(d.p()));
  out.pValue = std::erfc(std::abs(out.statistic) / std::sqrt(2.0));
  out.reps = 0;
  out.level = level;
  out.rejected = out.pValue < level;
  out.argmaxSubset = detail::full_subset_if_enumerable(static_cast<int>(d.p()));
  out.argmaxIndex =
      out.argmaxSubset
          ? subset_index(*out.argmaxSubset, static_cast<int>(d.p()))
          : 0;
  return out;
}

/// Outcome of the sub-dimension detection recipe.
struct DetectionReport {
  bool triggered = false;
  std::optional<Subset> skewSubset;
  std::optional<Subset> kurtSubset;
  std::optional<Subset> unionSubset;
  double pS = std::numeric_limits<double>::quiet_NaN();
  double pK = std::numeric_limits<double>::quiet_NaN();
};

/// Union of two subsets (sorted, deduplicated indices).
[[nodiscard]] inline Subset subset_union(const Subset& a, const Subset& b) {
  std::vector<int> merged;
  merged.reserve(a.indices().size() + b.indices().size());
  std::set_union(a.indices().begin(), a.indices().end(), b.indices().begin(),
                 b.indices().end(), std::back_inserter(merged));
  return Subset(std::move(merged));
}

namespace detail {

/// Turns the two sub-test p-values and argmax subsets into a detection call:
/// either half rejecting at level/2 triggers; the flagged set is the argmax
/// of whichever halves rejected, or their union when both did.
[[nodiscard]] inline DetectionReport detection_decide(
    double pS, double pK, double level, const std::optional<Subset>& argS,
    const std::optional<Subset>& argK) {
  DetectionReport out;
  out.pS = pS;
  out.pK = pK;
  const bool sRejects = pS < level / 2.0;
  const bool kRejects = pK < level / 2.0;
  out.triggered = sRejects || kRejects;
  if (sRejects) {
    out.skewSubset = argS;
  }
  if (kRejects) {
    out.kurtSubset = argK;
  }
  if (out.skewSubset && out.kurtSubset) {
    out.unionSubset = subset_union(*out.skewSubset, *out.kurtSubset);
  } else if (out.skewSubset) {
    out.unionSubset = out.skewSubset;
  } else if (out.kurtSubset) {
    out.unionSubset = out.kurtSubset;
  }
  return out;
}

}  // namespace detail

/// Runs the composite test and, on rejection, flags the subset(s) attaining
/// the extreme standardized measures.
[[nodiscard]] inline DetectionReport detect_subdimension(const Dataset& d,
                                                         int reps,
                                                         std::uint64_t seed,
                                                         double level = 0.05,
                                                         unsigned threads = 1) {
  detail::validate_test_args(reps, level);
  const MeasureReport rep =
      measure_report(d, DegeneratePolicy::Throw, threads);
  const TestReport s =
      detail::run_max_s(d, std::nullopt, reps, seed, level, threads, &rep);
  const TestReport k =
      detail::run_max_k(d, std::nullopt, reps, seed, level, threads, &rep);
  return detail::detection_decide(s.pValue, k.pValue, level, s.argmaxSubset,
                                  k.argmaxSubset);
}

}  // namespace subdim
