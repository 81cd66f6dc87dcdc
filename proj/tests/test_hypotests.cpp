// Tests for the MaxS/MaxK/MaxSK hypothesis tests, the Mardia baselines, and
// sub-dimension detection, anchored to the iris reference values.

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "subdim/core.hpp"
#include "subdim/csv.hpp"
#include "subdim/errors.hpp"
#include "subdim/hypotests.hpp"
#include "subdim/measures.hpp"
#include "subdim/rng.hpp"
#include "subdim/simlab.hpp"

namespace {

using subdim::Dataset;
using subdim::Subset;

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p,
                              std::uint64_t seed) {
  subdim::Rng rng(seed);
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      x(i, j) = rng.normal();
    }
  }
  return x;
}

Dataset load_iris(const std::string& species) {
  const subdim::CsvData csv =
      subdim::read_csv(std::string(SUBDIM_DATA_DIR) + "/iris.csv", species);
  return Dataset(csv.values);
}

Dataset select_columns(const Dataset& d, const std::vector<int>& cols) {
  return subdim::project(d, Subset(cols));
}

TEST(HypoTests, SameSeedReproducesTheFullReport) {
  const Dataset d(random_matrix(60, 3, 61));
  const subdim::TestReport a = subdim::max_s_test(d, 400, 17);
  const subdim::TestReport b = subdim::max_s_test(d, 400, 17);
  EXPECT_EQ(a.statistic, b.statistic);
  EXPECT_EQ(a.pValue, b.pValue);
  EXPECT_EQ(a.argmaxIndex, b.argmaxIndex);
  EXPECT_EQ(a.rejected, b.rejected);
  EXPECT_EQ(a.seed, 17u);
  EXPECT_EQ(a.testName, "maxs");
  EXPECT_EQ(a.reps, 400);
}

TEST(HypoTests, DifferentSeedsAgreeWithinMonteCarloError) {
  const Dataset d = load_iris("setosa");
  const subdim::TestReport a = subdim::max_k_test(d, 2000, 5);
  const subdim::TestReport b = subdim::max_k_test(d, 2000, 99);
  EXPECT_EQ(a.statistic, b.statistic);  // statistic is seed-free
  const double pbar = 0.5 * (a.pValue + b.pValue);
  EXPECT_NEAR(a.pValue, b.pValue,
              3.0 * std::sqrt(pbar * (1.0 - pbar) / 2000.0));
}

TEST(HypoTests, StatisticsAreLocationScaleInvariant) {
  const Eigen::MatrixXd x = random_matrix(80, 3, 62);
  Eigen::MatrixXd y = x;
  y.col(0) = (x.col(0).array() * 12.0 - 7.0).matrix();
  y.col(1) = (x.col(1).array() * 0.01 + 3.0).matrix();
  y.col(2) = (x.col(2).array() * 5.0).matrix();
  const subdim::TestReport a = subdim::max_s_test(Dataset(x), 500, 3);
  const subdim::TestReport b = subdim::max_s_test(Dataset(y), 500, 3);
  EXPECT_NEAR(a.statistic, b.statistic, 1e-9 * (1.0 + std::abs(a.statistic)));
  // Same seed + same statistic (to rounding) → near-identical p-values.
  EXPECT_NEAR(a.pValue, b.pValue, 0.002);
  const subdim::TestReport ka = subdim::max_k_test(Dataset(x), 500, 3);
  const subdim::TestReport kb = subdim::max_k_test(Dataset(y), 500, 3);
  EXPECT_NEAR(ka.statistic, kb.statistic,
              1e-9 * (1.0 + std::abs(ka.statistic)));
}

TEST(HypoTests, FullCardinalityScopeEqualsFullDimensionStatistic) {
  const Dataset d(random_matrix(70, 3, 63));
  const subdim::TestReport r = subdim::max_s_q_test(d, 3, 200, 1);
  const double b1 = subdim::b1_sample(d);
  EXPECT_DOUBLE_EQ(r.statistic, subdim::standardize_b1(b1, d.n(), 3));
  ASSERT_TRUE(r.q0.has_value());
  EXPECT_EQ(*r.q0, 3);
  ASSERT_TRUE(r.argmaxSubset.has_value());
  EXPECT_EQ(*r.argmaxSubset, Subset({1, 2, 3}));
}

TEST(HypoTests, ScopeValidation) {
  const Dataset d(random_matrix(30, 4, 64));
  EXPECT_THROW((void)subdim::max_s_q_test(d, 6, 200, 1),
               subdim::InvalidDimensionError);
  EXPECT_THROW((void)subdim::max_k_q_test(d, 0, 200, 1),
               subdim::InvalidDimensionError);
  EXPECT_THROW((void)subdim::max_s_test(d, 0, 1), subdim::ParameterError);
  EXPECT_THROW((void)subdim::max_s_test(d, 200, 1, 1.5),
               subdim::ParameterError);
}

TEST(HypoTests, BonferroniContainment) {
  const Dataset d = load_iris("versicolor");
  for (const double level : {0.01, 0.05, 0.1, 0.2}) {
    const subdim::TestReport r = subdim::max_sk_test(d, 500, 21, level);
    ASSERT_TRUE(r.subPValueS.has_value());
    ASSERT_TRUE(r.subPValueK.has_value());
    const bool either =
        *r.subPValueS < level / 2.0 || *r.subPValueK < level / 2.0;
    EXPECT_EQ(r.rejected, either) << "level " << level;
    EXPECT_DOUBLE_EQ(
        r.pValue,
        std::min(1.0, 2.0 * std::min(*r.subPValueS, *r.subPValueK)));
    EXPECT_EQ(r.testName, "maxsk");
  }
}

TEST(HypoTests, CompositeReportsTheDrivingSubTest) {
  const Dataset d = load_iris("setosa");
  const subdim::TestReport sk = subdim::max_sk_test(d, 1000, 31);
  const subdim::TestReport s = subdim::max_s_test(d, 1000, 31);
  const subdim::TestReport k = subdim::max_k_test(d, 1000, 31);
  ASSERT_TRUE(sk.subPValueS.has_value());
  EXPECT_DOUBLE_EQ(*sk.subPValueS, s.pValue);
  ASSERT_TRUE(sk.subPValueK.has_value());
  EXPECT_DOUBLE_EQ(*sk.subPValueK, k.pValue);
  // The reported statistic/argmax belong to the smaller-p sub-test.
  if (*sk.subPValueK < *sk.subPValueS) {
    EXPECT_DOUBLE_EQ(sk.statistic, k.statistic);
    EXPECT_EQ(sk.argmaxIndex, k.argmaxIndex);
  } else {
    EXPECT_DOUBLE_EQ(sk.statistic, s.statistic);
    EXPECT_EQ(sk.argmaxIndex, s.argmaxIndex);
  }
}

TEST(HypoTests, MardiaSkewnessReproducesIrisTable) {
  const Dataset setosa = load_iris("setosa");
  const subdim::TestReport full = subdim::mardia_skewness_test(setosa);
  EXPECT_NEAR(full.pValue, 0.236, 0.005);
  EXPECT_EQ(full.testName, "mardia-s");
  EXPECT_EQ(full.reps, 0);

  const subdim::TestReport col4 =
      subdim::mardia_skewness_test(select_columns(setosa, {4}));
  EXPECT_NEAR(col4.pValue, 0.001, 0.005);

  const subdim::TestReport col14 =
      subdim::mardia_skewness_test(select_columns(setosa, {1, 4}));
  EXPECT_NEAR(col14.pValue, 0.012, 0.005);

  // Statistic identity: n*b1/6 with the chi-square reference.
  const double b1 = subdim::b1_sample(setosa);
  EXPECT_NEAR(full.statistic, setosa.n() * b1 / 6.0, 1e-12);
}

TEST(HypoTests, MardiaKurtosisReproducesIrisValues) {
  const Dataset setosa = load_iris("setosa");
  const subdim::TestReport a = subdim::mardia_kurtosis_test(setosa);
  EXPECT_NEAR(a.pValue, 0.448, 0.01);

  const subdim::CsvData csv =
      subdim::read_csv(std::string(SUBDIM_DATA_DIR) + "/iris.csv");
  const Dataset iris(csv.values);
  const subdim::TestReport b = subdim::mardia_kurtosis_test(iris);
  EXPECT_NEAR(b.pValue, 0.611, 0.01);

  // Two-sided normal identity.
  const double z = subdim::standardize_b2(subdim::b2_sample(setosa),
                                          setosa.n(), 4);
  EXPECT_NEAR(a.statistic, z, 1e-12);
  EXPECT_NEAR(a.pValue, std::erfc(std::abs(z) / std::sqrt(2.0)), 1e-12);
}

TEST(HypoTests, RejectionFlagFollowsPValue) {
  const Dataset d = load_iris("setosa");
  const subdim::TestReport r = subdim::max_s_test(d, 1000, 7, 0.05);
  EXPECT_EQ(r.rejected, r.pValue < 0.05);
  EXPECT_GE(r.pValue, 0.0);
  EXPECT_LE(r.pValue, 1.0);
  ASSERT_TRUE(r.argmaxSubset.has_value());
  EXPECT_EQ(subdim::subset_index(*r.argmaxSubset, 4), r.argmaxIndex);
}

TEST(HypoTests, SubsetUnionMergesSortedIndices) {
  EXPECT_EQ(subdim::subset_union(Subset({1, 3}), Subset({2, 3})),
            Subset({1, 2, 3}));
  EXPECT_EQ(subdim::subset_union(Subset({4}), Subset({4})), Subset({4}));
}

TEST(HypoTests, DetectionFindsThePlantedSubDimension) {
  // Model 1 with a strong slant at n=400 triggers essentially always and
  // points at the first two coordinates.
  const subdim::CompositeModel model{1, 5, 2, 5.0, 0.5};
  const Dataset d(subdim::sample(subdim::FamilySpec{model}, 400, 73));
  const subdim::DetectionReport r = subdim::detect_subdimension(d, 800, 29);
  EXPECT_TRUE(r.triggered);
  ASSERT_TRUE(r.unionSubset.has_value());
  // Union invariant: the reported union merges whatever sub-tests fired.
  if (r.skewSubset.has_value() && r.kurtSubset.has_value()) {
    EXPECT_EQ(*r.unionSubset,
              subdim::subset_union(*r.skewSubset, *r.kurtSubset));
  } else if (r.skewSubset.has_value()) {
    EXPECT_EQ(*r.unionSubset, *r.skewSubset);
  } else {
    ASSERT_TRUE(r.kurtSubset.has_value());
    EXPECT_EQ(*r.unionSubset, *r.kurtSubset);
  }
  // The skew argmax must cover the planted coordinates (1,2).
  ASSERT_TRUE(r.skewSubset.has_value());
  EXPECT_EQ(*r.skewSubset, Subset({1, 2}));
}

TEST(HypoTests, DetectionStaysQuietOnGaussianData) {
  const Dataset d(random_matrix(300, 3, 65));
  const subdim::DetectionReport r = subdim::detect_subdimension(d, 600, 41);
  EXPECT_FALSE(r.triggered);
  EXPECT_FALSE(r.skewSubset.has_value());
  EXPECT_FALSE(r.kurtSubset.has_value());
  EXPECT_FALSE(r.unionSubset.has_value());
  EXPECT_TRUE(std::isfinite(r.pS));
  EXPECT_TRUE(std::isfinite(r.pK));
}

TEST(HypoTests, FixedScopeIrisAnchors) {
  const Dataset setosa = load_iris("setosa");
  const subdim::TestReport s1 = subdim::max_s_q_test(setosa, 1, 2000, 7);
  EXPECT_NEAR(s1.pValue, 0.001, 0.01);
  EXPECT_EQ(s1.testName, "maxs-q");

  const subdim::TestReport s4 = subdim::max_s_q_test(setosa, 4, 2000, 7);
  EXPECT_NEAR(s4.pValue, 0.246, 0.03);

  const subdim::CsvData csv =
      subdim::read_csv(std::string(SUBDIM_DATA_DIR) + "/iris.csv");
  const Dataset iris(csv.values);
  const subdim::TestReport k1 = subdim::max_k_q_test(iris, 1, 2000, 7);
  EXPECT_NEAR(k1.pValue, 0.000, 0.005);
  const subdim::TestReport k4 = subdim::max_k_q_test(iris, 4, 2000, 7);
  EXPECT_NEAR(k4.pValue, 0.621, 0.04);

  const subdim::TestReport sk1 = subdim::max_sk_q_test(setosa, 1, 2000, 7);
  EXPECT_NEAR(sk1.pValue, 0.002, 0.01);
  const subdim::TestReport sk2 = subdim::max_sk_q_test(iris, 2, 2000, 7);
  EXPECT_NEAR(sk2.pValue, 0.000, 0.005);
}

}  // namespace
