#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subdim/errors.hpp"

namespace subdim {

/// Hard cap on the data dimension for subset enumeration (2^p − 1 subsets
/// are materialized, so p is kept small by contract).
inline constexpr int kMaxEnumerationP = 20;

namespace detail {

/// Exact binomial coefficient; valid well past p = 20 in 64 bits.
[[nodiscard]] inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) {
    return 0;
  }
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace detail

/// An n×p matrix of observations (rows are observations).
class Dataset {
 public:
  explicit Dataset(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 2) {
      throw InvalidDimensionError("dataset needs at least 2 rows, got " +
                                  std::to_string(values_.rows()));
    }
    if (values_.cols() < 1) {
      throw InvalidDimensionError("dataset needs at least 1 column");
    }
    if (!values_.allFinite()) {
      throw DegenerateDataError("dataset contains non-finite entries");
    }
  }

  [[nodiscard]] Eigen::Index n() const { return values_.rows(); }
  [[nodiscard]] Eigen::Index p() const { return values_.cols(); }
  [[nodiscard]] const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

/// A sorted set of 1-based coordinate indices.
class Subset {
 public:
  explicit Subset(std::vector<int> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) {
      throw InvalidSubsetError("subset must be non-empty");
    }
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] < 1) {
        throw InvalidSubsetError("subset indices are 1-based; got " +
                                 std::to_string(indices_[i]));
      }
      if (i > 0 && indices_[i] <= indices_[i - 1]) {
        throw InvalidSubsetError("subset indices must be strictly increasing");
      }
    }
  }

  [[nodiscard]] int q() const { return static_cast<int>(indices_.size()); }
  [[nodiscard]] const std::vector<int>& indices() const { return indices_; }

  /// Human-readable label, e.g. "(2,4)".
  [[nodiscard]] std::string label() const {
    std::string s = "(";
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (i > 0) {
        s += ",";
      }
      s += std::to_string(indices_[i]);
    }
    s += ")";
    return s;
  }

  friend bool operator==(const Subset& a, const Subset& b) {
    return a.indices_ == b.indices_;
  }
  friend bool operator!=(const Subset& a, const Subset& b) { return !(a == b); }

 private:
  std::vector<int> indices_;
};

/// All 2^p − 1 non-empty subsets, grouped by ascending cardinality and
/// lexicographic within each cardinality. Positions are 1-based.
class SubsetCatalog {
 public:
  SubsetCatalog(int p, std::vector<Subset> entries)
      : p_(p), entries_(std::move(entries)) {}

  [[nodiscard]] int p() const { return p_; }
  [[nodiscard]] const std::vector<Subset>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  /// 1-based positional lookup.
  [[nodiscard]] const Subset& at(std::size_t index1) const {
    if (index1 < 1 || index1 > entries_.size()) {
      throw InvalidSubsetError("catalog index " + std::to_string(index1) +
                               " out of range [1," +
                               std::to_string(entries_.size()) + "]");
    }
    return entries_[index1 - 1];
  }

 private:
  int p_;
  std::vector<Subset> entries_;
};

/// Enumerates all non-empty coordinate subsets of {1..p} in canonical order:
/// cardinality ascending, lexicographic within each cardinality.
[[nodiscard]] inline SubsetCatalog enumerate_subsets(int p) {
  if (p < 1 || p > kMaxEnumerationP) {
    throw InvalidDimensionError("subset enumeration requires 1 <= p <= " +
                                std::to_string(kMaxEnumerationP) + ", got " +
                                std::to_string(p));
  }
  std::vector<Subset> entries;
  entries.reserve((std::size_t{1} << p) - 1);
  for (int q = 1; q <= p; ++q) {
    std::vector<int> comb(q);
    std::iota(comb.begin(), comb.end(), 1);
    for (;;) {
      entries.emplace_back(comb);
      int j = q - 1;
      while (j >= 0 && comb[j] == p - (q - 1 - j)) {
        --j;
      }
      if (j < 0) {
        break;
      }
      ++comb[j];
      for (int t = j + 1; t < q; ++t) {
        comb[t] = comb[t - 1] + 1;
      }
    }
  }
  return SubsetCatalog(p, std::move(entries));
}

/// 1-based canonical position of a subset within the dimension-p catalog,
/// computed combinatorially (no catalog materialization).
[[nodiscard]] inline int subset_index(const Subset& s, int p) {
  if (p < 1 || p > kMaxEnumerationP) {
    throw InvalidDimensionError("subset_index requires 1 <= p <= " +
                                std::to_string(kMaxEnumerationP));
  }
  const auto& idx = s.indices();
  const int q = s.q();
  if (idx.back() > p) {
    throw InvalidSubsetError("subset " + s.label() +
                             " has an index out of [1," + std::to_string(p) +
                             "]");
  }
  std::uint64_t offset = 0;
  for (int j = 1; j < q; ++j) {
    offset += detail::binomial(p, j);
  }
  // Lexicographic rank of the combination within its cardinality class.
  std::uint64_t rank = 1;
  int prev = 0;
  for (int j = 0; j < q; ++j) {
    for (int t = prev + 1; t < idx[static_cast<std::size_t>(j)]; ++t) {
      rank += detail::binomial(p - t, q - 1 - j);
    }
    prev = idx[static_cast<std::size_t>(j)];
  }
  return static_cast<int>(offset + rank);
}

/// Projects a dataset onto the columns named by a subset (order preserved).
[[nodiscard]] inline Dataset project(const Dataset& d, const Subset& s) {
  if (s.indices().back() > d.p()) {
    throw InvalidSubsetError("subset " + s.label() +
                             " does not fit data with p = " +
                             std::to_string(d.p()));
  }
  Eigen::MatrixXd out(d.n(), s.q());
  for (int j = 0; j < s.q(); ++j) {
    out.col(j) = d.values().col(s.indices()[static_cast<std::size_t>(j)] - 1);
  }
  return Dataset(std::move(out));
}

/// Sample mean, covariance (divisor n−1), and covariance inverse.
struct MomentSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd covInverse;
};

/// Lower Cholesky factor of a symmetric positive-definite matrix.
///
/// Hand-rolled so the failure contract is explicit: any pivot below
/// 1e-12 · (largest diagonal entry) raises a degenerate-data error; there is
/// no silent regularization.
[[nodiscard]] inline Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) {
    throw ContractViolationError("cholesky_factor requires a square matrix");
  }
  const Eigen::Index m = a.rows();
  const double maxDiag = a.diagonal().maxCoeff();
  const double tol = 1e-12 * std::max(maxDiag, 0.0);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    double d = a(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > tol)) {
      throw DegenerateDataError(
          "matrix is not positive definite (Cholesky pivot " +
          std::to_string(d) + " at column " + std::to_string(j + 1) + ")");
    }
    L(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < m; ++i) {
      L(i, j) = (a(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  return L;
}

/// Solves a·x = b for SPD a via the Cholesky path above.
[[nodiscard]] inline Eigen::MatrixXd spd_solve(const Eigen::MatrixXd& a,
                                               const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd L = cholesky_factor(a);
  Eigen::MatrixXd y = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

/// Column means and covariance of a dataset; requires n ≥ p + 2 and a
/// nonsingular sample covariance.
[[nodiscard]] inline MomentSummary moments(const Dataset& d) {
  const Eigen::Index n = d.n();
  const Eigen::Index p = d.p();
  if (n < p + 2) {
    throw InsufficientSampleError("moments need n >= q + 2 (n = " +
                                  std::to_string(n) + ", q = " +
                                  std::to_string(p) + ")");
  }
  MomentSummary ms;
  ms.mean = d.values().colwise().mean();
  const Eigen::MatrixXd centered = d.values().rowwise() - ms.mean.transpose();
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  ms.cov = 0.5 * (cov + cov.transpose());
  try {
    ms.covInverse =
        spd_solve(ms.cov, Eigen::MatrixXd::Identity(p, p));
  } catch (const DegenerateDataError&) {
    throw DegenerateDataError("singular sample covariance (q = " +
                              std::to_string(p) + ")");
  }
  return ms;
}

/// Top-k eigenpairs by absolute eigenvalue of a symmetric matrix.
struct SymEigenTopK {
  Eigen::VectorXd values;   ///< k eigenvalues, descending |value|.
  Eigen::MatrixXd vectors;  ///< n×k unit-norm eigenvectors, matching order.
};

namespace detail {

/// Deterministic ordering for eigenpairs: descending |value|, then descending
/// value (positive first on magnitude ties), then ascending original index.
[[nodiscard]] inline std::vector<int> eigen_order(const Eigen::VectorXd& vals) {
  std::vector<int> order(static_cast<std::size_t>(vals.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = std::abs(vals(a));
    const double fb = std::abs(vals(b));
    if (fa != fb) {
      return fa > fb;
    }
    if (vals(a) != vals(b)) {
      return vals(a) > vals(b);
    }
    return a < b;
  });
  return order;
}

/// Canonical eigenvector sign: the entry of largest magnitude (first such on
/// ties) is made positive, so both eigensolver routes agree deterministically.
inline void canonicalize_sign(Eigen::Ref<Eigen::MatrixXd> vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index argmax = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      const double mag = std::abs(vectors(r, c));
      if (mag > best) {
        best = mag;
        argmax = r;
      }
    }
    if (vectors(argmax, c) < 0.0) {
      vectors.col(c) = -vectors.col(c);
    }
  }
}

}  // namespace detail

/// The k eigenpairs of largest |eigenvalue| of a symmetric matrix, sorted by
/// descending |eigenvalue|; eigenvectors are unit-norm with canonical sign.
[[nodiscard]] inline SymEigenTopK sym_eigen_topk(const Eigen::MatrixXd& m,
                                                 Eigen::Index k) {
  if (m.rows() != m.cols()) {
    throw ContractViolationError("sym_eigen_topk requires a square matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw ContractViolationError("sym_eigen_topk input is not symmetric");
  }
  if (k < 1 || k > m.rows()) {
    throw InvalidDimensionError("sym_eigen_topk requires 1 <= k <= n");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 *
                                                    (m + m.transpose()));
  if (es.info() != Eigen::Success) {
    throw ContractViolationError("symmetric eigendecomposition failed");
  }
  const std::vector<int> order = detail::eigen_order(es.eigenvalues());
  SymEigenTopK out;
  out.values.resize(k);
  out.vectors.resize(m.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out.values(j) = es.eigenvalues()(order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) =
        es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
  }
  detail::canonicalize_sign(out.vectors);
  return out;
}

}  // namespace subdim
