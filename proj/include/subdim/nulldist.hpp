#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "subdim/core.hpp"
#include "subdim/errors.hpp"
#include "subdim/measures.hpp"
#include "subdim/parallel.hpp"
#include "subdim/rng.hpp"

namespace subdim {

/// Number of nonzero eigenvalues of the skewness kernel: 1 for q = 1,
/// q + q(q−1)(q+4)/6 for q > 1 (equivalently C(q+2,3)).
[[nodiscard]] inline int K_of_q(int q) {
  if (q < 1) {
    throw InvalidDimensionError("K_of_q requires q >= 1");
  }
  if (q == 1) {
    return 1;
  }
  return q + q * (q - 1) * (q + 4) / 6;
}

/// The two distinct nonzero kernel eigenvalues of a spherical family with
/// radial moments m4 = E(mahalanobis²)² and m6 (= q(q+2), q(q+2)(q+4) under
/// Gaussianity), with multiplicities q and q(q−1)(q+4)/6.
struct EllipticalEigenvalues {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int mult1 = 0;
  int mult2 = 0;
};

[[nodiscard]] inline EllipticalEigenvalues elliptical_kernel_eigenvalues(
    double m4, double m6, int q) {
  if (q < 2) {
    throw InvalidDimensionError(
        "elliptical_kernel_eigenvalues requires q >= 2");
  }
  EllipticalEigenvalues out;
  out.gamma1 =
      3.0 / q * (m6 / (q + 2) - 2.0 * m4 + static_cast<double>(q + 2) * q);
  out.gamma2 = 6.0 * m6 / (static_cast<double>(q) * (q + 2) * (q + 4));
  out.mult1 = q;
  out.mult2 = q * (q - 1) * (q + 4) / 6;
  return out;
}

namespace detail {

/// Squared Mahalanobis norms of whitened rows.
[[nodiscard]] inline Eigen::VectorXd mahalanobis_sq(const Eigen::MatrixXd& z) {
  return z.rowwise().squaredNorm();
}

}  // namespace detail

/// Empirical skewness kernel matrix Ĥ with entries
/// ĥ(x_j, x_l) = g³ + 3(q+2)g − 3(m_j + m_l)g, where g is the whitened inner
/// product and m the squared Mahalanobis norm. Only defined for q ≥ 2 (the
/// q = 1 feature has a closed form and never needs Ĥ).
[[nodiscard]] inline Eigen::MatrixXd kernel_matrix(const Dataset& dq) {
  if (dq.p() < 2) {
    throw InvalidDimensionError("kernel_matrix requires q >= 2");
  }
  const Eigen::MatrixXd z = detail::whitened_rows(dq);
  const Eigen::Index n = z.rows();
  const double q = static_cast<double>(z.cols());
  const Eigen::MatrixXd g = z * z.transpose();
  const Eigen::VectorXd m = detail::mahalanobis_sq(z);
  Eigen::MatrixXd h = g.array().cube().matrix();
  h += 3.0 * (q + 2.0) * g;
  h -= 3.0 * ((m * Eigen::RowVectorXd::Ones(n)).cwiseProduct(g) +
              (Eigen::VectorXd::Ones(n) * m.transpose()).cwiseProduct(g));
  return 0.5 * (h + h.transpose());
}

namespace detail {

/// Exact low-rank factorization of the kernel: Ĥ = U S Uᵀ with
/// U = [F1 | Z | m∘Z], where F1 holds the √multiplicity-weighted degree-3
/// monomials of the whitened coordinates (one column per multiset a ≤ b ≤ c)
/// and S = blockdiag(I_K, [[3(q+2)I, −3I], [−3I, 0]]). The kernel's nonzero
/// spectrum therefore equals that of the small matrix R S Rᵀ from a thin QR
/// of U — an exact identity, used so eigenfeatures cost O(n·K²) instead of
/// the O(n³) dense route (cross-checked against sym_eigen_topk in tests).
struct KernelEigenBasis {
  Eigen::VectorXd values;   ///< top-K eigenvalues of Ĥ, descending |value|
  Eigen::MatrixXd vectors;  ///< n×K unit-norm eigenvectors, canonical sign
};

[[nodiscard]] inline KernelEigenBasis kernel_eigen_topk(
    const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.rows();
  const int q = static_cast<int>(z.cols());
  const int k = K_of_q(q);
  const Eigen::Index d = k + 2 * q;

  Eigen::MatrixXd u(n, d);
  Eigen::Index col = 0;
  for (int a = 0; a < q; ++a) {
    for (int b = a; b < q; ++b) {
      for (int c = b; c < q; ++c) {
        // Multinomial multiplicity of the monomial z_a z_b z_c in (zᵀw)³.
        double mult = 6.0;
        if (a == b && b == c) {
          mult = 1.0;
        } else if (a == b || b == c) {
          mult = 3.0;
        }
        u.col(col++) = std::sqrt(mult) *
                       (z.col(a).array() * z.col(b).array() * z.col(c).array())
                           .matrix();
      }
    }
  }
  const Eigen::VectorXd m = mahalanobis_sq(z);
  u.middleCols(col, q) = z;
  u.middleCols(col + q, q) = z.array().colwise() * m.array();

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  s.topLeftCorner(k, k).setIdentity();
  s.block(k, k, q, q) =
      3.0 * (q + 2.0) * Eigen::MatrixXd::Identity(q, q);
  s.block(k, k + q, q, q) = -3.0 * Eigen::MatrixXd::Identity(q, q);
  s.block(k + q, k, q, q) = -3.0 * Eigen::MatrixXd::Identity(q, q);

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(u);
  const Eigen::MatrixXd thinQ =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, d);
  const Eigen::MatrixXd r =
      qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  Eigen::MatrixXd core = r * s * r.transpose();
  core = 0.5 * (core + core.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(core);
  if (es.info() != Eigen::Success) {
    throw ContractViolationError("kernel core eigendecomposition failed");
  }
  const std::vector<int> order = eigen_order(es.eigenvalues());
  KernelEigenBasis out;
  out.values.resize(k);
  Eigen::MatrixXd w(d, k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = es.eigenvalues()(order[static_cast<std::size_t>(j)]);
    w.col(j) = es.eigenvectors().col(order[static_cast<std::size_t>(j)]);
  }
  out.vectors = thinQ * w;
  canonicalize_sign(out.vectors);
  return out;
}

}  // namespace detail

/// Estimated eigenfeature matrix Û for one subset:
/// q = 1 → the cubic score σ̂⁻³(x−μ̂){(x−μ̂)²−3σ̂²} rescaled so its sample
/// variance is exactly 6; q ≥ 2 → the top-K(q) |eigenvalue| eigenvectors of
/// Ĥ, each scaled by √n (eigenvalues discarded) and by √6 (the kernel
/// eigenvalue under the Gaussian null).
[[nodiscard]] inline Eigen::MatrixXd u_features(const Dataset& dq) {
  const Eigen::Index n = dq.n();
  const int q = static_cast<int>(dq.p());
  const int k = K_of_q(q);
  if (n <= k) {
    throw InsufficientSampleError("u_features needs n > K(q) = " +
                                  std::to_string(k) + ", got n = " +
                                  std::to_string(n));
  }
  if (q == 1) {
    const double mean = dq.values().col(0).mean();
    const Eigen::ArrayXd c = dq.values().col(0).array() - mean;
    const double s2 = c.square().sum() / static_cast<double>(n - 1);
    if (!(s2 > 0.0)) {
      throw DegenerateDataError("zero variance column (q = 1)");
    }
    Eigen::VectorXd u =
        ((c * (c.square() - 3.0 * s2)) / std::pow(s2, 1.5)).matrix();
    const double uMean = u.mean();
    const double uVar =
        (u.array() - uMean).square().sum() / static_cast<double>(n - 1);
    if (!(uVar > 0.0)) {
      throw DegenerateDataError("degenerate cubic score (q = 1)");
    }
    return std::sqrt(6.0 / uVar) * u;
  }
  const Eigen::MatrixXd z = detail::whitened_rows(dq);
  detail::KernelEigenBasis basis = detail::kernel_eigen_topk(z);
  return std::sqrt(6.0 * static_cast<double>(n)) * basis.vectors;
}

/// Span of one subset's feature block inside the concatenated Û vector.
struct BlockSpan {
  int offset = 0;  ///< 0-based column offset
  int size = 0;    ///< K(q)
  Subset subset{std::vector<int>{1}};
};

/// Estimated null model for the max-skewness statistics.
struct SkewNullModel {
  std::vector<BlockSpan> blockLayout;
  Eigen::MatrixXd omegaHat;  ///< D×D sample covariance of Û (divisor n−1)
  Eigen::MatrixXd uHat;      ///< n×D concatenated features
};

/// Estimated null model for the max-kurtosis statistics.
struct KurtNullModel {
  std::vector<Subset> layout;  ///< one coordinate per subset
  Eigen::MatrixXd gammaHat;    ///< correlation-like matrix, unit diagonal
  Eigen::MatrixXd yTilde;      ///< n×D scaled Ŷ columns
};

/// Monte Carlo null draws.
struct NullDraws {
  std::vector<double> values;
  int reps = 0;
  std::uint64_t seed = 0;
};

/// Builds the skew null model over the given subsets (feature blocks
/// concatenated in the given order). Per-subset feature builds may fan out
/// over `threads`.
[[nodiscard]] inline SkewNullModel build_skew_null(
    const Dataset& d, const std::vector<Subset>& subsets,
    unsigned threads = 1) {
  if (subsets.empty()) {
    throw InvalidSubsetError("build_skew_null requires at least one subset");
  }
  const Eigen::Index n = d.n();
  SkewNullModel model;
  model.blockLayout.reserve(subsets.size());
  int offset = 0;
  for (const Subset& s : subsets) {
    model.blockLayout.push_back(BlockSpan{offset, K_of_q(s.q()), s});
    offset += K_of_q(s.q());
  }
  model.uHat.resize(n, offset);
  std::vector<std::string> failures(subsets.size());
  parallel_for(subsets.size(), threads, [&](std::size_t i) {
    const BlockSpan& span = model.blockLayout[i];
    try {
      model.uHat.middleCols(span.offset, span.size) =
          u_features(project(d, span.subset));
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (!failures[i].empty()) {
      throw DegenerateDataError("subset " + subsets[i].label() + ": " +
                                failures[i]);
    }
  }
  const Eigen::RowVectorXd mean = model.uHat.colwise().mean();
  const Eigen::MatrixXd centered = model.uHat.rowwise() - mean;
  Eigen::MatrixXd omega =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  model.omegaHat = 0.5 * (omega + omega.transpose());
  return model;
}

/// The max-skewness null functional:
/// G(w) = max over blocks of (‖w_block‖² − q(q+1)(q+2))/√(12·q(q+1)(q+2)).
[[nodiscard]] inline double G_statistic(const Eigen::VectorXd& w,
                                        const std::vector<BlockSpan>& layout) {
  if (layout.empty()) {
    throw InvalidSubsetError("G_statistic requires a non-empty layout");
  }
  double g = -std::numeric_limits<double>::infinity();
  for (const BlockSpan& span : layout) {
    if (span.offset + span.size > w.size()) {
      throw ContractViolationError("block layout exceeds draw dimension");
    }
    const int q = span.subset.q();
    const double c = static_cast<double>(q) * (q + 1) * (q + 2);
    const double v =
        (w.segment(span.offset, span.size).squaredNorm() - c) /
        std::sqrt(12.0 * c);
    g = std::max(g, v);
  }
  return g;
}

namespace detail {

/// PSD sampling factor A with AAᵀ ≈ M: eigenvalues below 1e-10·trace are
/// clipped to zero; an eigenvalue below −1e-6·trace invalidates the model.
[[nodiscard]] inline Eigen::MatrixXd psd_sampling_factor(
    const Eigen::MatrixXd& m, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 *
                                                    (m + m.transpose()));
  if (es.info() != Eigen::Success) {
    throw ContractViolationError(what + ": eigendecomposition failed");
  }
  const double trace = std::max(m.trace(), 0.0);
  const double minEig = es.eigenvalues().minCoeff();
  if (minEig < -1e-6 * trace) {
    throw ModelInvalidError(what + ": eigenvalue " + std::to_string(minEig) +
                            " below -1e-6 * trace");
  }
  Eigen::VectorXd clipped = es.eigenvalues();
  for (Eigen::Index i = 0; i < clipped.size(); ++i) {
    clipped(i) = clipped(i) < 1e-10 * trace ? 0.0 : std::sqrt(clipped(i));
  }
  return es.eigenvectors() * clipped.asDiagonal();
}

}  // namespace detail

/// Draws reps values of G(W), W ∼ N(0, Ω̂). Deterministic given seed: each
/// replicate owns the derived stream derive_seed(seed, replicate).
[[nodiscard]] inline NullDraws sample_skew_null(const SkewNullModel& model,
                                                int reps, std::uint64_t seed,
                                                unsigned threads = 1) {
  if (reps < 1) {
    throw ParameterError("reps must be >= 1");
  }
  const Eigen::MatrixXd a =
      detail::psd_sampling_factor(model.omegaHat, "skew null dispersion");
  NullDraws draws;
  draws.values.resize(static_cast<std::size_t>(reps));
  draws.reps = reps;
  draws.seed = seed;
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    const Eigen::VectorXd w = a * rng.normal_vector(a.cols());
    draws.values[r] = G_statistic(w, model.blockLayout);
  });
  return draws;
}

/// Raw kurtosis linearization values Ŷ_j = m_j² − 2(q+2)·m_j with m_j the
/// squared Mahalanobis norm under plug-in moments.
[[nodiscard]] inline Eigen::VectorXd y_kurt(const Dataset& dq) {
  const Eigen::MatrixXd z = detail::whitened_rows(dq);
  const Eigen::VectorXd m = detail::mahalanobis_sq(z);
  const double q = static_cast<double>(dq.p());
  return (m.array().square() - 2.0 * (q + 2.0) * m.array()).matrix();
}

/// Builds the kurtosis null model: Ỹ columns are the centered raw Ŷ divided
/// by √(8q(q+2)); Γ̂ is their sample correlation with unit diagonal and
/// off-diagonals clamped to [−1, 1].
[[nodiscard]] inline KurtNullModel build_kurt_null(
    const Dataset& d, const std::vector<Subset>& subsets,
    unsigned threads = 1) {
  if (subsets.empty()) {
    throw InvalidSubsetError("build_kurt_null requires at least one subset");
  }
  const Eigen::Index n = d.n();
  const Eigen::Index m = static_cast<Eigen::Index>(subsets.size());
  KurtNullModel model;
  model.layout = subsets;
  model.yTilde.resize(n, m);
  std::vector<std::string> failures(subsets.size());
  parallel_for(subsets.size(), threads, [&](std::size_t i) {
    const Subset& s = subsets[i];
    try {
      const Eigen::VectorXd raw = y_kurt(project(d, s));
      const double q = static_cast<double>(s.q());
      model.yTilde.col(static_cast<Eigen::Index>(i)) =
          (raw.array() - raw.mean()) / std::sqrt(8.0 * q * (q + 2.0));
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (!failures[i].empty()) {
      throw DegenerateDataError("subset " + subsets[i].label() + ": " +
                                failures[i]);
    }
  }
  Eigen::VectorXd sd(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    sd(j) = model.yTilde.col(j).norm();
    if (!(sd(j) > 0.0)) {
      throw DegenerateDataError("subset " + subsets[static_cast<std::size_t>(j)].label() +
                                ": kurtosis feature has zero variance");
    }
  }
  model.gammaHat.resize(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    model.gammaHat(j, j) = 1.0;
    for (Eigen::Index l = j + 1; l < m; ++l) {
      double r = model.yTilde.col(j).dot(model.yTilde.col(l)) /
                 (sd(j) * sd(l));
      r = std::clamp(r, -1.0, 1.0);
      model.gammaHat(j, l) = r;
      model.gammaHat(l, j) = r;
    }
  }
  return model;
}

/// Draws reps values of ‖W‖∞, W ∼ N(0, Γ̂); determinism as sample_skew_null.
[[nodiscard]] inline NullDraws sample_kurt_null(const KurtNullModel& model,
                                                int reps, std::uint64_t seed,
                                                unsigned threads = 1) {
  if (reps < 1) {
    throw ParameterError("reps must be >= 1");
  }
  const Eigen::MatrixXd a =
      detail::psd_sampling_factor(model.gammaHat, "kurt null dispersion");
  NullDraws draws;
  draws.values.resize(static_cast<std::size_t>(reps));
  draws.reps = reps;
  draws.seed = seed;
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    const Eigen::VectorXd w = a * rng.normal_vector(a.cols());
    draws.values[r] = w.cwiseAbs().maxCoeff();
  });
  return draws;
}

}  // namespace subdim
