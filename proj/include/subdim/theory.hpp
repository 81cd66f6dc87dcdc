#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "subdim/core.hpp"
#include "subdim/errors.hpp"

namespace subdim {

/// Population skewness/kurtosis pair for one subset. Kurtosis is absent when
/// the family's fourth moment does not exist (skew-t with 3 < ν ≤ 4).
struct TheoreticalMeasures {
  double beta1 = 0.0;
  std::optional<double> beta2;
  Subset subset{std::vector<int>{1}};
};

/// Skew-normal family parameters. The slant vector is the usual λ (also
/// written α); xi is unused by the measures but kept for sampling.
struct SkewNormalSpec {
  Eigen::MatrixXd omega;   ///< p×p SPD scale matrix Ω
  Eigen::VectorXd lambda;  ///< p-vector slant
  Eigen::VectorXd xi;      ///< p-vector location (empty ⇒ zero)
};

/// Skew-t family parameters.
struct SkewTSpec {
  Eigen::MatrixXd omega;  ///< p×p SPD scale matrix Ω
  Eigen::VectorXd alpha;  ///< p-vector slant
  double nu = 0.0;        ///< degrees of freedom > 0
  Eigen::VectorXd xi;     ///< p-vector location (empty ⇒ zero)
};

namespace detail {

/// √(2/π), the skew-normal moment constant b.
inline const double kSnB = std::sqrt(2.0 / std::numbers::pi);

/// Canonical subset (1,...,q) for scalar theory results.
[[nodiscard]] inline Subset leading_subset(int q) {
  std::vector<int> idx(static_cast<std::size_t>(q));
  std::iota(idx.begin(), idx.end(), 1);
  return Subset(std::move(idx));
}

/// 0-based positions of a subset's coordinates and of its complement.
struct SubsetSplit {
  std::vector<int> kept;
  std::vector<int> rest;
};

[[nodiscard]] inline SubsetSplit split_positions(const Subset& s, int p) {
  if (s.indices().back() > p) {
    throw InvalidSubsetError("subset " + s.label() +
                             " does not fit dimension p = " +
                             std::to_string(p));
  }
  SubsetSplit out;
  std::vector<bool> in(static_cast<std::size_t>(p), false);
  for (int i : s.indices()) {
    in[static_cast<std::size_t>(i - 1)] = true;
    out.kept.push_back(i - 1);
  }
  for (int i = 0; i < p; ++i) {
    if (!in[static_cast<std::size_t>(i)]) {
      out.rest.push_back(i);
    }
  }
  return out;
}

[[nodiscard]] inline Eigen::MatrixXd pick_block(const Eigen::MatrixXd& m,
                                                const std::vector<int>& rows,
                                                const std::vector<int>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(rows[i], cols[j]);
    }
  }
  return out;
}

[[nodiscard]] inline Eigen::VectorXd pick_entries(const Eigen::VectorXd& v,
                                                  const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  }
  return out;
}

/// Marginal slant of a skew-elliptical family on the coordinates of s:
/// slant_q = (a_q + Ω_qq⁻¹ Ω_qr a_r) / √(1 + a_rᵀ Ω_{rr·q} a_r), with
/// Ω_{rr·q} the Schur complement of Ω_qq. Shared by SN and ST.
struct MarginalSlant {
  Eigen::VectorXd slant;
  Eigen::MatrixXd omegaQQ;
};

[[nodiscard]] inline MarginalSlant marginal_slant(const Eigen::MatrixXd& omega,
                                                  const Eigen::VectorXd& slant,
                                                  const Subset& s) {
  const int p = static_cast<int>(omega.rows());
  if (omega.rows() != omega.cols() || slant.size() != p) {
    throw ParameterError("scale matrix and slant vector dimensions disagree");
  }
  const SubsetSplit pos = split_positions(s, p);
  MarginalSlant out;
  out.omegaQQ = pick_block(omega, pos.kept, pos.kept);
  const Eigen::VectorXd aq = pick_entries(slant, pos.kept);
  if (pos.rest.empty()) {
    out.slant = aq;
    return out;
  }
  const Eigen::MatrixXd oqr = pick_block(omega, pos.kept, pos.rest);
  const Eigen::MatrixXd orr = pick_block(omega, pos.rest, pos.rest);
  const Eigen::VectorXd ar = pick_entries(slant, pos.rest);
  const Eigen::MatrixXd oqqInvOqr = spd_solve(out.omegaQQ, oqr);
  const Eigen::MatrixXd schur = orr - oqr.transpose() * oqqInvOqr;
  const double denom = 1.0 + ar.dot(schur * ar);
  out.slant = (aq + oqqInvOqr * ar) / std::sqrt(denom);
  return out;
}

}  // namespace detail

/// Gaussian reference values: (0, q(q+2)).
[[nodiscard]] inline TheoreticalMeasures gaussian_measures(int q) {
  if (q < 1) {
    throw InvalidDimensionError("gaussian_measures requires q >= 1");
  }
  TheoreticalMeasures out;
  out.beta1 = 0.0;
  out.beta2 = static_cast<double>(q) * (q + 2);
  out.subset = detail::leading_subset(q);
  return out;
}

/// Spherical-family values: (0, q(q+2)(κ+1)) with κ the excess-kurtosis
/// parameter of the family.
[[nodiscard]] inline TheoreticalMeasures spherical_measures(int q,
                                                            double kappa) {
  if (q < 1) {
    throw InvalidDimensionError("spherical_measures requires q >= 1");
  }
  if (!(kappa > -1.0)) {
    throw ParameterError("spherical kurtosis parameter must exceed -1");
  }
  TheoreticalMeasures out;
  out.beta1 = 0.0;
  out.beta2 = static_cast<double>(q) * (q + 2) * (kappa + 1.0);
  out.subset = detail::leading_subset(q);
  return out;
}

/// Excess-kurtosis parameter of the Student-t family: κ = 2/(ν−4).
[[nodiscard]] inline double t_excess_kurtosis(double nu) {
  if (!(nu > 4.0)) {
    throw ParameterError(
        "Student-t kurtosis needs nu > 4 (fourth moments do not exist)");
  }
  return 2.0 / (nu - 4.0);
}

/// Excess-kurtosis parameter of the p-dimensional exponential-power family:
/// κ = [p/(p+2)] · Γ((p+4)/(2ν)) Γ(p/(2ν)) / Γ((p+2)/(2ν))² − 1.
///
/// This is the kurtosis parameter of the p-dimensional family; by the
/// Beta-mixing identity for spherical marginals, every coordinate-subset
/// marginal of that family shares the same κ.
[[nodiscard]] inline double ep_excess_kurtosis(int p, double nu) {
  if (p < 1) {
    throw InvalidDimensionError("ep_excess_kurtosis requires p >= 1");
  }
  if (!(nu > 0.0)) {
    throw ParameterError("exponential-power shape requires nu > 0");
  }
  const double h = 0.5 / nu;
  const double logRatio = std::lgamma((p + 4) * h) + std::lgamma(p * h) -
                          2.0 * std::lgamma((p + 2) * h);
  return static_cast<double>(p) / (p + 2) * std::exp(logRatio) - 1.0;
}

/// Summary slant λ*(q) of the skew-normal marginal on subset s; for the full
/// set this is λ* = √(λᵀΩλ).
[[nodiscard]] inline double sn_marginal_lambda(const SkewNormalSpec& spec,
                                               const Subset& s) {
  const detail::MarginalSlant m =
      detail::marginal_slant(spec.omega, spec.lambda, s);
  return std::sqrt(m.slant.dot(m.omegaQQ * m.slant));
}

/// Skew-normal measures from the summary slant:
/// γ* = λ*²/(1+(1−b²)λ*²), γ1 = b(2b²−1)γ*^{3/2}, γ2 = 2b²(2−3b²)γ*²,
/// β1 = γ1², β2 = γ2 + q(q+2), with b = √(2/π).
[[nodiscard]] inline TheoreticalMeasures sn_measures(double lambdaStar,
                                                     int q) {
  if (q < 1) {
    throw InvalidDimensionError("sn_measures requires q >= 1");
  }
  if (!(lambdaStar >= 0.0)) {
    throw ParameterError("summary slant must be nonnegative");
  }
  const double b = detail::kSnB;
  const double b2 = b * b;
  const double l2 = lambdaStar * lambdaStar;
  const double gammaStar = l2 / (1.0 + (1.0 - b2) * l2);
  const double gamma1 = b * (2.0 * b2 - 1.0) * std::pow(gammaStar, 1.5);
  const double gamma2 = 2.0 * b2 * (2.0 - 3.0 * b2) * gammaStar * gammaStar;
  TheoreticalMeasures out;
  out.beta1 = gamma1 * gamma1;
  out.beta2 = gamma2 + static_cast<double>(q) * (q + 2);
  out.subset = detail::leading_subset(q);
  return out;
}

/// Marginal slant and scale block of a skew-t family on subset s.
struct StMarginal {
  Eigen::VectorXd alphaQ;
  Eigen::MatrixXd omegaQQ;
};

[[nodiscard]] inline StMarginal st_marginal_alpha(const SkewTSpec& spec,
                                                  const Subset& s) {
  const detail::MarginalSlant m =
      detail::marginal_slant(spec.omega, spec.alpha, s);
  return StMarginal{m.slant, m.omegaQQ};
}

/// Skew-t measures for a q-dimensional family with slant alphaQ and scale
/// omegaQQ:
///   δ*² = αᵀΩα/(1+αᵀΩα), b_ν = √(ν/π)·Γ((ν−1)/2)/Γ(ν/2),
///   μ* = b_ν δ*, σ*² = ν/(ν−2) − μ*²,
///   β1* = μ*²{ν(3−δ*²)/(ν−3) − 3ν/(ν−2) + 2μ*²}²/(σ*²)³,
///   β1,q = β1* + 3(q−1)μ*²/{(ν−3)²σ*²},
/// and the kurtosis display evaluated as excess, reported as β2 by adding
/// q(q+2). Kurtosis needs ν > 4; skewness needs ν > 3.
[[nodiscard]] inline TheoreticalMeasures st_measures(
    const Eigen::VectorXd& alphaQ, const Eigen::MatrixXd& omegaQQ, double nu,
    int q) {
  if (q < 1 || alphaQ.size() != q || omegaQQ.rows() != q ||
      omegaQQ.cols() != q) {
    throw InvalidDimensionError("st_measures dimensions disagree with q");
  }
  if (!(nu > 3.0)) {
    throw ParameterError(
        "skew-t skewness needs nu > 3 (third moments do not exist)");
  }
  const double t = alphaQ.dot(omegaQQ * alphaQ);
  const double d2 = t / (1.0 + t);
  const double bNu = std::sqrt(nu / std::numbers::pi) *
                     std::exp(std::lgamma(0.5 * (nu - 1.0)) -
                              std::lgamma(0.5 * nu));
  const double m2 = bNu * bNu * d2;  // μ*²
  const double s2 = nu / (nu - 2.0) - m2;
  const double inner =
      nu * (3.0 - d2) / (nu - 3.0) - 3.0 * nu / (nu - 2.0) + 2.0 * m2;
  const double beta1Star = m2 * inner * inner / (s2 * s2 * s2);
  TheoreticalMeasures out;
  out.beta1 =
      beta1Star + 3.0 * (q - 1) * m2 / ((nu - 3.0) * (nu - 3.0) * s2);
  out.subset = detail::leading_subset(q);
  if (!(nu > 4.0)) {
    out.beta2 = std::nullopt;  // fourth moments do not exist
    return out;
  }
  const double beta2Star =
      (3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0)) -
       4.0 * m2 * nu * (3.0 - d2) / (nu - 3.0) + 6.0 * m2 * nu / (nu - 2.0) -
       3.0 * m2 * m2) /
      (s2 * s2);
  const double qd = static_cast<double>(q);
  const double gamma2 = beta2Star +
                        (qd * qd - 1.0) * (nu - 2.0) / (nu - 4.0) +
                        2.0 * (qd - 1.0) / s2 *
                            (nu / (nu - 4.0) - (nu - 1.0) * m2 / (nu - 3.0)) -
                        qd * (qd + 2.0);
  out.beta2 = gamma2 + qd * (qd + 2.0);
  return out;
}

/// Theory-side family descriptors for per-subset evaluation.
struct GaussianTheory {
  int p = 0;
};
struct SphericalTTheory {
  int p = 0;
  double nu = 0.0;
};
struct ExponentialPowerTheory {
  int p = 0;
  double nu = 0.0;
};

using TheoryFamily = std::variant<GaussianTheory, SphericalTTheory,
                                  ExponentialPowerTheory, SkewNormalSpec,
                                  SkewTSpec>;

/// Theoretical (β1, β2) for every subset in the catalog, applying the
/// family's marginalization rules.
[[nodiscard]] inline std::vector<TheoreticalMeasures> subdimensional_theory(
    const TheoryFamily& family, const SubsetCatalog& catalog) {
  std::vector<TheoreticalMeasures> out;
  out.reserve(catalog.size());
  auto checkP = [&](int familyP) {
    if (familyP != catalog.p()) {
      throw InvalidDimensionError(
          "family dimension " + std::to_string(familyP) +
          " disagrees with catalog dimension " + std::to_string(catalog.p()));
    }
  };
  if (const auto* g = std::get_if<GaussianTheory>(&family)) {
    checkP(g->p);
    for (const Subset& s : catalog.entries()) {
      TheoreticalMeasures tm = gaussian_measures(s.q());
      tm.subset = s;
      out.push_back(std::move(tm));
    }
  } else if (const auto* t = std::get_if<SphericalTTheory>(&family)) {
    checkP(t->p);
    if (!(t->nu > 3.0)) {
      throw ParameterError(
          "spherical-t measures need nu > 3 (third moments do not exist)");
    }
    for (const Subset& s : catalog.entries()) {
      TheoreticalMeasures tm;
      tm.beta1 = 0.0;
      tm.beta2 = t->nu > 4.0
                     ? std::optional<double>(static_cast<double>(s.q()) *
                                             (s.q() + 2) *
                                             (t_excess_kurtosis(t->nu) + 1.0))
                     : std::nullopt;
      tm.subset = s;
      out.push_back(std::move(tm));
    }
  } else if (const auto* ep = std::get_if<ExponentialPowerTheory>(&family)) {
    checkP(ep->p);
    // The subset marginal of a spherical family inherits the family's κ
    // (Beta-mixing identity), so κ is evaluated once at the family dimension.
    const double kappa = ep_excess_kurtosis(ep->p, ep->nu);
    for (const Subset& s : catalog.entries()) {
      TheoreticalMeasures tm = spherical_measures(s.q(), kappa);
      tm.subset = s;
      out.push_back(std::move(tm));
    }
  } else if (const auto* sn = std::get_if<SkewNormalSpec>(&family)) {
    checkP(static_cast<int>(sn->omega.rows()));
    for (const Subset& s : catalog.entries()) {
      TheoreticalMeasures tm =
          sn_measures(sn_marginal_lambda(*sn, s), s.q());
      tm.subset = s;
      out.push_back(std::move(tm));
    }
  } else if (const auto* st = std::get_if<SkewTSpec>(&family)) {
    checkP(static_cast<int>(st->omega.rows()));
    for (const Subset& s : catalog.entries()) {
      const StMarginal m = st_marginal_alpha(*st, s);
      TheoreticalMeasures tm = st_measures(m.alphaQ, m.omegaQQ, st->nu, s.q());
      tm.subset = s;
      out.push_back(std::move(tm));
    }
  } else {
    throw ContractViolationError("unhandled theory family");
  }
  return out;
}

}  // namespace subdim
