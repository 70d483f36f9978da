#pragma once

// Solutions of A^T P + P A = 0 for the attitude model. Every solution is
// P = H^T diag(P2, P1, P3) H with the blocks parameterised by four scalars
// (alpha1, alpha2, alpha3, alpha13) tied by one linear constraint.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "attstab/errors.hpp"
#include "attstab/model.hpp"
#include "attstab/smallmat.hpp"

namespace attstab {

struct AlphaParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a13 = 0.0;

  double max_abs() const {
    return std::max({std::abs(a1), std::abs(a2), std::abs(a3), std::abs(a13)});
  }
};

struct LyapunovSolution {
  Matrix p2, p1, p3;  // 2x2 symmetric blocks
  Matrix p0;          // diag(P2, P1, P3)
  Matrix p;           // H^T P0 H
  AlphaParams params;
  bool is_pd = false;
  double residual = 0.0;           // ||A^T P + P A||_inf
  double residual_relative = 0.0;  // residual / (||P||_inf omega0)
};

inline constexpr double kSigmaZeroTol = 1e-12;
inline constexpr double kConstraintTol = 1e-12;

/// (1 - s1)(alpha1 - (Jx/Jz) alpha3) + (4 s1 - s3) alpha13.
inline double constraint_residual(const SpacecraftInertia& j, double a1, double a3, double a13) {
  const SigmaTriple s = sigmas_from_inertia(j);
  return (1.0 - s.s1) * (a1 - (j.jx / j.jz) * a3) + (4.0 * s.s1 - s.s3) * a13;
}

/// alpha1 that zeroes the constraint for given alpha3 and alpha13. Undefined
/// when s1 = 1, where the constraint instead pins alpha13 to zero.
inline double solve_alpha1(const SpacecraftInertia& j, double a3, double a13) {
  const SigmaTriple s = sigmas_from_inertia(j);
  if (std::abs(1.0 - s.s1) <= kSigmaZeroTol) {
    throw DegenerateError("alpha1 is free when sigma1 = 1");
  }
  return (j.jx / j.jz) * a3 - (4.0 * s.s1 - s.s3) * a13 / (1.0 - s.s1);
}

/// ||a^T p + p a||_inf.
inline double residual(const Matrix& p, const Matrix& a) {
  if (!p.is_square() || !a.is_square() || p.rows() != a.rows()) {
    throw ShapeError("residual needs square matrices of equal size");
  }
  return inf_norm(mat_mul(transpose(a), p) + mat_mul(p, a));
}

/// H^T P0 H.
inline Matrix assemble_full(const Matrix& p0, const Matrix& h) {
  if (p0.rows() != 6 || p0.cols() != 6 || h.rows() != 6 || h.cols() != 6) {
    throw ShapeError("assemble_full needs 6x6 operands");
  }
  if (!is_symmetric(p0)) throw ShapeError("assemble_full needs a symmetric P0");
  return mat_mul(mat_mul(transpose(h), p0), h);
}

namespace detail {

inline void require_nondegenerate(const SigmaTriple& s) {
  if (std::abs(s.s1) <= kSigmaZeroTol || std::abs(s.s2) <= kSigmaZeroTol ||
      std::abs(s.s3) <= kSigmaZeroTol) {
    throw DegenerateError("solution family needs sigma1 * sigma2 * sigma3 != 0");
  }
}

}  // namespace detail

inline LyapunovSolution solution_family(const SpacecraftInertia& j, const OrbitalRate& w,
                                        const AlphaParams& alpha) {
  const SigmaTriple s = sigmas_from_inertia(j);
  detail::require_nondegenerate(s);
  const double c = constraint_residual(j, alpha.a1, alpha.a3, alpha.a13);
  if (std::abs(c) > kConstraintTol * std::max(1.0, alpha.max_abs())) {
    throw ConstraintError("alpha parameters violate the family constraint (residual " +
                          std::to_string(c) + ")");
  }

  LyapunovSolution out;
  out.params = alpha;
  out.p2 = Matrix{{3.0 * s.s2 * alpha.a2, 0.0}, {0.0, alpha.a2}};
  out.p1 = Matrix{{s.s3 * (alpha.a3 + (1.0 - s.s1) * alpha.a13), -s.s3 * alpha.a13},
                  {-s.s3 * alpha.a13, alpha.a1}};
  out.p3 = Matrix{{4.0 * s.s1 * (alpha.a1 + (1.0 - s.s3) * alpha.a13), 4.0 * s.s1 * alpha.a13},
                  {4.0 * s.s1 * alpha.a13, alpha.a3}};
  out.p0 = Matrix(6, 6);
  out.p0.set_block(0, 0, out.p2);
  out.p0.set_block(2, 2, out.p1);
  out.p0.set_block(4, 4, out.p3);

  const TransformPair t = transform_matrices(w);
  out.p = assemble_full(out.p0, t.h);
  out.is_pd = is_positive_definite(out.p2) && is_positive_definite(out.p1) &&
              is_positive_definite(out.p3);

  const SystemMatrices sys = build_system(j, w);
  out.residual = residual(out.p, sys.a);
  const double scale = inf_norm(out.p) * w.omega0;
  out.residual_relative = scale > 0.0 ? out.residual / scale : out.residual;
  return out;
}

/// The alpha13 = 0 member: alpha1 = (Jx/Jz) alpha3.
inline LyapunovSolution special_solution(const SpacecraftInertia& j, const OrbitalRate& w,
                                         double a2, double a3) {
  detail::require_nondegenerate(sigmas_from_inertia(j));
  return solution_family(j, w, {(j.jx / j.jz) * a3, a2, a3, 0.0});
}

/// Signed logarithmic grid: 0, then +g and -g for each of `per_sign` points
/// log-spaced over [lo, hi], in increasing magnitude.
inline std::vector<double> signed_log_grid(double lo, double hi, int per_sign) {
  std::vector<double> grid{0.0};
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (int k = 0; k < per_sign; ++k) {
    const double t = per_sign == 1 ? 0.0 : static_cast<double>(k) / (per_sign - 1);
    const double g = std::pow(10.0, llo + t * (lhi - llo));
    grid.push_back(g);
    grid.push_back(-g);
  }
  return grid;
}

struct PdSearchResult {
  std::optional<LyapunovSolution> solution;
  double scan_min = 0.0;  // smallest scanned value of the searched parameter
  double scan_max = 0.0;  // largest scanned value
  std::size_t candidates = 0;

  bool found() const noexcept { return solution.has_value(); }
};

inline constexpr double kSearchLo = 1e-3;
inline constexpr double kSearchHi = 1e3;
inline constexpr int kSearchPointsPerSign = 60;

/// Searches the family for a positive definite member with alpha2 = alpha3 = 1
/// by scanning alpha13 (alpha1 then follows from the constraint). When
/// s1 = 1 the constraint forces alpha13 = 0 and (alpha1, alpha3) are scanned
/// over a positive grid instead.
inline PdSearchResult find_positive_definite(const SpacecraftInertia& j, const OrbitalRate& w) {
  const SigmaTriple s = sigmas_from_inertia(j);
  detail::require_nondegenerate(s);

  PdSearchResult result;
  auto try_candidate = [&](const AlphaParams& alpha) {
    ++result.candidates;
    LyapunovSolution sol = solution_family(j, w, alpha);
    if (sol.is_pd) {
      result.solution = std::move(sol);
      return true;
    }
    return false;
  };

  if (std::abs(1.0 - s.s1) <= kSigmaZeroTol) {
    std::vector<double> positive = signed_log_grid(kSearchLo, kSearchHi, kSearchPointsPerSign);
    std::erase_if(positive, [](double v) { return v <= 0.0; });
    result.scan_min = positive.front();
    result.scan_max = positive.back();
    for (double a3 : positive) {
      for (double a1 : positive) {
        if (try_candidate({a1, 1.0, a3, 0.0})) return result;
      }
    }
    return result;
  }

  const std::vector<double> grid = signed_log_grid(kSearchLo, kSearchHi, kSearchPointsPerSign);
  result.scan_min = -kSearchHi;
  result.scan_max = kSearchHi;
  for (double a13 : grid) {
    if (try_candidate({solve_alpha1(j, 1.0, a13), 1.0, 1.0, a13})) return result;
  }
  return result;
}

struct BlockResiduals {
  double pitch = 0.0;  // A2^T P2 + P2 A2
  double upper = 0.0;  // A3^T P3 + P1 A1
  double lower = 0.0;  // A1^T P1 + P3 A3
};

/// Residuals of the blockwise equations that P0 must satisfy in the
/// transformed coordinates.
inline BlockResiduals block_residuals(const BlockForm& f, const LyapunovSolution& sol) {
  return {inf_norm(mat_mul(transpose(f.a2), sol.p2) + mat_mul(sol.p2, f.a2)),
          inf_norm(mat_mul(transpose(f.a3), sol.p3) + mat_mul(sol.p1, f.a1)),
          inf_norm(mat_mul(transpose(f.a1), sol.p1) + mat_mul(sol.p3, f.a3))};
}

}  // namespace attstab
