#pragma once

// Linearized gravity-gradient attitude model: inertia ratios, orbital rate,
// the state/input matrices, and the rate-free block form reached through the
// (H, L) change of coordinates.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "attstab/errors.hpp"
#include "attstab/smallmat.hpp"

namespace attstab {

/// Earth gravitational parameter, m^3/s^2.
inline constexpr double kEarthMu = 3.986e14;

/// Principal moments of inertia, kg m^2.
struct SpacecraftInertia {
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;

  /// Throws DomainError unless all moments are positive and finite. With
  /// `physical` set the rigid-body triangle inequalities are enforced as well.
  void validate(bool physical = false) const {
    for (double j : {jx, jy, jz}) {
      if (!std::isfinite(j) || !(j > 0.0)) {
        throw DomainError("moments of inertia must be positive and finite");
      }
    }
    if (physical && !(jx + jy > jz && jy + jz > jx && jx + jz > jy)) {
      throw DomainError("inertia violates the rigid-body triangle inequalities");
    }
  }

  double max() const { return std::max({jx, jy, jz}); }

  friend bool operator==(const SpacecraftInertia&, const SpacecraftInertia&) = default;
};

struct SigmaTriple {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
};

/// Circular-orbit angular rate. Zero is representable (the degenerate
/// double-integrator model); negative or non-finite values are not.
struct OrbitalRate {
  double omega0 = 0.0;
  std::optional<double> radius;  // semimajor axis, m, when derived from one

  OrbitalRate() = default;
  explicit OrbitalRate(double w, std::optional<double> r = std::nullopt)
      : omega0(w), radius(r) {
    if (!std::isfinite(w) || w < 0.0) throw DomainError("orbital rate must be finite and >= 0");
  }

  double period() const { return 2.0 * std::numbers::pi / omega0; }
};

/// omega0 = sqrt(mu / r^3).
inline OrbitalRate orbital_rate(double radius) {
  if (!std::isfinite(radius) || !(radius > 0.0)) {
    throw DomainError("semimajor axis must be positive");
  }
  return OrbitalRate(std::sqrt(kEarthMu / (radius * radius * radius)), radius);
}

inline SigmaTriple sigmas_from_inertia(const SpacecraftInertia& j, bool physical = false) {
  j.validate(physical);
  return {(j.jy - j.jz) / j.jx, (j.jx - j.jz) / j.jy, (j.jy - j.jx) / j.jz};
}

/// Ratios from beta1 = Jx/Jy and beta2 = Jy/Jz.
inline SigmaTriple sigmas_from_beta(double beta1, double beta2) {
  if (!std::isfinite(beta1) || !std::isfinite(beta2) || !(beta1 > 0.0) || !(beta2 > 0.0)) {
    throw DomainError("beta ratios must be positive");
  }
  return {1.0 / beta1 - 1.0 / (beta1 * beta2), beta1 - 1.0 / beta2, beta2 - beta1 * beta2};
}

/// A body with the given ratios, normalised to Jz = 1.
inline SpacecraftInertia inertia_from_beta(double beta1, double beta2) {
  if (!std::isfinite(beta1) || !std::isfinite(beta2) || !(beta1 > 0.0) || !(beta2 > 0.0)) {
    throw DomainError("beta ratios must be positive");
  }
  return {beta1 * beta2, beta2, 1.0};
}

struct SystemMatrices {
  Matrix a;  // 6x6
  Matrix b;  // 6x3
  OrbitalRate rate;
  SpacecraftInertia inertia;
};

inline SystemMatrices build_system(const SpacecraftInertia& j, const OrbitalRate& w) {
  const SigmaTriple s = sigmas_from_inertia(j);
  const double w0 = w.omega0;
  const double w2 = w0 * w0;

  Matrix a(6, 6);
  a.set(0, 3, 1.0);
  a.set(1, 4, 1.0);
  a.set(2, 5, 1.0);
  a.set(3, 0, -4.0 * w2 * s.s1);
  a.set(3, 5, w0 * (1.0 - s.s1));
  a.set(4, 1, -3.0 * w2 * s.s2);
  a.set(5, 2, -w2 * s.s3);
  a.set(5, 3, w0 * (s.s3 - 1.0));

  Matrix b(6, 3);
  b.set(3, 0, 1.0 / j.jx);
  b.set(4, 1, 1.0 / j.jy);
  b.set(5, 2, 1.0 / j.jz);
  return {std::move(a), std::move(b), w, j};
}

struct TransformPair {
  Matrix h;      // 6x6
  Matrix h_inv;  // 6x6, closed form
  Matrix l;      // 3x3
};

/// The coordinate change taking A to omega0 * A0. H is a permutation with
/// 1/omega0 scaling on the rate states, so its inverse is written directly.
inline TransformPair transform_matrices(const OrbitalRate& w) {
  const double w0 = w.omega0;
  if (!(w0 > 0.0)) throw DomainError("transform_matrices needs omega0 > 0");

  // Row r of H picks state kSource[r] scaled by scale[r].
  constexpr int kSource[6] = {1, 4, 2, 3, 0, 5};
  const double scale[6] = {1.0, 1.0 / w0, 1.0, 1.0 / w0, 1.0, 1.0 / w0};

  Matrix h(6, 6);
  Matrix h_inv(6, 6);
  for (int r = 0; r < 6; ++r) {
    h.set(r, kSource[r], scale[r]);
    h_inv.set(kSource[r], r, 1.0 / scale[r]);
  }

  const double w2 = w0 * w0;
  Matrix l{{0.0, w2, 0.0}, {w2, 0.0, 0.0}, {0.0, 0.0, w2}};
  return {std::move(h), std::move(h_inv), std::move(l)};
}

struct BlockForm {
  Matrix a1, a2, a3;  // 2x2
  Matrix b1, b2, b3;  // 2x1
  Matrix a0;          // 6x6: diag(A2, [[0, A1], [A3, 0]])
  Matrix b0;          // 6x3: diag(B2, B1, B3)
  SpacecraftInertia inertia;
};

inline BlockForm block_decompose(const SpacecraftInertia& j) {
  const SigmaTriple s = sigmas_from_inertia(j);
  BlockForm f;
  f.inertia = j;
  f.a1 = Matrix{{0.0, 1.0}, {-4.0 * s.s1, 1.0 - s.s1}};
  f.a2 = Matrix{{0.0, 1.0}, {-3.0 * s.s2, 0.0}};
  f.a3 = Matrix{{0.0, 1.0}, {-s.s3, s.s3 - 1.0}};
  f.b1 = Matrix{{0.0}, {1.0 / j.jx}};
  f.b2 = Matrix{{0.0}, {1.0 / j.jy}};
  f.b3 = Matrix{{0.0}, {1.0 / j.jz}};

  f.a0 = Matrix(6, 6);
  f.a0.set_block(0, 0, f.a2);
  f.a0.set_block(2, 4, f.a1);
  f.a0.set_block(4, 2, f.a3);

  f.b0 = Matrix(6, 3);
  f.b0.set_block(0, 0, f.b2);
  f.b0.set_block(2, 1, f.b1);
  f.b0.set_block(4, 2, f.b3);
  return f;
}

struct SimilarityResidual {
  double a = 0.0;  // ||H A H^-1 - omega0 A0||_inf
  double b = 0.0;  // ||H B L - omega0 B0||_inf
};

inline SimilarityResidual verify_similarity(const SystemMatrices& s, const BlockForm& f) {
  if (!(s.inertia == f.inertia)) {
    throw ConsistencyError("system matrices and block form come from different inertias");
  }
  const TransformPair t = transform_matrices(s.rate);
  const double w0 = s.rate.omega0;
  const Matrix lhs_a = mat_mul(mat_mul(t.h, s.a), t.h_inv);
  const Matrix lhs_b = mat_mul(mat_mul(t.h, s.b), t.l);
  return {inf_norm(lhs_a - w0 * f.a0), inf_norm(lhs_b - w0 * f.b0)};
}

}  // namespace attstab
