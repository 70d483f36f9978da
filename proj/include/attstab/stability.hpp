#pragma once

// Stability verdicts for the linearized attitude model. The predicates work
// on the inertia ratios alone; classify_numeric re-derives the verdict from
// the eigenvalues and ranks of A itself.

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "attstab/errors.hpp"
#include "attstab/model.hpp"
#include "attstab/smallmat.hpp"

namespace attstab {

inline constexpr double kDefaultTolerance = 1e-9;

struct PhiPair {
  double phi1 = 0.0;   // s1 * s3
  double phi2 = 0.0;   // 3 s1 + s3 s1 + 1
  double delta = 0.0;  // phi2^2 - 16 phi1
};

inline PhiPair phis(const SigmaTriple& s) {
  const double phi1 = s.s1 * s.s3;
  const double phi2 = 3.0 * s.s1 + s.s3 * s.s1 + 1.0;
  return {phi1, phi2, phi2 * phi2 - 16.0 * phi1};
}

enum class Verdict { Unstable, PolynomiallyStableOnly, LyapunovStable };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Unstable: return "Unstable";
    case Verdict::PolynomiallyStableOnly: return "PolynomiallyStableOnly";
    case Verdict::LyapunovStable: return "LyapunovStable";
  }
  return "Unstable";
}

inline Verdict verdict_from_string(std::string_view s) {
  if (s == "Unstable") return Verdict::Unstable;
  if (s == "PolynomiallyStableOnly") return Verdict::PolynomiallyStableOnly;
  if (s == "LyapunovStable") return Verdict::LyapunovStable;
  throw DomainError("unknown stability class '" + std::string(s) + "'");
}

struct StabilityClass {
  Verdict verdict = Verdict::Unstable;
  bool boundary = false;

  friend bool operator==(const StabilityClass&, const StabilityClass&) = default;
};

namespace detail {

inline std::array<double, 4> condition_values(const SigmaTriple& s) {
  const PhiPair p = phis(s);
  return {s.s2, p.phi1, p.phi2, p.delta};
}

}  // namespace detail

/// Every eigenvalue of A has non-positive real part.
inline bool is_polynomially_stable(const SigmaTriple& s, double tol = kDefaultTolerance) {
  for (double v : detail::condition_values(s)) {
    if (!(v >= -tol)) return false;
  }
  return true;
}

/// Spectrum on the imaginary axis with every eigenvalue semisimple.
inline bool is_lyapunov_stable(const SigmaTriple& s, double tol = kDefaultTolerance) {
  for (double v : detail::condition_values(s)) {
    if (!(v > tol)) return false;
  }
  return true;
}

inline StabilityClass classify(const SigmaTriple& s, double tol = kDefaultTolerance) {
  if (tol < 0.0) throw DomainError("classify needs tol >= 0");
  StabilityClass out;
  for (double v : detail::condition_values(s)) {
    if (std::abs(v) <= tol) out.boundary = true;
  }
  if (is_lyapunov_stable(s, tol)) {
    out.verdict = Verdict::LyapunovStable;
  } else if (is_polynomially_stable(s, tol)) {
    out.verdict = Verdict::PolynomiallyStableOnly;
  } else {
    out.verdict = Verdict::Unstable;
  }
  return out;
}

/// s1..s6 in three +/- pairs: pitch, then the two roll/yaw modes.
using EigenSet = std::array<Complex, 6>;

/// Purely imaginary spectrum of A. Only valid when every condition holds to
/// within `tol`; slightly negative values inside the band are treated as zero.
inline EigenSet closed_form_eigenvalues(const SigmaTriple& s, const OrbitalRate& w,
                                        double tol = 0.0) {
  if (!is_polynomially_stable(s, tol)) {
    throw NotApplicableError("closed-form eigenvalues need a polynomially stable system");
  }
  const PhiPair p = phis(s);
  auto nonneg_sqrt = [](double v) { return std::sqrt(std::max(v, 0.0)); };
  const double w0 = w.omega0;
  const double root_delta = nonneg_sqrt(p.delta);
  const double pitch = nonneg_sqrt(3.0 * s.s2) * w0;
  const double fast = nonneg_sqrt((p.phi2 + root_delta) / 2.0) * w0;
  const double slow = nonneg_sqrt((p.phi2 - root_delta) / 2.0) * w0;
  return {Complex(0.0, pitch), Complex(0.0, -pitch), Complex(0.0, fast),
          Complex(0.0, -fast), Complex(0.0, slow),  Complex(0.0, -slow)};
}

struct FactoredCharPoly {
  PolyCoeffs pitch;     // lambda^2 + 3 s2
  PolyCoeffs roll_yaw;  // lambda^4 + phi2 lambda^2 + 4 phi1
};

/// det(lambda I - A0) split into its pitch and roll/yaw factors.
inline FactoredCharPoly factored_char_poly(const SigmaTriple& s) {
  const PhiPair p = phis(s);
  return {PolyCoeffs{3.0 * s.s2, 0.0, 1.0},
          PolyCoeffs{4.0 * p.phi1, 0.0, p.phi2, 0.0, 1.0}};
}

struct EigenCluster {
  Complex center;
  std::size_t algebraic = 0;
  std::size_t geometric = 0;
};

struct NumericClassification {
  StabilityClass cls;
  std::vector<Complex> eigenvalues;
  std::vector<EigenCluster> imaginary_axis;
};

/// Independent verdict from the eigenvalues of A itself: roots of the
/// Faddeev-LeVerrier characteristic polynomial, then algebraic against
/// geometric multiplicity for each imaginary-axis cluster.
inline NumericClassification classify_numeric_detail(const SystemMatrices& sys,
                                                     double tol = kDefaultTolerance) {
  if (!(tol > 0.0)) throw DomainError("classify_numeric needs tol > 0");
  const double scale = sys.rate.omega0 > 0.0 ? sys.rate.omega0 : 1.0;
  const double axis_band = tol * scale;
  const double cluster_radius = 10.0 * tol * scale;

  NumericClassification out;
  out.eigenvalues = poly_roots(char_poly_coeffs(sys.a));

  bool unstable = false;
  bool near_boundary = false;
  std::vector<Complex> on_axis;
  for (const Complex& r : out.eigenvalues) {
    if (r.real() > axis_band) unstable = true;
    if (std::abs(r.real()) <= axis_band) on_axis.push_back(r);
    if (std::abs(r.real()) <= cluster_radius && std::abs(r.real()) > axis_band) {
      near_boundary = true;
    }
  }

  // Rank tests run on T A T^-1 / w with T = diag(1, 1, 1, 1/w, 1/w, 1/w).
  // The similarity keeps every multiplicity, and the balanced entries are O(1)
  // whatever the orbital rate, so a relative pivot floor behaves uniformly.
  const std::size_t n = sys.a.rows();
  ComplexMatrix balanced(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double ti = i < 3 ? 1.0 : 1.0 / scale;
      const double tj = j < 3 ? 1.0 : 1.0 / scale;
      balanced.set(i, j, Complex(sys.a(i, j) * ti / tj / scale, 0.0));
    }
  }

  // Greedy clustering in root order keeps the result deterministic.
  std::vector<bool> used(on_axis.size(), false);
  for (std::size_t i = 0; i < on_axis.size(); ++i) {
    if (used[i]) continue;
    EigenCluster c;
    Complex sum = 0.0;
    for (std::size_t k = i; k < on_axis.size(); ++k) {
      if (!used[k] && std::abs(on_axis[k] - on_axis[i]) <= cluster_radius) {
        used[k] = true;
        sum += on_axis[k];
        ++c.algebraic;
      }
    }
    c.center = sum / static_cast<double>(c.algebraic);
    const ComplexMatrix shifted = (c.center / scale) * ComplexMatrix::identity(n) - balanced;
    c.geometric = n - numeric_rank(shifted, tol);
    out.imaginary_axis.push_back(c);
  }

  bool semisimple = true;
  for (const EigenCluster& c : out.imaginary_axis) {
    if (c.algebraic != c.geometric) semisimple = false;
    if (c.algebraic > 1) near_boundary = true;
  }

  out.cls.boundary = near_boundary;
  if (unstable) {
    out.cls.verdict = Verdict::Unstable;
  } else if (semisimple) {
    out.cls.verdict = Verdict::LyapunovStable;
  } else {
    out.cls.verdict = Verdict::PolynomiallyStableOnly;
  }
  return out;
}

inline StabilityClass classify_numeric(const SystemMatrices& sys,
                                       double tol = kDefaultTolerance) {
  return classify_numeric_detail(sys, tol).cls;
}

}  // namespace attstab
