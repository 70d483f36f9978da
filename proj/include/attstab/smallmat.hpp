#pragma once

// Small dense linear algebra and polynomial kernels. Dimensions in this
// toolkit never exceed 8, so everything here favours clarity over blocking.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attstab/errors.hpp"

namespace attstab {

using Complex = std::complex<double>;

namespace detail {

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Complex& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

}  // namespace detail

/// Dense row-major matrix with runtime dimensions. Entries are checked finite
/// on every write.
template <typename T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;

  BasicMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}

  BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("matrix entry count " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
    for (const T& v : data_) check_finite(v);
  }

  BasicMatrix(std::initializer_list<std::initializer_list<T>> rows)
      : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionError("ragged matrix initializer");
      for (const T& v : row) {
        check_finite(v);
        data_.push_back(v);
      }
    }
  }

  static BasicMatrix zeros(std::size_t rows, std::size_t cols) {
    return BasicMatrix(rows, cols);
  }

  static BasicMatrix identity(std::size_t n) {
    BasicMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  void set(std::size_t i, std::size_t j, T v) {
    check_finite(v);
    data_[i * cols_ + j] = v;
  }

  /// Copies `block` into this matrix with its top-left corner at (row, col).
  void set_block(std::size_t row, std::size_t col, const BasicMatrix& block) {
    if (row + block.rows() > rows_ || col + block.cols() > cols_) {
      throw DimensionError("block does not fit inside target matrix");
    }
    for (std::size_t i = 0; i < block.rows(); ++i) {
      for (std::size_t j = 0; j < block.cols(); ++j) {
        data_[(row + i) * cols_ + col + j] = block(i, j);
      }
    }
  }

  BasicMatrix block(std::size_t row, std::size_t col, std::size_t rows,
                    std::size_t cols) const {
    if (row + rows > rows_ || col + cols > cols_) {
      throw DimensionError("block extends past matrix bounds");
    }
    BasicMatrix out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) out.data_[i * cols + j] = (*this)(row + i, col + j);
    }
    return out;
  }

  std::span<const T> entries() const noexcept { return data_; }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  static void check_finite(const T& v) {
    if (!detail::is_finite(v)) throw DomainError("matrix entries must be finite");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<double>;
using ComplexMatrix = BasicMatrix<Complex>;

template <typename T>
BasicMatrix<T> mat_mul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("mat_mul: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
  std::vector<T> out(a.rows() * b.cols(), T{});
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out[i * b.cols() + j] += aik * b(k, j);
    }
  }
  return BasicMatrix<T>(a.rows(), b.cols(), std::move(out));
}

template <typename T>
BasicMatrix<T> transpose(const BasicMatrix<T>& m) {
  BasicMatrix<T> out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out.set(j, i, m(i, j));
  }
  return out;
}

template <typename T>
BasicMatrix<T> operator+(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix sum of mismatched shapes");
  }
  std::vector<T> out(a.entries().begin(), a.entries().end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b.entries()[k];
  return BasicMatrix<T>(a.rows(), a.cols(), std::move(out));
}

template <typename T>
BasicMatrix<T> operator-(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix difference of mismatched shapes");
  }
  std::vector<T> out(a.entries().begin(), a.entries().end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b.entries()[k];
  return BasicMatrix<T>(a.rows(), a.cols(), std::move(out));
}

template <typename T>
BasicMatrix<T> operator*(T s, const BasicMatrix<T>& m) {
  std::vector<T> out(m.entries().begin(), m.entries().end());
  for (T& v : out) v *= s;
  return BasicMatrix<T>(m.rows(), m.cols(), std::move(out));
}

inline ComplexMatrix to_complex(const Matrix& m) {
  std::vector<Complex> out(m.entries().begin(), m.entries().end());
  return ComplexMatrix(m.rows(), m.cols(), std::move(out));
}

/// Maximum absolute row sum.
template <typename T>
double inf_norm(const BasicMatrix<T>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

template <typename T>
double max_abs(const BasicMatrix<T>& m) {
  double best = 0.0;
  for (const T& v : m.entries()) best = std::max(best, static_cast<double>(std::abs(v)));
  return best;
}

template <typename T>
double trace_real(const BasicMatrix<T>& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += std::real(m(i, i));
  return t;
}

/// Real polynomial c0 + c1 x + ... + cn x^n with a nonzero leading term.
class PolyCoeffs {
 public:
  explicit PolyCoeffs(std::vector<double> ascending) : c_(std::move(ascending)) {
    if (c_.empty()) throw DomainError("polynomial needs at least one coefficient");
    for (double v : c_) {
      if (!std::isfinite(v)) throw DomainError("polynomial coefficients must be finite");
    }
    if (c_.back() == 0.0) throw DomainError("leading polynomial coefficient is zero");
  }

  PolyCoeffs(std::initializer_list<double> ascending)
      : PolyCoeffs(std::vector<double>(ascending)) {}

  std::size_t degree() const noexcept { return c_.size() - 1; }
  double operator[](std::size_t k) const { return c_[k]; }
  double leading() const noexcept { return c_.back(); }
  std::span<const double> coefficients() const noexcept { return c_; }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  Complex evaluate(Complex x) const {
    Complex acc = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) acc = acc * x + c_[k];
    return acc;
  }

  friend PolyCoeffs operator*(const PolyCoeffs& a, const PolyCoeffs& b) {
    std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) {
      for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    }
    return PolyCoeffs(std::move(out));
  }

  friend bool operator==(const PolyCoeffs&, const PolyCoeffs&) = default;

 private:
  std::vector<double> c_;
};

/// Both roots of a quadratic. Real discriminants give real roots with zero
/// imaginary part; the larger root (or the one with positive imaginary part)
/// comes first.
inline std::pair<Complex, Complex> solve_quadratic(const PolyCoeffs& c) {
  if (c.degree() != 2) throw DimensionError("solve_quadratic needs a degree-2 polynomial");
  const double a = c[2];
  const double b = c[1];
  const double k = c[0];
  const double disc = b * b - 4.0 * a * k;
  if (disc >= 0.0) {
    // Cancellation-free form: q shares the sign of -b.
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q == 0.0) return {Complex(0.0, 0.0), Complex(0.0, 0.0)};
    double r1 = q / a;
    double r2 = k / q;
    if (r1 < r2) std::swap(r1, r2);
    return {Complex(r1, 0.0), Complex(r2, 0.0)};
  }
  const double re = -b / (2.0 * a);
  const double im = std::abs(std::sqrt(-disc) / (2.0 * a));
  return {Complex(re, im), Complex(re, -im)};
}

inline constexpr int kRootIterationCap = 10000;

/// All complex roots of `c` by Durand-Kerner simultaneous iteration.
///
/// Exact zero roots (vanishing trailing coefficients) are split off before
/// iterating. Starting points lie on the circle of radius 1 + max|c_i / c_n|.
/// Iteration stops once the largest correction drops below 1e-14 times that
/// radius, or once every residual is inside the Horner rounding bound, which
/// is where clustered roots stall.
inline std::vector<Complex> poly_roots(const PolyCoeffs& c) {
  if (c.degree() < 1) throw DimensionError("poly_roots needs degree >= 1");

  std::vector<Complex> roots;
  auto coeffs = c.coefficients();
  std::size_t zeros = 0;
  while (zeros < coeffs.size() - 1 && coeffs[zeros] == 0.0) ++zeros;
  roots.assign(zeros, Complex(0.0, 0.0));

  std::vector<double> monic(coeffs.begin() + static_cast<std::ptrdiff_t>(zeros), coeffs.end());
  const double lead = monic.back();
  for (double& v : monic) v /= lead;
  const std::size_t n = monic.size() - 1;
  if (n == 0) return roots;
  if (n == 1) {
    roots.emplace_back(-monic[0], 0.0);
    return roots;
  }

  // Fujiwara bound: scales with the roots themselves, so the step test below
  // stays meaningful when the coefficients span many decades.
  double radius = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double a = std::abs(monic[n - k]) / (k == n ? 2.0 : 1.0);
    radius = std::max(radius, std::pow(a, 1.0 / static_cast<double>(k)));
  }
  radius = radius > 0.0 ? 2.0 * radius : 1.0;

  auto eval = [&](Complex x) {
    Complex acc = 1.0;
    for (std::size_t k = n; k-- > 0;) acc = acc * x + monic[k];
    return acc;
  };
  auto eval_bound = [&](Complex x) {
    // Running bound on the rounding error of Horner's scheme.
    const double ax = std::abs(x);
    double acc = 1.0;
    for (std::size_t k = n; k-- > 0;) acc = acc * ax + std::abs(monic[k]);
    return 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * acc;
  };

  // The angular offset keeps the start off the real axis, which stalls for
  // real polynomials.
  std::vector<Complex> z(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
    z[k] = std::polar(radius, angle);
  }

  bool converged = false;
  for (int iter = 0; iter < kRootIterationCap && !converged; ++iter) {
    double max_step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex denom = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) denom *= (z[i] - z[j]);
      }
      if (denom == Complex(0.0, 0.0)) denom = Complex(1e-300, 0.0);
      const Complex step = eval(z[i]) / denom;
      z[i] -= step;
      max_step = std::max(max_step, std::abs(step));
    }
    if (max_step < 1e-14 * radius) {
      converged = true;
      break;
    }
    bool at_noise_floor = true;
    for (const Complex& r : z) {
      if (std::abs(eval(r)) > eval_bound(r)) {
        at_noise_floor = false;
        break;
      }
    }
    converged = at_noise_floor;
  }
  if (!converged) {
    throw ConvergenceError("Durand-Kerner did not converge within " +
                           std::to_string(kRootIterationCap) + " iterations");
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

inline constexpr std::size_t kMaxCharPolyOrder = 8;

/// Coefficients of det(lambda I - m) via the Faddeev-LeVerrier recurrence.
inline PolyCoeffs char_poly_coeffs(const Matrix& m) {
  if (!m.is_square()) throw ShapeError("char_poly_coeffs needs a square matrix");
  const std::size_t n = m.rows();
  if (n > kMaxCharPolyOrder) throw DimensionError("char_poly_coeffs supports n <= 8");

  std::vector<double> c(n + 1, 0.0);
  c[n] = 1.0;
  auto work = Matrix::zeros(n, n);  // M_0
  const auto eye = Matrix::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    // M_k = m M_{k-1} + c_{n-k+1} I ;  c_{n-k} = -tr(m M_k) / k
    work = mat_mul(m, work) + c[n - k + 1] * eye;
    const double tr = trace_real(mat_mul(m, work));
    c[n - k] = -tr / static_cast<double>(k);
  }
  return PolyCoeffs(std::move(c));
}

/// Row reduction with partial pivoting. Pivots below tol * max|entry| count
/// as zero.
template <typename T>
std::size_t numeric_rank(const BasicMatrix<T>& m, double tol) {
  if (!(tol > 0.0)) throw DomainError("numeric_rank needs tol > 0");
  const double scale = max_abs(m);
  if (scale == 0.0) return 0;
  const double floor = tol * scale;

  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<T> a(m.entries().begin(), m.entries().end());
  auto at = [&](std::size_t i, std::size_t j) -> T& { return a[i * cols + j]; };

  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    double best = std::abs(at(rank, col));
    for (std::size_t i = rank + 1; i < rows; ++i) {
      if (std::abs(at(i, col)) > best) {
        best = std::abs(at(i, col));
        pivot = i;
      }
    }
    if (best <= floor) continue;
    if (pivot != rank) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(at(pivot, j), at(rank, j));
    }
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const T factor = at(i, col) / at(rank, col);
      if (factor == T{}) continue;
      for (std::size_t j = col; j < cols; ++j) at(i, j) -= factor * at(rank, j);
    }
    ++rank;
  }
  return rank;
}

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12) {
  if (!m.is_square()) return false;
  const double bound = rel_tol * std::max(max_abs(m), std::numeric_limits<double>::min());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > bound) return false;
    }
  }
  return true;
}

inline constexpr double kPdPivotFloor = 1e-12;

/// Cholesky test; every pivot must exceed 1e-12 times the largest diagonal entry.
inline bool is_positive_definite(const Matrix& m) {
  if (!m.is_square()) throw ShapeError("is_positive_definite needs a square matrix");
  if (!is_symmetric(m)) throw ShapeError("is_positive_definite needs a symmetric matrix");
  const std::size_t n = m.rows();
  double diag_scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) diag_scale = std::max(diag_scale, m(i, i));
  if (!(diag_scale > 0.0)) return false;
  const double floor = kPdPivotFloor * diag_scale;

  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > floor)) return false;
    const double root = std::sqrt(d);
    l[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / root;
    }
  }
  return true;
}

}  // namespace attstab
