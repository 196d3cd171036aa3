#pragma once

/// \file jet.hpp
/// Truncated bivariate Taylor series ("jets") with exact arithmetic on the
/// coefficients. A Jet<K> at a point x0 stores c_{ij} for i + j <= K, where
/// f(x0 + h) = sum c_{ij} h1^i h2^j + O(|h|^{K+1}).

#include <array>
#include <cmath>
#include <cstddef>

namespace wrinkle {

namespace detail {

constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }

constexpr int jet_index(int i, int j) {
  const int n = i + j;
  return n * (n + 1) / 2 + j;
}

struct ProductTerm {
  int lhs;
  int rhs;
  int out;
};

template <int Order>
constexpr int product_term_count() {
  int count = 0;
  for (int n1 = 0; n1 <= Order; ++n1)
    for (int n2 = 0; n1 + n2 <= Order; ++n2) count += (n1 + 1) * (n2 + 1);
  return count;
}

template <int Order>
constexpr auto make_product_table() {
  std::array<ProductTerm, product_term_count<Order>()> table{};
  int t = 0;
  for (int n1 = 0; n1 <= Order; ++n1)
    for (int j1 = 0; j1 <= n1; ++j1)
      for (int n2 = 0; n1 + n2 <= Order; ++n2)
        for (int j2 = 0; j2 <= n2; ++j2) {
          const int i1 = n1 - j1;
          const int i2 = n2 - j2;
          table[t++] = {jet_index(i1, j1), jet_index(i2, j2), jet_index(i1 + i2, j1 + j2)};
        }
  return table;
}

template <int Order>
inline constexpr auto kProductTable = make_product_table<Order>();

constexpr double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace detail

template <int Order>
class Jet {
  static_assert(Order >= 0, "jet order must be non-negative");

 public:
  static constexpr int kOrder = Order;
  static constexpr int kSize = detail::jet_size(Order);

  constexpr Jet() = default;
  constexpr explicit Jet(double constant) { c_[0] = constant; }

  /// The coordinate function x_dir expanded around `value`.
  static constexpr Jet variable(double value, int dir) {
    Jet v(value);
    if constexpr (Order >= 1) v.c_[dir == 0 ? detail::jet_index(1, 0) : detail::jet_index(0, 1)] = 1.0;
    return v;
  }

  constexpr double value() const { return c_[0]; }
  constexpr double coeff(int i, int j) const { return c_[detail::jet_index(i, j)]; }
  constexpr double& coeff(int i, int j) { return c_[detail::jet_index(i, j)]; }

  /// Partial derivative d^{i+j} f / dx1^i dx2^j at the expansion point.
  constexpr double partial(int i, int j) const {
    return detail::factorial(i) * detail::factorial(j) * coeff(i, j);
  }

  constexpr const std::array<double, kSize>& coefficients() const { return c_; }

  constexpr Jet& operator+=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) c_[k] += o.c_[k];
    return *this;
  }
  constexpr Jet& operator-=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  constexpr Jet& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  constexpr Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend constexpr Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend constexpr Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend constexpr Jet operator-(Jet a) { return a *= -1.0; }
  friend constexpr Jet operator*(Jet a, double s) { return a *= s; }
  friend constexpr Jet operator*(double s, Jet a) { return a *= s; }
  friend constexpr Jet operator+(Jet a, double s) { return a += s; }
  friend constexpr Jet operator+(double s, Jet a) { return a += s; }
  friend constexpr Jet operator-(Jet a, double s) { return a += -s; }
  friend constexpr Jet operator-(double s, Jet a) { return (a *= -1.0) += s; }

  friend constexpr Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (const auto& t : detail::kProductTable<Order>) r.c_[t.out] += a.c_[t.lhs] * b.c_[t.rhs];
    return r;
  }

  friend constexpr Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend constexpr Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }

  /// g(f) for a scalar function g given its derivatives g^{(k)}(f(x0)), k = 0..Order.
  constexpr Jet compose(const std::array<double, Order + 1>& derivs) const {
    Jet h = *this;
    h.c_[0] = 0.0;
    Jet r(derivs[Order] / detail::factorial(Order));
    for (int k = Order - 1; k >= 0; --k) {
      r = r * h;
      r.c_[0] += derivs[k] / detail::factorial(k);
    }
    return r;
  }

  friend Jet pow(const Jet& f, double p) {
    std::array<double, Order + 1> d{};
    const double v = f.value();
    double falling = 1.0;
    for (int k = 0; k <= Order; ++k) {
      d[k] = falling * std::pow(v, p - k);
      falling *= (p - k);
    }
    return f.compose(d);
  }
  friend Jet reciprocal(const Jet& f) { return pow(f, -1.0); }
  friend Jet sqrt(const Jet& f) { return pow(f, 0.5); }

  friend Jet sin(const Jet& f) {
    std::array<double, Order + 1> d{};
    const double s = std::sin(f.value()), c = std::cos(f.value());
    const double cyc[4] = {s, c, -s, -c};
    for (int k = 0; k <= Order; ++k) d[k] = cyc[k % 4];
    return f.compose(d);
  }
  friend Jet cos(const Jet& f) {
    std::array<double, Order + 1> d{};
    const double s = std::sin(f.value()), c = std::cos(f.value());
    const double cyc[4] = {c, -s, -c, s};
    for (int k = 0; k <= Order; ++k) d[k] = cyc[k % 4];
    return f.compose(d);
  }

 private:
  std::array<double, kSize> c_{};

  template <int O>
  friend constexpr Jet<O - 1> derivative(const Jet<O>& f, int dir);
  template <int Lo, int Hi>
  friend constexpr Jet<Lo> truncate(const Jet<Hi>& f);
};

/// d f / d x_dir, one order lower.
template <int O>
constexpr Jet<O - 1> derivative(const Jet<O>& f, int dir) {
  static_assert(O >= 1);
  Jet<O - 1> r;
  for (int n = 0; n < O; ++n)
    for (int j = 0; j <= n; ++j) {
      const int i = n - j;
      r.c_[detail::jet_index(i, j)] = dir == 0 ? (i + 1) * f.c_[detail::jet_index(i + 1, j)]
                                               : (j + 1) * f.c_[detail::jet_index(i, j + 1)];
    }
  return r;
}

template <int Lo, int Hi>
constexpr Jet<Lo> truncate(const Jet<Hi>& f) {
  static_assert(Lo <= Hi);
  Jet<Lo> r;
  for (int k = 0; k < Jet<Lo>::kSize; ++k) r.c_[k] = f.c_[k];
  return r;
}

template <class T>
using Vec3Of = std::array<T, 3>;

template <class T>
constexpr Vec3Of<T> cross(const Vec3Of<T>& a, const Vec3Of<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class T>
constexpr T dot(const Vec3Of<T>& a, const Vec3Of<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T, class S>
constexpr Vec3Of<T> scale(const Vec3Of<T>& a, const S& s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}

template <class T>
constexpr Vec3Of<T> add(const Vec3Of<T>& a, const Vec3Of<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

template <int O>
constexpr Vec3Of<Jet<O - 1>> derivative(const Vec3Of<Jet<O>>& v, int dir) {
  return {derivative(v[0], dir), derivative(v[1], dir), derivative(v[2], dir)};
}

template <int Lo, int Hi>
constexpr Vec3Of<Jet<Lo>> truncate(const Vec3Of<Jet<Hi>>& v) {
  return {truncate<Lo>(v[0]), truncate<Lo>(v[1]), truncate<Lo>(v[2])};
}

}  // namespace wrinkle
