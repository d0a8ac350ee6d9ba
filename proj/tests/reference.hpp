#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the solver code it is compared against.

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace reference {

using complex = std::complex<double>;

/// Dense Gaussian elimination with partial pivoting on a full matrix.
inline std::vector<complex> dense_solve(std::vector<std::vector<complex>> a, std::vector<complex> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    if (std::abs(a[col][col]) == 0.0) throw std::runtime_error("singular");
    for (std::size_t r = col + 1; r < n; ++r) {
      const complex f = a[r][col] / a[col][col];
      if (f == complex{}) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<complex> x(n);
  for (std::size_t i = n; i-- > 0;) {
    complex s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Lowest-order standing-wave relation written out term by term:
/// y = x (1 + NC0/4 * sum_k w_k {L+(delta_k) + L-(delta_k)}).
inline complex lowest_order_input(complex x, double detuning, double nc0,
                                  const std::vector<double>& nodes,
                                  const std::vector<double>& weights) {
  const double i_sat = std::norm(x);
  complex sum{};
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double dp = detuning + nodes[k];
    const double dm = detuning - nodes[k];
    const double lor_p = 1.0 + dp * dp;
    const double lor_m = 1.0 + dm * dm;
    const double xi_p = lor_p / lor_m;
    const double xi_m = lor_m / lor_p;
    const complex plus = complex(1.0, -dp) / (lor_p + 0.25 * i_sat * (1.0 + xi_p));
    const complex minus = complex(1.0, -dm) / (lor_m + 0.25 * i_sat * (1.0 + xi_m));
    sum += weights[k] * (plus + minus);
  }
  return x * (1.0 + 0.25 * nc0 * sum);
}

/// Cold-atom resonant input intensity |y|^2 as a function of w = |x|^2 in the
/// lowest order: |y|^2 = w (1 + (NC0/2)/(1 + w/2))^2.
inline double cold_input_intensity(double w, double nc0) {
  const double f = 1.0 + 0.5 * nc0 / (1.0 + 0.5 * w);
  return w * f * f;
}

inline double cold_input_slope(double w, double nc0) {
  const double u = 1.0 + 0.5 * w;
  const double f = 1.0 + 0.5 * nc0 / u;
  const double df = -0.25 * nc0 / (u * u);
  return f * f + 2.0 * w * f * df;
}

/// Turning points of the cold lowest-order curve, found by bracketing the
/// sign changes of d|y|^2/dw on a log grid and bisecting each one.
/// Returns {|y|^2 at the local minimum, |y|^2 at the local maximum}.
inline std::pair<double, double> cold_turning_points(double nc0) {
  std::vector<double> roots;
  double prev_w = 1e-6;
  double prev = cold_input_slope(prev_w, nc0);
  for (int i = 1; i <= 4000; ++i) {
    const double w = 1e-6 * std::pow(10.0, 14.0 * i / 4000.0);
    const double cur = cold_input_slope(w, nc0);
    if ((prev < 0.0) != (cur < 0.0)) {
      auto f = [&](double v) { return cold_input_slope(v, nc0); };
      boost::math::tools::eps_tolerance<double> tol(50);
      const auto [a, b] = boost::math::tools::bisect(f, prev_w, w, tol);
      roots.push_back(0.5 * (a + b));
    }
    prev_w = w;
    prev = cur;
  }
  if (roots.size() != 2) throw std::runtime_error("expected two turning points");
  const double y1 = cold_input_intensity(roots[0], nc0);
  const double y2 = cold_input_intensity(roots[1], nc0);
  return {std::min(y1, y2), std::max(y1, y2)};
}

/// Random tridiagonal system in (lower, diag, upper) form, diagonally
/// dominant by `dominance` so that the pivot-free sweep is well defined.
struct RandomChain {
  std::vector<complex> lower, diag, upper, rhs;
};

inline RandomChain random_chain(std::mt19937_64& rng, std::size_t n, double dominance) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] { return complex(u(rng), u(rng)); };
  RandomChain c;
  c.lower.resize(n);
  c.diag.resize(n);
  c.upper.resize(n);
  c.rhs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.lower[i] = i > 0 ? draw() : complex{};
    c.upper[i] = i + 1 < n ? draw() : complex{};
    c.diag[i] = draw() + dominance * (std::abs(c.lower[i]) + std::abs(c.upper[i]) + 0.1) *
                             std::polar(1.0, 3.14159 * u(rng));
    c.rhs[i] = draw();
  }
  return c;
}

inline std::vector<std::vector<complex>> to_dense(const RandomChain& c) {
  const std::size_t n = c.diag.size();
  std::vector<std::vector<complex>> a(n, std::vector<complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = c.diag[i];
    if (i > 0) a[i][i - 1] = c.lower[i];
    if (i + 1 < n) a[i][i + 1] = c.upper[i];
  }
  return a;
}

inline double max_relative_difference(const std::vector<complex>& a, const std::vector<complex>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(b[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return diff / scale;
}

} // namespace reference
