#pragma once

// Steady-state Floquet chain for a single velocity class.
//
// The atomic variables of an atom with Doppler shift delta are expanded in
// harmonics exp(i l delta t). Eliminating the dipole amplitudes leaves a
// three-term recurrence for the inversion amplitudes x3^(l) that couples only
// even l:
//
//   0 = gamma delta_{l,0} + a_l x3^(l) + d_l x3^(l+2) + b_l x3^(l-2)
//
// Everything here is in scaled units: rates divided by gamma_p and the field
// expressed as x = alpha / sqrt(n0), so g0^2 |alpha|^2 / 2 -> (gamma/8)|x|^2.

#include "satcav/errors.hpp"
#include "satcav/params.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace satcav {

using complex = std::complex<double>;

/// P_l / gamma_p = 1 + i(l delta + Delta)
inline complex propagator_p(int l, double delta, double detuning) {
  return {1.0, l * delta + detuning};
}

/// Q_l / gamma_p = 1 + i(l delta - Delta)
inline complex propagator_q(int l, double delta, double detuning) {
  return {1.0, l * delta - detuning};
}

/// Tridiagonal coefficients over even l in [-l_max, l_max]. Slot i holds
/// l = 2i - l_max, so the neighbours l +- 2 are adjacent slots.
struct ChainCoeffs {
  int l_max = 0;
  double delta = 0.0;
  double detuning = 0.0;
  std::vector<complex> a; ///< diagonal a_l
  std::vector<complex> b; ///< sub-diagonal b_l (couples x3^(l-2)); b[0] is unused
  std::vector<complex> d; ///< super-diagonal d_l (couples x3^(l+2)); d.back() is unused

  std::size_t size() const noexcept { return a.size(); }
  static std::size_t slot(int l, int l_max) noexcept {
    return static_cast<std::size_t>((l + l_max) / 2);
  }
  complex a_at(int l) const { return a[slot(l, l_max)]; }
  complex b_at(int l) const { return b[slot(l, l_max)]; }
  complex d_at(int l) const { return d[slot(l, l_max)]; }
  complex p_at(int l) const { return propagator_p(l, delta, detuning); }
  complex q_at(int l) const { return propagator_q(l, delta, detuning); }
};

/// Fills `chain` in place; reuses its storage.
inline void build_chain_into(ChainCoeffs& chain, complex x, double delta, double detuning,
                             double gamma_over_gp, int l_max) {
  if (l_max < 0 || l_max % 2 != 0) throw InvalidParams("l_max must be even and non-negative");
  const std::size_t n = static_cast<std::size_t>(l_max / 2) * 2 + 1;
  chain.l_max = l_max;
  chain.delta = delta;
  chain.detuning = detuning;
  chain.a.resize(n);
  chain.b.resize(n);
  chain.d.resize(n);
  const double coupling = gamma_over_gp * std::norm(x) / 8.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int l = 2 * static_cast<int>(i) - l_max;
    const complex up = 1.0 / propagator_q(l + 1, delta, detuning) +
                       1.0 / propagator_p(l + 1, delta, detuning);
    const complex down = 1.0 / propagator_q(l - 1, delta, detuning) +
                         1.0 / propagator_p(l - 1, delta, detuning);
    chain.a[i] = complex{gamma_over_gp, l * delta} + coupling * (up + down);
    chain.d[i] = coupling * up;
    chain.b[i] = coupling * down;
  }
}

inline ChainCoeffs build_chain(complex x, double delta, double detuning,
                               const ScaledParams& scaled) {
  ChainCoeffs chain;
  build_chain_into(chain, x, delta, detuning, scaled.gamma_over_gp, scaled.l_max);
  return chain;
}

/// Thomas algorithm for lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i].
/// `scratch` must hold diag.size() elements. Throws NumericalBreakdown when a
/// forward-sweep pivot vanishes or stops being finite.
template <typename T>
void thomas_solve(std::span<const T> lower, std::span<const T> diag, std::span<const T> upper,
                  std::span<const T> rhs, std::span<T> out, std::span<T> scratch) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  if (lower.size() != n || upper.size() != n || rhs.size() != n || out.size() != n ||
      scratch.size() < n)
    throw InvalidParams("thomas_solve: size mismatch");

  constexpr double tiny = 1e3 * std::numeric_limits<double>::min();
  auto pivot_ok = [](const T& m) {
    const double mag = std::abs(m);
    return std::isfinite(mag) && mag > tiny;
  };

  T pivot = diag[0];
  if (!pivot_ok(pivot)) throw NumericalBreakdown("thomas_solve: vanishing pivot at row 0");
  scratch[0] = upper[0] / pivot;
  out[0] = rhs[0] / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = diag[i] - lower[i] * scratch[i - 1];
    if (!pivot_ok(pivot))
      throw NumericalBreakdown("thomas_solve: vanishing pivot at row " + std::to_string(i));
    scratch[i] = upper[i] / pivot;
    out[i] = (rhs[i] - lower[i] * out[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) out[i] -= scratch[i] * out[i + 1];
}

inline std::vector<complex> thomas_solve(const ChainCoeffs& chain, std::span<const complex> rhs) {
  std::vector<complex> out(chain.size()), scratch(chain.size());
  thomas_solve<complex>(chain.b, chain.a, chain.d, rhs, out, scratch);
  return out;
}

/// Solution of the chain for one velocity class.
struct FloquetState {
  double delta = 0.0;
  int l_max = 0;
  std::vector<complex> x3; ///< even-l inversion amplitudes, same slot layout as ChainCoeffs
  complex x1_minus{};      ///< dipole component x1^(-1)
  complex x1_plus{};       ///< dipole component x1^(+1)

  complex x3_at(int l) const {
    if (l < -l_max || l > l_max || (l % 2) != 0) return {};
    return x3[ChainCoeffs::slot(l, l_max)];
  }
  complex dipole_sum() const { return x1_minus + x1_plus; }
};

/// Reusable solver: keeps chain and buffers between velocity classes so that
/// a quadrature sweep allocates once.
class FloquetSolver {
public:
  explicit FloquetSolver(double gamma_over_gp, int l_max)
      : gamma_over_gp_(gamma_over_gp), l_max_(l_max) {}

  const FloquetState& solve(complex x, double delta, double detuning) {
    build_chain_into(chain_, x, delta, detuning, gamma_over_gp_, l_max_);
    const std::size_t n = chain_.size();
    rhs_.assign(n, complex{});
    rhs_[ChainCoeffs::slot(0, l_max_)] = -gamma_over_gp_;
    state_.x3.resize(n);
    scratch_.resize(n);
    thomas_solve<complex>(chain_.b, chain_.a, chain_.d, rhs_, state_.x3, scratch_);

    state_.delta = delta;
    state_.l_max = l_max_;
    // x1^(l) = (g0 alpha / 2)(x3^(l+1) + x3^(l-1)) / P_l, with
    // g0 alpha / gamma_p = sqrt(gamma/gamma_p) x / 2 in scaled units.
    const complex pre = 0.25 * std::sqrt(gamma_over_gp_) * x;
    state_.x1_plus = pre * (state_.x3_at(2) + state_.x3_at(0)) / propagator_p(1, delta, detuning);
    state_.x1_minus =
        pre * (state_.x3_at(0) + state_.x3_at(-2)) / propagator_p(-1, delta, detuning);
    return state_;
  }

  const ChainCoeffs& chain() const noexcept { return chain_; }
  int l_max() const noexcept { return l_max_; }
  double gamma_over_gp() const noexcept { return gamma_over_gp_; }

private:
  double gamma_over_gp_;
  int l_max_;
  ChainCoeffs chain_;
  std::vector<complex> rhs_, scratch_;
  FloquetState state_;
};

inline FloquetState solve_class(complex x, double delta, double detuning,
                                const ScaledParams& scaled) {
  FloquetSolver solver(scaled.gamma_over_gp, scaled.l_max);
  return solver.solve(x, delta, detuning);
}

/// Change of x1^(-1) + x1^(+1) between truncation l_max - 2 and l_max.
inline double truncation_increment(complex x, double delta, double detuning,
                                   const ScaledParams& scaled) {
  if (scaled.l_max < 2) return 0.0;
  FloquetSolver hi(scaled.gamma_over_gp, scaled.l_max);
  FloquetSolver lo(scaled.gamma_over_gp, scaled.l_max - 2);
  return std::abs(hi.solve(x, delta, detuning).dipole_sum() -
                  lo.solve(x, delta, detuning).dipole_sum());
}

/// Lowest-order (l = 0) standing-wave integrand: the two saturated
/// Lorentzians of the counter-propagating components, each saturated by
/// the other through xi+-.
inline complex l0_standing_wave_response(complex x, double detuning, double delta) {
  const double sat = std::norm(x) / 4.0;
  const double sum = detuning + delta;
  const double diff = detuning - delta;
  const double xi_plus = (1.0 + sum * sum) / (1.0 + diff * diff);
  const double xi_minus = (1.0 + diff * diff) / (1.0 + sum * sum);
  return complex{1.0, -sum} / (1.0 + sum * sum + sat * (1.0 + xi_plus)) +
         complex{1.0, -diff} / (1.0 + diff * diff + sat * (1.0 + xi_minus));
}

/// Travelling-wave (ring cavity) integrand with a single saturated Lorentzian.
inline complex ring_cavity_response(complex x, double detuning, double delta) {
  const double sum = detuning + delta;
  return complex{1.0, -sum} / (1.0 + sum * sum + std::norm(x) / 2.0);
}

} // namespace satcav
