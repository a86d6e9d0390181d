#pragma once

// Separability and entanglement of two-mode Gaussian states: the Simon (PPT)
// criterion, the entanglement window of the special environment class, and
// logarithmic negativity.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "twomode/errors.hpp"
#include "twomode/model.hpp"

namespace twomode {

inline BlockDecomposition block_decompose(const CovarianceMatrix& sigma) {
  const Mat4& s = sigma.matrix();
  return {s.topLeftCorner<2, 2>(), s.bottomRightCorner<2, 2>(), s.topRightCorner<2, 2>()};
}

/// Simon's separability function. The two-mode Gaussian state is separable
/// iff the returned value is >= 0.
inline double simon_s(const BlockDecomposition& blk) {
  const Mat2& j = symplectic_j();
  const double det_a = blk.a.determinant();
  const double det_b = blk.b.determinant();
  const double det_c = blk.c.determinant();
  const double quarter_gap = 0.25 - std::abs(det_c);
  const double trace_term = (blk.a * j * blk.c * j * blk.b * j * blk.c.transpose() * j).trace();
  return det_a * det_b + quarter_gap * quarter_gap - trace_term - 0.25 * (det_a + det_b);
}

/// det C of the asymptotic state for the symmetric environment class.
inline double det_c_closed_form(const OscillatorParams& osc, const SymmetricEnvironmentParams& env) {
  if (!(env.lambda > 0.0))
    throw PhysicsError(ErrorCode::NonPositiveLambda, "det C closed form needs lambda > 0");
  const double m = osc.mass();
  const double w = osc.omega();
  const double l2 = env.lambda * env.lambda;
  const double lead = m * w * w * env.d_xy + env.d_pxpy / m;
  return (lead * lead + 4.0 * l2 * (env.d_xy * env.d_pxpy - env.d_xpy * env.d_xpy)) /
         (4.0 * l2 * (l2 + w * w));
}

namespace detail {

inline bool rel_close(double a, double b, double scale, double rtol = 1e-12) {
  return std::abs(a - b) <= rtol * std::max({std::abs(a), std::abs(b), scale});
}

}  // namespace detail

/// The environment class m^2 w^2 D_xx = D_pxpx, D_xpx = 0, m^2 w^2 D_xy = D_pxpy
/// (relative tolerance 1e-12), on top of the symmetric class.
inline bool is_special_class(const OscillatorParams& osc, const SymmetricEnvironmentParams& env) {
  const double mw2 = osc.mass() * osc.mass() * osc.omega() * osc.omega();
  const double scale = std::max({std::abs(env.d_xx), std::abs(env.d_pxpx), 1e-300});
  return detail::rel_close(mw2 * env.d_xx, env.d_pxpx, 0.0) &&
         std::abs(env.d_xpx) <= 1e-12 * scale &&
         detail::rel_close(mw2 * env.d_xy, env.d_pxpy, 1e-12 * scale);
}

namespace detail {

inline void require_special_class(const OscillatorParams& osc,
                                  const SymmetricEnvironmentParams& env, bool need_zero_dxy) {
  if (!is_special_class(osc, env))
    throw PhysicsError(ErrorCode::ClassViolation,
                       "environment is not in the class m^2 w^2 D_xx = D_pxpx, D_xpx = 0, "
                       "m^2 w^2 D_xy = D_pxpy");
  if (need_zero_dxy && env.d_xy != 0.0)
    throw PhysicsError(ErrorCode::ClassViolation, "requires D_xy = 0");
  if (!(env.lambda > 0.0)) throw PhysicsError(ErrorCode::NonPositiveLambda, "requires lambda > 0");
}

}  // namespace detail

/// Simon's function of the asymptotic state, evaluated directly from the
/// coefficients of the special environment class.
///
/// For det C <= 0 this is the compact form
///   [m^2 w^2 (D_xx^2 - D_xy^2)/l^2 + D_xpy^2/(l^2+w^2) - 1/4]^2
///     - 4 m^2 w^2 D_xx^2 D_xpy^2 / [l^2 (l^2+w^2)].
/// That form assumes |det C| = -det C; for det C > 0 the |det C| term is
/// expanded with the correct sign instead.
inline double simon_s_special(const OscillatorParams& osc, const SymmetricEnvironmentParams& env) {
  detail::require_special_class(osc, env, false);
  const double mw2 = osc.mass() * osc.mass() * osc.omega() * osc.omega();
  const double l2 = env.lambda * env.lambda;
  const double big_l = l2 + osc.omega() * osc.omega();

  const double one_mode2 = mw2 * env.d_xx * env.d_xx / l2;  // det A = det B
  const double cross_sym2 = mw2 * env.d_xy * env.d_xy / l2;
  const double cross_anti2 = env.d_xpy * env.d_xpy / big_l;
  const double det_c = cross_sym2 - cross_anti2;

  if (det_c <= 0.0) {
    const double inner = mw2 * (env.d_xx * env.d_xx - env.d_xy * env.d_xy) / l2 +
                         env.d_xpy * env.d_xpy / big_l - 0.25;
    return inner * inner - 4.0 * mw2 * env.d_xx * env.d_xx * env.d_xpy * env.d_xpy / (l2 * big_l);
  }
  const double gap = 0.25 - det_c;
  return one_mode2 * one_mode2 + gap * gap - 2.0 * one_mode2 * (cross_sym2 + cross_anti2) -
         0.5 * one_mode2;
}

struct Interval {
  double lower;
  double upper;

  /// Open-interval membership.
  bool contains(double v) const { return lower < v && v < upper; }
};

/// Range of |D_xpy| for which the asymptotic state is entangled (special class,
/// D_xy = 0). The interval is
///   ( sqrt(l^2+w^2) (m w D_xx/l - 1/2), sqrt(l^2+w^2) (m w D_xx/l + 1/2) ).
/// Mirroring y -> -y, p_y -> -p_y flips the sign of D_xpy without changing
/// entanglement, so membership is decided on |D_xpy| (see window_contains).
inline Interval entanglement_window(const OscillatorParams& osc,
                                    const SymmetricEnvironmentParams& env) {
  detail::require_special_class(osc, env, true);
  const double scaled = osc.mass() * osc.omega() * env.d_xx / env.lambda;
  if (scaled < 0.5)
    throw PhysicsError(ErrorCode::UncertaintyViolation,
                       "m w D_xx / lambda < 1/2 violates the one-mode uncertainty relation");
  const double root = std::sqrt(env.lambda * env.lambda + osc.omega() * osc.omega());
  return {root * (scaled - 0.5), root * (scaled + 0.5)};
}

inline bool window_contains(const Interval& window, double d_xpy) {
  return window.contains(std::abs(d_xpy));
}

/// Radicand floor absorbing round-off on boundary states such as the vacuum.
inline constexpr double kRadicandFloor = -1e-12;

/// Squared smallest symplectic eigenvalue of the partially transposed state.
inline double f_sigma(const BlockDecomposition& blk, double det_sigma) {
  const double half_sum = 0.5 * (blk.a.determinant() + blk.b.determinant()) - blk.c.determinant();
  double radicand = half_sum * half_sum - det_sigma;
  if (radicand < kRadicandFloor)
    throw PhysicsError(ErrorCode::NegativeRadicand,
                       "negative radicand in f(sigma): covariance matrix is not physical");
  radicand = std::max(radicand, 0.0);
  return half_sum - std::sqrt(radicand);
}

/// E = -1/2 log2(4 f(sigma)); E > 0 certifies entanglement.
inline double log_negativity(const CovarianceMatrix& sigma) {
  const double f = f_sigma(block_decompose(sigma), sigma.matrix().determinant());
  if (!(f > 0.0))
    throw PhysicsError(ErrorCode::NonPositiveF, "f(sigma) <= 0: covariance matrix is not physical");
  return -0.5 * std::log2(4.0 * f);
}

/// E = -log2(2 |m w D_xx/l - |D_xpy|/sqrt(l^2+w^2)|) for the special class with
/// D_xy = 0. Independent of the initial state.
inline double log_negativity_closed_form(const OscillatorParams& osc,
                                         const SymmetricEnvironmentParams& env) {
  detail::require_special_class(osc, env, true);
  const double root = std::sqrt(env.lambda * env.lambda + osc.omega() * osc.omega());
  const double gap =
      std::abs(osc.mass() * osc.omega() * env.d_xx / env.lambda - std::abs(env.d_xpy) / root);
  if (gap < 1e-12)
    throw PhysicsError(ErrorCode::DivergentNegativity,
                       "closed-form negativity diverges; coefficients violate strict "
                       "environment validity");
  return -std::log2(2.0 * gap);
}

enum class Verdict { kEntangled, kSeparable };

inline std::string to_string(Verdict v) {
  return v == Verdict::kEntangled ? "entangled" : "separable";
}

struct AnalysisContext {
  OscillatorParams osc;
  EnvironmentParams env;
};

struct EntanglementReport {
  double det_a = 0.0;
  double det_b = 0.0;
  double det_c = 0.0;
  double det_sigma = 0.0;
  double s_general = 0.0;
  std::optional<double> s_special;
  std::optional<double> det_c_closed;
  std::optional<double> f_sigma;
  std::optional<double> e_general;
  std::optional<double> e_closed;
  Verdict verdict = Verdict::kSeparable;
  std::optional<Interval> window;
  std::optional<bool> valid_strict;
  std::optional<bool> valid_lenient;
  std::vector<std::string> notes;
};

/// Fills every report field that applies. Failures of individual quantities
/// leave the field empty and add a note; the report itself is always produced.
inline EntanglementReport analyze(const CovarianceMatrix& sigma,
                                  const std::optional<AnalysisContext>& context = std::nullopt) {
  EntanglementReport r;
  const BlockDecomposition blk = block_decompose(sigma);
  r.det_a = blk.a.determinant();
  r.det_b = blk.b.determinant();
  r.det_c = blk.c.determinant();
  r.det_sigma = sigma.matrix().determinant();
  r.s_general = simon_s(blk);
  // S = 0 sits on the separable side.
  r.verdict = r.s_general < 0.0 ? Verdict::kEntangled : Verdict::kSeparable;

  auto attempt = [&](auto&& fn) {
    try {
      fn();
    } catch (const PhysicsError& e) {
      r.notes.emplace_back(e.what());
    }
  };

  attempt([&] { r.f_sigma = f_sigma(blk, r.det_sigma); });
  attempt([&] { r.e_general = log_negativity(sigma); });

  if (!context) return r;
  const auto& osc = context->osc;
  r.valid_strict = validate_environment(context->env, ValidationMode::kStrict).passed();
  r.valid_lenient = validate_environment(context->env, ValidationMode::kLenient).passed();

  const auto sym = SymmetricEnvironmentParams::from(context->env);
  if (!sym) {
    r.notes.emplace_back("environment is not in the symmetric class; closed forms skipped");
    return r;
  }
  attempt([&] { r.det_c_closed = det_c_closed_form(osc, *sym); });
  if (!is_special_class(osc, *sym)) {
    r.notes.emplace_back("environment is not in the special class; special forms skipped");
    return r;
  }
  attempt([&] { r.s_special = simon_s_special(osc, *sym); });
  if (sym->d_xy != 0.0) return r;
  attempt([&] { r.window = entanglement_window(osc, *sym); });
  attempt([&] { r.e_closed = log_negativity_closed_form(osc, *sym); });
  return r;
}

}  // namespace twomode
