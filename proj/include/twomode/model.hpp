#pragma once

// Domain types for two identical, non-interacting harmonic oscillators coupled
// to a common Markovian bath. Units are hbar = 1. Every 4x4 matrix in the
// library uses the phase-space ordering (x, p_x, y, p_y).

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace twomode {

using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using CMat4 = Eigen::Matrix4cd;

/// Row/column index of each canonical observable.
enum Coord : int { kX = 0, kPx = 1, kY = 2, kPy = 3 };

/// The 2x2 symplectic form.
inline const Mat2& symplectic_j() {
  static const Mat2 j = (Mat2() << 0.0, 1.0, -1.0, 0.0).finished();
  return j;
}

class OscillatorParams {
 public:
  OscillatorParams(double mass, double omega) : mass_(mass), omega_(omega) {
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw std::invalid_argument("oscillator mass must be finite and > 0");
    if (!(omega > 0.0) || !std::isfinite(omega))
      throw std::invalid_argument("oscillator frequency must be finite and > 0");
  }

  double mass() const noexcept { return mass_; }
  double omega() const noexcept { return omega_; }

  friend bool operator==(const OscillatorParams&, const OscillatorParams&) = default;

 private:
  double mass_;
  double omega_;
};

/// Dissipation constant and the ten real diffusion coefficients of the bath.
struct EnvironmentParams {
  double lambda = 0.0;
  double d_xx = 0.0;
  double d_xpx = 0.0;
  double d_xy = 0.0;
  double d_xpy = 0.0;
  double d_ypx = 0.0;
  double d_pxpx = 0.0;
  double d_yy = 0.0;
  double d_ypy = 0.0;
  double d_pxpy = 0.0;
  double d_pypy = 0.0;

  bool all_finite() const {
    for (double v : {lambda, d_xx, d_xpx, d_xy, d_xpy, d_ypx, d_pxpx, d_yy, d_ypy, d_pxpy, d_pypy})
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const EnvironmentParams&, const EnvironmentParams&) = default;
};

/// Environments that treat both oscillators alike: D_yy = D_xx, D_ypy = D_xpx,
/// D_pypy = D_pxpx and D_ypx = D_xpy. Both reduced one-mode blocks of the
/// covariance matrix are then equal and the cross block is symmetric.
struct SymmetricEnvironmentParams {
  double lambda = 0.0;
  double d_xx = 0.0;
  double d_xpx = 0.0;
  double d_pxpx = 0.0;
  double d_xy = 0.0;
  double d_xpy = 0.0;
  double d_pxpy = 0.0;

  EnvironmentParams expand() const {
    EnvironmentParams env;
    env.lambda = lambda;
    env.d_xx = env.d_yy = d_xx;
    env.d_xpx = env.d_ypy = d_xpx;
    env.d_pxpx = env.d_pypy = d_pxpx;
    env.d_xy = d_xy;
    env.d_xpy = env.d_ypx = d_xpy;
    env.d_pxpy = d_pxpy;
    return env;
  }

  /// Exact-equality test of the class constraints.
  static std::optional<SymmetricEnvironmentParams> from(const EnvironmentParams& env) {
    if (env.d_yy != env.d_xx || env.d_ypy != env.d_xpx || env.d_pypy != env.d_pxpx ||
        env.d_ypx != env.d_xpy)
      return std::nullopt;
    return SymmetricEnvironmentParams{env.lambda, env.d_xx, env.d_xpx, env.d_pxpx,
                                      env.d_xy,   env.d_xpy, env.d_pxpy};
  }

  friend bool operator==(const SymmetricEnvironmentParams&,
                         const SymmetricEnvironmentParams&) = default;
};

/// Real symmetric 4x4 matrix of symmetrized second moments.
///
/// The constructor stores (M + M^T)/2, so the stored matrix is exactly
/// symmetric even when M carries round-off from a congruence transform.
class CovarianceMatrix {
 public:
  CovarianceMatrix() : m_(Mat4::Zero()) {}
  explicit CovarianceMatrix(const Mat4& m) : m_(0.5 * (m + m.transpose())) {}

  const Mat4& matrix() const noexcept { return m_; }
  double operator()(int row, int col) const { return m_(row, col); }

  /// Cholesky succeeds iff the matrix is positive definite.
  bool is_positive_definite() const {
    Eigen::LLT<Mat4> llt(m_);
    return llt.info() == Eigen::Success;
  }

  friend bool operator==(const CovarianceMatrix& a, const CovarianceMatrix& b) {
    return a.m_ == b.m_;
  }

 private:
  Mat4 m_;
};

struct BlockDecomposition {
  Mat2 a;  // (x, p_x) one-mode block
  Mat2 b;  // (y, p_y) one-mode block
  Mat2 c;  // cross-correlations, rows (x, p_x), columns (y, p_y)

  Mat4 assemble() const {
    Mat4 out;
    out << a, c, c.transpose(), b;
    return out;
  }
};

/// Drift generator Y of dsigma/dt = Y sigma + sigma Y^T + 2D.
///
/// Built from physical parameters it remembers (m, omega, lambda) so the
/// propagator can use the exact damped-rotation form; a DriftMatrix wrapping
/// an arbitrary matrix falls back to the generic algorithms.
class DriftMatrix {
 public:
  struct Structure {
    double mass;
    double omega;
    double lambda;
  };

  explicit DriftMatrix(const Mat4& y) : y_(y) {}
  DriftMatrix(const Mat4& y, Structure s) : y_(y), structure_(s) {}

  const Mat4& matrix() const noexcept { return y_; }
  const std::optional<Structure>& structure() const noexcept { return structure_; }

 private:
  Mat4 y_;
  std::optional<Structure> structure_;
};

class DiffusionMatrix {
 public:
  explicit DiffusionMatrix(const Mat4& d) : d_(d) {}
  const Mat4& matrix() const noexcept { return d_; }

 private:
  Mat4 d_;
};

inline DriftMatrix build_drift_matrix(const OscillatorParams& osc, const EnvironmentParams& env) {
  const double m = osc.mass();
  const double w = osc.omega();
  Mat2 block;
  block << -env.lambda, 1.0 / m, -m * w * w, -env.lambda;
  Mat4 y = Mat4::Zero();
  y.topLeftCorner<2, 2>() = block;
  y.bottomRightCorner<2, 2>() = block;
  return DriftMatrix(y, {m, w, env.lambda});
}

inline DiffusionMatrix build_diffusion_matrix(const EnvironmentParams& env) {
  Mat4 d;
  // clang-format off
  d << env.d_xx,  env.d_xpx,  env.d_xy,  env.d_xpy,
       env.d_xpx, env.d_pxpx, env.d_ypx, env.d_pxpy,
       env.d_xy,  env.d_ypx,  env.d_yy,  env.d_ypy,
       env.d_xpy, env.d_pxpy, env.d_ypy, env.d_pypy;
  // clang-format on
  return DiffusionMatrix(d);
}

/// Gram matrix of the bath coupling vectors (hbar = 1). Complete positivity of
/// the dynamics requires it to be positive semidefinite.
inline CMat4 build_gram_matrix(const EnvironmentParams& env) {
  using C = std::complex<double>;
  const C half_i_lambda(0.0, 0.5 * env.lambda);
  CMat4 g = CMat4::Zero();
  g(kX, kX) = env.d_xx;
  g(kPx, kPx) = env.d_pxpx;
  g(kY, kY) = env.d_yy;
  g(kPy, kPy) = env.d_pypy;
  g(kX, kPx) = -env.d_xpx - half_i_lambda;
  g(kY, kPy) = -env.d_ypy - half_i_lambda;
  g(kX, kY) = env.d_xy;
  g(kX, kPy) = -env.d_xpy;
  g(kPx, kY) = -env.d_ypx;
  g(kPx, kPy) = env.d_pxpy;
  for (int r = 0; r < 4; ++r)
    for (int c = r + 1; c < 4; ++c) g(c, r) = std::conj(g(r, c));
  return g;
}

inline double min_eigenvalue_hermitian(const CMat4& h) {
  Eigen::SelfAdjointEigenSolver<CMat4> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

enum class ValidationMode { kStrict, kLenient };

inline std::string to_string(ValidationMode mode) {
  return mode == ValidationMode::kStrict ? "strict" : "lenient";
}

struct ConstraintCheck {
  std::string name;
  double margin;  // value minus bound; negative means violated
  bool passed;
};

struct ValidationReport {
  ValidationMode mode = ValidationMode::kStrict;
  std::vector<ConstraintCheck> checks;
  std::optional<double> min_gram_eigenvalue;  // strict mode only

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed) out.push_back(c.name);
    return out;
  }

  friend bool operator==(const ValidationReport& a, const ValidationReport& b) {
    if (a.mode != b.mode || a.min_gram_eigenvalue != b.min_gram_eigenvalue ||
        a.checks.size() != b.checks.size())
      return false;
    for (std::size_t i = 0; i < a.checks.size(); ++i)
      if (a.checks[i].name != b.checks[i].name || a.checks[i].margin != b.checks[i].margin ||
          a.checks[i].passed != b.checks[i].passed)
        return false;
    return true;
  }
};

/// Absolute eigenvalue floor for the positivity check. Environments sitting
/// exactly on a Cauchy-Schwarz boundary must pass.
inline constexpr double kTolPsd = 1e-10;

/// Lenient mode checks the six Cauchy-Schwarz inequalities among the
/// coefficients plus lambda > 0; strict mode also requires the Gram matrix
/// to be positive semidefinite. Never throws on physics violations.
inline ValidationReport validate_environment(const EnvironmentParams& env, ValidationMode mode,
                                             double tol = kTolPsd) {
  ValidationReport report;
  report.mode = mode;
  const double quarter_l2 = 0.25 * env.lambda * env.lambda;
  auto add = [&](std::string name, double margin) {
    report.checks.push_back({std::move(name), margin, margin >= -tol});
  };
  report.checks.push_back({"lambda > 0", env.lambda, env.lambda > 0.0});
  add("D_xx*D_yy - D_xy^2 >= 0", env.d_xx * env.d_yy - env.d_xy * env.d_xy);
  add("D_xx*D_pxpx - D_xpx^2 >= lambda^2/4",
      env.d_xx * env.d_pxpx - env.d_xpx * env.d_xpx - quarter_l2);
  add("D_xx*D_pypy - D_xpy^2 >= 0", env.d_xx * env.d_pypy - env.d_xpy * env.d_xpy);
  add("D_yy*D_pxpx - D_ypx^2 >= 0", env.d_yy * env.d_pxpx - env.d_ypx * env.d_ypx);
  add("D_yy*D_pypy - D_ypy^2 >= lambda^2/4",
      env.d_yy * env.d_pypy - env.d_ypy * env.d_ypy - quarter_l2);
  add("D_pxpx*D_pypy - D_pxpy^2 >= 0", env.d_pxpx * env.d_pypy - env.d_pxpy * env.d_pxpy);

  if (mode == ValidationMode::kStrict) {
    const double ev = min_eigenvalue_hermitian(build_gram_matrix(env));
    report.min_gram_eigenvalue = ev;
    add("gram matrix positive semidefinite", ev);
  }
  return report;
}

/// True iff every eigenvalue of Y has strictly negative real part.
inline bool is_hurwitz(const DriftMatrix& y) {
  if (const auto& s = y.structure()) return s->lambda > 0.0;
  Eigen::EigenSolver<Mat4> es(y.matrix(), false);
  const double floor = 1e-12 * std::max(1.0, y.matrix().cwiseAbs().maxCoeff());
  for (int i = 0; i < 4; ++i)
    if (!(es.eigenvalues()(i).real() < -floor)) return false;
  return true;
}

/// Product of the two oscillator ground states.
inline CovarianceMatrix make_vacuum_covariance(const OscillatorParams& osc) {
  const double mw = osc.mass() * osc.omega();
  Mat4 s = Mat4::Zero();
  s(kX, kX) = s(kY, kY) = 1.0 / (2.0 * mw);
  s(kPx, kPx) = s(kPy, kPy) = 0.5 * mw;
  return CovarianceMatrix(s);
}

}  // namespace twomode
