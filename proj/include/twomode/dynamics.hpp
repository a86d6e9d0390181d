#pragma once

// Covariance-matrix dynamics: dsigma/dt = Y sigma + sigma Y^T + 2D, its
// propagator M(t) = exp(Yt), and the asymptotic state solving
// Y sigma_inf + sigma_inf Y^T = -2D.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "twomode/errors.hpp"
#include "twomode/model.hpp"

namespace twomode {

struct Propagator {
  double t = 0.0;
  Mat4 m_t = Mat4::Identity();
};

/// Exact exponential of one damped-oscillator block at time t.
inline Mat2 damped_rotation_block(double mass, double omega, double lambda, double t) {
  const double decay = std::exp(-lambda * t);
  const double c = std::cos(omega * t);
  const double s = std::sin(omega * t);
  const double mw = mass * omega;
  Mat2 b;
  b << c, s / mw, -mw * s, c;
  return decay * b;
}

/// Generic exp(A) by scaling and squaring of a truncated Taylor series.
/// Used for drift matrices without known structure and as a cross-check.
inline Mat4 generic_expm(const Mat4& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Mat4 scaled = a / std::ldexp(1.0, squarings);

  Mat4 result = Mat4::Identity();
  Mat4 term = Mat4::Identity();
  for (int k = 1; k <= 20; ++k) {
    term = term * scaled / static_cast<double>(k);
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

inline Propagator matrix_exponential(const DriftMatrix& y, double t) {
  if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("propagation time must be >= 0");
  Propagator p;
  p.t = t;
  if (t == 0.0) return p;
  if (const auto& s = y.structure()) {
    const Mat2 block = damped_rotation_block(s->mass, s->omega, s->lambda, t);
    p.m_t.setZero();
    p.m_t.topLeftCorner<2, 2>() = block;
    p.m_t.bottomRightCorner<2, 2>() = block;
  } else {
    p.m_t = generic_expm(y.matrix() * t);
  }
  return p;
}

struct LyapunovSolution {
  CovarianceMatrix sigma;
  double residual = 0.0;  // max-norm of Y sigma + sigma Y^T + 2D
  bool ill_conditioned = false;
};

inline double lyapunov_residual(const Mat4& y, const Mat4& sigma, const Mat4& d) {
  return (y * sigma + sigma * y.transpose() + 2.0 * d).cwiseAbs().maxCoeff();
}

/// Solves the steady-state Lyapunov equation as a dense 16x16 linear system
/// in vec(sigma).
///
/// `ill_conditioned` is set when lambda < 1e-6 omega for a structured drift
/// (sigma_inf grows like 1/lambda), or when the LU reciprocal condition
/// estimate drops below 1e-12 for a generic one.
inline LyapunovSolution solve_lyapunov(const DriftMatrix& y, const DiffusionMatrix& d) {
  if (!is_hurwitz(y))
    throw PhysicsError(ErrorCode::NotHurwitz,
                       "drift matrix has an eigenvalue with non-negative real part; "
                       "no steady state exists");
  const Mat4& ym = y.matrix();
  using Mat16 = Eigen::Matrix<double, 16, 16>;
  using Vec16 = Eigen::Matrix<double, 16, 1>;

  // Column-major vec: vec(Y S) = (I kron Y) vec S, vec(S Y^T) = (Y kron I) vec S.
  Mat16 k = Mat16::Zero();
  for (int blk = 0; blk < 4; ++blk) k.block<4, 4>(4 * blk, 4 * blk) += ym;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) k.block<4, 4>(4 * r, 4 * c).diagonal().array() += ym(r, c);

  Vec16 rhs = -2.0 * Eigen::Map<const Vec16>(d.matrix().data());
  Eigen::PartialPivLU<Mat16> lu(k);
  Vec16 v = lu.solve(rhs);

  LyapunovSolution out;
  out.sigma = CovarianceMatrix(Eigen::Map<const Mat4>(v.data()));
  out.residual = lyapunov_residual(ym, out.sigma.matrix(), d.matrix());
  if (const auto& s = y.structure())
    out.ill_conditioned = s->lambda < 1e-6 * s->omega;
  else
    out.ill_conditioned = lu.rcond() < 1e-12;
  return out;
}

inline CovarianceMatrix steady_state_lyapunov(const DriftMatrix& y, const DiffusionMatrix& d) {
  return solve_lyapunov(y, d).sigma;
}

namespace detail {

// Asymptotic (q q', q p', p p') moments for one pair of coordinates, given the
// matching diffusion triple (D_qq', D_qp', D_pp').
struct MomentTriple {
  double qq;
  double qp;
  double pp;
};

inline MomentTriple asymptotic_moments(double m, double w, double l, double d_qq, double d_qp,
                                       double d_pp) {
  const double l2 = l * l;
  const double w2 = w * w;
  const double denom = l2 + w2;
  return {
      (m * m * (2.0 * l2 + w2) * d_qq + 2.0 * m * l * d_qp + d_pp) / (2.0 * m * m * l * denom),
      (-m * m * w2 * d_qq + 2.0 * m * l * d_qp + d_pp) / (2.0 * m * denom),
      (m * m * w2 * w2 * d_qq - 2.0 * m * w2 * l * d_qp + (2.0 * l2 + w2) * d_pp) /
          (2.0 * l * denom),
  };
}

}  // namespace detail

/// Closed-form asymptotic covariance matrix for the symmetric environment
/// class. The cross block uses (D_xy, D_xpy, D_pxpy); the one-mode blocks use
/// the same expressions with (D_xx, D_xpx, D_pxpx).
inline CovarianceMatrix steady_state_closed_form(const OscillatorParams& osc,
                                                 const SymmetricEnvironmentParams& env) {
  if (!(env.lambda > 0.0))
    throw PhysicsError(ErrorCode::NonPositiveLambda, "closed-form steady state needs lambda > 0");
  const double m = osc.mass();
  const double w = osc.omega();
  const auto one = detail::asymptotic_moments(m, w, env.lambda, env.d_xx, env.d_xpx, env.d_pxpx);
  const auto cross = detail::asymptotic_moments(m, w, env.lambda, env.d_xy, env.d_xpy, env.d_pxpy);

  BlockDecomposition blocks;
  blocks.a << one.qq, one.qp, one.qp, one.pp;
  blocks.b = blocks.a;
  blocks.c << cross.qq, cross.qp, cross.qp, cross.pp;
  return CovarianceMatrix(blocks.assemble());
}

/// sigma(t) = M(t) (sigma0 - sigma_inf) M(t)^T + sigma_inf.
inline CovarianceMatrix propagate(const CovarianceMatrix& sigma0, const CovarianceMatrix& sigma_inf,
                                  const DriftMatrix& y, double t) {
  if (t == 0.0) return sigma0;
  const Mat4 m = matrix_exponential(y, t).m_t;
  const Mat4 delta = sigma0.matrix() - sigma_inf.matrix();
  return CovarianceMatrix(m * delta * m.transpose() + sigma_inf.matrix());
}

}  // namespace twomode
