#ifndef OPLEARN_LOWERSOLVER_HPP
#define OPLEARN_LOWERSOLVER_HPP

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "oplearn/filterbank.hpp"
#include "oplearn/image.hpp"
#include "oplearn/penalty.hpp"

// Exact minimization of the smoothed lower-level energies.
//
// analysis mode, unknown u:
//     E(u) = sum_i sum_p phi((A_i u)_p) + (lambda/2) ||u - f||^2
// synthesis-dual mode, unknown v (u recovered as f - v/lambda):
//     E(v) = sum_i sum_p phi((A_i v)_p) + (1/(2 lambda)) ||v - lambda f||^2
//
// Both are smooth and strongly convex (the fidelity term bounds the Hessian
// below), so Newton's method with conjugate-gradient inner solves and a
// backtracking line search reaches any gradient tolerance.

namespace oplearn {

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
  double residual;  // final CG relative residual or Newton gradient norm
};

struct SolverConfig {
  int newton_max_iter = 50;
  double grad_tol = 0.0;  // <= 0 selects 1e-5 * sqrt(pixel count)
  double cg_tol = 1e-8;   // relative residual
  int cg_max_iter = 500;
  double ls_shrink = 0.5;
  double ls_c1 = 1e-4;  // sufficient-decrease constant

  double effective_grad_tol(Eigen::Index pixels) const {
    return grad_tol > 0.0 ? grad_tol
                          : 1e-5 * std::sqrt(static_cast<double>(pixels));
  }
};

enum class LowerMode { Analysis, SynthesisDual };

template <typename Scalar = double>
struct LowerProblemT {
  LowerMode mode = LowerMode::Analysis;
  FilterBankT<Scalar> bank;
  PenaltyT<Scalar> penalty;
  Scalar lambda = Scalar(1);
  ImageT<Scalar> f;
};
using LowerProblem = LowerProblemT<double>;

// Shared evaluation workspace bound to one problem instance. Not thread-safe;
// use one evaluator per thread.
template <typename Scalar = double>
class LowerEval {
 public:
  explicit LowerEval(const LowerProblemT<Scalar>& p)
      : p_(&p), grid_(p.f.rows(), p.f.cols(), p.bank.patch_side) {
    if (!(p.lambda > Scalar(0)))
      throw std::invalid_argument("lower problem: lambda must be > 0");
    if (p.mode == LowerMode::Analysis) {
      weight_ = p.lambda;
      target_ = p.f;
    } else {
      weight_ = Scalar(1) / p.lambda;
      target_ = p.lambda * p.f;
    }
    padded_.resize(grid_.src.rows(), grid_.src.cols());
  }

  const LowerProblemT<Scalar>& problem() const { return *p_; }
  const ConvGridT<Scalar>& grid() const { return grid_; }
  Scalar fidelity_weight() const { return weight_; }
  const ImageT<Scalar>& fidelity_target() const { return target_; }

  Scalar energy(const ImageT<Scalar>& x) {
    check_dims(x);
    padded_ = grid_.pad_image(x);
    Scalar acc = Scalar(0);
    for (const auto& k : p_->bank.kernels) {
      correlate(grid_, padded_, k, coeff_);
      acc += value_sum(p_->penalty, coeff_);
    }
    return acc + weight_ / 2 * (x - target_).squaredNorm();
  }

  ImageT<Scalar> grad(const ImageT<Scalar>& x) {
    check_dims(x);
    padded_ = grid_.pad_image(x);
    padacc_.setZero(grid_.src.rows(), grid_.src.cols());
    for (const auto& k : p_->bank.kernels) {
      correlate(grid_, padded_, k, coeff_);
      coeff_ = deriv_map(p_->penalty, coeff_);
      scatter(grid_, k, coeff_, padacc_);
    }
    ImageT<Scalar> g;
    grid_.fold(padacc_, g);
    g.noalias() += weight_ * (x - target_);
    return g;
  }

  // Caches phi''(A_i x) for every filter; hess_vec then applies the Hessian
  // at that point.
  void set_hessian_point(const ImageT<Scalar>& x) {
    check_dims(x);
    padded_ = grid_.pad_image(x);
    hess_weights_.resize(p_->bank.kernels.size());
    for (std::size_t i = 0; i < p_->bank.kernels.size(); ++i) {
      correlate(grid_, padded_, p_->bank.kernels[i], coeff_);
      hess_weights_[i] = deriv2_map(p_->penalty, coeff_);
    }
  }

  ImageT<Scalar> hess_vec(const ImageT<Scalar>& d) {
    check_dims(d);
    padded_ = grid_.pad_image(d);
    padacc_.setZero(grid_.src.rows(), grid_.src.cols());
    for (std::size_t i = 0; i < p_->bank.kernels.size(); ++i) {
      const auto& k = p_->bank.kernels[i];
      correlate(grid_, padded_, k, coeff_);
      coeff_.array() *= hess_weights_[i].array();
      scatter(grid_, k, coeff_, padacc_);
    }
    ImageT<Scalar> h;
    grid_.fold(padacc_, h);
    h.noalias() += weight_ * d;
    return h;
  }

 private:
  void check_dims(const ImageT<Scalar>& x) const {
    if (x.rows() != p_->f.rows() || x.cols() != p_->f.cols())
      throw DimensionMismatch("lower problem: image dimensions differ");
  }

  const LowerProblemT<Scalar>* p_;
  ConvGridT<Scalar> grid_;
  Scalar weight_;
  ImageT<Scalar> target_;
  ImageT<Scalar> padded_, coeff_, padacc_;
  std::vector<ImageT<Scalar>> hess_weights_;
};

// One-shot wrappers with the spec's operation signatures.
template <typename Scalar>
Scalar energy(const LowerProblemT<Scalar>& p, const ImageT<Scalar>& x) {
  return LowerEval<Scalar>(p).energy(x);
}

template <typename Scalar>
ImageT<Scalar> grad(const LowerProblemT<Scalar>& p, const ImageT<Scalar>& x) {
  return LowerEval<Scalar>(p).grad(x);
}

template <typename Scalar>
ImageT<Scalar> hess_vec(const LowerProblemT<Scalar>& p, const ImageT<Scalar>& x,
                        const ImageT<Scalar>& d) {
  LowerEval<Scalar> ev(p);
  ev.set_hessian_point(x);
  return ev.hess_vec(d);
}

// Conjugate gradients for a symmetric positive definite operator, started
// from zero. Returns s with ||op(s) - rhs|| <= cg_tol * ||rhs||.
template <typename Scalar, typename Op>
ImageT<Scalar> cg_solve(Op&& op, const ImageT<Scalar>& rhs,
                        const SolverConfig& cfg) {
  ImageT<Scalar> x = ImageT<Scalar>::Zero(rhs.rows(), rhs.cols());
  const Scalar rhs_norm = rhs.norm();
  if (rhs_norm == Scalar(0)) return x;
  const Scalar stop = cfg.cg_tol * rhs_norm;

  ImageT<Scalar> r = rhs;
  ImageT<Scalar> p = r;
  Scalar rr = r.squaredNorm();
  for (int it = 0; it < cfg.cg_max_iter; ++it) {
    const ImageT<Scalar> ap = op(p);
    const Scalar pap = (p.array() * ap.array()).sum();
    if (!(pap > Scalar(0)))
      throw ConvergenceError("cg_solve: operator not positive definite",
                             std::sqrt(rr) / rhs_norm);
    const Scalar alpha = rr / pap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    const Scalar rr_new = r.squaredNorm();
    if (std::sqrt(rr_new) <= stop) return x;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw ConvergenceError("cg_solve: no convergence within iteration cap",
                         std::sqrt(rr) / rhs_norm);
}

template <typename Scalar = double>
struct SolveResult {
  ImageT<Scalar> u;  // minimizer (v* in synthesis-dual mode)
  int newton_iters = 0;
  Scalar grad_norm = Scalar(0);             // final l_inf gradient norm
  std::vector<Scalar> energy_history;       // energy at each iterate, x0 first
  bool degenerate_bank = false;             // all kernels zero
};

// Newton's method: x0 = f (analysis) or 0 (synthesis-dual), direction from
// CG on the Hessian, backtracking Armijo line search, stop when the energy
// gradient's l_inf norm reaches grad_tol.
template <typename Scalar>
SolveResult<Scalar> solve(const LowerProblemT<Scalar>& p,
                          const SolverConfig& cfg) {
  LowerEval<Scalar> ev(p);
  SolveResult<Scalar> res;
  res.degenerate_bank = true;
  for (const auto& k : p.bank.kernels)
    if (!k.isZero(Scalar(0))) {
      res.degenerate_bank = false;
      break;
    }

  ImageT<Scalar> x = p.mode == LowerMode::Analysis
                         ? p.f
                         : ImageT<Scalar>::Zero(p.f.rows(), p.f.cols());
  const double tol = cfg.effective_grad_tol(p.f.size());

  Scalar e = ev.energy(x);
  ImageT<Scalar> g = ev.grad(x);
  res.energy_history.push_back(e);

  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    res.grad_norm = g.template lpNorm<Eigen::Infinity>();
    if (res.grad_norm <= tol) {
      res.u = std::move(x);
      return res;
    }

    ev.set_hessian_point(x);
    const ImageT<Scalar> step = cg_solve(
        [&ev](const ImageT<Scalar>& d) { return ev.hess_vec(d); },
        ImageT<Scalar>(-g), cfg);

    const Scalar slope = (g.array() * step.array()).sum();
    Scalar alpha = Scalar(1);
    ImageT<Scalar> xn = x + step;
    Scalar en = ev.energy(xn);
    while (en > e + cfg.ls_c1 * alpha * slope) {
      alpha *= cfg.ls_shrink;
      if (alpha < Scalar(1e-16))
        throw ConvergenceError(
            "solve: line search failed to decrease the energy",
            static_cast<double>(res.grad_norm));
      xn = x + alpha * step;
      en = ev.energy(xn);
    }
    x = std::move(xn);
    e = en;
    g = ev.grad(x);
    res.energy_history.push_back(e);
    res.newton_iters = it + 1;
  }

  res.grad_norm = g.template lpNorm<Eigen::Infinity>();
  if (res.grad_norm <= tol) {
    res.u = std::move(x);
    return res;
  }
  throw ConvergenceError("solve: Newton iteration cap reached",
                         static_cast<double>(res.grad_norm));
}

template <typename Scalar>
ImageT<Scalar> denoise_analysis(const ImageT<Scalar>& f,
                                const FilterBankT<Scalar>& bank, Scalar lambda,
                                const PenaltyT<Scalar>& penalty,
                                const SolverConfig& cfg) {
  LowerProblemT<Scalar> p{LowerMode::Analysis, bank, penalty, lambda, f};
  return solve(p, cfg).u;
}

template <typename Scalar = double>
struct SynthesisSolveResult {
  ImageT<Scalar> v;      // dual minimizer (the noise estimate)
  ImageT<Scalar> u_raw;  // f - v/lambda, exactly
  SolveResult<Scalar> stats;
};

// Solves the synthesis-dual problem for v* and recovers u = f - v*/lambda.
// dict_bank must come from bank_from_dictionary. A zero dictionary makes the
// dual fidelity pull v* to lambda*f, i.e. u_raw = 0; this degenerate case is
// reported through stats.degenerate_bank.
template <typename Scalar>
SynthesisSolveResult<Scalar> solve_synthesis_dual(
    const ImageT<Scalar>& f, const FilterBankT<Scalar>& dict_bank,
    Scalar lambda, Scalar epsilon, const SolverConfig& cfg) {
  LowerProblemT<Scalar> p{LowerMode::SynthesisDual, dict_bank,
                          PenaltyT<Scalar>::smoothed_interval(epsilon), lambda,
                          f};
  SynthesisSolveResult<Scalar> out;
  out.stats = solve(p, cfg);
  out.v = out.stats.u;
  out.u_raw = f - out.v / lambda;
  return out;
}

// Denoising front end for the synthesis model. Mean-zero atoms cannot carry
// the DC component (the dual fidelity absorbs it into v*), so the observed
// image's mean is passed through, mirroring the analysis model where the
// prior is DC-blind and the fidelity keeps DC(u*) = DC(f).
template <typename Scalar>
ImageT<Scalar> denoise_synthesis(const ImageT<Scalar>& f,
                                 const FilterBankT<Scalar>& dict_bank,
                                 Scalar lambda, Scalar epsilon,
                                 const SolverConfig& cfg) {
  const auto sol = solve_synthesis_dual(f, dict_bank, lambda, epsilon, cfg);
  const Scalar shift = f.mean() - sol.u_raw.mean();
  return sol.u_raw.array() + shift;
}

}  // namespace oplearn

#endif  // OPLEARN_LOWERSOLVER_HPP
