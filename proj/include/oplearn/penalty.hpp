#ifndef OPLEARN_PENALTY_HPP
#define OPLEARN_PENALTY_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "oplearn/image.hpp"

// Smoothed sparsity penalties, applied elementwise to filter responses.
//
//   smoothed-abs       phi(z) = sqrt(z^2 + eps^2)          (~ |z|)
//   smoothed-interval  phi(z) = max(|z|-1, 0)^2 / (2 eps)  (~ indicator of [-1,1])
//
// Both are convex with phi'' >= 0. The interval penalty's second derivative
// jumps at |z| = 1; we use its almost-everywhere value.

namespace oplearn {

enum class PenaltyKind { SmoothedAbs, SmoothedInterval };

template <typename Scalar = double>
struct PenaltyT {
  PenaltyKind kind = PenaltyKind::SmoothedAbs;
  Scalar epsilon = Scalar(0.01);

  static PenaltyT smoothed_abs(Scalar eps = Scalar(0.01)) {
    check(eps);
    return {PenaltyKind::SmoothedAbs, eps};
  }
  static PenaltyT smoothed_interval(Scalar eps = Scalar(0.001)) {
    check(eps);
    return {PenaltyKind::SmoothedInterval, eps};
  }

  static void check(Scalar eps) {
    if (!(eps > Scalar(0)))
      throw std::invalid_argument("penalty: epsilon must be > 0");
  }
};
using Penalty = PenaltyT<double>;

template <typename Scalar>
Scalar value(const PenaltyT<Scalar>& p, Scalar z) {
  if (p.kind == PenaltyKind::SmoothedAbs)
    return std::sqrt(z * z + p.epsilon * p.epsilon);
  const Scalar t = std::abs(z) - Scalar(1);
  return t > Scalar(0) ? t * t / (2 * p.epsilon) : Scalar(0);
}

template <typename Scalar>
Scalar deriv(const PenaltyT<Scalar>& p, Scalar z) {
  if (p.kind == PenaltyKind::SmoothedAbs)
    return z / std::sqrt(z * z + p.epsilon * p.epsilon);
  const Scalar t = std::abs(z) - Scalar(1);
  if (t <= Scalar(0)) return Scalar(0);
  return (z > Scalar(0) ? t : -t) / p.epsilon;
}

template <typename Scalar>
Scalar deriv2(const PenaltyT<Scalar>& p, Scalar z) {
  if (p.kind == PenaltyKind::SmoothedAbs) {
    const Scalar d2 = z * z + p.epsilon * p.epsilon;
    return p.epsilon * p.epsilon / (d2 * std::sqrt(d2));
  }
  return std::abs(z) > Scalar(1) ? Scalar(1) / p.epsilon : Scalar(0);
}

// Elementwise application over coefficient images.
template <typename Scalar>
Scalar value_sum(const PenaltyT<Scalar>& p, const ImageT<Scalar>& z) {
  Scalar acc = Scalar(0);
  const Scalar* q = z.data();
  for (Eigen::Index i = 0; i < z.size(); ++i) acc += value(p, q[i]);
  return acc;
}

template <typename Scalar>
ImageT<Scalar> deriv_map(const PenaltyT<Scalar>& p, const ImageT<Scalar>& z) {
  return z.unaryExpr([&p](Scalar v) { return deriv(p, v); });
}

template <typename Scalar>
ImageT<Scalar> deriv2_map(const PenaltyT<Scalar>& p, const ImageT<Scalar>& z) {
  return z.unaryExpr([&p](Scalar v) { return deriv2(p, v); });
}

inline const char* to_string(PenaltyKind k) {
  return k == PenaltyKind::SmoothedAbs ? "smoothed-abs" : "smoothed-interval";
}

inline PenaltyKind penalty_kind_from_string(const std::string& s) {
  if (s == "smoothed-abs") return PenaltyKind::SmoothedAbs;
  if (s == "smoothed-interval") return PenaltyKind::SmoothedInterval;
  throw std::invalid_argument("unknown penalty kind '" + s + "'");
}

}  // namespace oplearn

#endif  // OPLEARN_PENALTY_HPP
