#ifndef OPLEARN_BASIS_HPP
#define OPLEARN_BASIS_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oplearn/image.hpp"

namespace oplearn {

// Mean-zero filter basis: the orthonormal 2-D DCT-II atoms of an odd
// patch_side x patch_side patch with the constant atom removed, each
// renormalized to unit l2 norm. Every kernel spanned by these atoms has
// entries summing to zero.
template <typename Scalar = double>
struct BasisT {
  int patch_side = 0;
  std::vector<ImageT<Scalar>> filters;  // N_B = patch_side^2 - 1 atoms

  int count() const { return static_cast<int>(filters.size()); }
  int patch_area() const { return patch_side * patch_side; }
};
using Basis = BasisT<double>;

template <typename Scalar = double>
BasisT<Scalar> dct_mean_zero_basis(int patch_side) {
  if (patch_side < 3 || patch_side % 2 == 0)
    throw std::invalid_argument(
        "dct_mean_zero_basis: patch_side must be odd and >= 3");

  const int s = patch_side;
  // 1-D orthonormal DCT-II rows: T(k,x) = c_k cos(pi (2x+1) k / (2s)).
  ImageT<Scalar> T(s, s);
  for (int k = 0; k < s; ++k) {
    const Scalar ck = k == 0 ? std::sqrt(Scalar(1) / s) : std::sqrt(Scalar(2) / s);
    for (int x = 0; x < s; ++x)
      T(k, x) = ck * std::cos(Scalar(EIGEN_PI) * (2 * x + 1) * k / (2 * s));
  }

  BasisT<Scalar> basis;
  basis.patch_side = s;
  basis.filters.reserve(static_cast<std::size_t>(s) * s - 1);
  for (int k = 0; k < s; ++k) {
    for (int l = 0; l < s; ++l) {
      if (k == 0 && l == 0) continue;  // drop the constant atom
      ImageT<Scalar> atom = T.row(k).transpose() * T.row(l);
      atom /= atom.norm();
      basis.filters.push_back(std::move(atom));
    }
  }
  return basis;
}

}  // namespace oplearn

#endif  // OPLEARN_BASIS_HPP
