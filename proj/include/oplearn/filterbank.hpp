#ifndef OPLEARN_FILTERBANK_HPP
#define OPLEARN_FILTERBANK_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

#include "oplearn/basis.hpp"
#include "oplearn/image.hpp"

// Convolutional filter banks and their application to whole images.
//
// A bank holds n local kernels of size patch_side^2. Applying filter i to an
// image means sliding-window correlation (no kernel flip: learned kernels
// make the flip convention unobservable, and correlation keeps the adjoint
// simple) with symmetric boundary reflection that does not repeat the edge
// pixel, so the output has one coefficient per pixel. apply_adjoint is the
// exact transpose of apply as a linear map, including the boundary fold-back.

namespace oplearn {

template <typename Scalar>
using ThetaT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Theta = ThetaT<double>;

// Padded-index bookkeeping for one image geometry. src(r,c) is the flat
// row-major index of the interior pixel that padded position (r,c) mirrors.
template <typename Scalar = double>
struct ConvGridT {
  Eigen::Index rows = 0, cols = 0;
  int pad = 0;
  Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      src;

  ConvGridT() = default;
  ConvGridT(Eigen::Index image_rows, Eigen::Index image_cols, int patch_side)
      : rows(image_rows), cols(image_cols), pad((patch_side - 1) / 2) {
    if (image_rows < patch_side || image_cols < patch_side)
      throw std::invalid_argument("ConvGrid: image smaller than patch");
    src.resize(rows + 2 * pad, cols + 2 * pad);
    for (Eigen::Index r = -pad; r < rows + pad; ++r) {
      const Eigen::Index rr = reflect(r, rows);
      for (Eigen::Index c = -pad; c < cols + pad; ++c)
        src(r + pad, c + pad) = rr * cols + reflect(c, cols);
    }
  }

  // Mirror across the edge pixel without repeating it: -1 -> 1, n -> n-2.
  static Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
  }

  ImageT<Scalar> pad_image(const ImageT<Scalar>& u) const {
    ImageT<Scalar> out(src.rows(), src.cols());
    const Scalar* q = u.data();
    Scalar* p = out.data();
    const Eigen::Index* m = src.data();
    for (Eigen::Index i = 0; i < src.size(); ++i) p[i] = q[m[i]];
    return out;
  }

  // Transpose of pad_image: accumulates padded values back onto the pixels
  // they mirror.
  void fold(const ImageT<Scalar>& padded, ImageT<Scalar>& out) const {
    out.setZero(rows, cols);
    Scalar* p = out.data();
    const Scalar* q = padded.data();
    const Eigen::Index* m = src.data();
    for (Eigen::Index i = 0; i < padded.size(); ++i) p[m[i]] += q[i];
  }
};
using ConvGrid = ConvGridT<double>;

// out = correlation of the padded image with `kernel`, valid positioning.
template <typename Scalar>
void correlate(const ConvGridT<Scalar>& grid, const ImageT<Scalar>& padded,
               const ImageT<Scalar>& kernel, ImageT<Scalar>& out) {
  const int s = static_cast<int>(kernel.rows());
  out.setZero(grid.rows, grid.cols);
  for (int dy = 0; dy < s; ++dy)
    for (int dx = 0; dx < s; ++dx)
      out.noalias() +=
          kernel(dy, dx) * padded.block(dy, dx, grid.rows, grid.cols);
}

// Transpose of correlate: scatters coefficients into a padded accumulator
// (call grid.fold afterwards to finish the adjoint).
template <typename Scalar>
void scatter(const ConvGridT<Scalar>& grid, const ImageT<Scalar>& kernel,
             const ImageT<Scalar>& coeff, ImageT<Scalar>& padded_acc) {
  const int s = static_cast<int>(kernel.rows());
  for (int dy = 0; dy < s; ++dy)
    for (int dx = 0; dx < s; ++dx)
      padded_acc.block(dy, dx, grid.rows, grid.cols).noalias() +=
          kernel(dy, dx) * coeff;
}

template <typename Scalar = double>
struct FilterBankT {
  int patch_side = 0;
  std::vector<ImageT<Scalar>> kernels;
  // Present when the bank was assembled from (basis, theta); raw banks
  // (built-in TV, test kernels) carry kernels only.
  std::optional<BasisT<Scalar>> basis;
  std::optional<ThetaT<Scalar>> theta;

  int size() const { return static_cast<int>(kernels.size()); }
};
using FilterBank = FilterBankT<double>;

// kernels[i] = sum_j theta(i,j) * basis.filters[j]
template <typename Scalar>
FilterBankT<Scalar> assemble(const BasisT<Scalar>& basis,
                             const ThetaT<Scalar>& theta) {
  if (theta.cols() != basis.count())
    throw std::invalid_argument("assemble: theta columns != basis size");
  FilterBankT<Scalar> bank;
  bank.patch_side = basis.patch_side;
  bank.kernels.resize(static_cast<std::size_t>(theta.rows()));
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    ImageT<Scalar> k = ImageT<Scalar>::Zero(basis.patch_side, basis.patch_side);
    for (int j = 0; j < basis.count(); ++j)
      k.noalias() += theta(i, j) * basis.filters[static_cast<std::size_t>(j)];
    bank.kernels[static_cast<std::size_t>(i)] = std::move(k);
  }
  bank.basis = basis;
  bank.theta = theta;
  return bank;
}

template <typename Scalar>
FilterBankT<Scalar> bank_from_raw_kernels(std::vector<ImageT<Scalar>> kernels) {
  if (kernels.empty())
    throw std::invalid_argument("bank_from_raw_kernels: no kernels");
  FilterBankT<Scalar> bank;
  bank.patch_side = static_cast<int>(kernels.front().rows());
  for (const auto& k : kernels)
    if (k.rows() != bank.patch_side || k.cols() != bank.patch_side)
      throw std::invalid_argument("bank_from_raw_kernels: kernel size mismatch");
  bank.kernels = std::move(kernels);
  return bank;
}

// A synthesis dictionary D (atoms as columns, length m) acts on the dual
// variable as the analysis operator (1/m) D^T: the bank's kernel i is atom i
// divided by the patch area. Atoms are expected to live on the mean-zero
// basis, which this transform preserves.
template <typename Scalar>
FilterBankT<Scalar> bank_from_dictionary(const FilterBankT<Scalar>& atoms) {
  FilterBankT<Scalar> bank = atoms;
  const Scalar inv_m = Scalar(1) / (atoms.patch_side * atoms.patch_side);
  for (auto& k : bank.kernels) k *= inv_m;
  if (bank.theta) *bank.theta *= inv_m;
  return bank;
}

template <typename Scalar>
FilterBankT<Scalar> scale_bank(const FilterBankT<Scalar>& bank, Scalar s) {
  FilterBankT<Scalar> out = bank;
  for (auto& k : out.kernels) k *= s;
  if (out.theta) *out.theta *= s;
  return out;
}

template <typename Scalar>
ImageT<Scalar> apply(const FilterBankT<Scalar>& bank, int i,
                     const ImageT<Scalar>& u) {
  const ConvGridT<Scalar> grid(u.rows(), u.cols(), bank.patch_side);
  const ImageT<Scalar> padded = grid.pad_image(u);
  ImageT<Scalar> out;
  correlate(grid, padded, bank.kernels.at(static_cast<std::size_t>(i)), out);
  return out;
}

template <typename Scalar>
ImageT<Scalar> apply_adjoint(const FilterBankT<Scalar>& bank, int i,
                             const ImageT<Scalar>& c) {
  const ConvGridT<Scalar> grid(c.rows(), c.cols(), bank.patch_side);
  ImageT<Scalar> padded_acc = ImageT<Scalar>::Zero(grid.src.rows(), grid.src.cols());
  scatter(grid, bank.kernels.at(static_cast<std::size_t>(i)), c, padded_acc);
  ImageT<Scalar> out;
  grid.fold(padded_acc, out);
  return out;
}

// Dense matrix of the linear map apply(bank, i, .) on width x height images,
// assembled directly from the kernel and the reflection rule. Intended for
// test oracles; guarded to small sizes.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> as_dense(
    const FilterBankT<Scalar>& bank, int i, Eigen::Index width,
    Eigen::Index height) {
  const Eigen::Index np = width * height;
  if (np > 4096)
    throw std::invalid_argument("as_dense: width*height exceeds 4096");
  const auto& kernel = bank.kernels.at(static_cast<std::size_t>(i));
  const int pad = (bank.patch_side - 1) / 2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> M =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(np, np);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c)
      for (int dy = -pad; dy <= pad; ++dy)
        for (int dx = -pad; dx <= pad; ++dx) {
          const Eigen::Index rr = ConvGridT<Scalar>::reflect(r + dy, height);
          const Eigen::Index cc = ConvGridT<Scalar>::reflect(c + dx, width);
          M(r * width + c, rr * width + cc) += kernel(dy + pad, dx + pad);
        }
  return M;
}

}  // namespace oplearn

#endif  // OPLEARN_FILTERBANK_HPP
