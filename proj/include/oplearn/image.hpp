#ifndef OPLEARN_IMAGE_HPP
#define OPLEARN_IMAGE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "oplearn/rng.hpp"

// Grayscale images as dense Eigen matrices: rows = height, cols = width,
// row-major storage, real intensities nominally in [0,255]. Values stay
// real-valued everywhere; only file IO quantizes.

namespace oplearn {

template <typename Scalar>
using ImageT =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Image = ImageT<double>;

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// psnr(a,a) has no finite value; comparing an image against itself is a
// degenerate benchmark and is reported as an error rather than a number.
struct InfinitePsnr : std::domain_error {
  using std::domain_error::domain_error;
};

template <typename Scalar = double>
struct TrainingSampleT {
  ImageT<Scalar> clean;  // ground truth g
  ImageT<Scalar> noisy;  // observation f
  int id = 0;
};
using TrainingSample = TrainingSampleT<double>;

// Peak signal-to-noise ratio, 20*log10(255 / rmse), for [0,255]-range images.
template <typename DerivedA, typename DerivedB>
double psnr(const Eigen::MatrixBase<DerivedA>& a,
            const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("psnr: image dimensions differ");
  const double mse = (a.derived() - b.derived()).squaredNorm() /
                     static_cast<double>(a.size());
  if (mse == 0.0) throw InfinitePsnr("psnr: images are identical");
  return 20.0 * std::log10(255.0 / std::sqrt(mse));
}

// f = image + sigma * z, z iid standard normal from the frozen generator.
// The result is deliberately not clamped to [0,255]: the solvers assume
// unclipped additive Gaussian noise.
template <typename Scalar>
ImageT<Scalar> add_gaussian_noise(const ImageT<Scalar>& image, Scalar sigma,
                                  std::uint64_t seed) {
  if (!(sigma > Scalar(0)))
    throw std::invalid_argument("add_gaussian_noise: sigma must be > 0");
  Xoshiro256ss rng(seed);
  ImageT<Scalar> out(image.rows(), image.cols());
  Scalar* p = out.data();
  const Scalar* q = image.data();
  for (Eigen::Index i = 0; i < image.size(); ++i)
    p[i] = q[i] + sigma * static_cast<Scalar>(rng.normal());
  return out;
}

// Random crop positions and per-sample noise are sub-streams of `seed`:
// sample k uses derive_seed(seed, 2k) for its crop position (row offset
// drawn first, then column) and derive_seed(seed, 2k+1) for its noise.
template <typename Scalar>
std::vector<TrainingSampleT<Scalar>> make_dataset(
    const std::vector<ImageT<Scalar>>& images, int crop, int count_per_image,
    Scalar sigma, std::uint64_t seed) {
  if (crop < 1) throw std::invalid_argument("make_dataset: crop must be >= 1");
  if (count_per_image < 1)
    throw std::invalid_argument("make_dataset: count_per_image must be >= 1");
  std::vector<TrainingSampleT<Scalar>> samples;
  samples.reserve(images.size() * static_cast<std::size_t>(count_per_image));
  int k = 0;
  for (const auto& img : images) {
    if (img.rows() < crop || img.cols() < crop)
      throw std::invalid_argument("make_dataset: image smaller than crop");
    for (int c = 0; c < count_per_image; ++c, ++k) {
      Xoshiro256ss pos(derive_seed(seed, 2 * static_cast<std::uint64_t>(k)));
      const auto r0 = static_cast<Eigen::Index>(
          pos.below(static_cast<std::uint64_t>(img.rows() - crop + 1)));
      const auto c0 = static_cast<Eigen::Index>(
          pos.below(static_cast<std::uint64_t>(img.cols() - crop + 1)));
      TrainingSampleT<Scalar> s;
      s.clean = img.block(r0, c0, crop, crop);
      s.noisy = add_gaussian_noise<Scalar>(
          s.clean, sigma, derive_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1));
      s.id = k;
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

}  // namespace oplearn

#endif  // OPLEARN_IMAGE_HPP
