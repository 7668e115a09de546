#include "vbs/spectrum.hpp"

#include <bit>
#include <functional>

namespace vbs {

EntropySpectrum entropy_from_spectrum(std::span<const double> d, int boundary_size) {
  EntropySpectrum out;
  out.boundary_size = boundary_size;
  out.eigenvalues.assign(d.begin(), d.end());
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());

  // Scale by the largest magnitude first so huge or tiny spectra do not overflow.
  double scale = 0;
  for (double x : out.eigenvalues) scale = std::max(scale, std::abs(x));
  if (scale == 0 || !std::isfinite(scale)) throw UsageError("entropy: spectrum is all zero or not finite");
  double total = 0;
  for (double x : out.eigenvalues) total += (x / scale) * (x / scale);

  out.probabilities.reserve(out.eigenvalues.size());
  double s = 0;
  for (double x : out.eigenvalues) {
    const double p = (x / scale) * (x / scale) / total;
    out.probabilities.push_back(p);
    if (p > 0) s -= p * std::log(p);
  }
  out.entropy = s;
  out.per_bond = boundary_size > 0 ? s / boundary_size : 0.0;
  return out;
}

EntropySpectrum entropy_of_matrix(const Eigen::MatrixXd& z, int boundary_size) {
  const auto eig = eig_symmetric(z, false);
  std::vector<double> d(eig.values.data(), eig.values.data() + eig.values.size());
  return entropy_from_spectrum(d, boundary_size);
}

EntropySpectrum entropy_by_sz_sectors(const Eigen::MatrixXd& z, int legs, bool flip_symmetric) {
  const Eigen::Index dim = Eigen::Index{1} << legs;
  if (z.rows() != dim || z.cols() != dim) throw UsageError("entropy_by_sz_sectors: size mismatch");
  std::vector<std::vector<Eigen::Index>> sectors(legs + 1);
  for (Eigen::Index s = 0; s < dim; ++s) sectors[std::popcount(static_cast<std::uint64_t>(s))].push_back(s);

  std::vector<double> d;
  d.reserve(dim);
  for (int k = 0; k <= legs; ++k) {
    if (flip_symmetric && 2 * k > legs) break;
    const auto& idx = sectors[k];
    const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd block(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) block(i, j) = z(idx[i], idx[j]);
    const auto eig = eig_symmetric(block, false);
    const int copies = (flip_symmetric && 2 * k < legs) ? 2 : 1;
    for (int c = 0; c < copies; ++c)
      for (Eigen::Index i = 0; i < n; ++i) d.push_back(eig.values(i));
  }
  return entropy_from_spectrum(d, legs);
}

}  // namespace vbs
