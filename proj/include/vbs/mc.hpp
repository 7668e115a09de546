#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "vbs/model.hpp"
#include "vbs/spectrum.hpp"

namespace vbs {

using UnitVector = Eigen::Vector3d;

enum class MCMethod { WeightedUniform, Metropolis };

struct MetropolisParams {
  double step_angle = 0.6;  // radians, half-opening of the proposal cap
  int burn_in = 2000;       // sweeps per batch
  int thinning = 1;         // sweeps between measurements
};

struct MCConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t batches = 32;
  std::uint64_t seed = 1;
  MCMethod method = MCMethod::WeightedUniform;
  MetropolisParams metropolis;
  /// Optional global rotation applied to every sampled vector.
  std::optional<Eigen::Matrix3d> rotation;
  /// Worker threads; 0 picks hardware concurrency. Results do not depend on it.
  unsigned threads = 0;
};

/// Monte Carlo estimate of Z, up to a positive overall constant.
struct OverlapEstimate {
  int dim = 0;
  int boundary_size = 0;
  Eigen::MatrixXd mean;      // symmetrized real part
  Eigen::MatrixXd stderr_;   // per-entry standard error from batch means
  double max_imag = 0;       // largest |Im| of the mean before truncation
  double acceptance_rate = 1;
  MCConfig config;
  std::vector<Eigen::MatrixXd> batch_means;
};

/// Uniform point on S^2: z uniform in [-1, 1], azimuth uniform in [0, 2 pi).
UnitVector sample_sphere(std::mt19937_64& rng);

/// Independent generator for batch `batch` of a run seeded with `seed`.
std::mt19937_64 batch_stream(std::uint64_t seed, std::uint64_t batch);

/// Largest boundary accepted by estimate_z (dim = 2^14).
inline constexpr int kMaxMonteCarloBoundary = 14;

/// Estimates Z(sigma) = int prod dW/4pi prod_boundary (1 + W_k . sigma_k)
/// prod_bonds (1 - W_i . W_j).
///
/// Each draw is paired with its global antipode (W -> -W for all sites),
/// which leaves the weight unchanged and removes odd terms exactly.
OverlapEstimate estimate_z(const SymmetricGraph& graph, const MCConfig& cfg);

/// Entropy of an estimate with a jackknife error over batches.
struct MCEntropy {
  EntropySpectrum spectrum;
  double entropy_stderr = 0;
  double per_bond_stderr = 0;
};

MCEntropy mc_entropy(const OverlapEstimate& est);

}  // namespace vbs
