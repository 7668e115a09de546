#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "vbs/matching.hpp"
#include "vbs/model.hpp"
#include "vbs/pauli.hpp"
#include "vbs/rational.hpp"
#include "vbs/spectrum.hpp"
#include "vbs/transfer.hpp"

namespace vbs {

/// One term of the loop/strand expansion of Z.
struct LoopConfig {
  std::vector<Bond> selected_bonds;
  std::vector<int> insertions;  // boundary legs whose (1 + W . s) factor contributes W . s
  int n_bonds = 0;
  int n_loops = 0;
  PartialMatching open_endpoints;  // strands joining boundary legs
};

struct LoopOptions {
  /// Drop configurations with an odd-degree vertex while enumerating. When
  /// false every subset is visited and odd ones are assigned zero weight.
  bool parity_filter = true;
  /// Allow vertices of degree 4 or more in a configuration (sum over the
  /// routings of each such vertex). Off by default: the expansion is then
  /// restricted to graphs where internal vertices have degree <= 3 and
  /// boundary vertices degree <= 2.
  bool higher_moments = false;
  /// Upper bound on visited enumeration nodes.
  std::uint64_t budget = std::uint64_t{1} << 26;
  /// Optional observer called once per contributing configuration (and
  /// routing) with its signed weight.
  std::function<void(const LoopConfig&, const Rational&)> visit;
};

/// Exact Z as signed coefficients of prod sigma_i . sigma_j over partial
/// matchings of the boundary legs.
struct LoopExpansion {
  int boundary_size = 0;
  std::map<PartialMatching, Rational> coeff;
  std::uint64_t configurations = 0;  // configurations with nonzero weight
  std::uint64_t visited = 0;
};

/// Sums (-1)^N_B prod_v m(v) 3^N_L over bond subsets and boundary insertions,
/// m(v) = 1/(2k+1)!! for a vertex of degree 2k (q for loops through it).
/// Throws UsageError("oracle out of scope ...") on degree limits and when the
/// budget runs out.
LoopExpansion loop_enumerate_z(const SymmetricGraph& graph, const LoopOptions& opts = {});

/// Dense Z from a loop expansion.
MatrixX<Rational> loop_z_matrix(const LoopExpansion& expansion);

/// Ladder coefficients of the n-column ladder via the loop expansion, in the
/// sign convention of LadderCoefficients.
LadderCoefficients loop_ladder_coefficients(LadderFamily family, int m, int n,
                                            const LoopOptions& opts = {});

/// Same quantity by direct symbolic integration of every sphere variable;
/// used to cross-check the parity filter on small graphs.
LoopExpansion symbolic_z(const SymmetricGraph& graph);

/// Z(N_y) of the vertical ladder from the strand sum over increasing tuples
/// i1 < ... < i2n, each consecutive pair (i_{2k-1}, i_{2k}) a strand of
/// weight q (-q)^d (square) or q^(2d+1) (hex), d = i_{2k} - i_{2k-1}.
MatrixX<Rational> vertical_strand_expansion(LadderFamily family, int size);

inline constexpr int kMaxExactEdges = 16;
inline constexpr std::uint64_t kMaxExactLocalDim = 1'000'000;

struct ExactRdm {
  EntropySpectrum spectrum_a;
  EntropySpectrum spectrum_b;
  Eigen::MatrixXd rho_a;              // normalized to unit trace
  std::vector<std::vector<int>> basis_a;  // 2m + 2S per A site, row order of rho_a
  std::vector<int> spin2_a;
};

/// Builds prod_edges (a_i^+ b_j^+ - b_i^+ a_j^+)|vac> over all 2^|E|
/// orientations, normalizes in the |S, m> basis and traces out B.
ExactRdm exact_vbs_rdm(const FullGraph& graph);

}  // namespace vbs
