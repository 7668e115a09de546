#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbs/rational.hpp"

namespace vbs {

enum class LatticeFamily { Square, Hexagonal, Custom };

std::string to_string(LatticeFamily f);
LatticeFamily parse_lattice_family(const std::string& s);

using Bond = std::pair<int, int>;

/// Subsystem A of a reflection-symmetric graph.
///
/// Every boundary vertex k carries one valence bond across the cut to its
/// mirror partner; that bond is implicit. Spins are stored doubled (2S) and
/// must equal the full-graph coordination: 2 S_k = deg_A(k) + [k in boundary].
struct SymmetricGraph {
  std::vector<int> vertices;
  std::vector<Bond> bonds;
  std::vector<int> boundary;
  std::vector<int> spin2;  // indexed by vertex id
  LatticeFamily family = LatticeFamily::Custom;
  int nx = 0;
  int ny = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int boundary_size() const { return static_cast<int>(boundary.size()); }
  /// Position of v in the boundary list, or -1.
  int boundary_leg(int v) const;
  std::vector<int> degrees() const;
};

/// Open-boundary square lattice, half A: N_x columns by N_y rows, cut next to
/// column x = 1. Vertex (x, y) has id (x-1)*N_y + (y-1).
SymmetricGraph build_square_half(int nx, int ny);

/// Brick-wall hexagonal lattice, half A: N_x columns of N_y-site vertical
/// chains. Columns x and x+1 are joined at rows with x + y odd; the cut
/// crosses at column 1, odd rows, giving N_y / 2 boundary sites.
SymmetricGraph build_hexagonal_half(int nx, int ny);

/// Builds the half matching `family` (Custom is rejected).
SymmetricGraph build_half(LatticeFamily family, int nx, int ny);

enum class ViolationKind {
  NonContiguousIds,
  BadEndpoint,
  SelfLoop,
  DuplicateBond,
  BoundaryNotSorted,
  BoundaryDuplicate,
  BoundaryOutOfRange,
  IsolatedVertex,
  SpinMismatch,
  SpinTableSize,
};

struct Violation {
  ViolationKind kind;
  int vertex = -1;  // or first endpoint for bond problems
  int other = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks every SymmetricGraph invariant and reports all violations.
ValidationReport validate(const SymmetricGraph& graph);

/// Throws UsageError listing the violations if the graph is invalid.
void require_valid(const SymmetricGraph& graph);

/// Highest-total-spin projector on an edge written as sum_p c_p (S_k . S_l)^p.
struct ProjectorPolynomial {
  int total_spin2 = 0;
  std::vector<Rational> coefficients;  // c_0 .. c_{2 S_min}

  int degree() const { return static_cast<int>(coefficients.size()) - 1; }
  Rational evaluate(const Rational& x) const;
};

ProjectorPolynomial projector(int spin2_k, int spin2_l);

/// Value of S_k . S_l in the sector of total spin J (all arguments doubled).
Rational spin_dot_in_sector(int spin2_k, int spin2_l, int total2);

/// Whole graph (A plus mirror B plus cut bonds) for the brute-force oracle.
struct FullGraph {
  int num_vertices = 0;
  std::vector<Bond> edges;
  std::vector<int> spin2;
  std::vector<bool> in_a;
};

/// Mirrors A into B (vertex k -> k + |A|) and adds one cut bond per boundary site.
FullGraph double_graph(const SymmetricGraph& half);

}  // namespace vbs
