#include "vbs/model.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "vbs/errors.hpp"

namespace vbs {

std::string to_string(LatticeFamily f) {
  switch (f) {
    case LatticeFamily::Square: return "square";
    case LatticeFamily::Hexagonal: return "hex";
    case LatticeFamily::Custom: return "custom";
  }
  return "custom";
}

LatticeFamily parse_lattice_family(const std::string& s) {
  if (s == "square") return LatticeFamily::Square;
  if (s == "hex" || s == "hexagonal") return LatticeFamily::Hexagonal;
  if (s == "custom") return LatticeFamily::Custom;
  throw UsageError("unknown lattice family '" + s + "' (expected square, hex or custom)");
}

int SymmetricGraph::boundary_leg(int v) const {
  auto it = std::find(boundary.begin(), boundary.end(), v);
  return it == boundary.end() ? -1 : static_cast<int>(it - boundary.begin());
}

std::vector<int> SymmetricGraph::degrees() const {
  std::vector<int> deg(vertices.size(), 0);
  for (auto [i, j] : bonds) {
    if (i >= 0 && i < num_vertices()) ++deg[i];
    if (j >= 0 && j < num_vertices()) ++deg[j];
  }
  return deg;
}

namespace {

void assign_spins(SymmetricGraph& g) {
  g.spin2 = g.degrees();
  for (int k : g.boundary) ++g.spin2[k];
}

}  // namespace

SymmetricGraph build_square_half(int nx, int ny) {
  if (nx < 1 || ny < 1) throw UsageError("square lattice needs N_x >= 1 and N_y >= 1");
  SymmetricGraph g;
  g.family = LatticeFamily::Square;
  g.nx = nx;
  g.ny = ny;
  auto id = [ny](int x, int y) { return (x - 1) * ny + (y - 1); };
  for (int v = 0; v < nx * ny; ++v) g.vertices.push_back(v);
  for (int x = 1; x <= nx; ++x) {
    for (int y = 1; y <= ny; ++y) {
      if (y < ny) g.bonds.emplace_back(id(x, y), id(x, y + 1));
      if (x < nx) g.bonds.emplace_back(id(x, y), id(x + 1, y));
    }
  }
  for (int y = 1; y <= ny; ++y) g.boundary.push_back(id(1, y));
  assign_spins(g);
  return g;
}

SymmetricGraph build_hexagonal_half(int nx, int ny) {
  if (nx < 1 || ny < 2) throw UsageError("hexagonal lattice needs N_x >= 1 and N_y >= 2");
  if (ny % 2 != 0) throw UsageError("hexagonal lattice needs even N_y");
  SymmetricGraph g;
  g.family = LatticeFamily::Hexagonal;
  g.nx = nx;
  g.ny = ny;
  auto id = [ny](int x, int y) { return (x - 1) * ny + (y - 1); };
  for (int v = 0; v < nx * ny; ++v) g.vertices.push_back(v);
  for (int x = 1; x <= nx; ++x) {
    for (int y = 1; y <= ny; ++y) {
      if (y < ny) g.bonds.emplace_back(id(x, y), id(x, y + 1));
      if (x < nx && (x + y) % 2 == 1) g.bonds.emplace_back(id(x, y), id(x + 1, y));
    }
  }
  for (int y = 1; y <= ny; y += 2) g.boundary.push_back(id(1, y));
  assign_spins(g);
  return g;
}

SymmetricGraph build_half(LatticeFamily family, int nx, int ny) {
  switch (family) {
    case LatticeFamily::Square: return build_square_half(nx, ny);
    case LatticeFamily::Hexagonal: return build_hexagonal_half(nx, ny);
    case LatticeFamily::Custom: break;
  }
  throw UsageError("custom graphs are read from a file, not built");
}

ValidationReport validate(const SymmetricGraph& g) {
  ValidationReport report;
  auto flag = [&report](ViolationKind kind, int v, int other, std::string msg) {
    report.violations.push_back({kind, v, other, std::move(msg)});
  };
  const int n = g.num_vertices();

  for (int i = 0; i < n; ++i) {
    if (g.vertices[i] != i) {
      flag(ViolationKind::NonContiguousIds, g.vertices[i], i,
           "vertex ids must be 0.." + std::to_string(n - 1) + " in order");
      break;
    }
  }

  std::set<Bond> seen;
  for (auto [i, j] : g.bonds) {
    if (i < 0 || i >= n || j < 0 || j >= n) {
      flag(ViolationKind::BadEndpoint, i, j, "bond endpoint out of range");
      continue;
    }
    if (i == j) {
      flag(ViolationKind::SelfLoop, i, j, "self-loop at vertex " + std::to_string(i));
      continue;
    }
    Bond key{std::min(i, j), std::max(i, j)};
    if (!seen.insert(key).second)
      flag(ViolationKind::DuplicateBond, key.first, key.second,
           "duplicate bond (" + std::to_string(key.first) + "," + std::to_string(key.second) + ")");
  }

  std::vector<bool> on_boundary(n, false);
  for (std::size_t k = 0; k < g.boundary.size(); ++k) {
    const int v = g.boundary[k];
    if (v < 0 || v >= n) {
      flag(ViolationKind::BoundaryOutOfRange, v, -1, "boundary vertex out of range");
      continue;
    }
    if (on_boundary[v]) flag(ViolationKind::BoundaryDuplicate, v, -1, "boundary vertex listed twice");
    on_boundary[v] = true;
    if (k > 0 && g.boundary[k - 1] > v)
      flag(ViolationKind::BoundaryNotSorted, v, g.boundary[k - 1], "boundary ids not sorted");
  }

  const auto deg = g.degrees();
  for (int v = 0; v < n; ++v) {
    if (deg[v] == 0 && !on_boundary[v])
      flag(ViolationKind::IsolatedVertex, v, -1,
           "vertex " + std::to_string(v) + " has no bond and no cut bond");
  }

  if (static_cast<int>(g.spin2.size()) != n) {
    flag(ViolationKind::SpinTableSize, -1, -1,
         "spin table has " + std::to_string(g.spin2.size()) + " entries for " + std::to_string(n) +
             " vertices");
  } else {
    for (int v = 0; v < n; ++v) {
      const int expected = deg[v] + (on_boundary[v] ? 1 : 0);
      if (g.spin2[v] != expected)
        flag(ViolationKind::SpinMismatch, v, expected,
             "vertex " + std::to_string(v) + ": 2S = " + std::to_string(g.spin2[v]) +
                 " but coordination is " + std::to_string(expected));
    }
  }
  return report;
}

void require_valid(const SymmetricGraph& g) {
  const auto report = validate(g);
  if (report.ok()) return;
  std::ostringstream msg;
  msg << "invalid graph:";
  for (const auto& v : report.violations) msg << "\n  " << v.message;
  throw UsageError(msg.str());
}

Rational ProjectorPolynomial::evaluate(const Rational& x) const {
  Rational acc(0);
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Rational spin_dot_in_sector(int spin2_k, int spin2_l, int total2) {
  auto casimir = [](int two_s) { return Rational(two_s * (two_s + 2), 4); };
  return (casimir(total2) - casimir(spin2_k) - casimir(spin2_l)) / 2;
}

ProjectorPolynomial projector(int spin2_k, int spin2_l) {
  if (spin2_k < 1 || spin2_l < 1) throw UsageError("projector needs spins >= 1/2");
  ProjectorPolynomial p;
  p.total_spin2 = spin2_k + spin2_l;
  const Rational top = spin_dot_in_sector(spin2_k, spin2_l, p.total_spin2);
  std::vector<Rational> poly{Rational(1)};  // ascending powers
  for (int j2 = std::abs(spin2_k - spin2_l); j2 < p.total_spin2; j2 += 2) {
    const Rational root = spin_dot_in_sector(spin2_k, spin2_l, j2);
    const Rational scale = 1 / (top - root);
    std::vector<Rational> next(poly.size() + 1, Rational(0));
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i] * scale;
      next[i] -= poly[i] * root * scale;
    }
    poly = std::move(next);
  }
  p.coefficients = std::move(poly);
  return p;
}

FullGraph double_graph(const SymmetricGraph& half) {
  require_valid(half);
  const int n = half.num_vertices();
  FullGraph full;
  full.num_vertices = 2 * n;
  full.spin2.resize(2 * n);
  full.in_a.assign(2 * n, false);
  for (int v = 0; v < n; ++v) {
    full.spin2[v] = full.spin2[v + n] = half.spin2[v];
    full.in_a[v] = true;
  }
  for (auto [i, j] : half.bonds) full.edges.emplace_back(i, j);
  for (auto [i, j] : half.bonds) full.edges.emplace_back(i + n, j + n);
  for (int k : half.boundary) full.edges.emplace_back(k, k + n);
  return full;
}

}  // namespace vbs
