#include "vbs/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "vbs/errors.hpp"
#include "vbs/sphere_algebra.hpp"

namespace vbs {

namespace {

class LoopEnumerator {
 public:
  LoopEnumerator(const SymmetricGraph& g, const LoopOptions& opts) : g_(g), opts_(opts) {
    require_valid(g);
    n_ = g.num_vertices();
    deg_ = g.degrees();
    leg_.assign(n_, -1);
    for (int k = 0; k < g.boundary_size(); ++k) leg_[g.boundary[k]] = k;
    if (!opts.higher_moments) {
      for (int v = 0; v < n_; ++v) {
        const int limit = leg_[v] >= 0 ? 2 : 3;
        if (deg_[v] > limit) {
          std::ostringstream msg;
          msg << "oracle out of scope: " << (leg_[v] >= 0 ? "boundary" : "internal") << " vertex " << v
              << " has degree " << deg_[v] << " (limit " << limit
              << "); a degree-4 sphere moment would be needed";
          throw UsageError(msg.str());
        }
      }
    }
    last_bond_.assign(n_, -1);
    for (int e = 0; e < static_cast<int>(g.bonds.size()); ++e) {
      last_bond_[g.bonds[e].first] = e;
      last_bond_[g.bonds[e].second] = e;
    }
    selected_.assign(g.bonds.size(), false);
    cur_deg_.assign(n_, 0);
    out_.boundary_size = g.boundary_size();
  }

  LoopExpansion run() {
    descend(0);
    return std::move(out_);
  }

 private:
  void tick() {
    if (++out_.visited > opts_.budget)
      throw UsageError("oracle out of scope: enumeration budget of " + std::to_string(opts_.budget) +
                       " nodes exceeded");
  }

  void descend(int e) {
    tick();
    if (e == static_cast<int>(g_.bonds.size())) {
      if (opts_.parity_filter) {
        std::vector<bool> ins(g_.boundary_size(), false);
        for (int k = 0; k < g_.boundary_size(); ++k) ins[k] = cur_deg_[g_.boundary[k]] % 2 == 1;
        evaluate(ins);
      } else {
        const int b = g_.boundary_size();
        for (std::uint32_t mask = 0; mask < (1u << b); ++mask) {
          tick();
          std::vector<bool> ins(b);
          for (int k = 0; k < b; ++k) ins[k] = (mask >> k) & 1u;
          evaluate(ins);
        }
      }
      return;
    }
    const auto [i, j] = g_.bonds[e];
    for (int take = 0; take < 2; ++take) {
      selected_[e] = take == 1;
      cur_deg_[i] += take;
      cur_deg_[j] += take;
      bool ok = true;
      if (opts_.parity_filter) {
        for (int v : {i, j})
          if (last_bond_[v] == e && leg_[v] < 0 && cur_deg_[v] % 2 == 1) ok = false;
      }
      if (ok) descend(e + 1);
      cur_deg_[i] -= take;
      cur_deg_[j] -= take;
    }
    selected_[e] = false;
  }

  // Half-edge ids: 2e and 2e+1 for the two ends of bond e, 2E + k for the
  // insertion at boundary leg k.
  void evaluate(const std::vector<bool>& ins) {
    const int nb = static_cast<int>(g_.bonds.size());
    std::vector<std::vector<int>> at(n_);
    int n_bonds = 0;
    for (int e = 0; e < nb; ++e) {
      if (!selected_[e]) continue;
      ++n_bonds;
      at[g_.bonds[e].first].push_back(2 * e);
      at[g_.bonds[e].second].push_back(2 * e + 1);
    }
    for (int k = 0; k < g_.boundary_size(); ++k)
      if (ins[k]) at[g_.boundary[k]].push_back(2 * nb + k);

    Rational weight = n_bonds % 2 == 0 ? Rational(1) : Rational(-1);
    for (int v = 0; v < n_; ++v) {
      const int d = static_cast<int>(at[v].size());
      if (d % 2 == 1) return;  // odd sphere moment vanishes
      if (d > 2 && !opts_.higher_moments)
        throw UsageError("oracle out of scope: degree-" + std::to_string(d) + " vertex in a configuration");
      if (d > 0) weight /= sphere::double_factorial_odd(d / 2);
    }

    std::vector<int> partner(2 * nb + g_.boundary_size(), -1);
    route(at, 0, partner, weight, ins, n_bonds);
  }

  void route(std::vector<std::vector<int>>& at, int v, std::vector<int>& partner, const Rational& weight,
             const std::vector<bool>& ins, int n_bonds) {
    if (v == n_) {
      trace(partner, weight, ins, n_bonds);
      return;
    }
    auto& half = at[v];
    if (half.empty()) {
      route(at, v + 1, partner, weight, ins, n_bonds);
      return;
    }
    pair_up(half, 0, at, v, partner, weight, ins, n_bonds);
  }

  // Enumerates the perfect matchings of the half-edges at v.
  void pair_up(std::vector<int>& half, std::size_t from, std::vector<std::vector<int>>& at, int v,
               std::vector<int>& partner, const Rational& weight, const std::vector<bool>& ins, int n_bonds) {
    while (from < half.size() && partner[half[from]] >= 0) ++from;
    if (from == half.size()) {
      route(at, v + 1, partner, weight, ins, n_bonds);
      return;
    }
    const int h = half[from];
    for (std::size_t k = from + 1; k < half.size(); ++k) {
      const int other = half[k];
      if (partner[other] >= 0) continue;
      partner[h] = other;
      partner[other] = h;
      pair_up(half, from + 1, at, v, partner, weight, ins, n_bonds);
      partner[h] = partner[other] = -1;
    }
  }

  void trace(const std::vector<int>& partner, Rational weight, const std::vector<bool>& ins, int n_bonds) {
    const int nb = static_cast<int>(g_.bonds.size());
    std::vector<bool> seen(partner.size(), false);
    auto across = [nb](int h) { return h < 2 * nb ? (h ^ 1) : -1; };
    std::vector<std::pair<int, int>> strands;
    for (int k = 0; k < g_.boundary_size(); ++k) {
      const int start = 2 * nb + k;
      if (!ins[k] || seen[start]) continue;
      int h = start;
      seen[h] = true;
      while (true) {
        const int p = partner[h];
        seen[p] = true;
        if (p >= 2 * nb) {
          strands.emplace_back(k, p - 2 * nb);
          break;
        }
        h = across(p);
        seen[h] = true;
      }
    }
    int loops = 0;
    for (int e = 0; e < nb; ++e) {
      if (!selected_[e] || seen[2 * e]) continue;
      ++loops;
      int h = 2 * e;
      while (!seen[h]) {
        seen[h] = true;
        const int o = across(h);
        seen[o] = true;
        h = partner[o];
      }
    }
    for (int l = 0; l < loops; ++l) weight *= 3;
    PartialMatching mu(strands);
    ++out_.configurations;
    if (opts_.visit) {
      LoopConfig cfg;
      for (int e = 0; e < nb; ++e)
        if (selected_[e]) cfg.selected_bonds.push_back(g_.bonds[e]);
      for (int k = 0; k < g_.boundary_size(); ++k)
        if (ins[k]) cfg.insertions.push_back(k);
      cfg.n_bonds = n_bonds;
      cfg.n_loops = loops;
      cfg.open_endpoints = mu;
      opts_.visit(cfg, weight);
    }
    auto [it, inserted] = out_.coeff.emplace(std::move(mu), weight);
    if (!inserted) {
      it->second += weight;
    }
  }

  const SymmetricGraph& g_;
  const LoopOptions& opts_;
  int n_ = 0;
  std::vector<int> deg_, leg_, last_bond_, cur_deg_;
  std::vector<bool> selected_;
  LoopExpansion out_;
};

void drop_zeros(LoopExpansion& e) {
  for (auto it = e.coeff.begin(); it != e.coeff.end();) {
    if (it->second == 0)
      it = e.coeff.erase(it);
    else
      ++it;
  }
}

}  // namespace

LoopExpansion loop_enumerate_z(const SymmetricGraph& graph, const LoopOptions& opts) {
  LoopExpansion e = LoopEnumerator(graph, opts).run();
  drop_zeros(e);
  return e;
}

MatrixX<Rational> loop_z_matrix(const LoopExpansion& expansion) {
  const int m = expansion.boundary_size;
  const Eigen::Index dim = Eigen::Index{1} << m;
  MatrixX<Rational> z = MatrixX<Rational>::Zero(dim, dim);
  for (const auto& [mu, c] : expansion.coeff) z += c * matching_operator<Rational>(mu, m);
  return z;
}

LadderCoefficients loop_ladder_coefficients(LadderFamily family, int m, int n, const LoopOptions& opts) {
  if (n < 0) throw UsageError("ladder length must be >= 0");
  auto s = ladder_initial(family, m);
  s.n = n;
  if (n == 0) return s;
  const auto graph = family == LadderFamily::Square ? build_square_half(n, m) : build_hexagonal_half(n, 2 * m);
  const auto e = loop_enumerate_z(graph, opts);
  std::fill(s.coeff.begin(), s.coeff.end(), Rational(0));
  for (const auto& [mu, c] : e.coeff) {
    const Rational stored = matching_sign(family, mu) > 0 ? c : Rational(-c);
    s.coeff[matching_index(mu, m)] = stored;
  }
  return s;
}

LoopExpansion symbolic_z(const SymmetricGraph& graph) {
  using sphere::Symbol;
  require_valid(graph);
  const int n = graph.num_vertices();
  const int b = graph.boundary_size();
  std::vector<bool> unit(n + b, false);
  for (int v = 0; v < n; ++v) unit[v] = true;
  auto poly = sphere::DotPolynomial::constant(unit, Rational(1));
  for (int v = 0; v < n; ++v) {
    const int leg = graph.boundary_leg(v);
    if (leg >= 0) poly.multiply_linear(static_cast<Symbol>(v), static_cast<Symbol>(n + leg), Rational(1));
    for (auto [i, j] : graph.bonds) {
      if (std::min(i, j) == v)
        poly.multiply_linear(static_cast<Symbol>(i), static_cast<Symbol>(j), Rational(-1));
    }
    poly.integrate(static_cast<Symbol>(v));
  }
  LoopExpansion out;
  out.boundary_size = b;
  for (const auto& [mono, c] : poly.terms()) {
    std::vector<std::pair<int, int>> pairs;
    for (auto [x, y] : mono) pairs.emplace_back(x - n, y - n);
    out.coeff[PartialMatching(std::move(pairs))] += c;
    ++out.configurations;
  }
  drop_zeros(out);
  return out;
}

MatrixX<Rational> vertical_strand_expansion(LadderFamily family, int size) {
  if (size < 1 || size > kMaxVerticalSize) throw UsageError("vertical strand expansion: size out of range");
  const Rational q(1, 3);
  auto strand = [&](int d) {
    return family == LadderFamily::Square ? Rational(q * pow(Rational(-q), d)) : pow(q, 2 * d + 1);
  };
  const Eigen::Index dim = Eigen::Index{1} << size;
  MatrixX<Rational> z = MatrixX<Rational>::Zero(dim, dim);
  // Every even-sized subset of legs, read in increasing order, is one tuple.
  for (std::uint32_t subset = 0; subset < (1u << size); ++subset) {
    std::vector<int> idx;
    for (int i = 0; i < size; ++i)
      if ((subset >> i) & 1u) idx.push_back(i);
    if (idx.size() % 2 == 1) continue;
    Rational w(1);
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t k = 0; k < idx.size(); k += 2) {
      w *= strand(idx[k + 1] - idx[k]);
      pairs.emplace_back(idx[k], idx[k + 1]);
    }
    z += w * matching_operator<Rational>(PartialMatching(std::move(pairs)), size);
  }
  return z;
}

namespace {

BigInt factorial(int k) {
  BigInt r = 1;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

struct SideBasis {
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> configs;  // number of a-bosons per site
  int find_or_add(const std::vector<int>& c) {
    auto [it, inserted] = index.emplace(c, static_cast<int>(configs.size()));
    if (inserted) configs.push_back(c);
    return it->second;
  }
};

// rho = D G D / tr with G = C F C^T exact and D = sqrt of the row normalizations.
Eigen::MatrixXd reduced_density(const std::vector<std::vector<long long>>& c, const std::vector<BigInt>& f_rows,
                                const std::vector<BigInt>& f_cols) {
  const std::size_t nr = c.size();
  const std::size_t nc = f_cols.size();
  Eigen::MatrixXd rho(nr, nr);
  std::vector<double> log_d(nr);
  for (std::size_t a = 0; a < nr; ++a) log_d[a] = 0.5 * std::log(f_rows[a].convert_to<double>());
  for (std::size_t a = 0; a < nr; ++a) {
    for (std::size_t a2 = a; a2 < nr; ++a2) {
      BigInt g = 0;
      for (std::size_t b = 0; b < nc; ++b)
        if (c[a][b] != 0 && c[a2][b] != 0) g += BigInt(c[a][b]) * c[a2][b] * f_cols[b];
      const double v = g.convert_to<double>() * std::exp(log_d[a] + log_d[a2]);
      rho(a, a2) = rho(a2, a) = v;
    }
  }
  return rho / rho.trace();
}

EntropySpectrum density_spectrum(const Eigen::MatrixXd& rho, int boundary_size) {
  const auto eig = eig_symmetric(rho, false);
  // entropy_from_spectrum squares its input, so feed sqrt of the probabilities.
  std::vector<double> d;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) d.push_back(std::sqrt(std::max(eig.values(i), 0.0)));
  return entropy_from_spectrum(d, boundary_size);
}

}  // namespace

ExactRdm exact_vbs_rdm(const FullGraph& graph) {
  const int n = graph.num_vertices;
  const int ne = static_cast<int>(graph.edges.size());
  if (ne > kMaxExactEdges)
    throw UsageError("exact diagonalization budget exceeded: " + std::to_string(ne) + " edges (limit " +
                     std::to_string(kMaxExactEdges) + ")");
  std::vector<int> deg(n, 0);
  for (auto [i, j] : graph.edges) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw UsageError("exact_vbs_rdm: bad edge");
    ++deg[i];
    ++deg[j];
  }
  for (int v = 0; v < n; ++v)
    if (deg[v] != graph.spin2[v]) throw UsageError("exact_vbs_rdm: spin does not match coordination");
  double local_a = 1;
  int cut = 0;
  for (int v = 0; v < n; ++v)
    if (graph.in_a[v]) local_a *= graph.spin2[v] + 1;
  for (auto [i, j] : graph.edges)
    if (graph.in_a[i] != graph.in_a[j]) ++cut;
  if (local_a > static_cast<double>(kMaxExactLocalDim))
    throw UsageError("exact diagonalization budget exceeded: local dimension of A too large");

  std::vector<int> sites_a, sites_b;
  for (int v = 0; v < n; ++v) (graph.in_a[v] ? sites_a : sites_b).push_back(v);

  // Expand prod (a_i^+ b_j^+ - b_i^+ a_j^+): bit e set puts the a-boson on j.
  std::map<std::pair<std::vector<int>, std::vector<int>>, long long> amp;
  std::vector<int> up(n);
  for (std::uint32_t mask = 0; mask < (1u << ne); ++mask) {
    std::fill(up.begin(), up.end(), 0);
    int sign = 1;
    for (int e = 0; e < ne; ++e) {
      const auto [i, j] = graph.edges[e];
      if ((mask >> e) & 1u) {
        ++up[j];
        sign = -sign;
      } else {
        ++up[i];
      }
    }
    std::vector<int> ca, cb;
    for (int v : sites_a) ca.push_back(up[v]);
    for (int v : sites_b) cb.push_back(up[v]);
    amp[{std::move(ca), std::move(cb)}] += sign;
  }

  SideBasis ba, bb;
  for (const auto& [key, c] : amp) {
    if (c == 0) continue;
    ba.find_or_add(key.first);
    bb.find_or_add(key.second);
  }
  std::vector<std::vector<long long>> coef(ba.configs.size(), std::vector<long long>(bb.configs.size(), 0));
  for (const auto& [key, c] : amp) {
    if (c == 0) continue;
    coef[ba.index.at(key.first)][bb.index.at(key.second)] = c;
  }
  auto norms = [&graph](const SideBasis& side, const std::vector<int>& sites) {
    std::vector<BigInt> f;
    for (const auto& cfg : side.configs) {
      BigInt x = 1;
      for (std::size_t k = 0; k < sites.size(); ++k) x *= factorial(cfg[k]) * factorial(graph.spin2[sites[k]] - cfg[k]);
      f.push_back(x);
    }
    return f;
  };
  const auto fa = norms(ba, sites_a);
  const auto fb = norms(bb, sites_b);
  std::vector<std::vector<long long>> coef_t(bb.configs.size(), std::vector<long long>(ba.configs.size(), 0));
  for (std::size_t a = 0; a < coef.size(); ++a)
    for (std::size_t b = 0; b < coef[a].size(); ++b) coef_t[b][a] = coef[a][b];

  ExactRdm out;
  out.rho_a = reduced_density(coef, fa, fb);
  const Eigen::MatrixXd rho_b = reduced_density(coef_t, fb, fa);
  out.spectrum_a = density_spectrum(out.rho_a, cut);
  out.spectrum_b = density_spectrum(rho_b, cut);
  for (int v : sites_a) out.spin2_a.push_back(graph.spin2[v]);
  for (const auto& cfg : ba.configs) {
    std::vector<int> m2;
    for (std::size_t k = 0; k < cfg.size(); ++k) m2.push_back(2 * cfg[k] - out.spin2_a[k]);
    out.basis_a.push_back(std::move(m2));
  }
  return out;
}

}  // namespace vbs
