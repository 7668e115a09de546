#include "vbs/io.hpp"

#include <fstream>
#include <sstream>

#include "vbs/errors.hpp"

namespace vbs {

namespace {

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw UsageError(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw UsageError(std::string(what) + ": ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw UsageError(std::string("missing field \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

Json to_json(const SymmetricGraph& g) {
  Json j;
  j["vertices"] = g.vertices;
  Json bonds = Json::array();
  for (auto [a, b] : g.bonds) bonds.push_back({a, b});
  j["bonds"] = bonds;
  j["boundary"] = g.boundary;
  Json spins = Json::object();
  for (std::size_t v = 0; v < g.spin2.size(); ++v) spins[std::to_string(v)] = g.spin2[v];
  j["spin2"] = spins;
  j["family"] = to_string(g.family);
  if (g.family != LatticeFamily::Custom) {
    j["nx"] = g.nx;
    j["ny"] = g.ny;
  }
  return j;
}

SymmetricGraph graph_from_json(const Json& j) {
  if (!j.is_object()) throw UsageError("graph file: expected a JSON object");
  SymmetricGraph g;
  g.vertices = field<std::vector<int>>(j, "vertices");
  for (const auto& b : field<Json>(j, "bonds")) {
    if (!b.is_array() || b.size() != 2) throw UsageError("graph file: every bond must be a pair");
    g.bonds.emplace_back(b[0].get<int>(), b[1].get<int>());
  }
  g.boundary = field<std::vector<int>>(j, "boundary");
  const Json spins = field<Json>(j, "spin2");
  if (!spins.is_object()) throw UsageError("graph file: \"spin2\" must map vertex ids to 2S");
  g.spin2.assign(g.vertices.size(), 0);
  for (const auto& [key, value] : spins.items()) {
    int v = -1;
    try {
      v = std::stoi(key);
    } catch (const std::exception&) {
      throw UsageError("graph file: bad vertex id '" + key + "' in spin2");
    }
    if (v < 0 || v >= static_cast<int>(g.spin2.size()))
      throw UsageError("graph file: spin2 names unknown vertex " + key);
    g.spin2[v] = value.get<int>();
  }
  if (spins.size() != g.vertices.size()) g.spin2.resize(spins.size());
  g.family = j.contains("family") ? parse_lattice_family(j["family"].get<std::string>()) : LatticeFamily::Custom;
  g.nx = j.value("nx", 0);
  g.ny = j.value("ny", 0);
  return g;
}

Json to_json(const MCConfig& c) {
  Json j;
  j["samples"] = c.samples;
  j["batches"] = c.batches;
  j["seed"] = c.seed;
  j["method"] = c.method == MCMethod::WeightedUniform ? "weighted-uniform" : "metropolis";
  if (c.method == MCMethod::Metropolis)
    j["metropolis"] = {{"step_angle", c.metropolis.step_angle},
                       {"burn_in", c.metropolis.burn_in},
                       {"thinning", c.metropolis.thinning}};
  if (c.rotation) j["rotation"] = matrix_to_json(*c.rotation);
  return j;
}

MCConfig mc_config_from_json(const Json& j) {
  MCConfig c;
  c.samples = j.value("samples", c.samples);
  c.batches = j.value("batches", c.batches);
  c.seed = j.value("seed", c.seed);
  const std::string method = j.value("method", std::string("weighted-uniform"));
  if (method == "weighted-uniform")
    c.method = MCMethod::WeightedUniform;
  else if (method == "metropolis")
    c.method = MCMethod::Metropolis;
  else
    throw UsageError("unknown MC method '" + method + "'");
  if (j.contains("metropolis")) {
    const auto& m = j["metropolis"];
    c.metropolis.step_angle = m.value("step_angle", c.metropolis.step_angle);
    c.metropolis.burn_in = m.value("burn_in", c.metropolis.burn_in);
    c.metropolis.thinning = m.value("thinning", c.metropolis.thinning);
  }
  if (j.contains("rotation")) {
    const Eigen::MatrixXd r = matrix_from_json(j["rotation"], "rotation");
    if (r.rows() != 3 || r.cols() != 3) throw UsageError("rotation must be 3x3");
    c.rotation = Eigen::Matrix3d(r);
  }
  return c;
}

Json to_json(const OverlapEstimate& e) {
  Json j;
  j["dim"] = e.dim;
  j["mean"] = matrix_to_json(e.mean);
  j["stderr"] = matrix_to_json(e.stderr_);
  j["max_imag"] = e.max_imag;
  j["config"] = to_json(e.config);
  j["boundary_size"] = e.boundary_size;
  j["acceptance_rate"] = e.acceptance_rate;
  Json batches = Json::array();
  for (const auto& m : e.batch_means) batches.push_back(matrix_to_json(m));
  j["batch_means"] = batches;
  return j;
}

OverlapEstimate estimate_from_json(const Json& j) {
  OverlapEstimate e;
  e.dim = field<int>(j, "dim");
  e.mean = matrix_from_json(field<Json>(j, "mean"), "mean");
  e.stderr_ = matrix_from_json(field<Json>(j, "stderr"), "stderr");
  e.max_imag = field<double>(j, "max_imag");
  if (j.contains("config")) e.config = mc_config_from_json(j["config"]);
  if (e.dim < 1 || (e.dim & (e.dim - 1)) != 0 || e.mean.rows() != e.dim || e.mean.cols() != e.dim ||
      e.stderr_.rows() != e.dim || e.stderr_.cols() != e.dim)
    throw UsageError("estimate: dim must be a power of two matching mean and stderr");
  int legs = 0;
  while ((1 << legs) < e.dim) ++legs;
  e.boundary_size = j.value("boundary_size", legs);
  e.acceptance_rate = j.value("acceptance_rate", 1.0);
  if (j.contains("batch_means"))
    for (const auto& m : j["batch_means"]) e.batch_means.push_back(matrix_from_json(m, "batch_means"));
  return e;
}

Json to_json(const LadderCoefficients& s) {
  Json j;
  j["family"] = to_string(s.family);
  j["m"] = s.m;
  j["n"] = s.n;
  Json coeff = Json::object();
  const auto& basis = partial_matchings(s.m);
  for (std::size_t k = 0; k < basis.size(); ++k) coeff[to_key(basis[k])] = to_string(s.coeff[k]);
  j["coeff"] = coeff;
  return j;
}

LadderCoefficients coefficients_from_json(const Json& j) {
  auto s = ladder_initial(parse_ladder_family(field<std::string>(j, "family")), field<int>(j, "m"));
  s.n = field<int>(j, "n");
  std::fill(s.coeff.begin(), s.coeff.end(), Rational(0));
  const Json coeff = field<Json>(j, "coeff");
  for (const auto& [key, value] : coeff.items())
    s.coeff[matching_index(parse_key(key), s.m)] = parse_rational(value.get<std::string>());
  return s;
}

Json to_json(const EntropySpectrum& s) {
  Json j;
  j["eigenvalues"] = s.eigenvalues;
  j["probabilities"] = s.probabilities;
  j["entropy"] = s.entropy;
  j["per_bond"] = s.per_bond;
  j["boundary_size"] = s.boundary_size;
  if (!s.warnings.empty()) j["warnings"] = s.warnings;
  return j;
}

EntropySpectrum spectrum_from_json(const Json& j) {
  EntropySpectrum s;
  s.eigenvalues = field<std::vector<double>>(j, "eigenvalues");
  s.probabilities = field<std::vector<double>>(j, "probabilities");
  s.entropy = field<double>(j, "entropy");
  s.per_bond = field<double>(j, "per_bond");
  s.boundary_size = field<int>(j, "boundary_size");
  if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  return s;
}

Json to_json(const AreaLawFit& f) {
  Json j;
  j["C"] = f.c;
  j["Delta"] = f.delta;
  j["alpha"] = f.alpha;
  j["C_err"] = f.c_err;
  j["Delta_err"] = f.delta_err;
  j["alpha_err"] = f.alpha_err;
  Json cov = Json::array();
  for (int r = 0; r < 3; ++r) cov.push_back({f.covariance(r, 0), f.covariance(r, 1), f.covariance(r, 2)});
  j["covariance"] = cov;
  j["residual_norm"] = f.residual_norm;
  j["gradient_norm"] = f.gradient_norm;
  j["iterations"] = f.iterations;
  j["damped"] = f.damped;
  j["points"] = f.points;
  return j;
}

Json to_json(const ExtrapolationReport& r) {
  Json j;
  j["alpha"] = r.alpha;
  j["alpha_err"] = r.alpha_err;
  j["gap_to_ln2"] = r.gap_to_ln2;
  j["below_ln2"] = r.below_ln2;
  j["area_law_form"] = r.area_law_form;
  j["summary"] = r.summary;
  return j;
}

Json to_json(const ScalingDataset& d) {
  Json j;
  j["family"] = d.family;
  j["nx"] = d.nx;
  Json pts = Json::array();
  for (const auto& p : d.points)
    pts.push_back({{"boundary_size", p.boundary_size}, {"per_bond", p.per_bond}, {"stderr", p.stderr_}});
  j["points"] = pts;
  return j;
}

ScalingDataset dataset_from_json(const Json& j) {
  ScalingDataset d;
  d.family = j.value("family", std::string());
  d.nx = j.value("nx", 0);
  for (const auto& p : field<Json>(j, "points"))
    d.points.push_back({field<int>(p, "boundary_size"), field<double>(p, "per_bond"), p.value("stderr", 0.0)});
  return d;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("error writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace vbs
