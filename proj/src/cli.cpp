#include "vbs/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "vbs/errors.hpp"
#include "vbs/oracle.hpp"

namespace vbs {

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

Json to_json(const RunRecord& r) {
  Json j;
  j["command"] = r.command;
  j["graph"] = r.graph;
  j["engine"] = r.engine;
  j["spectrum"] = to_json(r.spectrum);
  if (r.estimate) j["estimate"] = *r.estimate;
  if (r.fit) j["fit"] = *r.fit;
  j["extra"] = r.extra;
  j["started"] = r.started;
  j["finished"] = r.finished;
  j["version"] = r.version;
  return j;
}

RunRecord run_record_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("command") || !j.contains("spectrum"))
    throw UsageError("not a run record: needs \"command\" and \"spectrum\"");
  RunRecord r;
  r.command = j["command"].get<std::vector<std::string>>();
  r.graph = j.value("graph", Json());
  r.engine = j.value("engine", std::string());
  r.spectrum = spectrum_from_json(j["spectrum"]);
  if (j.contains("estimate")) r.estimate = j["estimate"];
  if (j.contains("fit")) r.fit = j["fit"];
  r.extra = j.value("extra", Json::object());
  r.started = j.value("started", std::string());
  r.finished = j.value("finished", std::string());
  r.version = j.value("version", std::string());
  return r;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed7(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(7) << x;
  return s.str();
}

std::string exact_digits(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return ".";
}

constexpr const char* kEngineSupport =
    "supported engines:\n"
    "  transfer  square N_y = 1..6, hex N_y = 2..12 (even), any N_x >= 1\n"
    "  vertical  N_x = 1; square N_y = 1..12, hex N_y = 2..24 (even)\n"
    "  loop      internal degree <= 3, boundary degree <= 2 (--higher-moments lifts this)\n"
    "  ed        doubled graph with at most 16 edges\n"
    "  mc        any graph with 1..14 boundary sites\n";

struct EntropyArgs {
  std::string family = "square";
  int nx = 1;
  int ny = 2;
  std::string engine = "transfer";
  std::string graph_file;
  std::string recursion = "auto";
  std::uint64_t samples = 1'000'000;
  std::uint64_t batches = 32;
  std::uint64_t seed = 1;
  std::string method = "weighted-uniform";
  double step_angle = 0.6;
  int burn_in = 2000;
  int thinning = 1;
  unsigned threads = 0;
  bool higher_moments = false;
  std::uint64_t budget = std::uint64_t{1} << 26;
  std::string output;
};

bool custom_graph(const EntropyArgs& a) { return !a.graph_file.empty(); }

/// Fully resolved command line; re-running it reproduces the record.
std::vector<std::string> echo(const EntropyArgs& a) {
  std::vector<std::string> cmd{"entropy", "--engine", a.engine};
  if (custom_graph(a)) {
    cmd.insert(cmd.end(), {"--graph", a.graph_file});
  } else {
    cmd.insert(cmd.end(), {"--family", a.family, "--nx", std::to_string(a.nx), "--ny", std::to_string(a.ny)});
  }
  if (a.engine == "transfer") cmd.insert(cmd.end(), {"--recursion", a.recursion});
  if (a.engine == "mc") {
    cmd.insert(cmd.end(), {"--samples", std::to_string(a.samples), "--batches", std::to_string(a.batches),
                           "--seed", std::to_string(a.seed), "--method", a.method});
    if (a.method == "metropolis")
      cmd.insert(cmd.end(), {"--step-angle", exact_digits(a.step_angle), "--burn-in", std::to_string(a.burn_in),
                             "--thinning", std::to_string(a.thinning)});
  }
  if (a.engine == "loop") {
    if (a.higher_moments) cmd.push_back("--higher-moments");
    cmd.insert(cmd.end(), {"--budget", std::to_string(a.budget)});
  }
  return cmd;
}

std::string default_record_name(const EntropyArgs& a) {
  std::string name = "entropy_";
  if (custom_graph(a))
    name += std::filesystem::path(a.graph_file).stem().string();
  else
    name += a.family + "_nx" + std::to_string(a.nx) + "_ny" + std::to_string(a.ny);
  name += "_" + a.engine;
  if (a.engine == "mc") name += "_seed" + std::to_string(a.seed);
  return name + ".json";
}

MCConfig mc_config(const EntropyArgs& a) {
  MCConfig c;
  c.samples = a.samples;
  c.batches = a.batches;
  c.seed = a.seed;
  if (a.method == "weighted-uniform")
    c.method = MCMethod::WeightedUniform;
  else if (a.method == "metropolis")
    c.method = MCMethod::Metropolis;
  else
    throw UsageError("unknown MC method '" + a.method + "' (expected weighted-uniform or metropolis)");
  c.metropolis = {a.step_angle, a.burn_in, a.thinning};
  c.threads = a.threads;
  return c;
}

[[noreturn]] void unsupported(const std::string& what) { throw UsageError(what + "\n" + kEngineSupport); }

/// Ladder legs for the transfer and vertical engines.
int ladder_legs(LadderFamily family, int ny) {
  if (family == LadderFamily::Square) return ny;
  if (ny % 2 != 0) unsupported("hex ladders need even N_y");
  return ny / 2;
}

struct EntropyResult {
  RunRecord record;
  double entropy_stderr = 0;
  double per_bond_stderr = 0;
};

EntropyResult compute_entropy(const EntropyArgs& a, const std::optional<SymmetricGraph>& custom) {
  EntropyResult res;
  RunRecord& r = res.record;
  r.command = echo(a);
  r.engine = a.engine;
  r.started = utc_now();

  SymmetricGraph graph;
  if (custom) {
    graph = *custom;
  } else {
    if (a.family == "custom") throw UsageError("--family custom needs --graph FILE");
    graph = build_half(parse_lattice_family(a.family), a.nx, a.ny);
  }
  require_valid(graph);
  r.graph = to_json(graph);

  const bool ladder_engine = a.engine == "transfer" || a.engine == "vertical";
  if (ladder_engine && custom) unsupported("the " + a.engine + " engine needs --family square|hex, not --graph");

  if (a.engine == "transfer") {
    const LadderFamily family = parse_ladder_family(a.family);
    const int m = ladder_legs(family, a.ny);
    if (m > kMaxLadderLegs) unsupported("transfer engine: " + std::to_string(m) + " legs is too many");
    StepOptions opts;
    if (a.recursion == "auto")
      opts.source = RecursionSource::Auto;
    else if (a.recursion == "closed")
      opts.source = RecursionSource::Closed;
    else if (a.recursion == "generic")
      opts.source = RecursionSource::Generic;
    else
      throw UsageError("unknown recursion '" + a.recursion + "' (expected auto, closed or generic)");
    const auto coeff = ladder_coefficients(family, m, a.nx, opts);
    r.spectrum = entropy_of_matrix(ladder_z_matrix<double>(coeff), m);
    r.extra["coefficients"] = to_json(coeff);
  } else if (a.engine == "vertical") {
    const LadderFamily family = parse_ladder_family(a.family);
    if (a.nx != 1) unsupported("vertical engine needs N_x = 1");
    const int size = ladder_legs(family, a.ny);
    if (size > kMaxVerticalSize) unsupported("vertical engine: size " + std::to_string(size) + " is too large");
    r.spectrum = vertical_ladder_entropy(family, size);
  } else if (a.engine == "loop") {
    LoopOptions opts;
    opts.higher_moments = a.higher_moments;
    opts.budget = a.budget;
    const LoopExpansion ex = loop_enumerate_z(graph, opts);
    const MatrixX<Rational> z = loop_z_matrix(ex);
    const Eigen::MatrixXd zd = z.unaryExpr([](const Rational& x) { return to_double(x); });
    r.spectrum = entropy_of_matrix(zd, graph.boundary_size());
    r.extra["configurations"] = ex.configurations;
    r.extra["visited"] = ex.visited;
  } else if (a.engine == "ed") {
    const ExactRdm rdm = exact_vbs_rdm(double_graph(graph));
    r.spectrum = rdm.spectrum_a;
    r.extra["entropy_b"] = rdm.spectrum_b.entropy;
  } else if (a.engine == "mc") {
    const OverlapEstimate est = estimate_z(graph, mc_config(a));
    const MCEntropy e = mc_entropy(est);
    r.spectrum = e.spectrum;
    r.estimate = to_json(est);
    r.extra["entropy_stderr"] = e.entropy_stderr;
    r.extra["per_bond_stderr"] = e.per_bond_stderr;
    res.entropy_stderr = e.entropy_stderr;
    res.per_bond_stderr = e.per_bond_stderr;
  } else {
    unsupported("unknown engine '" + a.engine + "'");
  }
  r.finished = utc_now();
  return res;
}

std::optional<SymmetricGraph> load_custom(const EntropyArgs& a) {
  if (!custom_graph(a)) return std::nullopt;
  return graph_from_json(read_json_file(a.graph_file));
}

void print_entropy(std::ostream& out, const EntropyResult& res) {
  const auto& s = res.record.spectrum;
  const bool mc = res.record.engine == "mc";
  out << "engine " << res.record.engine << ", |L| = " << s.boundary_size << "\n";
  out << "S     = " << fixed7(s.entropy);
  if (mc) out << " +/- " << fixed7(res.entropy_stderr);
  out << "\nS/|L| = " << fixed7(s.per_bond);
  if (mc) out << " +/- " << fixed7(res.per_bond_stderr);
  out << "\n";
  for (const auto& w : s.warnings) out << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// JSON config files: keys are long flag names without dashes, either at the
// top level (applied to the subcommand being run) or nested under the
// subcommand name.

class JsonConfig : public CLI::Config {
 public:
  JsonConfig(std::string scope, std::vector<std::string> subcommands)
      : scope_(std::move(scope)), subcommands_(std::move(subcommands)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw UsageError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config file: expected a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object() &&
          std::find(subcommands_.begin(), subcommands_.end(), key) != subcommands_.end()) {
        for (const auto& [k, v] : value.items()) add(items, {key}, k, v);
      } else {
        add(items, scope_.empty() ? std::vector<std::string>{} : std::vector<std::string>{scope_}, key, value);
      }
    }
    return items;
  }

 private:
  static std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void add(std::vector<CLI::ConfigItem>& items, std::vector<std::string> parents, const std::string& key,
                  const Json& value) {
    if (value.is_null()) return;
    CLI::ConfigItem item;
    item.parents = std::move(parents);
    item.name = key;
    if (value.is_array())
      for (const auto& v : value) item.inputs.push_back(scalar(v));
    else
      item.inputs.push_back(scalar(value));
    items.push_back(std::move(item));
  }

  std::string scope_;
  std::vector<std::string> subcommands_;
};

struct SweepArgs {
  EntropyArgs base;
  std::string nx_range = "1";
  std::string ny_range = "2";
  std::string out_dir;
};

struct FitArgs {
  std::string dataset;
  std::string output;
  int min_size = 0;
  int curve_samples = 200;
};

struct VerifyArgs {
  std::string level = "quick";
  std::string inject_q;
  unsigned threads = 0;
  std::string output;
};

struct ReplayArgs {
  std::string record;
};

void add_geometry_options(CLI::App* cmd, EntropyArgs& a, bool ranges, SweepArgs* sweep) {
  cmd->add_option("--family", a.family, "Lattice family")
      ->check(CLI::IsMember({"square", "hex", "hexagonal", "custom"}))
      ->capture_default_str();
  if (ranges) {
    cmd->add_option("--nx", sweep->nx_range, "Ladder length N_x: value or first:last[:step]")->capture_default_str();
    cmd->add_option("--ny", sweep->ny_range, "Height N_y: value or first:last[:step]")->capture_default_str();
  } else {
    cmd->add_option("--nx", a.nx, "Ladder length N_x")->capture_default_str();
    cmd->add_option("--ny", a.ny, "Height N_y")->capture_default_str();
    cmd->add_option("--graph", a.graph_file, "Custom graph JSON (engines mc, loop, ed)");
  }
  cmd->add_option("--recursion", a.recursion, "Transfer recursion: auto, closed, generic")->capture_default_str();
  cmd->add_option("--samples", a.samples, "MC samples")->capture_default_str();
  cmd->add_option("--batches", a.batches, "MC batches")->capture_default_str();
  cmd->add_option("--seed", a.seed, "MC seed")->capture_default_str();
  cmd->add_option("--method", a.method, "MC method: weighted-uniform or metropolis")->capture_default_str();
  cmd->add_option("--step-angle", a.step_angle, "Metropolis cap half-angle (radians)")->capture_default_str();
  cmd->add_option("--burn-in", a.burn_in, "Metropolis burn-in sweeps per batch")->capture_default_str();
  cmd->add_option("--thinning", a.thinning, "Metropolis sweeps between measurements")->capture_default_str();
  cmd->add_option("--threads", a.threads, "MC worker threads (0: all cores)")->capture_default_str();
  cmd->add_flag("--higher-moments", a.higher_moments, "Loop engine: allow vertices of degree >= 4");
  cmd->add_option("--budget", a.budget, "Loop engine: enumeration budget")->capture_default_str();
}

struct Cli {
  CLI::App app{"Entanglement entropy of valence-bond-solid ladders"};
  EntropyArgs entropy;
  SweepArgs sweep;
  FitArgs fit;
  VerifyArgs verify;
  ReplayArgs replay;
  CLI::App* cmd_entropy = nullptr;
  CLI::App* cmd_sweep = nullptr;
  CLI::App* cmd_fit = nullptr;
  CLI::App* cmd_verify = nullptr;
  CLI::App* cmd_replay = nullptr;

  explicit Cli(const std::string& scope) {
    app.name("vbs");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "JSON file mirroring the command-line flags (flags win)");
    app.config_formatter(
        std::make_shared<JsonConfig>(scope, std::vector<std::string>{"entropy", "sweep", "fit", "verify", "replay"}));

    cmd_entropy = app.add_subcommand("entropy", "Entanglement entropy of one graph");
    add_geometry_options(cmd_entropy, entropy, false, nullptr);
    cmd_entropy->add_option("--engine", entropy.engine, "mc, transfer, vertical, loop or ed")
        ->check(CLI::IsMember({"mc", "transfer", "vertical", "loop", "ed"}))
        ->capture_default_str();
    cmd_entropy->add_option("-o,--output", entropy.output, "Run record path");

    cmd_sweep = app.add_subcommand("sweep", "Entropies over a range of N_x or N_y");
    sweep.base.engine = "auto";
    add_geometry_options(cmd_sweep, sweep.base, true, &sweep);
    cmd_sweep->add_option("--engine", sweep.base.engine, "auto (exact where possible), mc, transfer, vertical, loop, ed")
        ->check(CLI::IsMember({"auto", "mc", "transfer", "vertical", "loop", "ed"}))
        ->capture_default_str();
    cmd_sweep->add_option("--out-dir", sweep.out_dir, std::string("Output directory (default $") + kOutputDirEnv + " or .)");

    cmd_fit = app.add_subcommand("fit", "Fit S/|L| = C |L|^-Delta + alpha to a dataset");
    cmd_fit->add_option("dataset", fit.dataset, "Dataset JSON written by sweep")->required();
    cmd_fit->add_option("-o,--output", fit.output, "Fit record path (default: next to the dataset)");
    cmd_fit->add_option("--min-size", fit.min_size, "Drop points with |L| below this")->capture_default_str();
    cmd_fit->add_option("--curve-samples", fit.curve_samples, "Points in the fitted-curve file")->capture_default_str();

    cmd_verify = app.add_subcommand("verify", "Cross-engine regression and invariant checks");
    cmd_verify->add_option("level", verify.level, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}))
        ->capture_default_str();
    cmd_verify->add_option("--threads", verify.threads, "MC worker threads")->capture_default_str();
    cmd_verify->add_option("-o,--output", verify.output, "Write the report as JSON");
    cmd_verify->add_option("--inject-q", verify.inject_q, "Sphere moment for the closed recursions")->group("");

    cmd_replay = app.add_subcommand("replay", "Re-run a record's command and compare the spectrum");
    cmd_replay->add_option("record", replay.record, "Run record JSON")->required();
  }
};

std::string find_scope(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string s = argv[i];
    if (s == "entropy" || s == "sweep" || s == "fit" || s == "verify" || s == "replay") return s;
  }
  return {};
}

std::filesystem::path write_record(const std::filesystem::path& path, const RunRecord& r) {
  write_json_file(path, to_json(r));
  return path;
}

int cmd_entropy(const EntropyArgs& a, std::ostream& out) {
  const EntropyResult res = compute_entropy(a, load_custom(a));
  print_entropy(out, res);
  const auto path = a.output.empty() ? output_dir("") / default_record_name(a) : std::filesystem::path(a.output);
  out << "record: " << write_record(path, res.record).string() << "\n";
  return kExitOk;
}

std::vector<int> parse_range(const std::string& text, const char* what) {
  std::vector<int> parts;
  std::stringstream s(text);
  std::string tok;
  while (std::getline(s, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad ") + what + " range '" + text + "'");
    }
  }
  if (parts.empty() || parts.size() > 3) throw UsageError(std::string("bad ") + what + " range '" + text + "'");
  const int first = parts[0];
  const int last = parts.size() > 1 ? parts[1] : first;
  const int step = parts.size() > 2 ? parts[2] : 1;
  if (step < 1) throw UsageError(std::string(what) + " range step must be >= 1");
  std::vector<int> values;
  for (int v = first; v <= last; v += step) values.push_back(v);
  if (values.empty()) throw UsageError(std::string("empty ") + what + " range '" + text + "'");
  return values;
}

std::string auto_engine(const std::string& family, int nx, int ny) {
  const bool square = family == "square";
  if (!square && ny % 2 != 0) return "mc";
  const int legs = square ? ny : ny / 2;
  if (legs <= kMaxLadderLegs) return "transfer";
  if (nx == 1 && legs <= kMaxVerticalSize) return "vertical";
  return "mc";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  return kExitNumerical;
}

int cmd_sweep(const SweepArgs& sw, std::ostream& out, std::ostream& err) {
  const auto nxs = parse_range(sw.nx_range, "N_x");
  const auto nys = parse_range(sw.ny_range, "N_y");
  if (nxs.size() > 1 && nys.size() > 1) throw UsageError("sweep one of N_x or N_y at a time");
  if (sw.base.family == "custom") throw UsageError("sweep needs --family square or hex");

  std::string tag = "sweep_" + sw.base.family + "_nx" + sw.nx_range + "_ny" + sw.ny_range + "_" + sw.base.engine;
  std::replace(tag.begin(), tag.end(), ':', '-');
  const auto dir = output_dir(sw.out_dir) / tag;

  ScalingDataset data;
  data.family = sw.base.family;
  data.nx = nxs.size() == 1 ? nxs[0] : 0;
  Json point_info = Json::array();
  Json failures = Json::array();
  int first_failure = kExitOk;
  std::ostringstream table;
  out << std::setw(4) << "N_x" << std::setw(5) << "N_y" << std::setw(5) << "|L|" << std::setw(12) << "S/|L|"
      << std::setw(12) << "stderr"
      << "  engine\n";
  for (int nx : nxs) {
    for (int ny : nys) {
      EntropyArgs a = sw.base;
      a.nx = nx;
      a.ny = ny;
      if (a.engine == "auto") a.engine = auto_engine(a.family, nx, ny);
      try {
        const EntropyResult res = compute_entropy(a, std::nullopt);
        const auto& s = res.record.spectrum;
        const std::string file = "point_nx" + std::to_string(nx) + "_ny" + std::to_string(ny) + ".json";
        write_record(dir / file, res.record);
        data.points.push_back({s.boundary_size, s.per_bond, res.per_bond_stderr});
        point_info.push_back({{"nx", nx}, {"ny", ny}, {"engine", a.engine}, {"record", file}});
        out << std::setw(4) << nx << std::setw(5) << ny << std::setw(5) << s.boundary_size << std::setw(12)
            << fixed7(s.per_bond) << std::setw(12) << fixed7(res.per_bond_stderr) << "  " << a.engine << "\n";
      } catch (const std::exception& e) {
        err << "point N_x=" << nx << " N_y=" << ny << " failed: " << e.what() << "\n";
        failures.push_back({{"nx", nx}, {"ny", ny}, {"engine", a.engine}, {"error", e.what()}});
        if (first_failure == kExitOk) first_failure = exit_code_for(e);
      }
    }
  }

  Json dataset = to_json(data);
  for (std::size_t i = 0; i < point_info.size(); ++i)
    for (const auto& [k, v] : point_info[i].items()) dataset["points"][i][k] = v;
  dataset["failures"] = failures;
  write_json_file(dir / "dataset.json", dataset);
  std::ostringstream dat;
  dat << "# |L| S/|L| stderr\n" << std::setprecision(12);
  for (const auto& p : data.points) dat << p.boundary_size << ' ' << p.per_bond << ' ' << p.stderr_ << '\n';
  write_text_file(dir / "dataset.dat", dat.str());
  out << "dataset: " << (dir / "dataset.json").string() << "\n";
  if (data.points.empty()) return first_failure;
  if (!failures.empty()) err << failures.size() << " point(s) failed; see dataset.json\n";
  return kExitOk;
}

int cmd_fit(const FitArgs& f, std::ostream& out) {
  ScalingDataset data = dataset_from_json(read_json_file(f.dataset));
  std::erase_if(data.points, [&](const ScalingPoint& p) { return p.boundary_size < f.min_size; });
  const AreaLawFit fit = fit_area_law(data);
  const ExtrapolationReport rep = extrapolation_report(fit);
  out << rep.summary << "\n" << rep.area_law_form << "\n";

  std::filesystem::path path = f.output;
  if (path.empty()) {
    const std::filesystem::path ds(f.dataset);
    path = ds.parent_path() / (ds.stem().string() + "_fit.json");
  }
  Json rec;
  rec["command"] = {"fit", f.dataset, "--min-size", std::to_string(f.min_size)};
  rec["dataset"] = to_json(data);
  rec["fit"] = to_json(fit);
  rec["report"] = to_json(rep);
  rec["finished"] = utc_now();
  rec["version"] = kVersion;
  write_json_file(path, rec);

  int lo = data.points.front().boundary_size, hi = lo;
  for (const auto& p : data.points) {
    lo = std::min(lo, p.boundary_size);
    hi = std::max(hi, p.boundary_size);
  }
  auto curve = path;
  curve.replace_extension(".curve.dat");
  write_text_file(curve, "# |L| fitted S/|L|\n" + fitted_curve(fit, lo, std::max(hi, lo + 1), f.curve_samples));
  out << "fit record: " << path.string() << "\ncurve: " << curve.string() << "\n";
  return kExitOk;
}

int cmd_verify(const VerifyArgs& v, std::ostream& out) {
  VerifyOptions opts;
  opts.full = v.level == "full";
  opts.threads = v.threads;
  if (!v.inject_q.empty()) opts.q = parse_rational(v.inject_q);
  const VerifyReport rep = run_verify(opts, &out);
  const auto failed = std::count_if(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return !c.pass; });
  out << rep.checks.size() - failed << "/" << rep.checks.size() << " checks passed in " << std::fixed
      << std::setprecision(1) << rep.seconds << " s\n";
  for (const auto& c : rep.checks)
    if (!c.pass)
      out << "FAILED " << c.name << " [" << c.engines << "] on " << c.graph << ": expected "
          << std::setprecision(10) << c.expected << ", got " << c.got << " (tolerance " << std::setprecision(2)
          << std::scientific << c.tolerance << std::fixed << ")" << (c.detail.empty() ? "" : " " + c.detail) << "\n";
  if (!v.output.empty()) {
    Json j;
    j["level"] = v.level;
    j["seconds"] = rep.seconds;
    j["ok"] = rep.ok();
    Json checks = Json::array();
    for (const auto& c : rep.checks)
      checks.push_back({{"name", c.name}, {"engines", c.engines}, {"graph", c.graph}, {"expected", c.expected},
                        {"got", c.got}, {"tolerance", c.tolerance}, {"pass", c.pass}, {"detail", c.detail}});
    j["checks"] = checks;
    write_json_file(v.output, j);
  }
  return rep.ok() ? kExitOk : kExitVerification;
}

int cmd_replay(const ReplayArgs& ra, std::ostream& out) {
  const RunRecord rec = run_record_from_json(read_json_file(ra.record));
  if (rec.command.empty() || rec.command[0] != "entropy") throw UsageError("replay handles entropy records only");
  std::vector<const char*> argv{"vbs"};
  for (const auto& s : rec.command) argv.push_back(s.c_str());
  Cli cli("entropy");
  try {
    cli.app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string("record command does not parse: ") + e.what());
  }
  std::optional<SymmetricGraph> graph;
  if (custom_graph(cli.entropy)) graph = graph_from_json(rec.graph);
  const EntropyResult res = compute_entropy(cli.entropy, graph);
  const auto& a = rec.spectrum;
  const auto& b = res.record.spectrum;
  const bool same = a.eigenvalues == b.eigenvalues && a.probabilities == b.probabilities && a.entropy == b.entropy &&
                    a.per_bond == b.per_bond;
  out << "recorded S/|L| = " << fixed7(a.per_bond) << ", replayed S/|L| = " << fixed7(b.per_bond) << "\n";
  out << (same ? "replay: identical" : "replay: MISMATCH") << "\n";
  return same ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------------------
// verify

struct Checker {
  VerifyReport& report;
  std::ostream* progress;

  void add(VerifyCheck c) {
    if (progress)
      *progress << (c.pass ? "ok   " : "FAIL ") << c.name << " [" << c.engines << "] " << c.graph << "\n";
    report.checks.push_back(std::move(c));
  }

  void near(std::string name, std::string engines, std::string graph, double expected, double got, double tol,
            std::string detail = {}) {
    const bool pass = std::isfinite(got) && std::abs(got - expected) <= tol;
    add({std::move(name), std::move(engines), std::move(graph), expected, got, tol, pass, std::move(detail)});
  }

  void exact(std::string name, std::string engines, std::string graph, bool equal, std::string detail = {}) {
    add({std::move(name), std::move(engines), std::move(graph), 1, equal ? 1.0 : 0.0, 0, equal, std::move(detail)});
  }

  template <typename F>
  void guarded(const std::string& name, const std::string& engines, const std::string& graph, F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add({name, engines, graph, 0, std::nan(""), 0, false, std::string("threw: ") + e.what()});
    }
  }
};

std::string ladder_name(LadderFamily f, int m, int n) {
  return to_string(f) + " " + std::to_string(m) + "-leg n=" + std::to_string(n);
}

// Exact per-bond entropies of the horizontal ladders, indexed [legs][N_x - 1].
const std::map<std::pair<LadderFamily, int>, std::vector<double>>& ladder_reference() {
  static const std::map<std::pair<LadderFamily, int>, std::vector<double>> ref{
      {{LadderFamily::Square, 2}, {0.6553433, 0.6498531, 0.6494635, 0.6494368, 0.6494349}},
      {{LadderFamily::Square, 3}, {0.6413153, 0.6325619, 0.6316999, 0.6316095, 0.6315995}},
      {{LadderFamily::Hex, 2}, {0.6891577, 0.6890932, 0.6890927, 0.6890927, 0.6890927}},
      {{LadderFamily::Hex, 3}, {0.6878024, 0.6876554, 0.6876523, 0.6876522, 0.6876522}},
      {{LadderFamily::Hex, 4}, {0.6871245, 0.6869344, 0.6869295, 0.6869293, 0.6869293}},
  };
  return ref;
}

void verify_rational_identities(Checker& ck, const VerifyOptions& o) {
  const Rational q = sphere_q();
  const std::vector<Rational> a{1, 1 + pow(q, 3), 1 + 2 * pow(q, 3) + pow(q, 5)};
  const std::vector<Rational> b{q * q, q * q + pow(q, 4), q * q + pow(q, 4) + pow(q, 5) + pow(q, 6)};
  const PartialMatching empty{};
  const PartialMatching pair({{0, 1}});
  for (int n = 1; n <= 3; ++n) {
    const std::string g = ladder_name(LadderFamily::Square, 2, n);
    ck.guarded("2-leg coefficients", "loop", g, [&] {
      const auto c = loop_ladder_coefficients(LadderFamily::Square, 2, n);
      ck.exact("2-leg coefficients", "loop vs closed polynomial", g,
               c.at(empty) == a[n - 1] && c.at(pair) == b[n - 1],
               "a=" + to_string(c.at(empty)) + " b=" + to_string(c.at(pair)));
    });
    ck.guarded("2-leg coefficients", "transfer", g, [&] {
      StepOptions s{RecursionSource::Closed, o.q};
      const auto c = ladder_coefficients(LadderFamily::Square, 2, n, s);
      ck.exact("2-leg coefficients", "transfer vs closed polynomial", g,
               c.at(empty) == a[n - 1] && c.at(pair) == b[n - 1],
               "a=" + to_string(c.at(empty)) + " b=" + to_string(c.at(pair)));
    });
  }
}

void verify_ladder_tables(Checker& ck, const VerifyOptions& o) {
  for (const auto& [key, values] : ladder_reference()) {
    const auto [family, m] = key;
    for (int n = 1; n <= static_cast<int>(values.size()); ++n) {
      const std::string g = ladder_name(family, m, n);
      ck.guarded("ladder regression", "transfer", g, [&] {
        StepOptions s{m <= 3 ? RecursionSource::Closed : RecursionSource::Generic, o.q};
        const double got = ladder_entropy(family, m, n, s).per_bond;
        ck.near("ladder regression", m <= 3 ? "transfer (closed matrices)" : "transfer (generic)", g, values[n - 1],
                got, 5e-8);
      });
    }
  }
}

void verify_limits(Checker& ck) {
  const std::vector<std::tuple<LadderFamily, int, double, double>> limits{
      {LadderFamily::Square, 2, 0.6494348, 5e-8},
      {LadderFamily::Square, 3, 0.6315983, 5e-8},
      {LadderFamily::Hex, 2, 0.6890927, 5e-7},
      {LadderFamily::Hex, 3, 0.6876522, 5e-8},
  };
  for (const auto& [family, m, value, tol] : limits) {
    const std::string g = to_string(family) + " " + std::to_string(m) + "-leg n=inf";
    ck.guarded("infinite-length limit", "power iteration", g,
               [&] { ck.near("infinite-length limit", "power iteration", g, value, infinite_limit(family, m).spectrum.per_bond, tol); });
  }
}

void verify_closed_forms(Checker& ck, const VerifyOptions& o) {
  for (auto family : {LadderFamily::Square, LadderFamily::Hex}) {
    const std::string g = to_string(family) + " 2-leg n=0..40";
    ck.guarded("closed form", "transfer vs z+-", g, [&] {
      StepOptions s{RecursionSource::Closed, o.q};
      auto state = ladder_initial(family, 2);
      double worst = 0;
      for (int n = 0; n <= 40; ++n) {
        const auto [a, b] = closed_form_2leg(family, n);
        const double ra = to_double(state.coeff[0]);
        const double rb = to_double(state.coeff[1]);
        // b_0 = 0, so the first column is compared absolutely.
        const double sa = n == 0 ? 1.0 : std::abs(a), sb = n == 0 ? 1.0 : std::abs(b);
        worst = std::max({worst, std::abs(ra - a) / sa, std::abs(rb - b) / sb});
        state = ladder_step(state, s);
      }
      ck.near("closed form", "transfer vs z+-", g, 0, worst, 1e-12, "largest relative deviation");
    });
  }
}

void verify_oracles(Checker& ck) {
  ck.guarded("singlet", "ed", "square 1x1", [&] {
    const double s = exact_vbs_rdm(double_graph(build_square_half(1, 1))).spectrum_a.entropy;
    ck.near("singlet", "ed", "square 1x1", std::numbers::ln2, s, 1e-12);
  });
  ck.guarded("doubled ladder", "ed vs transfer", "square 1x2", [&] {
    const double s = exact_vbs_rdm(double_graph(build_square_half(1, 2))).spectrum_a.per_bond;
    ck.near("doubled ladder", "ed vs transfer", "square 1x2", ladder_entropy(LadderFamily::Square, 2, 1).per_bond, s,
            1e-9);
  });
  for (auto family : {LadderFamily::Square, LadderFamily::Hex}) {
    for (int n = 1; n <= 6; ++n) {
      const std::string g = ladder_name(family, 2, n);
      ck.guarded("loop expansion", "loop vs transfer", g, [&] {
        const auto loop = loop_ladder_coefficients(family, 2, n);
        const auto tr = ladder_coefficients(family, 2, n);
        const bool same_coeff = loop.coeff == tr.coeff;
        const double sl = entropy_of_matrix(ladder_z_matrix<double>(loop), 2).per_bond;
        const double st = entropy_of_matrix(ladder_z_matrix<double>(tr), 2).per_bond;
        ck.exact("loop expansion", "loop vs transfer", g, same_coeff && sl == st,
                 same_coeff ? "" : "coefficients differ");
      });
    }
  }
  for (auto family : {LadderFamily::Square, LadderFamily::Hex}) {
    for (int size = 1; size <= 6; ++size) {
      const std::string g = to_string(family) + " vertical size " + std::to_string(size);
      ck.guarded("vertical recursion", "kronecker vs strand sum", g, [&] {
        ck.exact("vertical recursion", "kronecker vs strand sum", g,
                 vertical_ladder_z<Rational>(family, size) == vertical_strand_expansion(family, size));
      });
    }
  }
  ck.guarded("vertical vs horizontal", "vertical vs transfer", "square N_x=1 N_y=3", [&] {
    ck.near("vertical vs horizontal", "vertical vs transfer", "square N_x=1 N_y=3",
            ladder_entropy(LadderFamily::Square, 3, 1).per_bond,
            vertical_ladder_entropy(LadderFamily::Square, 3).per_bond, 1e-12);
  });
  ck.guarded("vertical vs horizontal", "vertical vs transfer", "hex N_x=1 N_y=6", [&] {
    ck.near("vertical vs horizontal", "vertical vs transfer", "hex N_x=1 N_y=6",
            ladder_entropy(LadderFamily::Hex, 3, 1).per_bond, vertical_ladder_entropy(LadderFamily::Hex, 3).per_bond,
            1e-12);
  });
}

void verify_invariants(Checker& ck, const VerifyOptions& o) {
  const Eigen::MatrixXd z = ladder_z_matrix<double>(ladder_coefficients(LadderFamily::Square, 3, 3));
  const double s0 = entropy_of_matrix(z, 3).entropy;
  for (double c : {1e-3, 7.5, 1e4}) {
    ck.near("scale invariance", "spectrum", "square 3-leg n=3, Z x " + exact_digits(c), s0,
            entropy_of_matrix(c * z, 3).entropy, 1e-12);
  }

  std::mt19937_64 rng(7);
  std::vector<double> d(16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& x : d) x = u(rng);
  const double sd = entropy_from_spectrum(d, 4).entropy;
  for (int t = 0; t < 3; ++t) {
    std::shuffle(d.begin(), d.end(), rng);
    ck.near("permutation invariance", "spectrum", "random spectrum, shuffle " + std::to_string(t), sd,
            entropy_from_spectrum(d, 4).entropy, 1e-13);
  }

  Eigen::MatrixXd r = Eigen::MatrixXd::NullaryExpr(64, 64, [&] { return u(rng) - 0.5; });
  r = (r + r.transpose()).eval();
  for (const auto& [name, a] : {std::pair<std::string, Eigen::MatrixXd>{"square 3-leg n=3 Z", z},
                                std::pair<std::string, Eigen::MatrixXd>{"random symmetric 64x64", r}}) {
    const auto eig = eig_symmetric(a);
    const double res =
        (a - eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose()).norm() / a.norm();
    ck.near("reconstruction residual", "jacobi", name, 0, res, 1e-10);
  }

  const SymmetricGraph g = build_square_half(2, 2);
  MCConfig cfg;
  cfg.samples = 200'000;
  cfg.batches = 16;
  cfg.seed = 11;
  cfg.threads = 1;
  ck.guarded("mc determinism", "mc", "square 2x2", [&] {
    const auto a = estimate_z(g, cfg);
    MCConfig cfg2 = cfg;
    cfg2.threads = 3;
    const auto b = estimate_z(g, cfg2);
    MCConfig cfg3 = cfg;
    cfg3.seed = 12;
    const auto c = estimate_z(g, cfg3);
    ck.exact("mc determinism", "mc", "square 2x2, seed 11, 1 vs 3 threads", a.mean == b.mean && a.stderr_ == b.stderr_);
    ck.exact("mc seed sensitivity", "mc", "square 2x2, seed 11 vs 12", a.mean != c.mean);
  });
  ck.guarded("spin-flip commutation", "mc", "square 2x2", [&] {
    MCConfig c = cfg;
    c.threads = o.threads;
    const auto est = estimate_z(g, c);
    const Eigen::MatrixXd f = global_flip<double>(est.boundary_size);
    const Eigen::MatrixXd dz = (f * est.mean * f - est.mean).cwiseAbs();
    const Eigen::MatrixXd se = est.stderr_.cwiseMax(f * est.stderr_ * f);
    double worst = 0;
    for (Eigen::Index i = 0; i < dz.rows(); ++i)
      for (Eigen::Index j = 0; j < dz.cols(); ++j)
        worst = std::max(worst, dz(i, j) / std::max(se(i, j), 1e-15 * est.mean.cwiseAbs().maxCoeff()));
    ck.near("spin-flip commutation", "mc", "square 2x2", 0, worst, 5, "largest |FZF - Z| in units of stderr");
  });
}

void verify_mc_agreement(Checker& ck, const VerifyOptions& o) {
  std::vector<std::pair<LadderFamily, int>> ladders;
  for (int ny = 1; ny <= 3; ++ny) ladders.push_back({LadderFamily::Square, ny});
  for (int ny : {2, 4, 6}) ladders.push_back({LadderFamily::Hex, ny});
  std::vector<bool> outcomes;
  for (const auto& [family, ny] : ladders) {
    for (int nx = 1; nx <= 3; ++nx) {
      const std::string g = to_string(family) + " " + std::to_string(nx) + "x" + std::to_string(ny);
      ck.guarded("mc vs exact", "mc vs transfer", g, [&] {
        const int m = family == LadderFamily::Square ? ny : ny / 2;
        const double exact = ladder_entropy(family, m, nx).per_bond;
        MCConfig cfg;
        cfg.samples = 10'000'000;
        cfg.batches = 40;
        cfg.seed = 1000 + 10 * nx + ny;
        cfg.threads = o.threads;
        const auto est = estimate_z(build_half(family == LadderFamily::Square ? LatticeFamily::Square
                                                                               : LatticeFamily::Hexagonal,
                                               nx, ny),
                                    cfg);
        const MCEntropy e = mc_entropy(est);
        const double tol = 3 * e.per_bond_stderr + 1e-12;
        ck.near("mc vs exact", "mc vs transfer", g, exact, e.spectrum.per_bond, tol,
                "stderr " + exact_digits(e.per_bond_stderr));
      });
      outcomes.push_back(ck.report.checks.back().pass);
    }
  }
  // Statistical contract: 3 sigma agreement on at least 95% of the graphs.
  const auto passed = std::count(outcomes.begin(), outcomes.end(), true);
  const double frac = static_cast<double>(passed) / static_cast<double>(outcomes.size());
  if (frac >= 0.95)
    for (auto it = ck.report.checks.end() - static_cast<std::ptrdiff_t>(outcomes.size()); it != ck.report.checks.end();
         ++it)
      if (!it->pass && it->detail.rfind("threw", 0) != 0) {
        it->pass = true;
        it->detail += " (outside 3 sigma; tolerated by the 95% rule)";
      }
  ck.near("mc agreement rate", "mc vs transfer", "all graphs", 1.0, frac, 0.05);
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& opts, std::ostream* progress) {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyReport report;
  Checker ck{report, progress};
  verify_rational_identities(ck, opts);
  verify_ladder_tables(ck, opts);
  verify_limits(ck);
  verify_closed_forms(ck, opts);
  verify_oracles(ck);
  verify_invariants(ck, opts);
  if (opts.full) verify_mc_agreement(ck, opts);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Cli cli(find_scope(argc, argv));
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    cli.app.exit(e, out, err);
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    if (*cli.cmd_entropy) return cmd_entropy(cli.entropy, out);
    if (*cli.cmd_sweep) return cmd_sweep(cli.sweep, out, err);
    if (*cli.cmd_fit) return cmd_fit(cli.fit, out);
    if (*cli.cmd_verify) return cmd_verify(cli.verify, out);
    if (*cli.cmd_replay) return cmd_replay(cli.replay, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace vbs
