#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "vbs/cli.hpp"
#include "vbs/errors.hpp"
#include "vbs/io.hpp"

using namespace vbs;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run vbs_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vbs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("vbs_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_in(const std::string& name) { return (scratch_dir() / name).string(); }

}  // namespace

TEST_CASE("graph JSON round trip") {
  for (const auto& g : {build_square_half(3, 2), build_hexagonal_half(2, 4)}) {
    const auto back = graph_from_json(to_json(g));
    CHECK(back.vertices == g.vertices);
    CHECK(back.bonds == g.bonds);
    CHECK(back.boundary == g.boundary);
    CHECK(back.spin2 == g.spin2);
    CHECK(back.family == g.family);
    CHECK(back.nx == g.nx);
  }
  CHECK_THROWS_AS(graph_from_json(Json::array()), UsageError);
  Json bad = to_json(build_square_half(1, 2));
  bad["spin2"]["7"] = 1;
  CHECK_THROWS_AS(graph_from_json(bad), UsageError);
}

TEST_CASE("estimate JSON round trip is bit exact") {
  MCConfig cfg;
  cfg.samples = 40'000;
  cfg.batches = 8;
  cfg.seed = 17;
  const auto est = estimate_z(build_square_half(2, 2), cfg);
  const auto text = to_json(est).dump();
  const auto back = estimate_from_json(Json::parse(text));
  CHECK(back.mean == est.mean);
  CHECK(back.stderr_ == est.stderr_);
  CHECK(back.config.seed == 17);
  CHECK(back.batch_means.size() == est.batch_means.size());
  Json bad = to_json(est);
  bad["dim"] = 3;
  CHECK_THROWS_AS(estimate_from_json(bad), UsageError);
}

TEST_CASE("coefficients, spectra and datasets round trip") {
  const auto c = ladder_coefficients(LadderFamily::Hex, 3, 4);
  const auto cj = to_json(c);
  CHECK(cj["coeff"]["()"].get<std::string>() == to_string(c.coeff[0]));
  CHECK(coefficients_from_json(cj).coeff == c.coeff);

  const auto s = ladder_entropy(LadderFamily::Square, 3, 2);
  const auto sb = spectrum_from_json(Json::parse(to_json(s).dump()));
  CHECK(sb.eigenvalues == s.eigenvalues);
  CHECK(sb.entropy == s.entropy);

  ScalingDataset d;
  d.family = "square";
  d.nx = 1;
  d.points = {{1, 0.69, 0}, {2, 0.65, 1e-4}};
  const auto db = dataset_from_json(to_json(d));
  CHECK(db.points.size() == 2);
  CHECK(db.points[1].stderr_ == 1e-4);
}

TEST_CASE("entropy command prints seven decimals and writes a record") {
  const auto out = path_in("square_3x2.json");
  auto r = vbs_cli({"entropy", "--family", "square", "--nx", "3", "--ny", "2", "--engine", "transfer", "-o", out});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("S/|L| = 0.6494635") != std::string::npos);
  const auto rec = run_record_from_json(read_json_file(out));
  CHECK(rec.engine == "transfer");
  CHECK(rec.version == kVersion);
  CHECK(rec.spectrum.boundary_size == 2);

  r = vbs_cli({"entropy", "--family", "hex", "--nx", "1", "--ny", "6", "--engine", "transfer", "-o",
               path_in("hex.json")});
  CHECK(r.out.find("S/|L| = 0.6878024") != std::string::npos);

  r = vbs_cli({"entropy", "--family", "square", "--nx", "1", "--ny", "1", "--engine", "ed", "-o", path_in("ed.json")});
  CHECK(r.code == kExitOk);
  CHECK(run_record_from_json(read_json_file(path_in("ed.json"))).spectrum.entropy ==
        doctest::Approx(std::numbers::ln2).epsilon(1e-15));
}

TEST_CASE("default output goes to the output directory variable") {
  const auto dir = scratch_dir() / "env_out";
  ::setenv(kOutputDirEnv, dir.c_str(), 1);
  const auto r = vbs_cli({"entropy", "--family", "square", "--nx", "2", "--ny", "2"});
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "entropy_square_nx2_ny2_transfer.json"));
}

TEST_CASE("usage errors") {
  auto r = vbs_cli({"entropy", "--family", "square", "--nx", "2", "--ny", "9", "--engine", "transfer"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("supported engines") != std::string::npos);
  CHECK(vbs_cli({"entropy", "--engine", "nope"}).code == kExitUsage);
  CHECK(vbs_cli({}).code == kExitUsage);
  CHECK(vbs_cli({"entropy", "--family", "hex", "--nx", "2", "--ny", "4", "--engine", "vertical"}).code == kExitUsage);
  CHECK(vbs_cli({"sweep", "--family", "square", "--ny", "2", "--nx", "5:1", "--out-dir", path_in("sw")}).code ==
        kExitUsage);
  CHECK(vbs_cli({"fit", path_in("missing.json")}).code == kExitUsage);
  CHECK(vbs_cli({"--version"}).code == kExitOk);
}

TEST_CASE("config file values yield to flags") {
  const auto cfg = path_in("config.json");
  std::ofstream(cfg) << R"({"family": "hex", "ny": 4, "entropy": {"nx": 2, "engine": "transfer"}})";
  auto r = vbs_cli({"--config", cfg, "entropy", "-o", path_in("c1.json")});
  CHECK(r.out.find("S/|L| = 0.6890932") != std::string::npos);
  r = vbs_cli({"entropy", "--config", cfg, "--nx", "1", "-o", path_in("c2.json")});
  CHECK(r.out.find("S/|L| = 0.6891577") != std::string::npos);
  std::ofstream(path_in("broken.json")) << "{";
  CHECK(vbs_cli({"--config", path_in("broken.json"), "entropy"}).code == kExitUsage);
}

TEST_CASE("replay reproduces exact and Monte Carlo records") {
  const auto mc = path_in("mc.json");
  auto r = vbs_cli({"entropy", "--family", "square", "--nx", "2", "--ny", "2", "--engine", "mc", "--samples", "64000",
                    "--batches", "16", "--seed", "5", "-o", mc});
  REQUIRE(r.code == kExitOk);
  r = vbs_cli({"replay", mc});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("identical") != std::string::npos);

  const auto ex = path_in("loop.json");
  REQUIRE(vbs_cli({"entropy", "--family", "square", "--nx", "2", "--ny", "2", "--engine", "loop", "-o", ex}).code ==
          kExitOk);
  CHECK(vbs_cli({"replay", ex}).code == kExitOk);

  Json tampered = read_json_file(mc);
  tampered["spectrum"]["entropy"] = 1.0;
  write_json_file(path_in("tampered.json"), tampered);
  CHECK(vbs_cli({"replay", path_in("tampered.json")}).code == kExitVerification);
}

TEST_CASE("custom graph files drive the graph engines") {
  const auto gfile = path_in("ring.json");
  write_json_file(gfile, to_json(build_hexagonal_half(1, 4)));
  const auto r = vbs_cli({"entropy", "--graph", gfile, "--engine", "ed", "-o", path_in("ring_ed.json")});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("S/|L| = 0.6891577") != std::string::npos);
  CHECK(vbs_cli({"entropy", "--graph", gfile, "--engine", "transfer"}).code == kExitUsage);
  CHECK(vbs_cli({"replay", path_in("ring_ed.json")}).code == kExitOk);
}

TEST_CASE("sweep then fit through files") {
  const auto dir = path_in("sweeps");
  auto r = vbs_cli({"sweep", "--family", "hex", "--nx", "1", "--ny", "2:16:2", "--engine", "vertical", "--out-dir", dir});
  REQUIRE(r.code == kExitOk);
  const auto dataset = fs::path(dir) / "sweep_hex_nx1_ny2-16-2_vertical" / "dataset.json";
  REQUIRE(fs::exists(dataset));
  CHECK(dataset_from_json(read_json_file(dataset)).points.size() == 8);
  r = vbs_cli({"fit", dataset.string(), "-o", path_in("fit.json")});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("alpha < ln 2 - 3 sigma") != std::string::npos);
  CHECK(fs::exists(path_in("fit.curve.dat")));
  const Json fit = read_json_file(path_in("fit.json"));
  CHECK(fit["report"]["below_ln2"].get<bool>());

  r = vbs_cli({"sweep", "--family", "square", "--ny", "2", "--nx", "1:5", "--out-dir", dir});
  CHECK(r.out.find("0.6494349") != std::string::npos);
}

TEST_CASE("sweep keeps going past failing points") {
  const auto r = vbs_cli({"sweep", "--family", "square", "--nx", "2", "--ny", "5:7", "--engine", "transfer",
                          "--out-dir", path_in("partial")});
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("N_y=7 failed") != std::string::npos);
  const Json d = read_json_file(fs::path(path_in("partial")) / "sweep_square_nx2_ny5-7_transfer" / "dataset.json");
  CHECK(d["points"].size() == 2);
  CHECK(d["failures"].size() == 1);
}

TEST_CASE("verify quick passes and detects a wrong sphere moment") {
  const auto ok = run_verify({});
  CHECK(ok.ok());
  CHECK(ok.seconds < 60);
  VerifyOptions bad;
  bad.q = Rational(3, 10);
  const auto rep = run_verify(bad);
  CHECK_FALSE(rep.ok());
  bool ladder_failed = false;
  for (const auto& c : rep.checks)
    if (!c.pass && c.name == "ladder regression") ladder_failed = true;
  CHECK(ladder_failed);
  CHECK(vbs_cli({"verify", "quick", "--inject-q", "3/10"}).code == kExitVerification);
}
