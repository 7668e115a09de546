#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vbs/io.hpp"
#include "vbs/rational.hpp"

namespace vbs {

inline constexpr const char* kVersion = "vbs 1.0.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "VBS_OUTPUT_DIR";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumerical = 2,
  kExitVerification = 3,
};

struct RunRecord {
  std::vector<std::string> command;
  Json graph;
  std::string engine;
  EntropySpectrum spectrum;
  std::optional<Json> estimate;
  std::optional<Json> fit;
  Json extra = Json::object();
  std::string started;
  std::string finished;
  std::string version = kVersion;
};

Json to_json(const RunRecord& record);
RunRecord run_record_from_json(const Json& j);

struct VerifyCheck {
  std::string name;
  std::string engines;
  std::string graph;
  double expected = 0;
  double got = 0;
  double tolerance = 0;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  bool full = false;
  /// Sphere moment used by the closed recursion matrices; anything but 1/3
  /// is a fault injection and must make the regression fail.
  Rational q = Rational(1, 3);
  unsigned threads = 0;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  double seconds = 0;
  bool ok() const;
};

VerifyReport run_verify(const VerifyOptions& opts, std::ostream* progress = nullptr);

/// Entry point of the command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vbs
