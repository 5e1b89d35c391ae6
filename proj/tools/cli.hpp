#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "commute/cube_collapse.hpp"
#include "commute/report_json.hpp"

namespace commute::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kFormat = 3,
  kCertificate = 4,
  kConstruction = 5,
  kIo = 6,
};

struct RunConfig {
  std::string command;
  // inputs: FGRID paths or "expr:<expression>"
  std::vector<std::string> inputs;
  std::string voxels;
  std::string manifest;
  // outputs (never part of the saved config)
  std::string report;
  std::string out;
  std::string out_prefix;
  std::string voxels_out;
  std::string graph_out;
  // numeric
  int dim = 2;
  int resolution = 256;
  double period = 1.0;
  double voxel_size = 1.0 / 512;
  int dilation = 1;
  int samples = 8;
  std::uint64_t seed = 0;
  CollapseParams params;
};

/// Config block embedded in every report; enough to re-run the command.
Json config_to_json(const RunConfig& config);
RunConfig config_from_json(const Json& j);

struct Outcome {
  int status = kOk;
  Json report;
  std::vector<std::pair<std::string, std::string>> artifacts; ///< path, bytes
};

/// Runs one command without touching the file system for outputs.
/// Throws the library exceptions; run() maps them to exit codes.
Outcome execute(const RunConfig& config);

/// Executes, writes artifacts and the report (to `out` when no report path
/// is set), returns the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Full command line entry point.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& log);

} // namespace commute::cli
