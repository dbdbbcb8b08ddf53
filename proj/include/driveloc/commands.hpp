#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "driveloc/config.hpp"

namespace driveloc::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kValidationError = 3, kInternalError = 4 };

/// Maps an exception from any module onto the exit-code contract.
int exit_code_for(const Error& e);

struct FuseArgs {
  std::string input;
  std::string output;
  unsigned jobs = 1;
};

struct LocalizeArgs {
  std::string input;  // fused or per-view streams
  std::string output;
  std::string report;  // sidecar; empty means "<output>.report.json"
  bool fractional = false;
  unsigned jobs = 1;
};

struct EvalArgs {
  std::string predictions;
  std::string ground_truth;
  std::string output;  // optional JSON copy of the report
};

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t videos = 0;  // 0 means the config's synth.videos
  std::string ground_truth;
  std::string probs;
  unsigned jobs = 1;
};

struct ReportArgs {
  std::string sidecar;
  std::size_t width = 80;
};

// Each command returns its exit code and writes diagnostics to `err`.
int cmd_fuse(const RunConfig& cfg, const FuseArgs& args, std::ostream& err);
int cmd_localize(const RunConfig& cfg, const LocalizeArgs& args, std::ostream& err);
int cmd_eval(const RunConfig& cfg, const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_synth(const RunConfig& cfg, const SynthArgs& args, std::ostream& err);
int cmd_report(const RunConfig& cfg, const ReportArgs& args, std::ostream& out, std::ostream& err);

}  // namespace driveloc::cli
