// driveloc: fuse multi-camera clip probabilities, localize activities, score them, and
// generate synthetic corpora.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "driveloc/commands.hpp"

using namespace driveloc;

namespace {

struct Common {
  std::string config;
  std::string format;
  std::string weights = "default";
  std::string background;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
};

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig::defaults() : load_config(c.config);
  if (c.weights != "default") load_weights(cfg, c.weights);
  if (!c.background.empty()) apply_background(cfg, parse_background(c.background, cfg.num_classes));
  if (!c.format.empty()) cfg.format = parse_format(c.format);
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file")->envname("DRIVELOC_CONFIG");
  sub->add_option("--format", c.format, "Report format: text or json")->envname("DRIVELOC_FORMAT");
  sub->add_option("--weights", c.weights, "View weights: default or a 16x3 table file")
      ->envname("DRIVELOC_WEIGHTS");
  sub->add_option("--background-class", c.background, "Background class: none or 0..15")
      ->envname("DRIVELOC_BACKGROUND_CLASS");
  sub->add_option("--jobs", c.jobs, "Worker threads")->envname("DRIVELOC_JOBS");
  sub->add_option("--seed", c.seed, "Random seed")->envname("DRIVELOC_SEED");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal activity localization from multi-view clip probabilities"};
  app.require_subcommand(1);
  Common common;

  cli::FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse per-view probability streams");
  fuse_cmd->add_option("-i,--input", fuse.input, "Per-view probabilities (JSONL)")->required();
  fuse_cmd->add_option("-o,--output", fuse.output, "Fused probabilities (JSONL)")->required();
  add_common(fuse_cmd, common);

  cli::LocalizeArgs loc;
  auto* loc_cmd = app.add_subcommand("localize", "Post-process probabilities into a submission");
  loc_cmd->add_option("-i,--input", loc.input, "Fused or per-view probabilities (JSONL)")->required();
  loc_cmd->add_option("-o,--output", loc.output, "Submission file")->required();
  loc_cmd->add_option("--report", loc.report, "Sidecar report (default: <output>.report.json)");
  loc_cmd->add_flag("--fractional", loc.fractional, "Keep fractional seconds");
  add_common(loc_cmd, common);

  cli::EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a submission against ground truth");
  eval_cmd->add_option("-p,--pred", eval.predictions, "Submission file")->required();
  eval_cmd->add_option("-g,--gt", eval.ground_truth, "Ground-truth file")->required();
  eval_cmd->add_option("-o,--output", eval.output, "Also write the report as JSON");
  add_common(eval_cmd, common);

  cli::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--videos", synth.videos, "Number of videos (default: config)");
  synth_cmd->add_option("--gt", synth.ground_truth, "Ground-truth output")->required();
  synth_cmd->add_option("--probs", synth.probs, "Per-view probabilities output (JSONL)")->required();
  add_common(synth_cmd, common);

  cli::ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Render per-stage timelines from a sidecar");
  report_cmd->add_option("-i,--input", report.sidecar, "Sidecar written by localize")->required();
  report_cmd->add_option("--width", report.width, "Timeline width in characters");
  add_common(report_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kInputError;
  }

  RunConfig cfg;
  try {
    cfg = resolve(common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }

  try {
    if (*fuse_cmd) {
      fuse.jobs = common.jobs;
      return cli::cmd_fuse(cfg, fuse, std::cerr);
    }
    if (*loc_cmd) {
      loc.jobs = common.jobs;
      return cli::cmd_localize(cfg, loc, std::cerr);
    }
    if (*eval_cmd) return cli::cmd_eval(cfg, eval, std::cout, std::cerr);
    if (*synth_cmd) {
      synth.jobs = common.jobs;
      synth.seed = common.seed;
      return cli::cmd_synth(cfg, synth, std::cerr);
    }
    if (*report_cmd) return cli::cmd_report(cfg, report, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cli::kInternalError;
  }
  return cli::kInternalError;
}
