// cwnnk: channel-wise NNK leave-one-out evaluation and early-stopping service.

#include "cwnnk/diagnostics.hpp"
#include "cwnnk/errors.hpp"
#include "cwnnk/interpolation.hpp"
#include "cwnnk/parallel.hpp"
#include "cwnnk/report.hpp"
#include "cwnnk/serve.hpp"
#include "cwnnk/snapshot_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>

namespace {

struct EngineFlags {
  std::size_t k = 15;
  std::string kernel = "cosine";
  std::optional<double> sigma;
  std::vector<std::size_t> channels;
  std::optional<std::size_t> subsample;
  std::uint64_t seed = 0;
  unsigned workers = cwnnk::default_workers();
};

void add_engine_flags(CLI::App* app, EngineFlags& f, bool with_channels) {
  app->add_option("--k", f.k, "Initial KNN neighbor count")->capture_default_str();
  app->add_option("--kernel", f.kernel, "Similarity kernel")
      ->check(CLI::IsMember({"gaussian", "cosine"}))
      ->capture_default_str();
  app->add_option("--sigma", f.sigma,
                  "Fixed gaussian bandwidth (default: median K-th neighbor distance per channel)");
  if (with_channels) {
    app->add_option("--channels", f.channels, "Comma-separated channel subset")->delimiter(',');
  }
  app->add_option("--subsample", f.subsample, "Evaluate this many random nodes per step");
  app->add_option("--seed", f.seed, "Subsampling seed")->capture_default_str();
  app->add_option("--workers", f.workers, "Worker threads")->capture_default_str();
}

cwnnk::NnkConfig nnk_config(const EngineFlags& f) {
  cwnnk::NnkConfig cfg;
  cfg.k = f.k;
  cfg.kernel.kind = cwnnk::parse_kernel_kind(f.kernel);
  if (f.sigma) {
    cfg.kernel.sigma = *f.sigma;
    cfg.kernel.sigma_policy = cwnnk::SigmaPolicy::fixed;
  } else {
    cfg.kernel.sigma_policy = cwnnk::SigmaPolicy::median_knn_distance;
  }
  cfg.kernel.validate();
  return cfg;
}

cwnnk::EvalOptions eval_options(const EngineFlags& f) {
  cwnnk::EvalOptions o;
  if (!f.channels.empty()) o.channel_subset = f.channels;
  o.subsample = f.subsample;
  o.seed = f.seed;
  o.workers = f.workers;
  return o;
}

void print_report_line(const cwnnk::ChannelLooReport& r) {
  std::cout << "channel ";
  if (r.channel == cwnnk::kFullLayer) {
    std::cout << "full";
  } else {
    std::cout << r.channel;
  }
  std::cout << " loo_risk " << std::setprecision(6) << r.loo_risk << " evaluated "
            << r.evaluated_nodes() << " failed " << r.failed_nodes.size() << "\n";
}

int run_evaluate(const std::string& path, const EngineFlags& f, bool full_layer) {
  const auto snapshot = cwnnk::read_snapshot(std::filesystem::path(path));
  const auto cfg = nnk_config(f);
  const auto options = eval_options(f);
  for (const auto& r : cwnnk::loo_risk_all_channels(snapshot, cfg, options)) print_report_line(r);
  if (full_layer) print_report_line(cwnnk::loo_risk_full_layer(snapshot, cfg, options));
  return 0;
}

int run_diagnose(const std::string& path, const EngineFlags& f, double threshold) {
  const auto snapshot = cwnnk::read_snapshot(std::filesystem::path(path));
  const auto reports = cwnnk::loo_risk_all_channels(snapshot, nnk_config(f), eval_options(f));
  std::cout << "channel,loo_risk,zero_fraction,mean_neighbors,mean_same_class_weight\n";
  for (const auto& m : cwnnk::importance_metrics(reports)) {
    std::cout << m.channel << ',' << m.rank_score << ',' << m.zero_fraction << ','
              << m.mean_neighbors << ',' << m.mean_same_class_weight << "\n";
  }
  const auto ranking = cwnnk::rank_channels(reports, threshold);
  std::cout << "ranking:";
  for (auto c : ranking.order) std::cout << ' ' << c;
  std::cout << "\npassing(<" << threshold << "):";
  for (auto c : ranking.passing) std::cout << ' ' << c;
  std::cout << "\n";
  return 0;
}

int run_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cwnnk::InputError("cannot open " + path);
  const auto history = cwnnk::read_history(in);
  std::string mismatch;
  const long bad = cwnnk::replay_history(history, &mismatch);
  if (bad >= 0) {
    std::cerr << "replay diverged at entry " << bad << ": " << mismatch << "\n";
    return 1;
  }
  std::cout << "replay ok: " << history.entries.size() << " evaluations\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Channel-wise NNK leave-one-out generalization estimates and early stopping"};
  app.require_subcommand(1);

  EngineFlags eval_flags, diag_flags, serve_flags;
  std::string eval_snapshot, diag_snapshot, replay_path;
  bool full_layer = false;
  double threshold = cwnnk::kDefaultRiskThreshold;

  auto* evaluate = app.add_subcommand("evaluate", "Per-channel LOO risk for one snapshot");
  evaluate->add_option("--snapshot", eval_snapshot, "NNKA file or CSV directory")->required();
  evaluate->add_flag("--full-layer", full_layer, "Also report the concatenated full layer");
  add_engine_flags(evaluate, eval_flags, true);

  auto* diagnose = app.add_subcommand("diagnose", "Channel importance metrics and ranking");
  diagnose->add_option("--snapshot", diag_snapshot, "NNKA file or CSV directory")->required();
  diagnose->add_option("--threshold", threshold, "Risk threshold for the passing set")
      ->capture_default_str();
  add_engine_flags(diagnose, diag_flags, true);

  cwnnk::ControllerConfig controller;
  std::string history_out;
  std::optional<double> cache_rho;
  auto* serve = app.add_subcommand("serve", "Run the stopping controller over stdin/stdout");
  add_engine_flags(serve, serve_flags, false);
  serve->add_option("--patience", controller.patience, "Patience p")->capture_default_str();
  serve->add_option("--eval-interval", controller.eval_interval, "Steps between evaluations n")
      ->capture_default_str();
  serve->add_option("--eval-period", controller.eval_period, "Run LOO every T evaluations")
      ->capture_default_str();
  serve->add_option("--num-channels", controller.channels,
                    "Channels monitored (default: taken from the first snapshot)");
  serve->add_flag("--combined-best", controller.combined_best,
                  "Track the best step on the mean channel risk");
  serve->add_option("--history-out", history_out, "Write the run history to this file");
  serve->add_option("--cache-rho", cache_rho,
                    "Reuse neighborhoods across steps; rebuild when the residual grows by this factor");

  auto* replay = app.add_subcommand("replay", "Re-run the controller over a recorded history");
  replay->add_option("history", replay_path, "History file written by serve --history-out")
      ->required();

  controller.channels = 0;
  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) return run_evaluate(eval_snapshot, eval_flags, full_layer);
    if (*diagnose) return run_diagnose(diag_snapshot, diag_flags, threshold);
    if (*replay) return run_replay(replay_path);
    if (*serve) {
      cwnnk::ServeConfig cfg;
      cfg.controller = controller;
      cfg.nnk = nnk_config(serve_flags);
      cfg.eval = eval_options(serve_flags);
      if (cache_rho) {
        cfg.use_cache = true;
        cfg.nnk.cache_rebuild_factor = *cache_rho;
      }
      std::unique_ptr<std::ofstream> history;
      if (!history_out.empty()) {
        history = std::make_unique<std::ofstream>(history_out);
        if (!*history) throw cwnnk::InputError("cannot open " + history_out);
      }
      std::ios::sync_with_stdio(false);
      return cwnnk::serve_loop(std::cin, std::cout, cfg, history.get());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
