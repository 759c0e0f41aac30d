// trajpair command-line tool: paired-trajectory dataset generation,
// pair inspection, metric evaluation, and pairwise-vote ranking.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajpair/image_io.hpp"
#include "trajpair/metrics.hpp"
#include "trajpair/pipeline.hpp"
#include "trajpair/ranking.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

bool parse_seed_range(const std::string& text, long* lo, long* hi) {
  const size_t pos = text.find("..");
  if (pos == std::string::npos) return false;
  try {
    *lo = std::stol(text.substr(0, pos));
    *hi = std::stol(text.substr(pos + 2));
  } catch (const std::exception&) {
    return false;
  }
  return *hi >= *lo;
}

int cmd_generate(const std::string& config_path, const std::string& seeds,
                 const std::string& out_dir, int workers) {
  trajpair::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = trajpair::load_run_config(config_path);
    if (!seeds.empty()) {
      long lo = 0, hi = 0;
      if (!parse_seed_range(seeds, &lo, &hi)) {
        std::cerr << "error: bad seed range '" << seeds << "' (expected A..B)\n";
        return kExitUsage;
      }
      cfg.seed_lo = lo;
      cfg.seed_hi = hi;
    }
    if (!out_dir.empty()) cfg.output_root = out_dir;
    if (workers > 0) cfg.workers = workers;
    cfg.validate();
  } catch (const trajpair::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const trajpair::RunSummary summary = trajpair::run_generate(cfg);
    std::cout << "pairs written: " << summary.pairs_written << "\n";
    std::cout << "rejections: " << summary.rejections << "\n";
    for (const auto& [reason, count] : summary.rejections_by_reason) {
      std::cout << "  " << reason << ": " << count << "\n";
    }
    std::cout << "manifest: " << summary.manifest_path.string() << "\n";
    return kExitOk;
  } catch (const trajpair::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_inspect(const std::string& pair_dir, const std::string& report_path) {
  try {
    const trajpair::InspectReport report = trajpair::inspect_pair_dir(pair_dir);
    std::printf("seed: %ld\n", report.seed);
    std::printf("task: %s\n", report.task.c_str());
    std::printf("delta: (%.6f, %.6f, %.6f)\n", report.delta.x, report.delta.y, report.delta.z);
    std::printf("hit: %s\n", report.hit ? "true" : "false");
    std::printf("frames: %d (A: %d frames, %d masks; B: %d frames, %d masks)\n",
                report.frames, report.found_counts[0], report.found_counts[1],
                report.found_counts[2], report.found_counts[3]);
    if (report.check.pass) {
      std::printf("canonical check: PASS\n");
    } else {
      std::printf("canonical check: FAIL (%s)\n", report.check.reason.c_str());
    }
    if (!report_path.empty()) {
      json j;
      j["seed"] = report.seed;
      j["task"] = report.task;
      j["delta"] = {report.delta.x, report.delta.y, report.delta.z};
      j["hit"] = report.hit;
      j["frames"] = report.frames;
      j["pass"] = report.check.pass;
      j["reason"] = report.check.reason;
      std::ofstream out(report_path);
      out << j.dump(2) << "\n";
    }
    return report.check.pass ? kExitOk : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

std::vector<fs::path> sequence_paths(const fs::path& dir, const char* prefix,
                                     const char* ext) {
  std::vector<fs::path> paths;
  for (int i = 0;; ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%05d.%s", prefix, i, ext);
    const fs::path p = dir / name;
    if (!fs::exists(p)) break;
    paths.push_back(p);
  }
  return paths;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& metric,
             const std::string& report_path) {
  try {
    json report;
    double value = 0.0;
    if (metric == "iou") {
      trajpair::MaskVideo pred, gt;
      for (const fs::path& p : sequence_paths(pred_dir, "mask", "pgm")) {
        pred.push_back(trajpair::read_mask(p.string()));
      }
      for (const fs::path& p : sequence_paths(gt_dir, "mask", "pgm")) {
        gt.push_back(trajpair::read_mask(p.string()));
      }
      if (pred.size() != gt.size() || pred.empty()) {
        std::cerr << "error: mask sequences misaligned (" << pred.size() << " vs "
                  << gt.size() << ")\n";
        return kExitUsage;
      }
      value = trajpair::iou_traj(pred, gt);
      json per_frame = json::array();
      for (size_t i = 0; i < gt.size(); ++i) {
        const auto gt_box = trajpair::bbox_from_mask(gt[i]);
        const auto pred_box = trajpair::bbox_from_mask(pred[i]);
        if (!gt_box) {
          per_frame.push_back(nullptr);
        } else if (!pred_box) {
          per_frame.push_back(0.0);
        } else {
          per_frame.push_back(trajpair::iou(*pred_box, *gt_box));
        }
      }
      report["per_frame"] = per_frame;
      std::printf("iou_traj: %.4f\n", value);
    } else if (metric == "ssim") {
      std::vector<trajpair::FrameBuffer> pred, gt;
      for (const fs::path& p : sequence_paths(pred_dir, "frame", "ppm")) {
        pred.push_back(trajpair::read_frame(p.string()));
      }
      for (const fs::path& p : sequence_paths(gt_dir, "frame", "ppm")) {
        gt.push_back(trajpair::read_frame(p.string()));
      }
      trajpair::MaskVideo gt_masks;
      for (const fs::path& p : sequence_paths(gt_dir, "mask", "pgm")) {
        gt_masks.push_back(trajpair::read_mask(p.string()));
      }
      trajpair::MaskVideo pred_masks;
      for (const fs::path& p : sequence_paths(pred_dir, "mask", "pgm")) {
        pred_masks.push_back(trajpair::read_mask(p.string()));
      }
      if (pred.size() != gt.size() || pred.empty() || gt_masks.size() != gt.size()) {
        std::cerr << "error: frame/mask sequences misaligned\n";
        return kExitUsage;
      }
      const trajpair::MaskVideo* extra =
          pred_masks.size() == gt.size() ? &pred_masks : nullptr;
      json per_frame = json::array();
      double sum = 0.0;
      for (size_t i = 0; i < gt.size(); ++i) {
        trajpair::MaskFrame fg = gt_masks[i];
        if (extra != nullptr) {
          for (size_t k = 0; k < fg.value.size(); ++k) {
            fg.value[k] = std::min(fg.value[k], (*extra)[i].value[k]);
          }
        }
        const double s = trajpair::masked_ssim(pred[i], gt[i], fg);
        per_frame.push_back(s);
        sum += s;
      }
      value = sum / static_cast<double>(gt.size());
      report["per_frame"] = per_frame;
      std::printf("ssim_bg: %.4f\n", value);
    } else {
      std::cerr << "error: unknown metric '" << metric << "' (expected iou or ssim)\n";
      return kExitUsage;
    }
    report["metric"] = metric;
    report["mean"] = value;
    if (!report_path.empty()) {
      std::ofstream out(report_path);
      out << report.dump(2) << "\n";
    }
    return kExitOk;
  } catch (const trajpair::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_rank(const std::string& votes_path, double alpha, const std::string& report_path) {
  trajpair::VoteSet votes;
  try {
    votes = trajpair::load_votes_csv(votes_path);
  } catch (const trajpair::RankingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const trajpair::Utilities fit = trajpair::bt_fit_ilsr(votes, alpha);
    std::vector<int> order(votes.items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (fit.u[a] != fit.u[b]) return fit.u[a] > fit.u[b];
      return votes.items[a] < votes.items[b];
    });
    json items = json::array();
    for (const int idx : order) {
      std::printf("%s: %.4f\n", votes.items[idx].c_str(), fit.u[idx]);
      items.push_back({{"item", votes.items[idx]}, {"utility", fit.u[idx]}});
    }
    if (!report_path.empty()) {
      json j;
      j["alpha"] = alpha;
      j["ranking"] = items;
      std::ofstream out(report_path);
      out << j.dump(2) << "\n";
    }
    return kExitOk;
  } catch (const trajpair::RankingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paired object-trajectory video generation and evaluation"};
  app.require_subcommand(1);

  std::string config_path, seeds, out_dir = "run";
  int workers = 0;
  CLI::App* generate = app.add_subcommand("generate", "Generate paired videos over a seed range");
  generate->add_option("--config", config_path, "Run configuration JSON file");
  generate->add_option("--seeds", seeds, "Inclusive seed range A..B");
  generate->add_option("--out", out_dir, "Output directory");
  generate->add_option("--workers", workers, "Worker thread count");

  std::string pair_dir, inspect_report;
  CLI::App* inspect = app.add_subcommand("inspect", "Verify and summarize one generated pair");
  inspect->add_option("--pair", pair_dir, "Pair directory")->required();
  inspect->add_option("--report", inspect_report, "Machine-readable report path");

  std::string pred_dir, gt_dir, metric, eval_report = "eval_report.json";
  CLI::App* eval = app.add_subcommand("eval", "Evaluate predicted sequences against ground truth");
  eval->add_option("--pred", pred_dir, "Directory with predicted sequences")->required();
  eval->add_option("--gt", gt_dir, "Directory with ground-truth sequences")->required();
  eval->add_option("--metric", metric, "Metric: iou or ssim")->required();
  eval->add_option("--report", eval_report, "Machine-readable report path");

  std::string votes_path, rank_report = "rank_report.json";
  double alpha = 0.01;
  CLI::App* rank = app.add_subcommand("rank", "Fit Bradley-Terry strengths from pairwise votes");
  rank->add_option("--votes", votes_path, "CSV with header winner,loser")->required();
  rank->add_option("--alpha", alpha, "Regularization strength");
  rank->add_option("--report", rank_report, "Machine-readable report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (generate->parsed()) return cmd_generate(config_path, seeds, out_dir, workers);
  if (inspect->parsed()) return cmd_inspect(pair_dir, inspect_report);
  if (eval->parsed()) return cmd_eval(pred_dir, gt_dir, metric, eval_report);
  if (rank->parsed()) return cmd_rank(votes_path, alpha, rank_report);
  return kExitUsage;
}
