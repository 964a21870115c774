// fogsim: batch fog synthesis for camera images and LiDAR point clouds.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fogsim/airlight_stats.hpp"
#include "fogsim/io.hpp"
#include "fogsim/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("fogsim");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("FOGSIM_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw fogsim::InputError("bad visibility level '" + item + "'");
    levels.push_back(v);
  }
  return levels;
}

// Images (with depth where the dataset layout provides one) for `stats`.
std::vector<fogsim::CorpusEntry> load_corpus(const fs::path& dir) {
  std::vector<fogsim::CorpusEntry> corpus;
  std::vector<fogsim::SceneInput> scenes = fogsim::scan_dataset(dir);
  bool any_frame = false;
  for (const auto& scene : scenes) {
    for (const auto& frame : scene.frames) {
      any_frame = true;
      fogsim::CorpusEntry entry{fogsim::io::read_png_rgb(frame.image), std::nullopt};
      if (!frame.depth.empty()) {
        try {
          auto [img, depth] = fogsim::validate_pair(entry.image, fogsim::io::read_depth(frame.depth));
          entry.depth = std::move(depth);
        } catch (const fogsim::FogError& e) {
          spdlog::warn("{}/{}: ignoring depth ({})", scene.scene_id, frame.frame_id, e.what());
        }
      }
      corpus.push_back(std::move(entry));
    }
  }
  if (any_frame) return corpus;

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) corpus.push_back({fogsim::io::read_png_rgb(f), std::nullopt});
  return corpus;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Physics-based fog synthesis for camera and LiDAR datasets"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON file overriding airlight/lidar defaults")
      ->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Fog a dataset");
  std::string input, output, mode = "fixed", levels = "50,100,150,200,300";
  double mor = 150.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::size_t max_scenes = 0;
  run->add_option("--input", input, "Dataset root")->required();
  run->add_option("--output", output, "Output root")->required();
  run->add_option("--mode", mode, "Density mode")->check(CLI::IsMember({"fixed", "mixed"}));
  run->add_option("--mor", mor, "Visibility in metres (fixed mode)");
  run->add_option("--levels", levels, "Comma separated visibility levels (mixed mode)");
  run->add_option("--seed", seed, "Seed for the scene assignment");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--max-scenes", max_scenes, "Stop after this many scenes (0 = all)");

  auto* stats = app.add_subcommand("stats", "Atmospheric light statistics of a corpus");
  std::string stats_input, report_path;
  unsigned stats_workers = 1;
  stats->add_option("--input", stats_input, "Directory of images or a dataset root")->required();
  stats->add_option("--json", report_path, "Also write the machine-readable report here");
  stats->add_option("--workers", stats_workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* preview = app.add_subcommand("preview", "Clear | foggy side-by-side image");
  std::string frame, preview_input, preview_output, preview_out;
  preview->add_option("--frame", frame, "<scene>/<frame>")->required();
  preview->add_option("--input", preview_input, "Clear dataset root")->required();
  preview->add_option("--output", preview_output, "Foggy output root")->required();
  preview->add_option("--out", preview_out, "Composite path (default <scene>_<frame>_preview.png)");

  CLI11_PARSE(app, argc, argv);

  try {
    fogsim::PipelineConfig config;
    if (!config_path.empty()) config = fogsim::load_config(config_path);

    if (*run) {
      fogsim::BatchOptions opts;
      opts.input = input;
      opts.output = output;
      opts.policy.mode = mode == "mixed" ? fogsim::DensityMode::kMixed : fogsim::DensityMode::kFixed;
      opts.policy.fixed_mor = mor;
      opts.policy.mixed_levels = parse_levels(levels);
      opts.policy.seed = seed;
      opts.config = config;
      opts.workers = workers;
      if (max_scenes > 0) opts.max_scenes = max_scenes;
      const fogsim::BatchSummary s = fogsim::run_batch(opts);
      std::cout << "scenes: " << s.scenes_total << " total, " << s.scenes_skipped << " skipped, "
                << s.scenes_processed << " processed\n"
                << "frames: " << s.frames_processed << " processed, " << s.frames_failed
                << " failed\n"
                << "wall time: " << s.wall_time.count() << " s (" << s.throughput()
                << " frames/s)\n";
      return s.frames_failed == 0 ? 0 : 1;
    }

    if (*stats) {
      const auto corpus = load_corpus(stats_input);
      const auto result = fogsim::corpus_airlight_stats(corpus, config.airlight, stats_workers);
      std::vector<std::array<double, 3>> estimates;
      for (const auto& e : result.estimates) estimates.push_back(e.channels());
      const fogsim::CorpusReport report = fogsim::build_report(estimates);
      std::cout << fogsim::format_report_text(report);
      if (!report_path.empty()) fogsim::io::write_file(report_path, fogsim::format_report_json(report));
      return 0;
    }

    if (*preview) {
      const auto slash = frame.find('/');
      if (slash == std::string::npos) throw fogsim::InputError("--frame expects <scene>/<frame>");
      const std::string scene = frame.substr(0, slash);
      const std::string id = frame.substr(slash + 1);
      const fs::path out = preview_out.empty() ? fs::path(scene + "_" + id + "_preview.png")
                                               : fs::path(preview_out);
      const bool written =
          fogsim::emit_preview(fs::path(preview_input) / scene / "images" / (id + ".png"),
                               fs::path(preview_output) / scene / "images" / (id + ".png"), out);
      if (written) std::cout << out.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
