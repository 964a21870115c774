#include "fogsim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "fogsim/io.hpp"
#include "fogsim/optics.hpp"
#include "fogsim/parallel.hpp"

namespace fogsim {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Density policy

void DensityPolicy::validate() const {
  if (mode == DensityMode::kFixed) {
    if (!(fixed_mor > 0.0) || !std::isfinite(fixed_mor)) {
      throw InvalidParameterError("fixed visibility must be positive");
    }
    return;
  }
  if (mixed_levels.empty()) throw InvalidParameterError("mixed mode needs at least one level");
  for (std::size_t i = 0; i < mixed_levels.size(); ++i) {
    if (!(mixed_levels[i] > 0.0) || !std::isfinite(mixed_levels[i])) {
      throw InvalidParameterError("visibility levels must be positive");
    }
    if (i > 0 && !(mixed_levels[i] > mixed_levels[i - 1])) {
      throw InvalidParameterError("visibility levels must be strictly increasing");
    }
  }
}

std::string DensityPolicy::canonical() const {
  std::string s = mode == DensityMode::kFixed ? "mode=fixed" : "mode=mixed";
  if (mode == DensityMode::kFixed) {
    s += fmt::format(";mor={:.17g}", fixed_mor);
  } else {
    s += ";levels=";
    for (std::size_t i = 0; i < mixed_levels.size(); ++i) {
      s += fmt::format("{}{:.17g}", i ? "," : "", mixed_levels[i]);
    }
  }
  s += fmt::format(";seed={}", seed);
  return s;
}

std::string DensityPolicy::hash() const {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  auto bounded = [&rng](std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = rng();
      if (x >= threshold) return x % bound;
    }
  };
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[bounded(i)]);
  }
  return perm;
}

std::map<std::string, double> assign_densities(const std::vector<std::string>& scene_ids,
                                               const DensityPolicy& policy) {
  policy.validate();
  if (scene_ids.empty()) throw InputError("no scenes to assign");
  std::vector<std::string> sorted = scene_ids;
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end()) {
    throw InputError("duplicate scene id: " + *dup);
  }

  std::map<std::string, double> out;
  if (policy.mode == DensityMode::kFixed) {
    for (const auto& id : sorted) out[id] = policy.fixed_mor;
    return out;
  }
  const auto perm = seeded_permutation(sorted.size(), policy.seed);
  const std::size_t levels = policy.mixed_levels.size();
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out[sorted[perm[k]]] = policy.mixed_levels[k % levels];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config

namespace {

template <typename T>
void read_key(const json& section, const char* key, T& dst) {
  if (auto it = section.find(key); it != section.end()) dst = it->get<T>();
}

void reject_unknown(const json& section, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!section.is_object()) throw InputError("config section '" + where + "' must be an object");
  for (const auto& [key, _] : section.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw InputError("unknown config key '" + where + "." + key + "'");
    }
  }
}

}  // namespace

PipelineConfig parse_config(const json& doc) {
  PipelineConfig cfg;
  reject_unknown(doc, {"airlight", "lidar"}, "<root>");
  if (auto it = doc.find("airlight"); it != doc.end()) {
    reject_unknown(*it, {"depth_threshold", "dark_channel_patch", "candidate_fraction", "lum_low",
                         "lum_high"},
                   "airlight");
    read_key(*it, "depth_threshold", cfg.airlight.depth_threshold);
    read_key(*it, "dark_channel_patch", cfg.airlight.dark_channel_patch);
    read_key(*it, "candidate_fraction", cfg.airlight.candidate_fraction);
    read_key(*it, "lum_low", cfg.airlight.lum_low);
    read_key(*it, "lum_high", cfg.airlight.lum_high);
  }
  if (auto it = doc.find("lidar"); it != doc.end()) {
    reject_unknown(*it, {"r_min", "range_step", "noise_floor", "rng_seed", "beta0", "tau_h"},
                   "lidar");
    read_key(*it, "r_min", cfg.lidar.r_min);
    read_key(*it, "range_step", cfg.lidar.range_step);
    read_key(*it, "noise_floor", cfg.lidar.noise_floor);
    read_key(*it, "rng_seed", cfg.lidar.rng_seed);
    read_key(*it, "beta0", cfg.lidar.beta0);
    read_key(*it, "tau_h", cfg.lidar.tau_h);
  }
  cfg.airlight.validate();
  cfg.lidar.validate();
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw InputError("cannot parse config " + path.string() + ": " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const json::exception& e) {
    throw InputError("bad value in config " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Dataset layout

std::vector<SceneInput> scan_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw InputError("input root is not a directory: " + root.string());

  std::vector<SceneInput> scenes;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (!entry.is_directory()) continue;
    const fs::path images = entry.path() / "images";
    if (!fs::is_directory(images)) continue;

    SceneInput scene;
    scene.scene_id = entry.path().filename().string();
    for (const auto& img : fs::directory_iterator(images)) {
      if (!img.is_regular_file() || img.path().extension() != ".png") continue;
      FrameInput frame;
      frame.frame_id = img.path().stem().string();
      frame.image = img.path();
      const fs::path depth_dir = entry.path() / "depth";
      if (fs::exists(depth_dir / (frame.frame_id + ".png"))) {
        frame.depth = depth_dir / (frame.frame_id + ".png");
      } else if (fs::exists(depth_dir / (frame.frame_id + ".f32"))) {
        frame.depth = depth_dir / (frame.frame_id + ".f32");
      }
      if (auto p = entry.path() / "lidar" / (frame.frame_id + ".bin"); fs::exists(p)) {
        frame.lidar = p;
      }
      if (auto p = entry.path() / "labels" / (frame.frame_id + ".txt"); fs::exists(p)) {
        frame.labels = p;
      }
      scene.frames.push_back(std::move(frame));
    }
    std::sort(scene.frames.begin(), scene.frames.end(),
              [](const FrameInput& a, const FrameInput& b) { return a.frame_id < b.frame_id; });
    scenes.push_back(std::move(scene));
  }
  if (ec) throw InputError("cannot read input root " + root.string() + ": " + ec.message());
  std::sort(scenes.begin(), scenes.end(),
            [](const SceneInput& a, const SceneInput& b) { return a.scene_id < b.scene_id; });
  return scenes;
}

// ---------------------------------------------------------------------------
// Manifest serialization

std::string to_string(Status s) {
  switch (s) {
    case Status::kPending: return "pending";
    case Status::kDone: return "done";
    case Status::kFailed: return "failed";
  }
  return "pending";
}

Status status_from_string(const std::string& s) {
  if (s == "done") return Status::kDone;
  if (s == "failed") return Status::kFailed;
  if (s == "pending") return Status::kPending;
  throw InputError("unknown status '" + s + "'");
}

json to_json(const FrameRecord& f) {
  json j = {{"frame_id", f.frame_id},
            {"status", to_string(f.status)},
            {"inputs", f.inputs},
            {"outputs", f.outputs},
            {"airlight_fallback_warning", f.airlight_fallback_warning}};
  if (!f.error.empty()) j["error"] = f.error;
  if (f.airlight) j["airlight"] = {f.airlight->r, f.airlight->g, f.airlight->b};
  if (f.lidar_stats) {
    const auto& s = *f.lidar_stats;
    j["lidar_stats"] = {{"kept_attenuated", s.kept_attenuated},
                        {"relocated", s.relocated},
                        {"dropped", s.dropped},
                        {"blind_zone", s.blind_zone},
                        {"mean_intensity_before", s.mean_intensity_before},
                        {"mean_intensity_after", s.mean_intensity_after}};
  }
  return j;
}

json to_json(const SceneRecord& s) {
  json frames = json::array();
  for (const auto& f : s.frames) frames.push_back(to_json(f));
  return {{"scene_id", s.scene_id},
          {"assigned_mor", s.assigned_mor},
          {"status", to_string(s.status)},
          {"frames", std::move(frames)}};
}

json to_json(const Manifest& m) {
  json scenes = json::array();
  for (const auto& s : m.scenes) scenes.push_back(to_json(s));
  return {{"tool_version", m.tool_version},
          {"policy_hash", m.policy_hash},
          {"scenes", std::move(scenes)}};
}

FrameRecord frame_from_json(const json& j) {
  FrameRecord f;
  f.frame_id = j.at("frame_id").get<std::string>();
  f.status = status_from_string(j.at("status").get<std::string>());
  f.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  f.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  f.airlight_fallback_warning = j.value("airlight_fallback_warning", false);
  f.error = j.value("error", std::string{});
  if (auto it = j.find("airlight"); it != j.end()) {
    f.airlight = AtmosphericLight{it->at(0).get<double>(), it->at(1).get<double>(),
                                  it->at(2).get<double>()};
  }
  if (auto it = j.find("lidar_stats"); it != j.end()) {
    LidarFogStats s;
    s.kept_attenuated = it->at("kept_attenuated").get<std::size_t>();
    s.relocated = it->at("relocated").get<std::size_t>();
    s.dropped = it->at("dropped").get<std::size_t>();
    s.blind_zone = it->at("blind_zone").get<std::size_t>();
    s.mean_intensity_before = it->at("mean_intensity_before").get<double>();
    s.mean_intensity_after = it->at("mean_intensity_after").get<double>();
    f.lidar_stats = s;
  }
  return f;
}

SceneRecord scene_from_json(const json& j) {
  SceneRecord s;
  s.scene_id = j.at("scene_id").get<std::string>();
  s.assigned_mor = j.at("assigned_mor").get<double>();
  s.status = status_from_string(j.at("status").get<std::string>());
  for (const auto& f : j.at("frames")) s.frames.push_back(frame_from_json(f));
  return s;
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.tool_version = j.at("tool_version").get<std::string>();
  m.policy_hash = j.at("policy_hash").get<std::string>();
  for (const auto& s : j.at("scenes")) m.scenes.push_back(scene_from_json(s));
  return m;
}

Manifest load_manifest_state(const fs::path& output_root) {
  Manifest manifest;
  std::map<std::string, SceneRecord> by_id;
  if (const fs::path path = output_root / kManifestName; fs::exists(path)) {
    try {
      manifest = manifest_from_json(json::parse(io::read_file(path)));
    } catch (const json::exception& e) {
      throw InputError("corrupt manifest " + path.string() + ": " + e.what());
    }
    for (auto& s : manifest.scenes) by_id[s.scene_id] = std::move(s);
  }
  if (const fs::path path = output_root / kJournalName; fs::exists(path)) {
    std::istringstream lines(io::read_file(path));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      try {
        SceneRecord s = scene_from_json(json::parse(line));
        by_id[s.scene_id] = std::move(s);
      } catch (const json::exception&) {
        // A torn final line from an interrupted run.
        spdlog::warn("ignoring unreadable journal line in {}", path.string());
      }
    }
  }
  manifest.scenes.clear();
  for (auto& [_, s] : by_id) manifest.scenes.push_back(std::move(s));
  return manifest;
}

// ---------------------------------------------------------------------------
// Frame processing

namespace {

std::string relative_to(const fs::path& p, const fs::path& root) {
  return p.lexically_relative(root).generic_string();
}

// Outputs staged as temporaries and promoted together.
class StagedOutputs {
 public:
  ~StagedOutputs() {
    for (const auto& [tmp, _] : staged_) {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
  }

  fs::path stage(const fs::path& final_path) {
    fs::create_directories(final_path.parent_path());
    fs::path tmp = final_path;
    tmp += ".tmp";
    staged_.emplace_back(tmp, final_path);
    return tmp;
  }

  void commit() {
    for (const auto& [tmp, final_path] : staged_) fs::rename(tmp, final_path);
    staged_.clear();
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

}  // namespace

FrameRecord process_frame(const FrameInput& frame, const std::string& scene_id, double mor,
                          const PipelineConfig& config, const fs::path& input_root,
                          const fs::path& output_root) {
  FrameRecord rec;
  rec.frame_id = frame.frame_id;
  rec.inputs["image"] = relative_to(frame.image, input_root);
  if (!frame.depth.empty()) rec.inputs["depth"] = relative_to(frame.depth, input_root);
  if (frame.lidar) rec.inputs["lidar"] = relative_to(*frame.lidar, input_root);
  if (frame.labels) rec.inputs["labels"] = relative_to(*frame.labels, input_root);

  const fs::path scene_out = output_root / scene_id;
  try {
    if (frame.depth.empty()) throw InputError("no depth map for frame " + frame.frame_id);
    const RgbImage image = io::read_png_rgb(frame.image);
    const DepthMap depth = io::read_depth(frame.depth);
    const auto [aligned_image, aligned_depth] = validate_pair(image, depth);
    const CameraFogResult camera =
        simulate_camera_fog(aligned_image, aligned_depth, mor, std::nullopt, config.airlight);

    std::optional<LidarFogResult> lidar;
    if (frame.lidar) lidar = simulate_lidar_fog(io::read_kitti_bin(*frame.lidar), mor, config.lidar);
    std::optional<std::string> labels;
    if (frame.labels) labels = io::read_file(*frame.labels);

    StagedOutputs staged;
    const fs::path image_out = scene_out / "images" / (frame.frame_id + ".png");
    io::write_png_rgb(staged.stage(image_out), camera.image);
    rec.outputs["image"] = relative_to(image_out, output_root);
    if (lidar) {
      const fs::path cloud_out = scene_out / "lidar" / (frame.frame_id + ".bin");
      io::write_kitti_bin(staged.stage(cloud_out), lidar->cloud);
      rec.outputs["lidar"] = relative_to(cloud_out, output_root);
      rec.lidar_stats = lidar->stats;
    }
    if (labels) {
      const fs::path labels_out = scene_out / "labels" / (frame.frame_id + ".txt");
      io::write_file(staged.stage(labels_out), *labels);
      rec.outputs["labels"] = relative_to(labels_out, output_root);
    }
    staged.commit();

    rec.airlight = camera.airlight;
    rec.airlight_fallback_warning = camera.airlight_fallback;
    if (camera.airlight_fallback) {
      spdlog::warn("{}/{}: no pixels beyond the depth threshold, used unfiltered prior", scene_id,
                   frame.frame_id);
    }
    rec.status = Status::kDone;
  } catch (const std::exception& e) {
    spdlog::error("{}/{} failed: {}", scene_id, frame.frame_id, e.what());
    rec.status = Status::kFailed;
    rec.error = e.what();
    rec.outputs.clear();
    rec.airlight.reset();
    rec.airlight_fallback_warning = false;
    rec.lidar_stats.reset();
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Batch

namespace {

void write_manifest_atomic(const fs::path& output_root, const Manifest& manifest) {
  const fs::path path = output_root / kManifestName;
  fs::path tmp = path;
  tmp += ".tmp";
  io::write_file(tmp, to_json(manifest).dump(2) + "\n");
  fs::rename(tmp, path);
}

Manifest compact(const std::vector<SceneInput>& scenes, const std::map<std::string, double>& mors,
                 std::map<std::string, SceneRecord> records, const std::string& policy_hash) {
  Manifest m;
  m.policy_hash = policy_hash;
  for (const auto& scene : scenes) {
    if (auto it = records.find(scene.scene_id); it != records.end()) {
      m.scenes.push_back(std::move(it->second));
    } else {
      m.scenes.push_back({scene.scene_id, mors.at(scene.scene_id), Status::kPending, {}});
    }
  }
  return m;
}

}  // namespace

BatchSummary run_batch(const BatchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  options.policy.validate();
  options.config.airlight.validate();
  options.config.lidar.validate();

  const std::vector<SceneInput> scenes = scan_dataset(options.input);
  if (scenes.empty()) throw InputError("no scenes found under " + options.input.string());
  std::vector<std::string> ids;
  for (const auto& s : scenes) ids.push_back(s.scene_id);
  const auto mors = assign_densities(ids, options.policy);
  const std::string policy_hash = options.policy.hash();

  fs::create_directories(options.output);
  Manifest previous = load_manifest_state(options.output);
  if (!previous.policy_hash.empty() && previous.policy_hash != policy_hash) {
    throw InputError("output " + options.output.string() +
                     " was produced with a different density policy");
  }
  std::map<std::string, SceneRecord> records;
  for (auto& s : previous.scenes) {
    if (mors.count(s.scene_id) && s.status != Status::kPending) records[s.scene_id] = std::move(s);
  }
  write_manifest_atomic(options.output, compact(scenes, mors, records, policy_hash));
  fs::remove(options.output / kJournalName);

  BatchSummary summary;
  summary.scenes_total = scenes.size();
  std::vector<const SceneInput*> pending;
  for (const auto& s : scenes) {
    auto it = records.find(s.scene_id);
    if (it != records.end() && it->second.status == Status::kDone) {
      ++summary.scenes_skipped;
      continue;
    }
    if (options.max_scenes && pending.size() >= *options.max_scenes) break;
    pending.push_back(&s);
  }

  struct Task {
    std::size_t scene;
    std::size_t frame;
  };
  std::vector<Task> tasks;
  std::vector<SceneRecord> results(pending.size());
  std::vector<std::atomic<std::size_t>> remaining(pending.size());
  for (std::size_t si = 0; si < pending.size(); ++si) {
    const SceneInput& scene = *pending[si];
    results[si].scene_id = scene.scene_id;
    results[si].assigned_mor = mors.at(scene.scene_id);
    results[si].frames.resize(scene.frames.size());
    remaining[si].store(scene.frames.size());
    for (std::size_t fi = 0; fi < scene.frames.size(); ++fi) tasks.push_back({si, fi});
  }

  std::ofstream journal(options.output / kJournalName, std::ios::app);
  if (!journal) throw InputError("cannot open journal in " + options.output.string());
  std::mutex writer;
  auto finish_scene = [&](std::size_t si) {
    SceneRecord& rec = results[si];
    rec.status = std::all_of(rec.frames.begin(), rec.frames.end(),
                             [](const FrameRecord& f) { return f.status == Status::kDone; })
                     ? Status::kDone
                     : Status::kFailed;
    std::lock_guard lock(writer);
    journal << to_json(rec).dump() << '\n';
    journal.flush();
    spdlog::info("scene {} ({} m): {}", rec.scene_id, rec.assigned_mor, to_string(rec.status));
  };
  for (std::size_t si = 0; si < pending.size(); ++si) {
    if (pending[si]->frames.empty()) finish_scene(si);
  }

  parallel_for(tasks.size(), options.workers, [&](std::size_t t) {
    const auto [si, fi] = tasks[t];
    const SceneInput& scene = *pending[si];
    results[si].frames[fi] = process_frame(scene.frames[fi], scene.scene_id,
                                           results[si].assigned_mor, options.config,
                                           options.input, options.output);
    if (remaining[si].fetch_sub(1) == 1) finish_scene(si);
  });
  journal.close();

  for (auto& rec : results) {
    summary.frames_processed += rec.frames.size();
    summary.frames_failed += static_cast<std::size_t>(
        std::count_if(rec.frames.begin(), rec.frames.end(),
                      [](const FrameRecord& f) { return f.status == Status::kFailed; }));
    ++summary.scenes_processed;
    records[rec.scene_id] = std::move(rec);
  }
  write_manifest_atomic(options.output, compact(scenes, mors, std::move(records), policy_hash));
  fs::remove(options.output / kJournalName);

  summary.wall_time = std::chrono::steady_clock::now() - started;
  return summary;
}

// ---------------------------------------------------------------------------
// Preview

RgbImage compose_side_by_side(const RgbImage& left, const RgbImage& right) {
  if (left.height() != right.height()) throw AlignmentError("preview panels differ in height");
  RgbImage out(left.width() + right.width(), left.height());
  for (std::size_t r = 0; r < left.height(); ++r) {
    for (std::size_t c = 0; c < left.width(); ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, c, ch) = left.at(r, c, ch);
    }
    for (std::size_t c = 0; c < right.width(); ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) out.at(r, left.width() + c, ch) = right.at(r, c, ch);
    }
  }
  return out;
}

bool emit_preview(const fs::path& clear, const fs::path& foggy, const fs::path& out) {
  for (const auto& p : {clear, foggy}) {
    if (!fs::exists(p)) {
      spdlog::warn("preview skipped, missing {}", p.string());
      return false;
    }
  }
  const RgbImage left = io::read_png_rgb(clear);
  const RgbImage right = io::read_png_rgb(foggy);
  if (left.height() != right.height()) {
    spdlog::warn("preview skipped, {} and {} differ in height", clear.string(), foggy.string());
    return false;
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  io::write_png_rgb(out, compose_side_by_side(left, right));
  return true;
}

}  // namespace fogsim
