#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fogsim/airlight.hpp"
#include "fogsim/lidar_fog.hpp"

namespace fogsim {

inline constexpr const char* kToolVersion = "0.1.0";

enum class DensityMode { kFixed, kMixed };

struct DensityPolicy {
  DensityMode mode = DensityMode::kFixed;
  double fixed_mor = 150.0;
  std::vector<double> mixed_levels{50.0, 100.0, 150.0, 200.0, 300.0};
  std::uint64_t seed = 0;

  void validate() const;
  // Canonical text form; hashed into manifests.
  std::string canonical() const;
  std::string hash() const;
};

/// Scene-level visibility assignment. Mixed mode shuffles the sorted ids
/// with a seeded permutation and deals levels round-robin, so per-level
/// counts differ by at most one.
std::map<std::string, double> assign_densities(const std::vector<std::string>& scene_ids,
                                               const DensityPolicy& policy);

/// Seeded Fisher-Yates permutation of [0, n); identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct PipelineConfig {
  AirlightConfig airlight;
  LidarSimConfig lidar;
};

/// Reads a JSON config with optional "airlight" and "lidar" sections.
/// Unknown keys are rejected.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const nlohmann::json& doc);

struct FrameInput {
  std::string frame_id;
  std::filesystem::path image;
  std::filesystem::path depth;
  std::optional<std::filesystem::path> lidar;
  std::optional<std::filesystem::path> labels;
};

struct SceneInput {
  std::string scene_id;
  std::vector<FrameInput> frames;  // sorted by frame_id
};

/// Scans `<root>/<scene>/{images,depth,lidar,labels}`. Scenes and frames
/// come back sorted. Throws InputError if the root is not a readable dir.
std::vector<SceneInput> scan_dataset(const std::filesystem::path& root);

enum class Status { kPending, kDone, kFailed };
std::string to_string(Status s);
Status status_from_string(const std::string& s);

struct FrameRecord {
  std::string frame_id;
  Status status = Status::kPending;
  std::string error;
  std::map<std::string, std::string> inputs;   // modality -> path relative to input root
  std::map<std::string, std::string> outputs;  // modality -> path relative to output root
  std::optional<AtmosphericLight> airlight;
  bool airlight_fallback_warning = false;
  std::optional<LidarFogStats> lidar_stats;
};

struct SceneRecord {
  std::string scene_id;
  double assigned_mor = 0.0;
  Status status = Status::kPending;
  std::vector<FrameRecord> frames;
};

struct Manifest {
  std::string tool_version = kToolVersion;
  std::string policy_hash;
  std::vector<SceneRecord> scenes;  // sorted by scene_id
};

nlohmann::json to_json(const FrameRecord& f);
nlohmann::json to_json(const SceneRecord& s);
nlohmann::json to_json(const Manifest& m);
FrameRecord frame_from_json(const nlohmann::json& j);
SceneRecord scene_from_json(const nlohmann::json& j);
Manifest manifest_from_json(const nlohmann::json& j);

/// Fogs one frame and writes its outputs under `<out_root>/<scene_id>/`.
/// Outputs are written to temporaries and renamed only when every output
/// succeeded. Failures are captured in the returned record, never thrown.
FrameRecord process_frame(const FrameInput& frame, const std::string& scene_id, double mor,
                          const PipelineConfig& config,
                          const std::filesystem::path& input_root,
                          const std::filesystem::path& output_root);

struct BatchOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  DensityPolicy policy;
  PipelineConfig config;
  unsigned workers = 1;
  // Process at most this many pending scenes, then stop as if interrupted.
  std::optional<std::size_t> max_scenes;
};

struct BatchSummary {
  std::size_t scenes_total = 0;
  std::size_t scenes_skipped = 0;  // already done in a previous run
  std::size_t scenes_processed = 0;
  std::size_t frames_processed = 0;
  std::size_t frames_failed = 0;
  std::chrono::duration<double> wall_time{0};

  double throughput() const {
    return wall_time.count() > 0 ? frames_processed / wall_time.count() : 0.0;
  }
};

inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kJournalName = "manifest.jsonl";

/// Processes every pending scene. Finished scenes are appended to the
/// journal as they complete; the journal is compacted into manifest.json at
/// the end. Scenes already done are skipped.
BatchSummary run_batch(const BatchOptions& options);

/// Loads manifest.json and replays the journal on top of it.
Manifest load_manifest_state(const std::filesystem::path& output_root);

/// Writes clear | foggy side by side. Returns false (and logs a warning)
/// when either input is missing or their heights differ.
bool emit_preview(const std::filesystem::path& clear, const std::filesystem::path& foggy,
                  const std::filesystem::path& out);

/// Side-by-side composite of two images with equal height.
RgbImage compose_side_by_side(const RgbImage& left, const RgbImage& right);

}  // namespace fogsim
