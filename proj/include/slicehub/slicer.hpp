#ifndef SLICEHUB_SLICER_HPP
#define SLICEHUB_SLICER_HPP

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "slicehub/geometry.hpp"

namespace slicehub {

struct PrintProfile {
  std::string profile_id;
  double layer_height_mm = 0.2;
  std::string display_name;
  std::string printer_id;
  std::string material_id;
};

/// Throws InvalidProfile unless 0.02 <= layer height <= 1.0.
void validate(const PrintProfile& profile);

/// Profile synthesized for an arbitrary layer height on a printer/material.
PrintProfile profile_for_layer_height(const std::string& printer_id,
                                      const std::string& material_id, double layer_height_mm);

enum class ResultStatus { Sliced, Interpolated };

struct SlicingResult {
  double print_time_s = 0.0;
  double material_mm3 = 0.0;
  ResultStatus status = ResultStatus::Sliced;
  std::optional<double> accuracy_pct;  // present iff Interpolated

  static SlicingResult sliced(double time_s, double material_mm3) {
    return {time_s, material_mm3, ResultStatus::Sliced, std::nullopt};
  }
  static SlicingResult interpolated(double time_s, double material_mm3, double accuracy_pct) {
    return {time_s, material_mm3, ResultStatus::Interpolated, accuracy_pct};
  }

  bool is_sliced() const { return status == ResultStatus::Sliced; }

  friend bool operator==(const SlicingResult&, const SlicingResult&) = default;
};

struct SliceRequest {
  std::shared_ptr<const TriangleMesh> mesh;
  PrintProfile profile;
  double scale = 1.0;  // fraction of the original size, (0, 1]
};

/// Seam for slicing engines. Implementations must be callable from many
/// threads at once.
class SlicerBackend {
 public:
  virtual ~SlicerBackend() = default;
  virtual SlicingResult slice(const SliceRequest& request) const = 0;
};

/// Validates the request and delegates to the backend.
SlicingResult slice(const SliceRequest& request, const SlicerBackend& backend);

namespace synthetic {
inline constexpr double kInfill = 0.2;
inline constexpr double kWallMm = 1.2;
inline constexpr double kNozzleMm = 0.4;
inline constexpr double kSpeedMmPerS = 50.0;
inline constexpr double kLayerChangeS = 2.0;
}  // namespace synthetic

struct CostEstimate {
  double print_time_s = 0.0;
  double material_mm3 = 0.0;
};

/// Closed-form FDM cost model:
///   material = V s^3 * infill + A s^2 * wall
///   time     = layer_change * ceil(h s / lh) + material / (lh * nozzle * speed)
CostEstimate synthetic_cost(const MeshMetrics& metrics, double layer_height_mm, double scale);

/// Deterministic analytic slicer. `simulated_delay` makes every call sleep,
/// which is how the scheduling tests model a slow engine.
class SyntheticSlicer final : public SlicerBackend {
 public:
  explicit SyntheticSlicer(std::chrono::milliseconds simulated_delay = {})
      : delay_(simulated_delay) {}

  SlicingResult slice(const SliceRequest& request) const override;

 private:
  std::chrono::milliseconds delay_;
};

struct ExternalEngineConfig {
  std::filesystem::path engine_path;    // e.g. CuraEngine
  std::filesystem::path settings_file;  // default machine/material settings (-j)
  std::map<std::string, std::string> extra_settings;  // passed as -s key=value
  double filament_diameter_mm = 2.85;  // for converting filament length to volume
  std::filesystem::path temp_root = std::filesystem::temp_directory_path();
};

/// What could be scraped from the engine's terminal output.
struct EngineReport {
  double print_time_s = 0.0;
  double material_mm3 = 0.0;
};

/// Recognizes `Print time (s): N` / `Print time: N` and
/// `Filament (mm^3): N` / `Filament (mm): N` / `Filament: N` (length in mm,
/// converted with the filament diameter). Throws ParseFailure.
EngineReport parse_engine_output(const std::string& output, double filament_diameter_mm);

/// Runs `<engine> slice -j <settings> -l <model.stl> -o <out.gcode> -s key=value...`
/// on a pre-scaled copy of the mesh inside a private temp directory that is
/// removed afterwards, gcode included.
class ExternalSlicer final : public SlicerBackend {
 public:
  explicit ExternalSlicer(ExternalEngineConfig config) : config_(std::move(config)) {}

  SlicingResult slice(const SliceRequest& request) const override;

 private:
  ExternalEngineConfig config_;
};

}  // namespace slicehub

#endif  // SLICEHUB_SLICER_HPP
