#include "slicehub/slicer.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>
#include <thread>
#include <vector>

#include "slicehub/error.hpp"

extern char** environ;

namespace slicehub {

void validate(const PrintProfile& profile) {
  if (!(profile.layer_height_mm >= 0.02 && profile.layer_height_mm <= 1.0)) {
    throw Error(ErrorCode::InvalidProfile,
                "layer height " + std::to_string(profile.layer_height_mm) + " outside [0.02, 1.0]");
  }
}

PrintProfile profile_for_layer_height(const std::string& printer_id,
                                      const std::string& material_id, double layer_height_mm) {
  std::ostringstream id;
  id.precision(4);
  id << std::fixed << "lh" << layer_height_mm;
  PrintProfile p;
  p.profile_id = id.str();
  p.layer_height_mm = layer_height_mm;
  p.display_name = id.str().substr(2) + " mm";
  p.printer_id = printer_id;
  p.material_id = material_id;
  return p;
}

SlicingResult slice(const SliceRequest& request, const SlicerBackend& backend) {
  validate(request.profile);
  if (!(request.scale > 0.0 && request.scale <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "scale must be in (0, 1]");
  }
  if (!request.mesh || request.mesh->empty()) {
    throw Error(ErrorCode::EmptyMesh, "slice request without a mesh");
  }
  return backend.slice(request);
}

CostEstimate synthetic_cost(const MeshMetrics& metrics, double layer_height_mm, double scale) {
  using namespace synthetic;
  const double volume = metrics.volume_mm3 * scale * scale * scale;
  const double area = metrics.surface_area_mm2 * scale * scale;
  // 20 / 0.2 lands a hair above 100 in binary floating point; the slack
  // keeps exact multiples of the layer height from gaining a phantom layer.
  const double layers = std::max(0.0, std::ceil(metrics.height_mm * scale / layer_height_mm - 1e-9));
  const double material = volume * kInfill + area * kWallMm;
  const double flow = layer_height_mm * kNozzleMm * kSpeedMmPerS;
  return {kLayerChangeS * layers + material / flow, material};
}

SlicingResult SyntheticSlicer::slice(const SliceRequest& request) const {
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  const CostEstimate cost =
      synthetic_cost(compute_metrics(*request.mesh), request.profile.layer_height_mm, request.scale);
  return SlicingResult::sliced(cost.print_time_s, cost.material_mm3);
}

EngineReport parse_engine_output(const std::string& output, double filament_diameter_mm) {
  static const std::regex kTimeSeconds(R"(Print time \(s\):\s*([0-9]+(?:\.[0-9]+)?))");
  static const std::regex kTimePlain(R"(Print time:\s*([0-9]+(?:\.[0-9]+)?))");
  static const std::regex kFilamentVolume(R"(Filament \(mm\^3\):\s*([0-9]+(?:\.[0-9]+)?))");
  static const std::regex kFilamentLength(R"(Filament(?: \(mm\))?:\s*([0-9]+(?:\.[0-9]+)?))");

  std::smatch m;
  EngineReport report;
  if (std::regex_search(output, m, kTimeSeconds) || std::regex_search(output, m, kTimePlain)) {
    report.print_time_s = std::stod(m[1].str());
  } else {
    throw Error(ErrorCode::ParseFailure, "no print time in engine output");
  }
  if (std::regex_search(output, m, kFilamentVolume)) {
    report.material_mm3 = std::stod(m[1].str());
  } else if (std::regex_search(output, m, kFilamentLength)) {
    const double radius = filament_diameter_mm / 2.0;
    report.material_mm3 = std::stod(m[1].str()) * std::numbers::pi * radius * radius;
  } else {
    throw Error(ErrorCode::ParseFailure, "no filament amount in engine output");
  }
  return report;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_setting(double value) {
  std::ostringstream os;
  os.precision(6);
  os << value;
  return os.str();
}

class TempDir {
 public:
  explicit TempDir(const std::filesystem::path& root) {
    static std::atomic<unsigned long> counter{0};
    path_ = root / ("slicehub-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct ProcessOutput {
  int exit_code = -1;
  std::string out;
  std::string err;
};

ProcessOutput run_process(const std::vector<std::string>& argv, const std::filesystem::path& dir) {
  const std::string out_path = (dir / "stdout.txt").string();
  const std::string err_path = (dir / "stderr.txt").string();

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);

  std::vector<char*> args;
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw Error(ErrorCode::BackendFailure,
                "cannot start engine " + argv[0] + ": " + std::strerror(rc));
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw Error(ErrorCode::BackendFailure, "waitpid failed");
  }
  ProcessOutput result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  result.out = read_file(out_path);
  result.err = read_file(err_path);
  return result;
}

}  // namespace

SlicingResult ExternalSlicer::slice(const SliceRequest& request) const {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(config_.engine_path, ec) ||
      ::access(config_.engine_path.c_str(), X_OK) != 0) {
    throw Error(ErrorCode::BackendFailure,
                "engine not found or not executable: " + config_.engine_path.string());
  }

  TempDir tmp(config_.temp_root);
  const auto model_path = tmp.path() / "model.stl";
  {
    std::ofstream out(model_path, std::ios::binary);
    out << write_stl_binary(scaled(*request.mesh, request.scale));
  }

  std::vector<std::string> argv = {config_.engine_path.string(), "slice", "-j",
                                   config_.settings_file.string(), "-l", model_path.string(),
                                   "-o", (tmp.path() / "out.gcode").string()};
  std::map<std::string, std::string> settings = config_.extra_settings;
  settings["layer_height"] = format_setting(request.profile.layer_height_mm);
  for (const auto& [key, value] : settings) {
    argv.push_back("-s");
    argv.push_back(key + "=" + value);
  }

  const ProcessOutput proc = run_process(argv, tmp.path());
  if (proc.exit_code != 0) {
    throw Error(ErrorCode::BackendFailure,
                "engine exited with " + std::to_string(proc.exit_code) + ": " + proc.err);
  }
  // CuraEngine logs to stderr; older builds print to stdout.
  const EngineReport report =
      parse_engine_output(proc.out + "\n" + proc.err, config_.filament_diameter_mm);
  return SlicingResult::sliced(report.print_time_s, report.material_mm3);
}

}  // namespace slicehub
