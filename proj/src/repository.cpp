#include "slicehub/repository.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "slicehub/error.hpp"
#include "slicehub/interpolation.hpp"
#include "slicehub/zip.hpp"

namespace slicehub {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<PrinterInfo> default_printer_catalogue() {
  const std::vector<std::string> materials = {"pla", "abs", "petg", "tpu", "nylon", "pc", "cpe"};
  const std::vector<std::pair<std::string, std::string>> printers = {
      {"um3", "Ultimaker 3"},
      {"um2plus", "Ultimaker 2+"},
      {"ums5", "Ultimaker S5"},
      {"prusa-mk3s", "Prusa i3 MK3S"},
      {"ender3", "Creality Ender 3"},
      {"anycubic-i3", "Anycubic i3 Mega"},
      {"ff-creator", "FlashForge Creator Pro"},
      {"lulzbot-mini", "LulzBot Mini 2"},
      {"replicator", "MakerBot Replicator+"},
      {"raise3d-n2", "Raise3D N2"},
  };
  std::vector<PrinterInfo> out;
  for (const auto& [id, name] : printers) out.push_back({id, name, materials});
  return out;
}

std::string content_id(const std::string& stl_bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(stl_bytes.data(), stl_bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < 8; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& data) {
  static std::atomic<unsigned long> counter{0};
  const fs::path tmp = path.string() + ".tmp" + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << data;
    if (!out.flush()) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

json entry_to_json(const ModelIndexEntry& e) {
  json combos = json::array();
  for (const Combo& c : e.available_combos) combos.push_back({c.printer_id, c.material_id});
  return {{"id", e.model_id},       {"name", e.name},
          {"tags", e.tags},         {"downloads", e.download_count},
          {"combos", combos},       {"created_at", e.created_at}};
}

ModelIndexEntry entry_from_json(const json& j) {
  ModelIndexEntry e;
  e.model_id = j.at("id").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.tags = j.at("tags").get<std::vector<std::string>>();
  e.download_count = j.at("downloads").get<std::uint64_t>();
  for (const json& c : j.at("combos")) {
    e.available_combos.push_back({c.at(0).get<std::string>(), c.at(1).get<std::string>()});
  }
  e.created_at = j.at("created_at").get<std::string>();
  return e;
}

int match_quality(const ModelIndexEntry& e, const std::string& needle) {
  if (needle.empty()) return 0;
  const std::string name = lower(e.name);
  int best = -1;
  if (name == needle) best = 3;
  else if (name.starts_with(needle)) best = 2;
  else if (name.find(needle) != std::string::npos) best = 1;
  for (const std::string& tag : e.tags) {
    const std::string t = lower(tag);
    if (t == needle) best = std::max(best, 3);
    else if (t.find(needle) != std::string::npos) best = std::max(best, 1);
  }
  return best;
}

}  // namespace

Repository::Repository(RepositoryConfig config, std::shared_ptr<const SlicerBackend> backend,
                       std::shared_ptr<Executor> executor)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      orchestrator_(std::make_unique<Orchestrator>(std::move(executor))) {
  if (config_.root.empty()) throw Error(ErrorCode::InvalidArgument, "repository root not set");
  if (config_.grid_size < 2) throw Error(ErrorCode::TooFewLevels, "grid size below 2");
  fs::create_directories(config_.root / "models");
  load_index();
}

Repository::~Repository() { wait_idle(); }

void Repository::wait_idle() {
  for (const BatchId& id : orchestrator_->batch_ids()) orchestrator_->wait(id);
}

void Repository::load_index() {
  const fs::path path = config_.root / "index.json";
  if (!fs::exists(path)) return;
  try {
    const json j = json::parse(read_file(path));
    for (const json& item : j.at("models")) {
      ModelIndexEntry e = entry_from_json(item);
      index_.emplace(e.model_id, std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("corrupt index.json: ") + e.what());
  }
}

void Repository::save_index_locked() const {
  json models = json::array();
  for (const auto& [id, e] : index_) models.push_back(entry_to_json(e));
  write_file_atomic(config_.root / "index.json", json{{"models", models}}.dump());
}

Combo Repository::resolve_combo(const std::string& printer_id,
                                const std::string& material_id) const {
  Combo c{printer_id.empty() ? config_.default_printer : printer_id,
          material_id.empty() ? config_.default_material : material_id};
  const auto printer = std::find_if(config_.printers.begin(), config_.printers.end(),
                                    [&](const PrinterInfo& p) { return p.printer_id == c.printer_id; });
  if (printer == config_.printers.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown printer '" + c.printer_id + "'");
  }
  if (std::find(printer->materials.begin(), printer->materials.end(), c.material_id) ==
      printer->materials.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "printer '" + c.printer_id + "' has no material '" + c.material_id + "'");
  }
  return c;
}

fs::path Repository::model_dir(const std::string& model_id) const {
  return config_.root / "models" / model_id;
}

fs::path Repository::document_path(const std::string& model_id, const Combo& combo) const {
  return model_dir(model_id) / ("meta-" + combo.printer_id + "-" + combo.material_id + ".json");
}

std::shared_ptr<std::mutex> Repository::model_lock(const std::string& model_id) {
  std::lock_guard lock(locks_mutex_);
  auto& m = model_locks_[model_id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

void Repository::require_model(const std::string& model_id) const {
  std::lock_guard lock(index_mutex_);
  if (!index_.contains(model_id)) throw Error(ErrorCode::UnknownModel, "no model " + model_id);
}

std::shared_ptr<const TriangleMesh> Repository::mesh_for(const std::string& model_id) {
  std::lock_guard lock(mesh_mutex_);
  auto& mesh = meshes_[model_id];
  if (!mesh) mesh = std::make_shared<const TriangleMesh>(parse_stl(model_stl(model_id)));
  return mesh;
}

std::string Repository::model_stl(const std::string& model_id) const {
  require_model(model_id);
  return read_file(model_dir(model_id) / "model.stl");
}

std::optional<MetadataDocument> Repository::load_document(const std::string& model_id,
                                                          const std::string& printer_id,
                                                          const std::string& material_id) const {
  const fs::path path = document_path(model_id, resolve_combo(printer_id, material_id));
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  return parse_document(read_file(path));
}

SliceGrid Repository::current_grid(const std::string& model_id, const Combo& combo) const {
  if (auto doc = load_document(model_id, combo.printer_id, combo.material_id)) return to_grid(*doc);
  return SliceGrid(build_axes(config_.grid_size, config_.grid_size));
}

std::vector<ModelIndexEntry> Repository::index() const {
  std::lock_guard lock(index_mutex_);
  std::vector<ModelIndexEntry> out;
  for (const auto& [id, e] : index_) out.push_back(e);
  return out;
}

std::optional<ModelIndexEntry> Repository::entry(const std::string& model_id) const {
  std::lock_guard lock(index_mutex_);
  const auto it = index_.find(model_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<SliceJob> Repository::make_jobs(const std::string& model_id, const Combo& combo,
                                            const GridAxes& axes,
                                            const std::vector<CellIndex>& cells) {
  const auto mesh = mesh_for(model_id);
  std::vector<SliceJob> jobs;
  jobs.reserve(cells.size());
  for (const CellIndex idx : cells) {
    SliceJob job;
    job.model_id = model_id;
    job.cell = idx;
    job.request.mesh = mesh;
    job.request.profile = profile_for_layer_height(combo.printer_id, combo.material_id,
                                                   axes.resolutions.at(idx.r));
    job.request.scale = axes.scales.at(idx.s);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

BatchId Repository::start_batch(const std::string& model_id, const Combo& combo,
                                std::vector<SliceJob> jobs, std::size_t parallelism) {
  parallelism = std::min({parallelism, config_.parallelism_cap, jobs.size()});
  const DocKey key{model_id, combo};
  {
    std::lock_guard lock(pending_mutex_);
    for (const SliceJob& job : jobs) pending_[key].insert(job.cell);
  }
  return orchestrator_->submit_batch(
      std::move(jobs), std::max<std::size_t>(parallelism, 1), backend_,
      [this, model_id, combo](const std::vector<SliceJob>& done) { commit(model_id, combo, done); });
}

void Repository::commit(const std::string& model_id, const Combo& combo,
                        const std::vector<SliceJob>& jobs) {
  std::vector<std::pair<CellIndex, SlicingResult>> results;
  for (const SliceJob& job : jobs) {
    if (job.state == JobState::Done) results.emplace_back(job.cell, *job.result);
  }
  {
    const auto lock = model_lock(model_id);
    std::lock_guard guard(*lock);
    store_grid_locked(model_id, combo, merge_results(current_grid(model_id, combo), results));
  }
  std::lock_guard lock(pending_mutex_);
  auto& cells = pending_[DocKey{model_id, combo}];
  for (const SliceJob& job : jobs) cells.erase(job.cell);
}

MetadataDocument Repository::store_grid_locked(const std::string& model_id, const Combo& combo,
                                               const SliceGrid& grid) {
  SliceGrid final_grid = grid;
  if (grid.sliced_cells().size() >= 3 && !grid.unsliced_cells().empty()) {
    try {
      final_grid = interpolate_grid(grid);
    } catch (const Error& e) {
      // Degenerate sample layouts (one row only) keep their old estimates.
      if (e.code() != ErrorCode::DegenerateDesign) throw;
    }
  }
  MetadataDocument doc = make_document(model_id, combo.printer_id, combo.material_id, final_grid);
  write_file_atomic(document_path(model_id, combo), serialize(doc));

  std::lock_guard lock(index_mutex_);
  auto it = index_.find(model_id);
  if (it != index_.end()) {
    auto& combos = it->second.available_combos;
    if (std::find(combos.begin(), combos.end(), combo) == combos.end()) {
      combos.push_back(combo);
      std::sort(combos.begin(), combos.end());
      save_index_locked();
    }
  }
  return doc;
}

AddModelResult Repository::add_model(const std::string& stl_bytes, const std::string& name,
                                     const std::vector<std::string>& tags, bool share,
                                     const std::string& printer_id,
                                     const std::string& material_id) {
  const Combo combo = resolve_combo(printer_id, material_id);
  auto mesh = std::make_shared<const TriangleMesh>(parse_stl(stl_bytes));
  AddModelResult result;
  result.model_id = content_id(stl_bytes);

  const GridAxes axes = build_axes(config_.grid_size, config_.grid_size);
  const std::vector<CellIndex> cells = place_samples(axes, config_.default_fraction);

  if (!share) {
    std::vector<SliceJob> jobs;
    for (const CellIndex idx : cells) {
      SliceJob job;
      job.model_id = result.model_id;
      job.cell = idx;
      job.request = {mesh, profile_for_layer_height(combo.printer_id, combo.material_id,
                                                    axes.resolutions[idx.r]),
                     axes.scales[idx.s]};
      jobs.push_back(std::move(job));
    }
    const BatchId id = orchestrator_->submit_batch(
        std::move(jobs), std::min(config_.default_parallelism, config_.parallelism_cap), backend_);
    std::vector<std::pair<CellIndex, SlicingResult>> results;
    for (const SliceJob& job : orchestrator_->wait(id)) {
      if (job.state == JobState::Done) results.emplace_back(job.cell, *job.result);
    }
    SliceGrid grid = merge_results(SliceGrid(axes), results);
    if (grid.sliced_cells().size() >= 3) grid = interpolate_grid(grid);
    result.document = make_document(result.model_id, combo.printer_id, combo.material_id, grid);
    return result;
  }

  const auto lock = model_lock(result.model_id);
  std::lock_guard guard(*lock);
  {
    std::lock_guard index_lock(index_mutex_);
    if (index_.contains(result.model_id)) return result;  // same bytes, same model

    fs::create_directories(model_dir(result.model_id));
    write_file_atomic(model_dir(result.model_id) / "model.stl", stl_bytes);
    ModelIndexEntry e;
    e.model_id = result.model_id;
    e.name = name;
    e.tags = tags;
    e.created_at = now_iso8601();
    index_.emplace(e.model_id, e);
    save_index_locked();
  }
  {
    std::lock_guard mesh_lock(mesh_mutex_);
    meshes_[result.model_id] = mesh;
  }
  result.created = true;
  result.batch_id = start_batch(result.model_id, combo, make_jobs(result.model_id, combo, axes, cells),
                                config_.default_parallelism);
  return result;
}

std::vector<SearchHit> Repository::search(const std::string& query, const std::string& printer_id,
                                          const std::string& material_id) const {
  const Combo combo = resolve_combo(printer_id, material_id);
  const std::string needle = lower(query);

  std::vector<std::pair<int, ModelIndexEntry>> ranked;
  for (const ModelIndexEntry& e : index()) {
    const int quality = match_quality(e, needle);
    if (quality >= 0) ranked.emplace_back(quality, e);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    if (a.second.download_count != b.second.download_count) {
      return a.second.download_count > b.second.download_count;
    }
    return std::tie(a.second.name, a.second.model_id) < std::tie(b.second.name, b.second.model_id);
  });

  std::vector<SearchHit> hits;
  for (auto& [quality, e] : ranked) {
    SearchHit hit;
    if (auto doc = load_document(e.model_id, combo.printer_id, combo.material_id)) {
      const SliceGrid grid = to_grid(*doc);
      if (auto idx = nearest_cell(grid.axes(), kPreviewLayerMm, kPreviewScale)) {
        hit.preview = grid.at(*idx);
      }
    }
    hit.entry = std::move(e);
    hits.push_back(std::move(hit));
  }
  return hits;
}

Download Repository::download(const std::string& model_id, const std::string& printer_id,
                              const std::string& material_id) {
  const Combo combo = resolve_combo(printer_id, material_id);
  const std::string stl = model_stl(model_id);  // throws UnknownModel

  Download out;
  std::string meta;
  if (auto doc = load_document(model_id, combo.printer_id, combo.material_id)) {
    meta = serialize(*doc);
    out.has_metadata = true;
  } else {
    MetadataDocument empty;
    empty.model_id = model_id;
    empty.printer_id = combo.printer_id;
    empty.material_id = combo.material_id;
    meta = serialize(empty);
  }
  out.zip = write_zip({{"model.stl", stl}, {"meta.json", meta}});

  const auto lock = model_lock(model_id);
  std::lock_guard guard(*lock);
  std::lock_guard index_lock(index_mutex_);
  ++index_.at(model_id).download_count;
  save_index_locked();
  return out;
}

MetadataDocument Repository::upload_results(const std::string& model_id,
                                            const std::string& printer_id,
                                            const std::string& material_id,
                                            const std::vector<DocumentCell>& cells) {
  const Combo combo = resolve_combo(printer_id, material_id);
  require_model(model_id);
  std::vector<std::pair<CellIndex, SlicingResult>> results;
  for (const DocumentCell& c : cells) {
    if (c.status != ResultStatus::Sliced) {
      throw Error(ErrorCode::RejectedInterpolated,
                  "only sliced results are accepted; interpolation is recomputed locally");
    }
    if (!(c.time_s >= 0.0) || !(c.material_mm3 >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "negative time or material");
    }
    results.emplace_back(CellIndex{c.r_idx, c.s_idx}, SlicingResult::sliced(c.time_s, c.material_mm3));
  }

  const auto lock = model_lock(model_id);
  std::lock_guard guard(*lock);
  return store_grid_locked(model_id, combo, merge_results(current_grid(model_id, combo), results));
}

std::optional<BatchId> Repository::slice_cells(const std::string& model_id,
                                               const std::string& printer_id,
                                               const std::string& material_id,
                                               const std::vector<CellIndex>& cells,
                                               std::size_t parallelism) {
  const Combo combo = resolve_combo(printer_id, material_id);
  require_model(model_id);
  if (parallelism < 1 || parallelism > config_.parallelism_cap) {
    throw Error(ErrorCode::ParallelismOutOfRange,
                "parallelism " + std::to_string(parallelism) + " outside [1, " +
                    std::to_string(config_.parallelism_cap) + "]");
  }
  const SliceGrid grid = current_grid(model_id, combo);
  std::vector<CellIndex> todo;
  for (const CellIndex idx : cells) {
    const auto& cell = grid.at(idx);  // throws IndexOutOfRange
    if (!cell || !cell->is_sliced()) todo.push_back(idx);
  }
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  if (todo.empty()) return std::nullopt;
  return start_batch(model_id, combo, make_jobs(model_id, combo, grid.axes(), todo), parallelism);
}

std::optional<BatchId> Repository::slice_fraction(const std::string& model_id,
                                                  const std::string& printer_id,
                                                  const std::string& material_id, double fraction,
                                                  std::size_t parallelism) {
  const Combo combo = resolve_combo(printer_id, material_id);
  require_model(model_id);
  const SliceGrid grid = current_grid(model_id, combo);
  return slice_cells(model_id, combo.printer_id, combo.material_id,
                     place_samples(grid.axes(), fraction), parallelism);
}

std::vector<BatchId> Repository::backfill_tick(std::size_t capacity) {
  std::vector<BatchId> started;
  if (capacity == 0) return started;

  std::vector<ModelIndexEntry> models = index();
  std::stable_sort(models.begin(), models.end(), [](const auto& a, const auto& b) {
    return a.download_count > b.download_count;
  });

  for (const ModelIndexEntry& e : models) {
    for (const Combo& combo : e.available_combos) {
      if (capacity == 0) return started;
      const SliceGrid grid = current_grid(e.model_id, combo);
      std::vector<CellIndex> todo;
      {
        std::lock_guard lock(pending_mutex_);
        const auto& in_flight = pending_[DocKey{e.model_id, combo}];
        for (const CellIndex idx : grid.unsliced_cells()) {
          if (todo.size() == capacity) break;
          if (!in_flight.contains(idx)) todo.push_back(idx);
        }
      }
      if (todo.empty()) continue;
      capacity -= todo.size();
      started.push_back(start_batch(e.model_id, combo, make_jobs(e.model_id, combo, grid.axes(), todo),
                                    config_.default_parallelism));
    }
  }
  return started;
}

}  // namespace slicehub
