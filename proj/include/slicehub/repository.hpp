#ifndef SLICEHUB_REPOSITORY_HPP
#define SLICEHUB_REPOSITORY_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "slicehub/metadata.hpp"
#include "slicehub/orchestrator.hpp"

namespace slicehub {

struct PrinterInfo {
  std::string printer_id;
  std::string name;
  std::vector<std::string> materials;
};

/// Ten common FDM printers, each with the same seven plastics.
std::vector<PrinterInfo> default_printer_catalogue();

struct Combo {
  std::string printer_id;
  std::string material_id;

  friend auto operator<=>(const Combo&, const Combo&) = default;
};

struct ModelIndexEntry {
  std::string model_id;
  std::string name;
  std::vector<std::string> tags;
  std::uint64_t download_count = 0;
  std::vector<Combo> available_combos;  // sorted, one per metadata document
  std::string created_at;               // ISO-8601 UTC

  friend bool operator==(const ModelIndexEntry&, const ModelIndexEntry&) = default;
};

struct RepositoryConfig {
  std::filesystem::path root;
  std::size_t grid_size = 16;
  double default_fraction = 0.10;
  std::size_t default_parallelism = 256;
  std::size_t parallelism_cap = kMaxParallelism;
  std::string default_printer = "um3";
  std::string default_material = "pla";
  std::vector<PrinterInfo> printers = default_printer_catalogue();
};

struct AddModelResult {
  std::string model_id;
  bool created = false;
  std::optional<BatchId> batch_id;            // shared models only
  std::optional<MetadataDocument> document;   // unshared models only
};

struct SearchHit {
  ModelIndexEntry entry;
  std::optional<SlicingResult> preview;  // cell nearest 0.15 mm / 100 %
};

struct Download {
  std::string zip;  // model.stl + meta.json
  bool has_metadata = false;
};

inline constexpr double kPreviewLayerMm = 0.15;
inline constexpr double kPreviewScale = 1.0;

/// Hex SHA-256 prefix of the STL bytes; identical uploads share an id.
std::string content_id(const std::string& stl_bytes);

/// Filesystem-backed model repository:
///
///   <root>/index.json
///   <root>/models/<id>/model.stl
///   <root>/models/<id>/meta-<printer>-<material>.json
///
/// Writes to one model's documents and index entry happen under that model's
/// lock; files are replaced atomically, so readers always see the last
/// committed version.
class Repository {
 public:
  Repository(RepositoryConfig config, std::shared_ptr<const SlicerBackend> backend,
             std::shared_ptr<Executor> executor = std::make_shared<ThreadExecutor>());
  ~Repository();
  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;

  /// Shared models are stored and get a batch slicing the default fraction of
  /// the default grid, the rest interpolated on completion. Unshared models
  /// are sliced and interpolated synchronously and nothing is written.
  /// Throws MalformedStl / EmptyMesh.
  AddModelResult add_model(const std::string& stl_bytes, const std::string& name,
                           const std::vector<std::string>& tags, bool share,
                           const std::string& printer_id = {}, const std::string& material_id = {});

  /// Case-insensitive match on name and tags, best match then most
  /// downloaded first. An empty query lists everything.
  std::vector<SearchHit> search(const std::string& query, const std::string& printer_id = {},
                                const std::string& material_id = {}) const;

  /// Throws UnknownModel. Models without a document still download, with an
  /// empty-axes meta.json.
  Download download(const std::string& model_id, const std::string& printer_id = {},
                    const std::string& material_id = {});

  /// Merges externally computed sliced cells. Throws UnknownModel,
  /// RejectedInterpolated, IndexOutOfRange.
  MetadataDocument upload_results(const std::string& model_id, const std::string& printer_id,
                                  const std::string& material_id,
                                  const std::vector<DocumentCell>& cells);

  /// Starts a batch for the given cells; already sliced cells are skipped.
  /// Returns nullopt when nothing is left to slice.
  std::optional<BatchId> slice_cells(const std::string& model_id, const std::string& printer_id,
                                     const std::string& material_id,
                                     const std::vector<CellIndex>& cells,
                                     std::size_t parallelism);

  /// Raises the sliced share of the document to `fraction` by slicing the
  /// sub-lattice cells not yet sliced.
  std::optional<BatchId> slice_fraction(const std::string& model_id,
                                        const std::string& printer_id,
                                        const std::string& material_id, double fraction,
                                        std::size_t parallelism);

  /// Queues up to `capacity` missing cells across incomplete documents, most
  /// downloaded models first. Cells already in flight are not queued again.
  std::vector<BatchId> backfill_tick(std::size_t capacity);

  std::optional<MetadataDocument> load_document(const std::string& model_id,
                                                const std::string& printer_id,
                                                const std::string& material_id) const;
  std::vector<ModelIndexEntry> index() const;
  std::optional<ModelIndexEntry> entry(const std::string& model_id) const;
  std::string model_stl(const std::string& model_id) const;

  const RepositoryConfig& config() const { return config_; }
  Orchestrator& orchestrator() { return *orchestrator_; }
  const Orchestrator& orchestrator() const { return *orchestrator_; }

  /// Blocks until every batch started so far has been merged.
  void wait_idle();

 private:
  struct DocKey {
    std::string model_id;
    Combo combo;
    friend auto operator<=>(const DocKey&, const DocKey&) = default;
  };

  Combo resolve_combo(const std::string& printer_id, const std::string& material_id) const;
  std::filesystem::path model_dir(const std::string& model_id) const;
  std::filesystem::path document_path(const std::string& model_id, const Combo& combo) const;
  std::shared_ptr<std::mutex> model_lock(const std::string& model_id);
  std::shared_ptr<const TriangleMesh> mesh_for(const std::string& model_id);
  SliceGrid current_grid(const std::string& model_id, const Combo& combo) const;
  void require_model(const std::string& model_id) const;

  std::vector<SliceJob> make_jobs(const std::string& model_id, const Combo& combo,
                                  const GridAxes& axes, const std::vector<CellIndex>& cells);
  BatchId start_batch(const std::string& model_id, const Combo& combo,
                      std::vector<SliceJob> jobs, std::size_t parallelism);
  void commit(const std::string& model_id, const Combo& combo, const std::vector<SliceJob>& jobs);
  MetadataDocument store_grid_locked(const std::string& model_id, const Combo& combo,
                                     const SliceGrid& grid);

  void load_index();
  void save_index_locked() const;

  RepositoryConfig config_;
  std::shared_ptr<const SlicerBackend> backend_;

  mutable std::mutex index_mutex_;
  std::map<std::string, ModelIndexEntry> index_;

  std::mutex locks_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> model_locks_;

  std::mutex mesh_mutex_;
  std::map<std::string, std::shared_ptr<const TriangleMesh>> meshes_;

  std::mutex pending_mutex_;
  std::map<DocKey, std::set<CellIndex>> pending_;

  // Must stay last: its destructor drains batches whose handlers use the
  // members above.
  std::unique_ptr<Orchestrator> orchestrator_;
};

}  // namespace slicehub

#endif  // SLICEHUB_REPOSITORY_HPP
