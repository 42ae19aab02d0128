#ifndef SLICEHUB_METADATA_HPP
#define SLICEHUB_METADATA_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "slicehub/grid.hpp"

namespace slicehub {

inline constexpr int kSchemaVersion = 1;

struct DocumentCell {
  std::size_t r_idx = 0;
  std::size_t s_idx = 0;
  double time_s = 0.0;
  double material_mm3 = 0.0;
  ResultStatus status = ResultStatus::Sliced;
  std::optional<double> accuracy_pct;

  friend bool operator==(const DocumentCell&, const DocumentCell&) = default;
};

/// Per model and printer/material record of every known grid cell. On disk
/// it is compact JSON:
///
///   {"v":1,"model":"..","printer":"..","material":"..",
///    "res":[0.06,...],"scl":[1.0,...],
///    "cells":[[r,s,time,material,"S"],[r,s,time,material,"I",accuracy],...]}
///
/// Times, volumes and accuracies carry one decimal.
struct MetadataDocument {
  int schema_version = kSchemaVersion;
  std::string model_id;
  std::string printer_id;
  std::string material_id;
  GridAxes axes;
  std::vector<DocumentCell> cells;  // sorted by (r_idx, s_idx), unique

  friend bool operator==(const MetadataDocument&, const MetadataDocument&) = default;
};

/// Rounds to one decimal, the resolution stored in documents.
double quantize(double value);

MetadataDocument make_document(const std::string& model_id, const std::string& printer_id,
                               const std::string& material_id, const SliceGrid& grid);

/// Throws IndexOutOfRange for cells outside the axes and InvalidArgument for
/// duplicate cells.
SliceGrid to_grid(const MetadataDocument& doc);

std::string serialize(const MetadataDocument& doc);

/// Throws InvalidArgument on malformed input.
MetadataDocument parse_document(const std::string& text);

std::size_t count_status(const MetadataDocument& doc, ResultStatus status);

}  // namespace slicehub

#endif  // SLICEHUB_METADATA_HPP
