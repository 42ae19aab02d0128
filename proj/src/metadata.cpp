#include "slicehub/metadata.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include <json.hpp>

#include "slicehub/error.hpp"

namespace slicehub {

using nlohmann::json;

double quantize(double value) { return std::round(value * 10.0) / 10.0; }

MetadataDocument make_document(const std::string& model_id, const std::string& printer_id,
                               const std::string& material_id, const SliceGrid& grid) {
  MetadataDocument doc;
  doc.model_id = model_id;
  doc.printer_id = printer_id;
  doc.material_id = material_id;
  doc.axes = grid.axes();
  for (const CellIndex idx : grid.all_cells()) {
    const auto& cell = grid.at(idx);
    if (!cell) continue;
    DocumentCell dc;
    dc.r_idx = idx.r;
    dc.s_idx = idx.s;
    dc.time_s = quantize(cell->print_time_s);
    dc.material_mm3 = quantize(cell->material_mm3);
    dc.status = cell->status;
    if (cell->accuracy_pct) dc.accuracy_pct = quantize(*cell->accuracy_pct);
    doc.cells.push_back(dc);
  }
  return doc;
}

SliceGrid to_grid(const MetadataDocument& doc) {
  SliceGrid grid(doc.axes);
  std::set<CellIndex> seen;
  for (const DocumentCell& c : doc.cells) {
    const CellIndex idx{c.r_idx, c.s_idx};
    if (!seen.insert(idx).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate cell (" + std::to_string(c.r_idx) + ", " +
                                                  std::to_string(c.s_idx) + ")");
    }
    grid.at(idx) = SlicingResult{c.time_s, c.material_mm3, c.status, c.accuracy_pct};
  }
  return grid;
}

std::string serialize(const MetadataDocument& doc) {
  json cells = json::array();
  for (const DocumentCell& c : doc.cells) {
    json row = {c.r_idx, c.s_idx, c.time_s, c.material_mm3,
                c.status == ResultStatus::Sliced ? "S" : "I"};
    if (c.status == ResultStatus::Interpolated) row.push_back(c.accuracy_pct.value_or(0.0));
    cells.push_back(std::move(row));
  }
  json j = {{"v", doc.schema_version},    {"model", doc.model_id},
            {"printer", doc.printer_id},  {"material", doc.material_id},
            {"res", doc.axes.resolutions}, {"scl", doc.axes.scales},
            {"cells", std::move(cells)}};
  return j.dump();
}

MetadataDocument parse_document(const std::string& text) {
  MetadataDocument doc;
  try {
    const json j = json::parse(text);
    doc.schema_version = j.at("v").get<int>();
    doc.model_id = j.at("model").get<std::string>();
    doc.printer_id = j.at("printer").get<std::string>();
    doc.material_id = j.at("material").get<std::string>();
    doc.axes.resolutions = j.at("res").get<std::vector<double>>();
    doc.axes.scales = j.at("scl").get<std::vector<double>>();
    for (const json& row : j.at("cells")) {
      if (!row.is_array() || row.size() < 5) throw Error(ErrorCode::InvalidArgument, "bad cell row");
      DocumentCell c;
      c.r_idx = row.at(0).get<std::size_t>();
      c.s_idx = row.at(1).get<std::size_t>();
      c.time_s = row.at(2).get<double>();
      c.material_mm3 = row.at(3).get<double>();
      const std::string status = row.at(4).get<std::string>();
      if (status == "S") {
        c.status = ResultStatus::Sliced;
      } else if (status == "I") {
        c.status = ResultStatus::Interpolated;
        c.accuracy_pct = row.size() > 5 ? row.at(5).get<double>() : 0.0;
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown cell status '" + status + "'");
      }
      doc.cells.push_back(c);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed metadata document: ") + e.what());
  }
  std::sort(doc.cells.begin(), doc.cells.end(), [](const DocumentCell& a, const DocumentCell& b) {
    return std::tie(a.r_idx, a.s_idx) < std::tie(b.r_idx, b.s_idx);
  });
  return doc;
}

std::size_t count_status(const MetadataDocument& doc, ResultStatus status) {
  return static_cast<std::size_t>(std::count_if(
      doc.cells.begin(), doc.cells.end(), [&](const DocumentCell& c) { return c.status == status; }));
}

}  // namespace slicehub
