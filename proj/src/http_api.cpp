#include "slicehub/http_api.hpp"

#include <chrono>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "slicehub/error.hpp"

namespace slicehub {

using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownModel:
    case ErrorCode::UnknownBatch:
      return 404;
    case ErrorCode::RejectedInterpolated:
      return 422;
    case ErrorCode::BackendFailure:
    case ErrorCode::ParseFailure:
      return 502;
    case ErrorCode::Io:
      return 500;
    default:
      return 400;
  }
}

namespace {

json result_json(const SlicingResult& r) {
  json j = {{"time_s", r.print_time_s},
            {"material_mm3", r.material_mm3},
            {"status", r.is_sliced() ? "sliced" : "interpolated"}};
  if (r.accuracy_pct) j["accuracy_pct"] = *r.accuracy_pct;
  return j;
}

json entry_json(const ModelIndexEntry& e) {
  json combos = json::array();
  for (const Combo& c : e.available_combos) {
    combos.push_back({{"printer", c.printer_id}, {"material", c.material_id}});
  }
  return {{"id", e.model_id},          {"name", e.name},
          {"tags", e.tags},            {"download_count", e.download_count},
          {"available_combos", combos}, {"created_at", e.created_at}};
}

json status_json(const BatchStatus& st) {
  const auto started = std::chrono::duration_cast<std::chrono::milliseconds>(
                           st.started_at.time_since_epoch())
                           .count();
  return {{"total", st.total},
          {"completed", st.completed},
          {"failed", st.failed},
          {"eta_s", st.eta_s ? json(*st.eta_s) : json(nullptr)},
          {"started_at_ms", started},
          {"finished", st.finished}};
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", std::string(to_string(code))}, {"message", message}}, status);
}

std::string param(const httplib::Request& req, const char* key) {
  return req.has_param(key) ? req.get_param_value(key) : std::string{};
}

std::string form_value(const httplib::Request& req, const char* key) {
  return req.has_file(key) ? req.get_file_value(key).content : std::string{};
}

bool parse_bool(const std::string& s, bool fallback) {
  if (s.empty()) return fallback;
  return !(s == "0" || s == "false" || s == "no" || s == "off");
}

std::vector<std::string> split_tags(const std::string& csv) {
  std::vector<std::string> tags;
  std::stringstream ss(csv);
  for (std::string tag; std::getline(ss, tag, ',');) {
    const auto first = tag.find_first_not_of(" \t");
    const auto last = tag.find_last_not_of(" \t");
    if (first != std::string::npos) tags.push_back(tag.substr(first, last - first + 1));
  }
  return tags;
}

/// Cell rows in the document format, from either a whole document or a bare
/// {"cells": [...]} object.
std::vector<DocumentCell> cells_from_body(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("body is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("cells")) {
    throw Error(ErrorCode::InvalidArgument, "body needs a 'cells' array");
  }
  json wrapped = {{"v", kSchemaVersion}, {"model", ""},  {"printer", ""},
                  {"material", ""},      {"res", json::array()}, {"scl", json::array()},
                  {"cells", j.at("cells")}};
  return parse_document(wrapped.dump()).cells;
}

template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, http_status_for(e.code()), e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, ErrorCode::InvalidArgument, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, ErrorCode::Io, e.what());
    }
  };
}

}  // namespace

HttpService::HttpService(Repository& repo)
    : repo_(repo), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpService::listen_after_bind() { return server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_->is_running()) server_->stop();
}

void HttpService::install_routes() {
  httplib::Server& srv = *server_;

  srv.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
            send_json(res, {{"status", "ok"}});
          }));

  srv.Get("/api/printers", guarded([this](const httplib::Request&, httplib::Response& res) {
            json printers = json::array();
            for (const PrinterInfo& p : repo_.config().printers) {
              printers.push_back({{"id", p.printer_id}, {"name", p.name}, {"materials", p.materials}});
            }
            send_json(res, {{"printers", printers},
                            {"default_printer", repo_.config().default_printer},
                            {"default_material", repo_.config().default_material}});
          }));

  srv.Get("/api/models", guarded([this](const httplib::Request& req, httplib::Response& res) {
            json models = json::array();
            for (const SearchHit& hit :
                 repo_.search(param(req, "q"), param(req, "printer"), param(req, "material"))) {
              json item = entry_json(hit.entry);
              item["preview"] = hit.preview ? result_json(*hit.preview) : json(nullptr);
              models.push_back(std::move(item));
            }
            send_json(res, {{"models", models}});
          }));

  srv.Get("/api/models/:id/download",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string& id = req.path_params.at("id");
            const Download dl = repo_.download(id, param(req, "printer"), param(req, "material"));
            res.set_header("Content-Disposition", "attachment; filename=\"" + id + ".zip\"");
            res.set_header("X-SliceHub-Metadata", dl.has_metadata ? "present" : "missing");
            res.set_content(dl.zip, "application/zip");
          }));

  srv.Post("/api/models", guarded([this](const httplib::Request& req, httplib::Response& res) {
             if (!req.has_file("stl")) {
               throw Error(ErrorCode::InvalidArgument, "multipart field 'stl' is required");
             }
             const auto stl = req.get_file_value("stl");
             std::string name = form_value(req, "name");
             if (name.empty()) name = stl.filename.empty() ? "untitled" : stl.filename;
             const AddModelResult added =
                 repo_.add_model(stl.content, name, split_tags(form_value(req, "tags")),
                                 parse_bool(form_value(req, "share"), true),
                                 form_value(req, "printer"), form_value(req, "material"));
             json body = {{"model_id", added.model_id}, {"created", added.created}};
             body["batch_id"] = added.batch_id ? json(*added.batch_id) : json(nullptr);
             if (added.document) body["document"] = json::parse(serialize(*added.document));
             send_json(res, body, added.created ? 201 : 200);
           }));

  srv.Post("/api/models/:id/results",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const MetadataDocument doc =
                 repo_.upload_results(req.path_params.at("id"), param(req, "printer"),
                                      param(req, "material"), cells_from_body(req.body));
             res.set_content(serialize(doc), "application/json");
           }));

  srv.Post("/api/models/:id/slice",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = req.body.empty() ? json::object() : json::parse(req.body);
             const std::string& id = req.path_params.at("id");
             const std::string printer = body.value("printer", param(req, "printer"));
             const std::string material = body.value("material", param(req, "material"));
             const std::size_t parallelism =
                 body.value("parallelism", repo_.config().default_parallelism);
             std::optional<BatchId> batch;
             if (body.contains("cells")) {
               std::vector<CellIndex> cells;
               for (const json& c : body.at("cells")) {
                 cells.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()});
               }
               batch = repo_.slice_cells(id, printer, material, cells, parallelism);
             } else if (body.contains("fraction")) {
               batch = repo_.slice_fraction(id, printer, material, body.at("fraction").get<double>(),
                                            parallelism);
             } else {
               throw Error(ErrorCode::InvalidArgument, "body needs 'cells' or 'fraction'");
             }
             send_json(res, {{"batch_id", batch ? json(*batch) : json(nullptr)}}, batch ? 202 : 200);
           }));

  srv.Get("/api/batches/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, status_json(repo_.orchestrator().status(req.path_params.at("id"))));
          }));
}

}  // namespace slicehub
