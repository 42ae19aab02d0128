#ifndef SLICEHUB_HTTP_API_HPP
#define SLICEHUB_HTTP_API_HPP

#include <memory>
#include <string>

#include "slicehub/error.hpp"
#include "slicehub/repository.hpp"

namespace httplib {
class Server;
}

namespace slicehub {

/// REST front end over a Repository.
///
///   GET  /api/health
///   GET  /api/printers
///   GET  /api/models?q=&printer=&material=
///   GET  /api/models/{id}/download?printer=&material=
///   POST /api/models                      multipart: stl, name, tags, share, printer, material
///   POST /api/models/{id}/results?printer=&material=   body: metadata document or {"cells":[...]}
///   POST /api/models/{id}/slice           body: {"cells":[[r,s],...]} or {"fraction":f},
///                                               "printer", "material", "parallelism"
///   GET  /api/batches/{id}
class HttpService {
 public:
  explicit HttpService(Repository& repo);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds to an ephemeral port when `port` is 0; returns the bound port or
  /// -1 on failure.
  int bind(const std::string& host, int port);

  /// Blocks until stop().
  bool listen_after_bind();
  void stop();

  httplib::Server& server() { return *server_; }

 private:
  void install_routes();

  Repository& repo_;
  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status used for each error code.
int http_status_for(ErrorCode code);

}  // namespace slicehub

#endif  // SLICEHUB_HTTP_API_HPP
