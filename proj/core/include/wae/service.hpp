#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "wae/search_index.hpp"
#include "wae/ui_model.hpp"

namespace wae {

class WaeModel;

struct ServiceConfig {
  std::string model_path;
  std::string index_path;
  std::string manifest_path;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string cors_origin = "*";
};

struct HttpRequest {
  std::string method;
  std::string path;  // already percent-decoded
  std::string body;
  std::map<std::string, std::string> query;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

inline constexpr int kMaxSearchK = 50;

/// Request routing for the search API, independent of the HTTP transport.
/// Until a model, index and manifest are installed every endpoint except
/// /api/health answers 503.
class SearchService {
 public:
  SearchService() = default;

  /// Loads model, index and manifest from disk; the index fingerprint must
  /// match the model. Throws on failure.
  void load(const ServiceConfig& config);
  /// Installs already loaded state. Throws FormatError when the index was
  /// built by another model and FieldError when an indexed id has no
  /// manifest record.
  void install(std::shared_ptr<const WaeModel> model, LatentIndex index, std::vector<UIScreen> manifest);
  /// Records a load failure reported by /api/health.
  void set_load_error(const std::string& message);
  bool loaded() const;

  HttpResponse handle(const HttpRequest& request) const;

 private:
  struct State;
  std::shared_ptr<const State> state() const;

  HttpResponse search(const State& s, const std::string& body) const;
  HttpResponse wireframe(const State& s, const std::string& id, const std::map<std::string, std::string>& q) const;
  HttpResponse meta(const State& s, const std::string& id) const;
  HttpResponse health(const State* s) const;

  mutable std::mutex mutex_;
  std::shared_ptr<const State> state_;
  std::string load_error_;
};

/// HTTP transport with CORS headers. When `config` names model files they
/// are loaded on a background thread while the server already answers (503
/// until ready).
class HttpServer {
 public:
  HttpServer(SearchService& service, ServiceConfig config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket and returns the port (config.port 0 picks a free one).
  int bind();
  /// Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serves `service` until the process stops.
void run_server(SearchService& service, const ServiceConfig& config);

}  // namespace wae
