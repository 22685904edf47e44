#include "wae/service.hpp"

#include <algorithm>
#include <chrono>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"
#include "json_io.hpp"
#include "wae/autoencoder.hpp"
#include "wae/errors.hpp"
#include "wae/wirifier.hpp"

namespace wae {

using nlohmann::json;

struct SearchService::State {
  std::shared_ptr<const WaeModel> model;
  LatentIndex index;
  std::vector<UIScreen> manifest;
  std::unordered_map<std::string, std::size_t> by_id;
  std::string fingerprint;
};

namespace {

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, json{{"error", message}});
}

// "/api/screens/<id>/<leaf>" -> id, or empty when the path does not match.
std::string screen_id(const std::string& path, const std::string& leaf) {
  static const std::string prefix = "/api/screens/";
  const std::string suffix = "/" + leaf;
  if (path.size() <= prefix.size() + suffix.size()) return "";
  if (path.compare(0, prefix.size(), prefix) != 0) return "";
  if (path.compare(path.size() - suffix.size(), suffix.size(), suffix) != 0) return "";
  return path.substr(prefix.size(), path.size() - prefix.size() - suffix.size());
}

int int_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw FieldError(where + "missing field \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw FieldError(where + "field \"" + key + "\" must be an integer");
  return v.get<int>();
}

}  // namespace

void SearchService::load(const ServiceConfig& config) {
  auto model = std::make_shared<const WaeModel>(WaeModel::load(config.model_path));
  LatentIndex index = load_index(config.index_path, model->fingerprint());
  install(std::move(model), std::move(index), read_manifest_file(config.manifest_path));
}

void SearchService::install(std::shared_ptr<const WaeModel> model, LatentIndex index, std::vector<UIScreen> manifest) {
  auto s = std::make_shared<State>();
  const Digest fp = model->fingerprint();
  index.verify(fp);
  if (!index.empty() && index.dim() != model->latent_dim()) {
    throw FormatError("index dimension " + std::to_string(index.dim()) + " does not match the model");
  }
  s->model = std::move(model);
  s->fingerprint = to_hex(fp);
  s->manifest = std::move(manifest);
  for (std::size_t i = 0; i < s->manifest.size(); ++i) s->by_id.emplace(s->manifest[i].id, i);
  for (const auto& id : index.ids()) {
    if (!s->by_id.count(id)) throw FieldError("indexed screen \"" + id + "\" is missing from the manifest");
  }
  s->index = std::move(index);
  std::lock_guard lock(mutex_);
  state_ = std::move(s);
  load_error_.clear();
}

void SearchService::set_load_error(const std::string& message) {
  std::lock_guard lock(mutex_);
  load_error_ = message;
}

bool SearchService::loaded() const { return state() != nullptr; }

std::shared_ptr<const SearchService::State> SearchService::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

HttpResponse SearchService::handle(const HttpRequest& request) const {
  const auto s = state();
  const std::string& path = request.path;
  const bool get = request.method == "GET";
  if (path == "/api/health") {
    if (!get) return error_response(405, "use GET for /api/health");
    return health(s.get());
  }
  const bool is_search = path == "/api/search";
  const std::string wf_id = screen_id(path, "wireframe");
  const std::string meta_id = screen_id(path, "meta");
  if (!is_search && wf_id.empty() && meta_id.empty()) return error_response(404, "no such endpoint: " + path);
  if (is_search && request.method != "POST") return error_response(405, "use POST for /api/search");
  if (!is_search && !get) return error_response(405, "use GET for " + path);
  if (!s) return error_response(503, "model and index are still loading");
  if (is_search) return search(*s, request.body);
  if (!wf_id.empty()) return wireframe(*s, wf_id, request.query);
  return meta(*s, meta_id);
}

HttpResponse SearchService::search(const State& s, const std::string& body) const {
  const auto start = std::chrono::steady_clock::now();
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("request body is not valid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_response(400, "request body must be a JSON object");
  UIScreen query;
  query.id = "query";
  int k = kDefaultK;
  try {
    query.width = int_field(req, "width", "");
    query.height = int_field(req, "height", "");
    if (req.contains("k")) k = int_field(req, "k", "");
    if (k < 1 || k > kMaxSearchK) throw FieldError("field \"k\" must be in [1, " + std::to_string(kMaxSearchK) + "]");
    if (req.contains("mode")) {
      if (!req.at("mode").is_string()) throw FieldError("field \"mode\" must be a string");
      const auto mode = mode_from_name(req.at("mode").get<std::string>());
      if (!mode) throw FieldError("unknown mode \"" + req.at("mode").get<std::string>() + "\"");
      if (*mode != s.model->config().mode) {
        throw FieldError("the loaded model uses mode \"" + std::string(mode_name(s.model->config().mode)) + "\"");
      }
    }
    if (!req.contains("components")) throw FieldError("missing field \"components\"");
    const auto& comps = req.at("components");
    if (!comps.is_array()) throw FieldError("field \"components\" must be an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      query.components.push_back(detail::component_from_json(comps[i], "components[" + std::to_string(i) + "]"));
    }
  } catch (const FieldError& e) {
    return error_response(400, e.what());
  }
  const Validation v = validate_screen(query);
  if (!v.ok()) {
    json problems = json::array();
    for (const auto& viol : v.violations) {
      problems.push_back({{"component", viol.component_index}, {"rule", viol.rule}});
    }
    return json_response(400, json{{"error", "invalid wireframe"}, {"violations", problems}});
  }
  const SearchResult hits = s.index.knn(s.model->encode(query), k);
  json results = json::array();
  for (const auto& h : hits) {
    results.push_back({{"id", h.id},
                       {"distance", h.distance},
                       {"rank", h.rank},
                       {"wireframe_url", "/api/screens/" + h.id + "/wireframe"},
                       {"meta_url", "/api/screens/" + h.id + "/meta"}});
  }
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return json_response(200, json{{"results", results},
                                 {"k", k},
                                 {"mode", std::string(mode_name(s.model->config().mode))},
                                 {"model_fingerprint", s.fingerprint},
                                 {"elapsed_ms", elapsed}});
}

HttpResponse SearchService::wireframe(const State& s, const std::string& id,
                                      const std::map<std::string, std::string>& q) const {
  auto it = s.by_id.find(id);
  if (it == s.by_id.end()) return error_response(404, "unknown screen id \"" + id + "\"");
  const UIScreen& screen = s.manifest[it->second];
  RasterSize size{std::max(1, screen.width / 4), std::max(1, screen.height / 4)};
  try {
    auto read = [&](const char* key, int& out) {
      auto f = q.find(key);
      if (f == q.end()) return;
      std::size_t used = 0;
      const int v = std::stoi(f->second, &used);
      if (used != f->second.size() || v < 1 || v > 4096) throw FieldError(std::string("bad ") + key);
      out = v;
    };
    read("width", size.width);
    read("height", size.height);
  } catch (const std::exception&) {
    return error_response(400, "width and height must be integers in [1, 4096]");
  }
  const auto png = encode_png(render(screen, s.model->config().mode, size));
  return {200, "image/png", std::string(png.begin(), png.end())};
}

HttpResponse SearchService::meta(const State& s, const std::string& id) const {
  auto it = s.by_id.find(id);
  if (it == s.by_id.end()) return error_response(404, "unknown screen id \"" + id + "\"");
  return {200, "application/json", to_json_line(s.manifest[it->second])};
}

HttpResponse SearchService::health(const State* s) const {
  if (!s) {
    std::lock_guard lock(mutex_);
    if (!load_error_.empty()) return json_response(503, json{{"status", "error"}, {"error", load_error_}});
    return json_response(503, json{{"status", "loading"}});
  }
  return json_response(200, json{{"status", "ok"},
                                 {"index_size", s->index.size()},
                                 {"model_fingerprint", s->fingerprint},
                                 {"mode", std::string(mode_name(s->model->config().mode))},
                                 {"raster", {s->model->config().width, s->model->config().height}}});
}

struct HttpServer::Impl {
  SearchService& service;
  ServiceConfig config;
  httplib::Server server;
  std::thread loader;
};

HttpServer::HttpServer(SearchService& service, ServiceConfig config)
    : impl_(new Impl{service, std::move(config), {}, {}}) {
  auto& server = impl_->server;
  server.set_default_headers({{"Access-Control-Allow-Origin", impl_->config.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, req.body, {}};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    const HttpResponse out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type.c_str());
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() {
  stop();
  if (impl_->loader.joinable()) impl_->loader.join();
}

int HttpServer::bind() {
  const auto& cfg = impl_->config;
  int port = cfg.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(cfg.host);
  } else if (!impl_->server.bind_to_port(cfg.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
  if (!impl_->service.loaded() && !cfg.model_path.empty() && !impl_->loader.joinable()) {
    impl_->loader = std::thread([this] {
      try {
        impl_->service.load(impl_->config);
      } catch (const std::exception& e) {
        impl_->service.set_load_error(e.what());
      }
    });
  }
  return port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void run_server(SearchService& service, const ServiceConfig& config) {
  HttpServer server(service, config);
  server.bind();
  server.serve();
}

}  // namespace wae
