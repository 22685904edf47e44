#include <gtest/gtest.h>
#include <png.h>

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "support.hpp"
#include "wae/autoencoder.hpp"
#include "wae/corpus_gen.hpp"
#include "wae/errors.hpp"
#include "wae/service.hpp"

namespace wae {
namespace {

using nlohmann::json;

struct Fixture {
  std::shared_ptr<const WaeModel> model;
  std::vector<UIScreen> corpus;
  LatentIndex index;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.model = std::make_shared<const WaeModel>(WaeConfig{});
    out.corpus = generate_corpus(55, 30);
    out.index = build_index(*out.model, out.corpus);
    return out;
  }();
  return f;
}

std::unique_ptr<SearchService> ready_service() {
  auto svc = std::make_unique<SearchService>();
  svc->install(fixture().model, fixture().index, fixture().corpus);
  return svc;
}

HttpResponse post(const SearchService& s, const std::string& body) { return s.handle({"POST", "/api/search", body, {}}); }
HttpResponse get(const SearchService& s, const std::string& path, std::map<std::string, std::string> q = {}) {
  return s.handle({"GET", path, "", std::move(q)});
}

json screen_query(const UIScreen& s, int k = 10) {
  json comps = json::array();
  for (const auto& c : s.components) {
    comps.push_back({{"ctype", std::string(component_name(c.ctype))},
                     {"bounds",
                      {{"left", c.bounds.left},
                       {"top", c.bounds.top},
                       {"right", c.bounds.right},
                       {"bottom", c.bounds.bottom}}}});
  }
  return json{{"width", s.width}, {"height", s.height}, {"components", comps}, {"k", k}};
}

std::pair<int, int> png_size(const std::string& bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) return {-1, -1};
  const std::pair<int, int> out{static_cast<int>(img.width), static_cast<int>(img.height)};
  png_image_free(&img);
  return out;
}

TEST(Service, AnswersServiceUnavailableUntilInstalled) {
  SearchService svc;
  EXPECT_FALSE(svc.loaded());
  auto h = get(svc, "/api/health");
  EXPECT_EQ(h.status, 503);
  EXPECT_EQ(json::parse(h.body)["status"], "loading");
  EXPECT_EQ(post(svc, "{}").status, 503);
  EXPECT_EQ(get(svc, "/api/screens/x/meta").status, 503);
  EXPECT_EQ(get(svc, "/nope").status, 404);
  svc.set_load_error("broken checkpoint");
  h = get(svc, "/api/health");
  EXPECT_EQ(json::parse(h.body)["error"], "broken checkpoint");
}

TEST(Service, HealthDescribesTheModel) {
  auto svc = ready_service();
  auto h = get(*svc, "/api/health");
  ASSERT_EQ(h.status, 200);
  auto j = json::parse(h.body);
  EXPECT_EQ(j["index_size"], 30);
  EXPECT_EQ(j["mode"], "color");
  EXPECT_EQ(j["model_fingerprint"], to_hex(fixture().model->fingerprint()));
  EXPECT_EQ(j["raster"], json::array({48, 64}));
  EXPECT_EQ(svc->handle({"POST", "/api/health", "", {}}).status, 405);
}

TEST(Service, ReplayingAnIndexedScreenFindsItFirst) {
  auto svc = ready_service();
  for (const auto& s : fixture().corpus) {
    auto r = post(*svc, screen_query(s).dump());
    ASSERT_EQ(r.status, 200) << r.body;
    auto j = json::parse(r.body);
    ASSERT_EQ(j["results"].size(), 10u);
    EXPECT_EQ(j["results"][0]["id"], s.id);
    EXPECT_EQ(j["results"][0]["distance"], 0.0);
    EXPECT_EQ(j["results"][0]["rank"], 1);
    EXPECT_EQ(j["results"][0]["wireframe_url"], "/api/screens/" + s.id + "/wireframe");
    for (std::size_t i = 1; i < j["results"].size(); ++i) {
      EXPECT_LE(j["results"][i - 1]["distance"].get<double>(), j["results"][i]["distance"].get<double>());
    }
  }
}

TEST(Service, RepeatedSearchesAgreeApartFromTiming) {
  auto svc = ready_service();
  const auto body = screen_query(fixture().corpus[3], 7).dump();
  auto a = json::parse(post(*svc, body).body);
  auto b = json::parse(post(*svc, body).body);
  EXPECT_TRUE(a.contains("elapsed_ms"));
  a.erase("elapsed_ms");
  b.erase("elapsed_ms");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["k"], 7);
  EXPECT_EQ(a["results"].size(), 7u);
}

TEST(Service, SketchWithThreeComponents) {
  auto svc = ready_service();
  json q = {{"width", 360},
            {"height", 640},
            {"components",
             {{{"ctype", "TextView"}, {"bounds", {{"left", 20}, {"top", 40}, {"right", 340}, {"bottom", 80}}}},
              {{"ctype", "EditText"}, {"bounds", {{"left", 20}, {"top", 120}, {"right", 340}, {"bottom", 170}}}},
              {{"ctype", "Button"}, {"bounds", {{"left", 100}, {"top", 500}, {"right", 260}, {"bottom", 560}}}}}}};
  auto r = post(*svc, q.dump());
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(json::parse(r.body)["results"].size(), 10u);
  q["components"] = json::array();
  EXPECT_EQ(post(*svc, q.dump()).status, 200);
  q["mode"] = "colour";
  EXPECT_EQ(post(*svc, q.dump()).status, 200);
}

TEST(Service, RejectsMalformedSearches) {
  auto svc = ready_service();
  const json good = screen_query(fixture().corpus[0]);
  auto status = [&](const json& j) { return post(*svc, j.dump()).status; };
  EXPECT_EQ(post(*svc, "{not json").status, 400);
  EXPECT_EQ(post(*svc, "[]").status, 400);
  for (const char* key : {"width", "height", "components"}) {
    json j = good;
    j.erase(key);
    EXPECT_EQ(status(j), 400) << key;
  }
  for (json k : {json(0), json(51), json("5"), json(2.5)}) {
    json j = good;
    j["k"] = k;
    EXPECT_EQ(status(j), 400) << k;
  }
  json j = good;
  j["k"] = 50;
  EXPECT_EQ(json::parse(post(*svc, j.dump()).body)["results"].size(), 30u);
  j = good;
  j["mode"] = "grey";
  auto r = post(*svc, j.dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body.find("color"), std::string::npos);
  j["mode"] = "sepia";
  EXPECT_EQ(status(j), 400);
  j = good;
  j["components"][0]["ctype"] = "Slider";
  EXPECT_EQ(status(j), 400);
  j = good;
  j["components"][0]["bounds"]["right"] = j["components"][0]["bounds"]["left"];
  r = post(*svc, j.dump());
  ASSERT_EQ(r.status, 400);
  auto v = json::parse(r.body)["violations"];
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0]["component"], 0);
  EXPECT_EQ(v[0]["rule"], "degenerate bounds");
  EXPECT_EQ(get(*svc, "/api/search").status, 405);
}

TEST(Service, ServesWireframesAndMetadata) {
  auto svc = ready_service();
  const auto& s = fixture().corpus[2];
  auto png = get(*svc, "/api/screens/" + s.id + "/wireframe");
  ASSERT_EQ(png.status, 200);
  EXPECT_EQ(png.content_type, "image/png");
  EXPECT_EQ(png_size(png.body), std::make_pair(s.width / 4, s.height / 4));
  png = get(*svc, "/api/screens/" + s.id + "/wireframe", {{"width", "48"}, {"height", "64"}});
  EXPECT_EQ(png_size(png.body), std::make_pair(48, 64));
  for (const char* bad : {"0", "abc", "12x", "5000"}) {
    EXPECT_EQ(get(*svc, "/api/screens/" + s.id + "/wireframe", {{"width", bad}}).status, 400) << bad;
  }
  auto meta = get(*svc, "/api/screens/" + s.id + "/meta");
  ASSERT_EQ(meta.status, 200);
  EXPECT_EQ(screen_from_json(meta.body), s);
  EXPECT_EQ(get(*svc, "/api/screens/missing/meta").status, 404);
  EXPECT_EQ(get(*svc, "/api/screens/missing/wireframe").status, 404);
  EXPECT_EQ(get(*svc, "/api/screens//meta").status, 404);
  EXPECT_EQ(svc->handle({"POST", "/api/screens/" + s.id + "/meta", "", {}}).status, 405);
}

TEST(Service, InstallChecksConsistency) {
  SearchService svc;
  auto other = std::make_shared<const WaeModel>([] {
    WaeConfig c;
    c.sgd.seed = 99;
    return c;
  }());
  EXPECT_THROW(svc.install(other, fixture().index, fixture().corpus), FormatError);
  auto partial = fixture().corpus;
  partial.pop_back();
  EXPECT_THROW(svc.install(fixture().model, fixture().index, partial), FieldError);
  EXPECT_FALSE(svc.loaded());
}

TEST(Service, LoadsFromFiles) {
  testing::TempDir dir("svc");
  fixture().model->save(dir.file("m.ckpt"));
  save_index(fixture().index, dir.file("i.idx"));
  write_manifest_file(dir.file("c.jsonl"), fixture().corpus);
  SearchService svc;
  ServiceConfig cfg{dir.file("m.ckpt"), dir.file("i.idx"), dir.file("c.jsonl")};
  svc.load(cfg);
  EXPECT_TRUE(svc.loaded());
  cfg.index_path = dir.file("missing.idx");
  EXPECT_THROW(SearchService().load(cfg), Error);
}

TEST(HttpServerTest, ServesOverLocalhostWithCors) {
  testing::TempDir dir("http");
  fixture().model->save(dir.file("m.ckpt"));
  save_index(fixture().index, dir.file("i.idx"));
  write_manifest_file(dir.file("c.jsonl"), fixture().corpus);
  SearchService svc;
  ServiceConfig cfg{dir.file("m.ckpt"), dir.file("i.idx"), dir.file("c.jsonl"), "127.0.0.1", 0, "http://localhost:3000"};
  HttpServer server(svc, cfg);
  const int port = server.bind();
  std::thread t([&] { server.serve(); });

  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(10, 0);
  // the model loads in the background
  httplib::Result health;
  for (int i = 0; i < 200; ++i) {
    health = cli.Get("/api/health");
    if (health && health->status == 200) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "http://localhost:3000");

  const auto& s = fixture().corpus[5];
  const auto start = std::chrono::steady_clock::now();
  auto res = cli.Post("/api/search", screen_query(s).dump(), "application/json");
  const auto took = std::chrono::steady_clock::now() - start;
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_LT(took, std::chrono::seconds(2));
  auto j = json::parse(res->body);
  EXPECT_EQ(j["results"][0]["id"], s.id);

  auto opt = cli.Options("/api/search");
  ASSERT_TRUE(opt);
  EXPECT_EQ(opt->status, 204);
  EXPECT_NE(opt->get_header_value("Access-Control-Allow-Methods").find("POST"), std::string::npos);

  auto wf = cli.Get("/api/screens/" + s.id + "/wireframe?width=30&height=40");
  ASSERT_TRUE(wf);
  EXPECT_EQ(png_size(wf->body), std::make_pair(30, 40));
  auto missing = cli.Get("/api/screens/nothing/meta");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  server.stop();
  t.join();
}

TEST(HttpServerTest, ReportsLoadFailures) {
  SearchService svc;
  ServiceConfig cfg{"/nonexistent/m.ckpt", "/nonexistent/i.idx", "/nonexistent/c.jsonl", "127.0.0.1", 0};
  HttpServer server(svc, cfg);
  const int port = server.bind();
  std::thread t([&] { server.serve(); });
  httplib::Client cli("127.0.0.1", port);
  httplib::Result r;
  for (int i = 0; i < 200; ++i) {
    r = cli.Get("/api/health");
    if (r && r->body.find("error") != std::string::npos) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 503);
  EXPECT_EQ(json::parse(r->body)["status"], "error");
  server.stop();
  t.join();
}

}  // namespace
}  // namespace wae
