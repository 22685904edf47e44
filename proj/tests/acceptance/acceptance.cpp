// Acceptance suite: one PASS/FAIL line per criterion.
//
// Criteria listed with --known-failure still print FAIL but do not change
// the exit status; anything else that fails does.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "CLI11.hpp"
#include "oracles/gradcheck.hpp"
#include "oracles/knn.hpp"
#include "oracles/matching.hpp"
#include "oracles/metrics.hpp"
#include "wae/autoencoder.hpp"
#include "wae/baselines.hpp"
#include "wae/corpus_gen.hpp"
#include "wae/eval.hpp"
#include "wae/search_index.hpp"
#include "wae/treatments.hpp"

namespace fs = std::filesystem;
using namespace wae;

namespace {

constexpr std::uint64_t kCorpusSeed = 42;
constexpr std::size_t kCorpusSize = 500;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- shared experiment state, built lazily ----

struct Lab {
  std::vector<UIScreen> corpus = generate_corpus(kCorpusSeed, kCorpusSize);
  std::map<RepresentationMode, std::shared_ptr<const WaeModel>> wae;
  std::shared_ptr<const FcAeModel> fcae;
  std::map<std::string, ReportRow> rows;  // "<method>/<treatment>"

  std::shared_ptr<const WaeModel> wae_model(RepresentationMode mode) {
    auto& m = wae[mode];
    if (!m) {
      const auto t0 = std::chrono::steady_clock::now();
      WaeConfig cfg;
      cfg.mode = mode;
      std::vector<WireframeImage> images;
      for (const auto& s : corpus) images.push_back(render(s, mode, cfg.raster()));
      auto result = train_wae(cfg, images);
      std::cerr << "  trained W-AE (" << mode_name(mode) << ", " << cfg.sgd.epochs << " epochs) loss "
                << result.loss_history.front() << " -> " << result.loss_history.back() << " in "
                << fmt(seconds_since(t0), 0) << " s\n";
      m = std::make_shared<const WaeModel>(std::move(result.model));
    }
    return m;
  }

  std::shared_ptr<const FcAeModel> fcae_model() {
    if (!fcae) {
      const auto t0 = std::chrono::steady_clock::now();
      FcAeConfig cfg;
      std::vector<WireframeImage> masks;
      for (const auto& s : corpus) masks.push_back(render_text_mask(s, cfg.raster()));
      auto result = train_fcae(cfg, masks);
      std::cerr << "  trained FC-AE loss " << result.loss_history.front() << " -> " << result.loss_history.back()
                << " in " << fmt(seconds_since(t0), 0) << " s\n";
      fcae = std::make_shared<const FcAeModel>(std::move(result.model));
    }
    return fcae;
  }

  std::unique_ptr<Retriever> retriever(const std::string& method) {
    if (method == "wae-color") return make_wae_retriever(wae_model(RepresentationMode::kColor));
    if (method == "wae-grey") return make_wae_retriever(wae_model(RepresentationMode::kGrey));
    if (method == "fcae") return make_fcae_retriever(fcae_model());
    if (method == "hist") return make_hist_retriever();
    return make_guifetch_retriever();
  }

  // Runs (and caches) every requested treatment for one method.
  const ReportRow& row(const std::string& method, const std::string& treatment) {
    const std::string key = method + "/" + treatment;
    auto it = rows.find(key);
    if (it != rows.end()) return it->second;
    auto r = retriever(method);
    r->index(corpus);
    ReportRow out;
    if (treatment == "none") {
      std::vector<TreatedPair> pairs;
      for (const auto& s : corpus) pairs.push_back({s.id, s});
      out = run_queries(*r, pairs, "none").row;
    } else {
      out = run_experiment(*r, corpus, parse_treatment(treatment, kCorpusSeed)).row;
    }
    return rows.emplace(key, out).first->second;
  }
};

Lab& lab() {
  static Lab l;
  return l;
}

// ---- criteria ----

Verdict gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(2024);
  double worst = 0.0;
  std::string worst_op;
  for (const auto& check : oracle::backward_checks()) {
    for (int i = 0; i < 100; ++i) {
      const double e = check.run(rng);
      if (!(e <= worst)) {
        worst = e;
        worst_op = check.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 120.0,
          "max rel error " + fmt(worst, 8) + " (" + worst_op + "), " + fmt(secs, 1) + " s"};
}

Verdict adjoint_identity() {
  SplitMix64 rng(77);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) worst = std::max(worst, oracle::adjoint_gap<float>(rng));
  return {worst < 1e-4, "max gap " + fmt(worst, 8) + " over 100 cases"};
}

Verdict overfit_oracle() {
  WaeConfig cfg;
  cfg.sgd.batch_size = 1;
  cfg.sgd.epochs = 200;
  const std::vector<WireframeImage> one{render(generate_screen(7, TemplateKind::kForm), cfg.mode, cfg.raster())};
  auto a = train_wae(cfg, one);
  auto b = train_wae(cfg, one);
  const double first = a.loss_history.front(), last = a.loss_history.back();
  const bool same = encode_checkpoint(a.model.to_checkpoint()) == encode_checkpoint(b.model.to_checkpoint());
  return {a.steps == 200 && last < 0.1 * first && same,
          "mse " + fmt(first, 4) + " -> " + fmt(last, 4) + " (" + fmt(100 * last / first, 1) + "%), checkpoints " +
              (same ? "bitwise equal" : "DIFFER")};
}

Verdict self_retrieval() {
  const auto& r = lab().row("wae-color", "none");
  return {r.pre_at_1 == 1.0 && r.queries == kCorpusSize,
          "Pre@1 " + fmt(r.pre_at_1) + " over " + std::to_string(r.queries) + " untreated queries"};
}

Verdict treatment_trend() {
  std::string detail = "scale";
  bool ok = true;
  double prev = 2.0;
  for (int p : {5, 10, 15, 20, 25, 30}) {
    const double v = lab().row("wae-color", "scale:" + std::to_string(p)).pre_at_1;
    ok &= v <= prev;
    prev = v;
    detail += " " + fmt(v);
  }
  detail += "; remove";
  prev = 2.0;
  for (int b : {10, 20, 30}) {
    const double v = lab().row("wae-color", "remove:" + std::to_string(b)).pre_at_1;
    ok &= v <= prev;
    prev = v;
    detail += " " + fmt(v);
  }
  ok &= lab().row("wae-color", "scale:10").pre_at_1 >= 0.8;
  ok &= lab().row("wae-color", "remove:10").pre_at_1 >= 0.8;
  return {ok, "W-AE Pre@1 " + detail};
}

Verdict guifetch_removal() {
  bool ok = true;
  std::string detail;
  std::size_t pairs = 0, not_one = 0;
  for (int band : {10, 20, 30}) {
    const auto set = make_pairs(lab().corpus, RemoveTreatment{band, kCorpusSeed});
    std::map<std::string, const UIScreen*> by_id;
    for (const auto& s : lab().corpus) by_id[s.id] = &s;
    for (const auto& p : set.pairs) {
      ++pairs;
      not_one += guifetch_similarity(p.treated, *by_id.at(p.original_id)) != 1.0;
    }
    const auto& r = lab().row("guifetch", "remove:" + std::to_string(band));
    ok &= r.pre_at_1 == 1.0 && r.mrr == 1.0;
    detail += " remove" + std::to_string(band) + " Pre@1 " + fmt(r.pre_at_1) + " MRR " + fmt(r.mrr) + ";";
  }
  ok &= not_one == 0;
  return {ok, std::to_string(pairs - not_one) + "/" + std::to_string(pairs) + " pairs at similarity 1.0;" + detail};
}

Verdict guifetch_scaling_collapse() {
  bool ok = true;
  std::string detail = "GUIFetch Pre@1";
  for (int p : {20, 25, 30}) {
    const double v = lab().row("guifetch", "scale:" + std::to_string(p)).pre_at_1;
    ok &= v <= 0.1;
    detail += " scale" + std::to_string(p) + " " + fmt(v);
  }
  return {ok, detail + " (bound 0.1)"};
}

Verdict baseline_ordering() {
  const double w = lab().row("wae-color", "scale:10").pre_at_1;
  const double h = lab().row("hist", "scale:10").pre_at_1;
  const double f = lab().row("fcae", "scale:10").pre_at_1;
  return {w > h && w >= f, "scale10 Pre@1 W-AE " + fmt(w) + ", histogram " + fmt(h) + ", FC-AE " + fmt(f)};
}

Verdict representation_study() {
  bool ok = true;
  std::string detail;
  for (const char* t : {"scale:10", "remove:20"}) {
    const double c = lab().row("wae-color", t).mrr;
    const double g = lab().row("wae-grey", t).mrr;
    ok &= c >= g;
    detail += std::string(t) + " MRR color " + fmt(c) + " grey " + fmt(g) + "; ";
  }
  return {ok, detail};
}

Verdict metric_oracles() {
  SplitMix64 rng(4242);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ranked;
    for (int i = rng.range(1, 30); i > 0; --i) ranked.push_back("s" + std::to_string(rng.below(40)));
    std::set<std::string> rel;
    for (int i = rng.range(0, 6); i > 0; --i) rel.insert("s" + std::to_string(rng.below(40)));
    const int k = rng.range(1, 40);
    bad += precision_at_k(ranked, rel, k) != oracle::oracle_precision(ranked, rel, k);

    std::vector<std::optional<int>> ranks;
    double sum = 0;
    for (int i = rng.range(1, 20); i > 0; --i) {
      if (rng.chance(0.25)) {
        ranks.push_back(std::nullopt);
      } else {
        ranks.push_back(rng.range(1, 100));
        sum += 1.0 / *ranks.back();
      }
    }
    bad += std::abs(mrr(ranks) - sum / ranks.size()) > 1e-12;

    std::vector<bool> a, b;
    const double pa = rng.uniform(), pb = rng.uniform();
    for (int i = rng.range(1, 50); i > 0; --i) {
      a.push_back(rng.chance(pa));
      b.push_back(rng.chance(pb));
    }
    bad += std::abs(cohen_kappa(a, b) - oracle::oracle_cohen(a, b)) > 1e-12;

    const auto m = oracle::random_matrix(rng, rng.range(2, 30), rng.range(2, 7), rng.uniform());
    const auto ones = std::count(m.labels.begin(), m.labels.end(), 1);
    if (ones > 0 && ones < static_cast<long>(m.labels.size())) {
      bad += std::abs(fleiss_kappa(m) - oracle::oracle_fleiss(m)) > 1e-12;
    }
  }
  // worked examples
  int examples_bad = 0;
  const std::vector<std::string> ranked{"a", "b", "c", "d", "e"};
  examples_bad += precision_at_k(ranked, {"a"}, 1) != 1.0;
  examples_bad += precision_at_k(ranked, {"b"}, 1) != 0.0;
  examples_bad += std::abs(precision_at_k(ranked, {"a", "c", "e"}, 5) - 0.6) > 1e-15;
  const std::vector<std::optional<int>> r111{1, 1, 1}, r124{1, 2, 4}, none{std::nullopt};
  examples_bad += mrr(r111) != 1.0;
  examples_bad += std::abs(mrr(r124) - 1.75 / 3) > 1e-15;
  examples_bad += mrr(none) != 0.0;
  examples_bad += cohen_kappa({1, 0, 1, 0}, {1, 0, 1, 0}) != 1.0;
  examples_bad += std::abs(cohen_kappa({1, 1, 0, 0}, {1, 0, 0, 1})) > 1e-15;
  examples_bad += std::abs(cohen_kappa({1, 0}, {0, 1}) + 1.0) > 1e-15;
  examples_bad += fleiss_kappa(AnnotationMatrix{2, 3, {1, 1, 1, 0, 0, 0}}) != 1.0;
  SplitMix64 sim(2024);
  examples_bad += std::abs(fleiss_kappa(oracle::random_matrix(sim, 500, 5, 0.5))) >= 0.1;
  const AnnotationMatrix agg{1, 5, {1, 1, 1, 0, 0}};
  examples_bad += aggregate_relevance(agg, Aggregation::kStrict)[0];
  examples_bad += !aggregate_relevance(agg, Aggregation::kModerate)[0];
  examples_bad += !aggregate_relevance(agg, Aggregation::kRelaxed)[0];
  return {bad == 0 && examples_bad == 0, std::to_string(bad) + " random mismatches in 1000 cases, " +
                                             std::to_string(examples_bad) + " worked examples off"};
}

Verdict knn_exactness() {
  SplitMix64 rng(11);
  int bad = 0, checks = 0;
  bool bitwise = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = rng.range(1, 64);
    LatentIndex index(dim, {});
    std::vector<std::string> ids;
    std::vector<std::vector<float>> vecs;
    for (int i = 0; i < 200; ++i) {
      std::vector<float> v(dim);
      for (auto& x : v) x = trial % 2 ? static_cast<float>(rng.range(-2, 2)) : static_cast<float>(rng.uniform());
      ids.push_back("e" + std::to_string(rng.below(100000)) + "_" + std::to_string(i));
      vecs.push_back(v);
      index.add(ids.back(), v);
    }
    for (int q = 0; q < 5; ++q) {
      const auto& query = vecs[rng.below(200)];
      for (int k : {1, 5, 10, 50}) {
        ++checks;
        bad += index.knn(query, k) != oracle::brute_force_knn(ids, vecs, query, k);
      }
    }
    const auto bytes = encode_index(index);
    const auto back = decode_index(bytes);
    bitwise &= back == index && encode_index(back) == bytes;
  }
  return {bad == 0 && bitwise, std::to_string(checks - bad) + "/" + std::to_string(checks) +
                                   " queries equal exhaustive sort; save/load " + (bitwise ? "bitwise" : "DIFFERS")};
}

Verdict hungarian_correctness() {
  SplitMix64 rng(500);
  GuiFetchConfig cfg;
  int bad = 0;
  for (int i = 0; i < 500; ++i) {
    const auto pair = oracle::random_screen_pair(rng, 6);
    const auto w = oracle::score_matrix(pair, cfg);
    const int rows = static_cast<int>(pair.query.components.size());
    const int cols = static_cast<int>(pair.candidate.components.size());
    bad += max_weight_matching(w, rows, cols).weight != oracle::brute_force_matching(w, rows, cols);
  }
  return {bad == 0, std::to_string(500 - bad) + "/500 matchings equal exhaustive enumeration"};
}

struct Cmd {
  int code = -1;
  std::string out;
};

Cmd sh(const std::string& cmd) {
  Cmd r;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict end_to_end_determinism(const std::string& cli, const fs::path& work) {
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = work / ("run" + std::to_string(run));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string d = dir.string() + "/";
    std::ofstream(d + "train.json") << R"({"epochs":3,"batch_size":16,"seed":5})";
    std::ofstream(d + "spec.json") << R"({"methods":["wae","hist","guifetch"],"treatments":["scale:10","remove:20"],)"
                                   << R"("manifest":"corpus.jsonl","model":"model.ckpt","seed":9})";
    for (const std::string& step :
         {"gen-corpus --seed 17 --count 120 --out " + d + "corpus.jsonl",
          "train --manifest " + d + "corpus.jsonl --config " + d + "train.json --out " + d + "model.ckpt",
          "index --model " + d + "model.ckpt --manifest " + d + "corpus.jsonl --out " + d + "corpus.idx",
          "eval --spec " + d + "spec.json --out " + d + "report.json --log " + d + "rankings.jsonl"}) {
      const auto r = sh(cli + " " + step);
      if (r.code != 0) return {false, "step failed: " + step + "\n" + r.out};
    }
    reports.push_back(slurp(dir / "report.json") + "\x1f" + slurp(dir / "model.ckpt") + "\x1f" +
                      slurp(dir / "corpus.idx"));
  }
  const bool same = !reports[0].empty() && reports[0] == reports[1];
  return {same, same ? "report, checkpoint and index byte-identical across two runs" : "outputs differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string cli;
  std::string work = (fs::temp_directory_path() / "wae_acceptance").string();
  std::vector<std::string> known;
  std::vector<std::string> only;
  app.add_option("--cli", cli, "Path to the wae executable")->required();
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--known-failure", known, "Criterion expected to fail");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient-suite", gradient_suite},
      {"adjoint-identity", adjoint_identity},
      {"overfit-oracle", overfit_oracle},
      {"self-retrieval", self_retrieval},
      {"treatment-trend", treatment_trend},
      {"guifetch-removal", guifetch_removal},
      {"guifetch-scaling-collapse", guifetch_scaling_collapse},
      {"baseline-ordering", baseline_ordering},
      {"representation-study", representation_study},
      {"metric-oracles", metric_oracles},
      {"knn-exactness", knn_exactness},
      {"hungarian-correctness", hungarian_correctness},
      {"end-to-end-determinism", [&] { return end_to_end_determinism(cli, work); }},
  };

  int unexpected = 0, passed = 0, ran = 0;
  for (const auto& [name, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const bool expected_fail = std::find(known.begin(), known.end(), name) != known.end();
    passed += v.pass;
    if (!v.pass && !expected_fail) ++unexpected;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail;
    if (!v.pass && expected_fail) std::cout << " [known failure]";
    if (v.pass && expected_fail) std::cout << " [listed as known failure but passed]";
    std::cout << " (" << fmt(seconds_since(t0), 1) << " s)" << std::endl;
  }
  std::cout << passed << "/" << ran << " criteria passed";
  if (unexpected) std::cout << ", " << unexpected << " unexpected failure(s)";
  std::cout << std::endl;
  return unexpected == 0 ? 0 : 1;
}
