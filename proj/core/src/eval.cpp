#include "wae/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "json.hpp"
#include "wae/autoencoder.hpp"
#include "wae/errors.hpp"

namespace wae {

using nlohmann::json;

// ---- Metrics ----------------------------------------------------------------

double precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, int k) {
  if (k < 1) throw PreconditionError("precision@k needs k >= 1");
  const std::size_t n = std::min(ranked.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += relevant.count(ranked[i]);
  return static_cast<double>(hits) / k;
}

double mrr(std::span<const std::optional<int>> first_relevant_ranks) {
  if (first_relevant_ranks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : first_relevant_ranks) {
    if (r) {
      if (*r < 1) throw PreconditionError("ranks start at 1");
      sum += 1.0 / *r;
    }
  }
  return sum / static_cast<double>(first_relevant_ranks.size());
}

double cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) {
    throw PreconditionError("rater vectors differ in length (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw PreconditionError("cohen's kappa needs at least one item");
  const double n = static_cast<double>(a.size());
  double agree = 0, a1 = 0, b1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i];
    a1 += a[i];
    b1 += b[i];
  }
  const double po = agree / n;
  const double pe = (a1 / n) * (b1 / n) + (1 - a1 / n) * (1 - b1 / n);
  if (pe >= 1.0) {
    if (po >= 1.0) return 1.0;
    throw PreconditionError("cohen's kappa is undefined: chance agreement is 1");
  }
  return (po - pe) / (1 - pe);
}

std::vector<bool> AnnotationMatrix::rater(int r) const {
  std::vector<bool> out(static_cast<std::size_t>(items));
  for (int i = 0; i < items; ++i) out[static_cast<std::size_t>(i)] = at(i, r);
  return out;
}

double fleiss_kappa(const AnnotationMatrix& m) {
  if (m.raters < 2) throw PreconditionError("fleiss' kappa needs at least 2 raters");
  if (m.items < 2) throw PreconditionError("fleiss' kappa needs at least 2 items");
  const double n = m.raters;
  double p_bar = 0.0, ones = 0.0;
  for (int i = 0; i < m.items; ++i) {
    double c1 = 0;
    for (int r = 0; r < m.raters; ++r) c1 += m.at(i, r);
    const double c0 = n - c1;
    p_bar += (c1 * c1 + c0 * c0 - n) / (n * (n - 1));
    ones += c1;
  }
  p_bar /= m.items;
  const double p1 = ones / (m.items * n);
  const double pe = p1 * p1 + (1 - p1) * (1 - p1);
  if (pe >= 1.0) throw PreconditionError("fleiss' kappa is undefined: every label falls in one category");
  return (p_bar - pe) / (1 - pe);
}

std::optional<Aggregation> aggregation_from_name(std::string_view name) {
  if (name == "strict") return Aggregation::kStrict;
  if (name == "moderate") return Aggregation::kModerate;
  if (name == "relaxed") return Aggregation::kRelaxed;
  return std::nullopt;
}

std::vector<bool> aggregate_relevance(const AnnotationMatrix& m, Aggregation strategy) {
  if (m.raters < 1) throw PreconditionError("aggregation needs at least one rater");
  std::vector<bool> out(static_cast<std::size_t>(m.items));
  for (int i = 0; i < m.items; ++i) {
    int yes = 0;
    for (int r = 0; r < m.raters; ++r) yes += m.at(i, r);
    bool v = false;
    switch (strategy) {
      case Aggregation::kStrict: v = yes == m.raters; break;
      case Aggregation::kModerate: v = 2 * yes > m.raters; break;
      case Aggregation::kRelaxed: v = yes > 0; break;
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

AnnotationMatrix read_annotation_csv(std::istream& in) {
  AnnotationMatrix m;
  std::string line;
  int line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::uint8_t> row;
    bool ok = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      const std::string v = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      if (v == "0" || v == "1") {
        row.push_back(static_cast<std::uint8_t>(v[0] - '0'));
      } else {
        ok = false;
      }
    }
    if (!ok) {
      if (first) {
        first = false;
        continue;
      }
      throw FieldError("annotation line " + std::to_string(line_no) + ": labels must be 0 or 1");
    }
    first = false;
    if (m.items == 0) {
      m.raters = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != m.raters) {
      throw FieldError("annotation line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                       " labels, expected " + std::to_string(m.raters));
    }
    m.labels.insert(m.labels.end(), row.begin(), row.end());
    ++m.items;
  }
  return m;
}

// ---- Methods ----------------------------------------------------------------

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kWae: return "wae";
    case Method::kHist: return "hist";
    case Method::kGuiFetch: return "guifetch";
    case Method::kFcAe: return "fcae";
  }
  return "?";
}

std::optional<Method> method_from_name(std::string_view name) {
  for (Method m : {Method::kWae, Method::kHist, Method::kGuiFetch, Method::kFcAe}) {
    if (method_name(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

void rank_in_place(SearchResult& hits) {
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  for (std::size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
}

class WaeRetriever final : public Retriever {
 public:
  explicit WaeRetriever(std::shared_ptr<const WaeModel> model) : model_(std::move(model)) {}
  std::string name() const override { return "wae-" + std::string(mode_name(model_->config().mode)); }
  void index(const std::vector<UIScreen>& originals) override { index_ = build_index(*model_, originals); }
  SearchResult rank(const UIScreen& query) const override { return index_.rank_all(model_->encode(query)); }

 private:
  std::shared_ptr<const WaeModel> model_;
  LatentIndex index_;
};

class FcAeRetriever final : public Retriever {
 public:
  explicit FcAeRetriever(std::shared_ptr<const FcAeModel> model) : model_(std::move(model)) {}
  std::string name() const override { return "fcae"; }
  void index(const std::vector<UIScreen>& originals) override {
    index_ = LatentIndex(kFcAeHidden[2], model_->fingerprint());
    for (const auto& s : originals) index_.add(s.id, model_->encode(s));
  }
  SearchResult rank(const UIScreen& query) const override { return index_.rank_all(model_->encode(query)); }

 private:
  std::shared_ptr<const FcAeModel> model_;
  LatentIndex index_;
};

class HistRetriever final : public Retriever {
 public:
  HistRetriever(RasterSize raster, int bins) : raster_(raster), bins_(bins) {}
  std::string name() const override { return "hist"; }
  void index(const std::vector<UIScreen>& originals) override {
    ids_.clear();
    features_.clear();
    for (const auto& s : originals) {
      ids_.push_back(s.id);
      features_.push_back(feature(s));
    }
  }
  SearchResult rank(const UIScreen& query) const override {
    const auto q = feature(query);
    SearchResult hits;
    for (std::size_t i = 0; i < ids_.size(); ++i) hits.push_back({ids_[i], histogram_distance(q, features_[i]), 0});
    rank_in_place(hits);
    return hits;
  }

 private:
  HistogramFeature feature(const UIScreen& s) const {
    return histogram_feature(render(s, RepresentationMode::kColor, raster_), bins_);
  }
  RasterSize raster_;
  int bins_;
  std::vector<std::string> ids_;
  std::vector<HistogramFeature> features_;
};

class GuiFetchRetriever final : public Retriever {
 public:
  explicit GuiFetchRetriever(GuiFetchConfig cfg) : cfg_(cfg) {}
  std::string name() const override { return "guifetch"; }
  void index(const std::vector<UIScreen>& originals) override { screens_ = originals; }
  SearchResult rank(const UIScreen& query) const override {
    SearchResult hits;
    hits.reserve(screens_.size());
    for (const auto& s : screens_) hits.push_back({s.id, 1.0 - guifetch_similarity(query, s, cfg_), 0});
    rank_in_place(hits);
    return hits;
  }

 private:
  GuiFetchConfig cfg_;
  std::vector<UIScreen> screens_;
};

}  // namespace

std::unique_ptr<Retriever> make_wae_retriever(std::shared_ptr<const WaeModel> model) {
  return std::make_unique<WaeRetriever>(std::move(model));
}
std::unique_ptr<Retriever> make_fcae_retriever(std::shared_ptr<const FcAeModel> model) {
  return std::make_unique<FcAeRetriever>(std::move(model));
}
std::unique_ptr<Retriever> make_hist_retriever(RasterSize raster, int bins) {
  return std::make_unique<HistRetriever>(raster, bins);
}
std::unique_ptr<Retriever> make_guifetch_retriever(GuiFetchConfig cfg) {
  return std::make_unique<GuiFetchRetriever>(cfg);
}

// ---- Experiments ------------------------------------------------------------

ExperimentOutcome run_queries(const Retriever& retriever, const std::vector<TreatedPair>& pairs,
                              const std::string& treatment_label, int k) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  ExperimentOutcome out;
  out.row.treatment = treatment_label;
  out.row.method = retriever.name();
  std::vector<std::optional<int>> ranks;
  double p1 = 0, p5 = 0, p10 = 0;
  for (const auto& pair : pairs) {
    const SearchResult hits = retriever.rank(pair.treated);
    QueryLog log{pair.treated.id, pair.original_id, std::nullopt, {}};
    for (const auto& h : hits) {
      if (h.id == pair.original_id) {
        log.truth_rank = h.rank;
        break;
      }
    }
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < hits.size() && i < 10; ++i) ids.push_back(hits[i].id);
    const std::set<std::string> relevant{pair.original_id};
    p1 += precision_at_k(ids, relevant, 1);
    p5 += precision_at_k(ids, relevant, 5);
    p10 += precision_at_k(ids, relevant, 10);
    ranks.push_back(log.truth_rank);
    log.top.assign(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(hits.size(), k)));
    out.log.push_back(std::move(log));
  }
  const double n = static_cast<double>(pairs.size());
  out.row.queries = pairs.size();
  if (!pairs.empty()) {
    out.row.pre_at_1 = p1 / n;
    out.row.pre_at_5 = p5 / n;
    out.row.pre_at_10 = p10 / n;
  }
  out.row.mrr = mrr(ranks);
  out.row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ExperimentOutcome run_experiment(const Retriever& retriever, const std::vector<UIScreen>& originals,
                                 const TreatmentSpec& treatment, int k) {
  const PairSet pairs = make_pairs(originals, treatment);
  ExperimentOutcome out = run_queries(retriever, pairs.pairs, treatment_label(treatment), k);
  out.row.skipped = pairs.skipped.size();
  return out;
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FieldError(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FieldError("experiment spec must be a JSON object");
  ExperimentSpec spec;
  auto resolve = [&](const std::string& p) {
    if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base_dir) / p).string();
  };
  auto get_string = [&](const char* key) -> std::string {
    if (!j.contains(key)) return "";
    if (!j.at(key).is_string()) throw FieldError(std::string("spec field \"") + key + "\" must be a string");
    return j.at(key).get<std::string>();
  };
  auto string_list = [&](const char* one, const char* many) {
    std::vector<std::string> out;
    if (j.contains(one)) out.push_back(get_string(one));
    if (j.contains(many)) {
      const auto& arr = j.at(many);
      if (arr.is_string()) {
        out.push_back(arr.get<std::string>());
      } else if (arr.is_array()) {
        for (const auto& v : arr) {
          if (!v.is_string()) throw FieldError(std::string("spec field \"") + many + "\" must list strings");
          out.push_back(v.get<std::string>());
        }
      } else {
        throw FieldError(std::string("spec field \"") + many + "\" must be an array");
      }
    }
    return out;
  };
  try {
    if (j.contains("k")) spec.k = j.at("k").get<int>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("raster")) {
      spec.raster.width = j.at("raster").at(0).get<int>();
      spec.raster.height = j.at("raster").at(1).get<int>();
    }
  } catch (const json::exception&) {
    throw FieldError("spec fields \"k\", \"seed\" and \"raster\" must be integers");
  }
  if (spec.k < 1) throw FieldError("spec field \"k\" must be >= 1");
  for (const auto& name : string_list("method", "methods")) {
    auto m = method_from_name(name);
    if (!m) throw FieldError("unknown method \"" + name + "\" (expected wae, hist, guifetch or fcae)");
    spec.methods.push_back(*m);
  }
  for (const auto& t : string_list("treatment", "treatments")) {
    if (t == "all") {
      for (auto& spec_t : all_treatments(spec.seed)) spec.treatments.push_back(spec_t);
    } else {
      spec.treatments.push_back(parse_treatment(t, spec.seed));
    }
  }
  if (spec.methods.empty()) throw FieldError("spec names no method");
  if (spec.treatments.empty()) throw FieldError("spec names no treatment");
  spec.manifest = resolve(get_string("manifest"));
  if (spec.manifest.empty()) throw FieldError("spec field \"manifest\" is required");
  spec.model = resolve(get_string("model"));
  spec.fcae_model = resolve(get_string("fcae_model"));
  return spec;
}

std::vector<ExperimentOutcome> run_spec(const ExperimentSpec& spec) {
  const auto corpus = read_manifest_file(spec.manifest);
  std::vector<ExperimentOutcome> out;
  for (Method method : spec.methods) {
    std::unique_ptr<Retriever> retriever;
    switch (method) {
      case Method::kWae:
        if (spec.model.empty()) throw PreconditionError("method wae needs a trained model (spec field \"model\")");
        retriever = make_wae_retriever(std::make_shared<const WaeModel>(WaeModel::load(spec.model)));
        break;
      case Method::kFcAe:
        if (spec.fcae_model.empty()) {
          throw PreconditionError("method fcae needs a trained model (spec field \"fcae_model\")");
        }
        retriever = make_fcae_retriever(std::make_shared<const FcAeModel>(FcAeModel::load(spec.fcae_model)));
        break;
      case Method::kHist: retriever = make_hist_retriever(spec.raster); break;
      case Method::kGuiFetch: retriever = make_guifetch_retriever(); break;
    }
    retriever->index(corpus);
    for (const auto& t : spec.treatments) out.push_back(run_experiment(*retriever, corpus, t, spec.k));
  }
  return out;
}

std::string report_json(std::span<const ReportRow> rows, bool with_timing) {
  json arr = json::array();
  for (const auto& r : rows) {
    json row = {{"treatment", r.treatment}, {"method", r.method},   {"pre_at_1", r.pre_at_1},
                {"pre_at_5", r.pre_at_5},   {"pre_at_10", r.pre_at_10}, {"mrr", r.mrr},
                {"queries", r.queries},     {"skipped", r.skipped}};
    if (with_timing && r.wall_ms) row["wall_ms"] = *r.wall_ms;
    arr.push_back(std::move(row));
  }
  return json{{"rows", arr}}.dump(2) + "\n";
}

std::string report_table(std::span<const ReportRow> rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "treatment" << std::setw(14) << "method" << std::right << std::setw(8)
     << "Pre@1" << std::setw(8) << "Pre@5" << std::setw(8) << "Pre@10" << std::setw(8) << "MRR" << std::setw(9)
     << "queries" << std::setw(9) << "skipped" << std::setw(11) << "time(ms)" << "\n";
  os << std::fixed;
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.treatment << std::setw(14) << r.method << std::right << std::setprecision(3)
       << std::setw(8) << r.pre_at_1 << std::setw(8) << r.pre_at_5 << std::setw(8) << r.pre_at_10 << std::setw(8)
       << r.mrr << std::setw(9) << r.queries << std::setw(9) << r.skipped << std::setprecision(1) << std::setw(11)
       << r.wall_ms.value_or(0.0) << "\n";
  }
  return os.str();
}

void write_ranking_log(std::ostream& out, const ReportRow& row, std::span<const QueryLog> log) {
  for (const auto& q : log) {
    json top = json::array();
    for (const auto& h : q.top) top.push_back({{"id", h.id}, {"distance", h.distance}, {"rank", h.rank}});
    json line = {{"treatment", row.treatment}, {"method", row.method}, {"query", q.query},
                 {"truth", q.truth},           {"top", top}};
    line["truth_rank"] = q.truth_rank ? json(*q.truth_rank) : json(nullptr);
    out << line.dump() << "\n";
  }
}

}  // namespace wae
