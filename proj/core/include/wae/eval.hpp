#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wae/baselines.hpp"
#include "wae/search_index.hpp"
#include "wae/treatments.hpp"
#include "wae/ui_model.hpp"
#include "wae/wirifier.hpp"

namespace wae {

class WaeModel;

// ---- Metrics ----------------------------------------------------------------

/// |top-k of ranked ∩ relevant| / k. Throws PreconditionError for k < 1.
double precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& relevant, int k);

/// Mean of 1/r; absent ranks contribute 0; empty input gives 0.
double mrr(std::span<const std::optional<int>> first_relevant_ranks);

/// Throws PreconditionError on length mismatch, empty input, or when chance
/// agreement is 1 without perfect observed agreement.
double cohen_kappa(const std::vector<bool>& a, const std::vector<bool>& b);

/// items x raters binary relevance labels.
struct AnnotationMatrix {
  int items = 0;
  int raters = 0;
  std::vector<std::uint8_t> labels;  // row-major, 0 or 1

  bool at(int item, int rater) const { return labels[static_cast<std::size_t>(item) * raters + rater] != 0; }
  std::vector<bool> rater(int r) const;
};

/// Throws PreconditionError with fewer than 2 raters or items, and when the
/// expected agreement is 1 ("undefined").
double fleiss_kappa(const AnnotationMatrix& m);

enum class Aggregation { kStrict, kModerate, kRelaxed };
std::optional<Aggregation> aggregation_from_name(std::string_view name);

/// strict: all raters; moderate: more than half; relaxed: any.
std::vector<bool> aggregate_relevance(const AnnotationMatrix& m, Aggregation strategy);

/// CSV of 0/1 values, one item per row, one rater per column. A first row
/// containing anything other than 0/1 is treated as a header. Throws
/// FieldError naming the line.
AnnotationMatrix read_annotation_csv(std::istream& in);

// ---- Retrieval methods ------------------------------------------------------

enum class Method { kWae, kHist, kGuiFetch, kFcAe };
std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);

class Retriever {
 public:
  virtual ~Retriever() = default;
  virtual std::string name() const = 0;
  virtual void index(const std::vector<UIScreen>& originals) = 0;
  /// Every indexed screen, best first, ties by id.
  virtual SearchResult rank(const UIScreen& query) const = 0;
};

std::unique_ptr<Retriever> make_wae_retriever(std::shared_ptr<const WaeModel> model);
std::unique_ptr<Retriever> make_fcae_retriever(std::shared_ptr<const FcAeModel> model);
std::unique_ptr<Retriever> make_hist_retriever(RasterSize raster = {}, int bins = kDefaultHistogramBins);
/// Distance is 1 - similarity.
std::unique_ptr<Retriever> make_guifetch_retriever(GuiFetchConfig cfg = {});

// ---- Experiments ------------------------------------------------------------

struct QueryLog {
  std::string query;
  std::string truth;
  std::optional<int> truth_rank;  // in the full ranking
  std::vector<SearchHit> top;     // first k
};

struct ReportRow {
  std::string treatment;
  std::string method;
  double pre_at_1 = 0.0;
  double pre_at_5 = 0.0;
  double pre_at_10 = 0.0;
  double mrr = 0.0;
  std::size_t queries = 0;
  std::size_t skipped = 0;
  std::optional<double> wall_ms;
};

struct ExperimentOutcome {
  ReportRow row;
  std::vector<QueryLog> log;
};

/// Ranks each pair's treated screen against an already indexed retriever;
/// the pair's original is the single relevant item.
ExperimentOutcome run_queries(const Retriever& retriever, const std::vector<TreatedPair>& pairs,
                              const std::string& treatment_label, int k = kDefaultK);

/// Builds treated pairs from `originals` and runs them.
ExperimentOutcome run_experiment(const Retriever& retriever, const std::vector<UIScreen>& originals,
                                 const TreatmentSpec& treatment, int k = kDefaultK);

/// Experiment file contents. "method"/"methods", "treatment"/"treatments"
/// (or "all"), "manifest", "k", "seed", "model", "fcae_model", "raster".
struct ExperimentSpec {
  std::vector<Method> methods;
  std::vector<TreatmentSpec> treatments;
  std::string manifest;
  int k = kDefaultK;
  std::uint64_t seed = 0;
  std::string model;       // W-AE checkpoint
  std::string fcae_model;  // FC-AE checkpoint
  RasterSize raster{};     // histogram raster

  /// Relative paths resolve against `base_dir`. Throws FieldError.
  static ExperimentSpec from_json(const std::string& text, const std::string& base_dir = "");
};

/// Runs every method x treatment of `spec`. Throws PreconditionError when a
/// neural method has no model.
std::vector<ExperimentOutcome> run_spec(const ExperimentSpec& spec);

/// Machine report; wall times only when `with_timing`.
std::string report_json(std::span<const ReportRow> rows, bool with_timing);
std::string report_table(std::span<const ReportRow> rows);
/// One JSON line per query.
void write_ranking_log(std::ostream& out, const ReportRow& row, std::span<const QueryLog> log);

}  // namespace wae
