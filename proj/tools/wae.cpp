// Command-line front end for corpus preparation, training, indexing,
// evaluation and serving.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wae/autoencoder.hpp"
#include "wae/baselines.hpp"
#include "wae/corpus_gen.hpp"
#include "wae/errors.hpp"
#include "wae/eval.hpp"
#include "wae/ingest.hpp"
#include "wae/search_index.hpp"
#include "wae/service.hpp"
#include "wae/treatments.hpp"
#include "wae/wirifier.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wae;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

RepresentationMode parse_mode(const std::string& name) {
  auto m = mode_from_name(name);
  if (!m) throw FieldError("unknown mode \"" + name + "\" (expected grey, color or texture)");
  return *m;
}

RasterSize parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    RasterSize s{std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
    if (s.width < 1 || s.height < 1) throw std::invalid_argument(text);
    return s;
  } catch (const std::exception&) {
    throw FieldError("size \"" + text + "\" must look like 48x64");
  }
}

const UIScreen& find_screen(const std::vector<UIScreen>& corpus, const std::string& id) {
  for (const auto& s : corpus) {
    if (s.id == id) return s;
  }
  throw FieldError("no screen with id \"" + id + "\" in the manifest");
}

std::vector<fs::path> collect_dumps(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".xml") files.push_back(e.path());
      }
    } else {
      files.emplace_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// A saliency map as a greyscale PNG, hot pixels dark.
WireframeImage heat_image(const std::vector<float>& heat, int width, int height) {
  WireframeImage img = blank_image(width, height, 1);
  for (std::size_t i = 0; i < heat.size(); ++i) img.values[i] = 1.0f - heat[i];
  return img;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search mobile UI designs by wireframe"};
  app.require_subcommand(1);

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic screen corpus");
  std::uint64_t gen_seed = 1;
  std::size_t gen_count = 500;
  std::string gen_out, gen_mix;
  int gen_w = 1080, gen_h = 1920;
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--count", gen_count, "Number of screens");
  gen->add_option("--out", gen_out, "Output manifest (.jsonl)")->required();
  gen->add_option("--mix", gen_mix, "Template weights, e.g. form=0.3,list=0.2");
  gen->add_option("--width", gen_w, "Screen width in pixels");
  gen->add_option("--height", gen_h, "Screen height in pixels");

  // ingest
  auto* ing = app.add_subcommand("ingest", "Convert view-hierarchy dumps into a manifest");
  std::vector<std::string> ing_inputs;
  std::string ing_out, ing_report, ing_category;
  ing->add_option("inputs", ing_inputs, "Dump files or directories of .xml dumps")->required();
  ing->add_option("--out", ing_out, "Output manifest")->required();
  ing->add_option("--report", ing_report, "Write the ingest report JSON here");
  ing->add_option("--category", ing_category, "Category recorded on every screen");

  // render
  auto* ren = app.add_subcommand("render", "Render wireframes as PNG or tensor files");
  std::string ren_manifest, ren_out, ren_id, ren_mode = "color", ren_size = "48x64", ren_format = "png";
  bool ren_mask = false;
  ren->add_option("--manifest", ren_manifest, "Corpus manifest")->required();
  ren->add_option("--out", ren_out, "Output directory")->required();
  ren->add_option("--id", ren_id, "Render only this screen");
  ren->add_option("--mode", ren_mode, "grey, color or texture");
  ren->add_option("--size", ren_size, "Raster size WxH");
  ren->add_option("--format", ren_format, "png or tensor")->check(CLI::IsMember({"png", "tensor"}));
  ren->add_flag("--text-mask", ren_mask, "Render the 2-channel text/non-text mask (tensor only)");

  // treat
  auto* tr = app.add_subcommand("treat", "Apply a treatment to every screen of a manifest");
  std::string tr_manifest, tr_treatment, tr_out;
  std::uint64_t tr_seed = 0;
  tr->add_option("--manifest", tr_manifest, "Corpus manifest")->required();
  tr->add_option("--treatment", tr_treatment, "scale:5..30 or remove:10..30")->required();
  tr->add_option("--seed", tr_seed, "Removal seed");
  tr->add_option("--out", tr_out, "Treated manifest")->required();

  // train
  auto* trn = app.add_subcommand("train", "Train the W-AE or the FC-AE baseline");
  std::string trn_method = "wae", trn_manifest, trn_config, trn_out, trn_mode;
  int trn_epochs = -1;
  std::int64_t trn_seed = -1;
  trn->add_option("--method", trn_method, "wae or fcae")->check(CLI::IsMember({"wae", "fcae"}));
  trn->add_option("--manifest", trn_manifest, "Corpus manifest")->required();
  trn->add_option("--config", trn_config, "JSON config (width, height, mode, lr, momentum, batch_size, epochs, seed)");
  trn->add_option("--mode", trn_mode, "Override the representation mode");
  trn->add_option("--epochs", trn_epochs, "Override the epoch count");
  trn->add_option("--seed", trn_seed, "Override the seed");
  trn->add_option("--out", trn_out, "Checkpoint path (rewritten every epoch)")->required();

  // encode
  auto* enc = app.add_subcommand("encode", "Write latent vectors as JSON lines");
  std::string enc_model, enc_manifest, enc_out;
  enc->add_option("--model", enc_model, "W-AE checkpoint")->required();
  enc->add_option("--manifest", enc_manifest, "Corpus manifest")->required();
  enc->add_option("--out", enc_out, "Output .jsonl")->required();

  // index
  auto* idx = app.add_subcommand("index", "Build a latent index for a corpus");
  std::string idx_model, idx_manifest, idx_out;
  idx->add_option("--model", idx_model, "W-AE checkpoint")->required();
  idx->add_option("--manifest", idx_manifest, "Corpus manifest")->required();
  idx->add_option("--out", idx_out, "Index file")->required();

  // search
  auto* sea = app.add_subcommand("search", "Query an index with a wireframe");
  std::string sea_model, sea_index, sea_query;
  int sea_k = kDefaultK;
  sea->add_option("--model", sea_model, "W-AE checkpoint")->required();
  sea->add_option("--index", sea_index, "Index file")->required();
  sea->add_option("--query", sea_query, "Screen JSON (manifest record format)")->required();
  sea->add_option("-k,--k", sea_k, "Number of results");

  // eval
  auto* ev = app.add_subcommand("eval", "Run treatment experiments");
  std::string ev_spec, ev_out, ev_log, ev_method;
  bool ev_timing = false;
  ev->add_option("--spec", ev_spec, "Experiment spec JSON")->required();
  ev->add_option("--out", ev_out, "Report JSON");
  ev->add_option("--log", ev_log, "Per-query ranking log (.jsonl)");
  ev->add_option("--method", ev_method, "Run only this method")
      ->check(CLI::IsMember({"wae", "hist", "guifetch", "fcae"}));
  ev->add_flag("--timing", ev_timing, "Include wall times in the report JSON");

  // agreement
  auto* agr = app.add_subcommand("agreement", "Inter-rater agreement for an annotation CSV");
  std::string agr_csv;
  agr->add_option("csv", agr_csv, "items x raters 0/1 CSV")->required();

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP search service");
  ServiceConfig srv_cfg;
  srv->add_option("--model", srv_cfg.model_path, "W-AE checkpoint")->required();
  srv->add_option("--index", srv_cfg.index_path, "Index file")->required();
  srv->add_option("--manifest", srv_cfg.manifest_path, "Corpus manifest")->required();
  srv->add_option("--host", srv_cfg.host, "Bind address");
  srv->add_option("--port", srv_cfg.port, "Port");
  srv->add_option("--cors-origin", srv_cfg.cors_origin, "Allowed CORS origin");

  // saliency
  auto* sal = app.add_subcommand("saliency", "Saliency heat map of one screen");
  std::string sal_model, sal_manifest, sal_id, sal_out;
  sal->add_option("--model", sal_model, "W-AE checkpoint")->required();
  sal->add_option("--manifest", sal_manifest, "Corpus manifest")->required();
  sal->add_option("--id", sal_id, "Screen id")->required();
  sal->add_option("--out", sal_out, "Output PNG")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const TemplateMix mix = gen_mix.empty() ? TemplateMix{} : TemplateMix::parse(gen_mix);
      const auto corpus = generate_corpus(gen_seed, gen_count, mix, Extent{gen_w, gen_h});
      write_manifest_file(gen_out, corpus);
      std::cout << "wrote " << corpus.size() << " screens to " << gen_out << "\n";
    } else if (*ing) {
      Ingestor ingestor;
      for (const auto& file : collect_dumps(ing_inputs)) {
        try {
          const RawNode root = parse_dump(read_text(file.string()));
          ScreenMetadata meta;
          if (!ing_category.empty()) meta.category = ing_category;
          ingestor.offer(extract_screen(root, file.stem().string(), meta));
        } catch (const Error& e) {
          throw Error(file.string() + ": " + e.what());
        }
      }
      write_manifest_file(ing_out, ingestor.accepted());
      const std::string report = ingestor.report().to_json();
      if (!ing_report.empty()) write_text(ing_report, report + "\n");
      std::cout << report << "\n";
    } else if (*ren) {
      const auto corpus = read_manifest_file(ren_manifest);
      const auto mode = parse_mode(ren_mode);
      const auto size = parse_size(ren_size);
      fs::create_directories(ren_out);
      std::size_t n = 0;
      for (const auto& s : corpus) {
        if (!ren_id.empty() && s.id != ren_id) continue;
        const auto img = ren_mask ? render_text_mask(s, size) : render(s, mode, size);
        const fs::path base = fs::path(ren_out) / s.id;
        if (ren_format == "png") {
          if (ren_mask) throw FieldError("--text-mask needs --format tensor");
          write_png(base.string() + ".png", img);
        } else {
          write_tensor_file(base.string() + ".wfimg", img);
        }
        ++n;
      }
      if (!ren_id.empty() && n == 0) throw FieldError("no screen with id \"" + ren_id + "\"");
      std::cout << "rendered " << n << " screens into " << ren_out << "\n";
    } else if (*tr) {
      const auto corpus = read_manifest_file(tr_manifest);
      const auto spec = parse_treatment(tr_treatment, tr_seed);
      const PairSet pairs = make_pairs(corpus, spec);
      std::vector<UIScreen> treated;
      for (const auto& p : pairs.pairs) treated.push_back(p.treated);
      write_manifest_file(tr_out, treated);
      for (const auto& s : pairs.skipped) std::cerr << "skipped " << s.id << ": " << s.reason << "\n";
      std::cout << "treated " << treated.size() << " screens, skipped " << pairs.skipped.size() << "\n";
    } else if (*trn) {
      const auto corpus = read_manifest_file(trn_manifest);
      const std::string cfg_text = trn_config.empty() ? "{}" : read_text(trn_config);
      TrainOptions opts;
      opts.checkpoint_path = trn_out;
      opts.on_epoch = [](int epoch, float loss) {
        std::cout << "epoch " << std::setw(3) << epoch + 1 << "  loss " << std::setprecision(6) << loss << std::endl;
      };
      auto report_flag = [](bool flagged) {
        if (flagged) std::cerr << "warning: smoothed training loss rose by more than 10% during the run\n";
      };
      if (trn_method == "wae") {
        WaeConfig cfg = WaeConfig::from_json(cfg_text);
        if (!trn_mode.empty()) cfg.mode = parse_mode(trn_mode);
        if (trn_epochs >= 0) cfg.sgd.epochs = trn_epochs;
        if (trn_seed >= 0) cfg.sgd.seed = static_cast<std::uint64_t>(trn_seed);
        cfg.validate();
        std::vector<WireframeImage> images;
        for (const auto& s : corpus) images.push_back(render(s, cfg.mode, cfg.raster()));
        const auto result = train_wae(cfg, images, opts);
        result.model.save(trn_out);
        report_flag(result.flagged);
        std::cout << "model fingerprint " << to_hex(result.model.fingerprint()) << "\n";
      } else {
        FcAeConfig cfg = FcAeConfig::from_json(cfg_text);
        if (trn_epochs >= 0) cfg.sgd.epochs = trn_epochs;
        if (trn_seed >= 0) cfg.sgd.seed = static_cast<std::uint64_t>(trn_seed);
        std::vector<WireframeImage> masks;
        for (const auto& s : corpus) masks.push_back(render_text_mask(s, cfg.raster()));
        const auto result = train_fcae(cfg, masks, opts);
        result.model.save(trn_out);
        report_flag(result.flagged);
        std::cout << "model fingerprint " << to_hex(result.model.fingerprint()) << "\n";
      }
    } else if (*enc) {
      const auto model = WaeModel::load(enc_model);
      const auto corpus = read_manifest_file(enc_manifest);
      std::ofstream out(enc_out, std::ios::trunc);
      if (!out) throw Error("cannot write " + enc_out);
      for (const auto& s : corpus) out << json{{"id", s.id}, {"latent", model.encode(s)}}.dump() << "\n";
      std::cout << "encoded " << corpus.size() << " screens (dim " << model.latent_dim() << ")\n";
    } else if (*idx) {
      const auto model = WaeModel::load(idx_model);
      const auto index = build_index(model, read_manifest_file(idx_manifest));
      save_index(index, idx_out);
      std::cout << "indexed " << index.size() << " screens, fingerprint " << to_hex(index.checksum()) << "\n";
    } else if (*sea) {
      const auto model = WaeModel::load(sea_model);
      const auto index = load_index(sea_index, model.fingerprint());
      const UIScreen query = screen_from_json(read_text(sea_query));
      const auto v = validate_screen(query);
      if (!v.ok()) {
        throw FieldError("query component " + std::to_string(v.violations[0].component_index) + ": " +
                         v.violations[0].rule);
      }
      for (const auto& hit : index.knn(model.encode(query), sea_k)) {
        std::cout << std::setw(3) << hit.rank << "  " << hit.id << "  " << hit.distance << "\n";
      }
    } else if (*ev) {
      ExperimentSpec spec =
          ExperimentSpec::from_json(read_text(ev_spec), fs::path(ev_spec).parent_path().string());
      if (!ev_method.empty()) spec.methods = {*method_from_name(ev_method)};
      const auto outcomes = run_spec(spec);
      std::vector<ReportRow> rows;
      for (const auto& o : outcomes) rows.push_back(o.row);
      std::cout << report_table(rows);
      if (!ev_out.empty()) write_text(ev_out, report_json(rows, ev_timing));
      if (!ev_log.empty()) {
        std::ofstream log(ev_log, std::ios::trunc);
        if (!log) throw Error("cannot write " + ev_log);
        for (const auto& o : outcomes) write_ranking_log(log, o.row, o.log);
      }
    } else if (*agr) {
      std::ifstream in(agr_csv);
      if (!in) throw Error("cannot open " + agr_csv);
      const AnnotationMatrix m = read_annotation_csv(in);
      std::cout << "items " << m.items << ", raters " << m.raters << "\n";
      if (m.raters == 2) std::cout << "cohen_kappa " << cohen_kappa(m.rater(0), m.rater(1)) << "\n";
      if (m.raters >= 2 && m.items >= 2) std::cout << "fleiss_kappa " << fleiss_kappa(m) << "\n";
      for (const char* name : {"strict", "moderate", "relaxed"}) {
        const auto rel = aggregate_relevance(m, *aggregation_from_name(name));
        std::cout << name << "_relevant " << std::count(rel.begin(), rel.end(), true) << "\n";
      }
    } else if (*srv) {
      SearchService service;
      std::cout << "listening on " << srv_cfg.host << ":" << srv_cfg.port << std::endl;
      run_server(service, srv_cfg);
    } else if (*sal) {
      const auto model = WaeModel::load(sal_model);
      const auto corpus = read_manifest_file(sal_manifest);
      const auto& screen = find_screen(corpus, sal_id);
      const auto heat = model.saliency(render(screen, model.config().mode, model.config().raster()));
      write_png(sal_out, heat_image(heat, model.config().width, model.config().height));
      std::cout << "wrote " << sal_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
