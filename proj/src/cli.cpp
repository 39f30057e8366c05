#include "grabit/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <map>
#include <sstream>

#include "grabit/boosting.hpp"
#include "grabit/csv.hpp"
#include "grabit/error.hpp"
#include "grabit/evaluation.hpp"
#include "grabit/interpretation.hpp"
#include "grabit/linear.hpp"
#include "grabit/model_io.hpp"
#include "grabit/normal.hpp"
#include "grabit/sigma_select.hpp"
#include "grabit/simulation.hpp"
#include "grabit/stats.hpp"
#include "grabit/svg.hpp"

namespace grabit {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, item.find_last_not_of(" \t") - b + 1));
  }
  return out;
}

double parse_number(const std::string& what, const std::string& s) {
  const double v = parse_cell(s, what, 0);
  if (std::isnan(v)) fail(ErrorKind::kInvalidArgument, fmt::format("{}: '{}' is not a number", what, s));
  return v;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::kIo, fmt::format("cannot create directory '{}'", dir));
}

std::string join_path(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

void write_table(const std::string& path, std::vector<std::string> header, std::vector<std::vector<std::string>> rows) {
  write_text_file(path, to_csv(CsvTable{std::move(header), std::move(rows)}));
}

std::string fmt_auc(double v) { return fmt::format("{:.4f}", v); }

std::vector<double> lower_medians(const Matrix& x) {
  std::vector<double> fill(x.cols(), std::nan(""));
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> seen;
    for (double v : x.column(c)) {
      if (!std::isnan(v)) seen.push_back(v);
    }
    if (!seen.empty()) fill[c] = stats::lower_median(std::move(seen));
  }
  return fill;
}

// Labels for binary evaluation: the response itself when it is 0/1,
// otherwise 1{y >= threshold}.
std::vector<int> make_labels(const std::vector<double>& y, const std::optional<double>& threshold) {
  std::vector<int> labels(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (threshold) {
      labels[i] = y[i] >= *threshold ? 1 : 0;
    } else if (y[i] == 0.0 || y[i] == 1.0) {
      labels[i] = static_cast<int>(y[i]);
    } else {
      fail(ErrorKind::kInvalidArgument, "the target is not 0/1; give a label threshold");
    }
  }
  return labels;
}

// ---------------------------------------------------------------- model specs

struct ModelSpec {
  std::string kind = "grabit";  // grabit | tobit | logit | boosted-logit | constant
  double lower = -kInf;
  double upper = kInf;
  bool bounds_given = false;
  bool sigma_grid = false;  // select sigma by profile likelihood over the default grid
  double sigma = 1.0;
  int trees = 100;
  double shrinkage = 0.1;
  int depth = 3;
};

void check_kind(const std::string& kind) {
  static const std::vector<std::string> kinds{"grabit", "tobit", "logit", "boosted-logit", "constant"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    fail(ErrorKind::kInvalidArgument, fmt::format("unknown model kind '{}'", kind));
  }
}

// Grammar: kind[:key=value(,key=value)*] with keys lower, upper, sigma
// (a number or "grid"), trees, shrinkage, depth.
ModelSpec parse_model_spec(const std::string& text) {
  ModelSpec spec;
  const auto colon = text.find(':');
  spec.kind = text.substr(0, colon);
  check_kind(spec.kind);
  if (colon == std::string::npos) return spec;
  for (const auto& kv : split(text.substr(colon + 1), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kInvalidArgument, fmt::format("model spec item '{}' lacks '='", kv));
    const std::string k = kv.substr(0, eq);
    const std::string v = kv.substr(eq + 1);
    if (k == "lower") spec.lower = parse_number(k, v), spec.bounds_given = true;
    else if (k == "upper") spec.upper = parse_number(k, v), spec.bounds_given = true;
    else if (k == "sigma" && v == "grid") spec.sigma_grid = true;
    else if (k == "sigma") spec.sigma = parse_number(k, v);
    else if (k == "trees") spec.trees = static_cast<int>(parse_number(k, v));
    else if (k == "shrinkage") spec.shrinkage = parse_number(k, v);
    else if (k == "depth") spec.depth = static_cast<int>(parse_number(k, v));
    else fail(ErrorKind::kInvalidArgument, fmt::format("unknown model spec key '{}'", k));
  }
  return spec;
}

BoostConfig boost_config(const ModelSpec& spec, Loss loss) {
  BoostConfig c;
  c.n_trees = spec.trees;
  c.shrinkage = spec.shrinkage;
  c.tree.max_depth = spec.depth;
  c.loss = std::move(loss);
  return c;
}

struct TrainOutcome {
  ModelDocument doc;
  std::size_t snapped = 0;
  double training_loss = 0.0;
  double sigma = 1.0;
  std::vector<SigmaTracePoint> sigma_trace;
  std::string status = "completed";
};

// Fits one model spec on data that is already preprocessed and fully
// numeric. Binary kinds use `labels`.
TrainOutcome fit_spec(const ModelSpec& spec, Dataset data, const std::vector<int>* labels,
                      const SigmaSearchConfig& search, bool sigma_search) {
  TrainOutcome out;
  if (spec.kind == "grabit" || spec.kind == "tobit") {
    const CensoringBounds bounds = CensoringBounds::make(spec.lower, spec.upper);
    out.snapped = snap_to_bounds(data.response, bounds);
    for (double y : data.response) censor_status(y, bounds);
    if (spec.kind == "tobit") {
      LinearModel m = fit_linear_tobit(data, bounds);
      out.training_loss = m.mean_loss * static_cast<double>(data.rows());
      out.sigma = m.sigma;
      out.status = to_string(m.status);
      out.doc.model = std::move(m);
      return out;
    }
    double sigma = spec.sigma;
    const BoostConfig base = boost_config(spec, Loss::tobit(bounds, sigma));
    if (sigma_search || spec.sigma_grid) {
      const SigmaSelection sel = select_sigma(data, base, search);
      sigma = sel.sigma;
      out.sigma_trace = sel.trace;
    }
    FitTrace trace;
    BoostedEnsemble m = fit_boosted(data, boost_config(spec, Loss::tobit(bounds, sigma)), &trace);
    out.training_loss = trace.training_loss.back();
    out.sigma = sigma;
    out.doc.model = std::move(m);
    return out;
  }
  require(labels != nullptr, "binary models need labels");
  data.response.assign(labels->begin(), labels->end());
  if (spec.kind == "logit") {
    LinearModel m = fit_logit(data);
    out.training_loss = m.mean_loss * static_cast<double>(data.rows());
    out.status = to_string(m.status);
    out.doc.model = std::move(m);
    return out;
  }
  if (spec.kind == "boosted-logit") {
    FitTrace trace;
    BoostedEnsemble m = fit_boosted(data, boost_config(spec, Loss::bernoulli_logit()), &trace);
    out.training_loss = trace.training_loss.back();
    out.doc.model = std::move(m);
    return out;
  }
  fail(ErrorKind::kInvalidArgument, fmt::format("model kind '{}' cannot be trained here", spec.kind));
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data, target, model = "grabit", out, report;
  std::string lower = "-inf", upper = "inf";
  double sigma = 1.0;
  bool sigma_search = false;
  bool refine = false;
  std::vector<double> sigma_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  int trees = 100;
  double shrinkage = 0.1;
  int depth = 3;
  std::vector<std::string> log_transform;
  std::uint64_t seed = 0;
  bool lower_given = false, upper_given = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  check_kind(a.model);
  if (a.model == "constant") fail(ErrorKind::kInvalidArgument, "the constant model is only available in evaluate");
  ModelSpec spec;
  spec.kind = a.model;
  spec.lower = parse_number("--lower", a.lower);
  spec.upper = parse_number("--upper", a.upper);
  spec.sigma = a.sigma;
  spec.trees = a.trees;
  spec.shrinkage = a.shrinkage;
  spec.depth = a.depth;
  if ((a.model == "grabit" || a.model == "tobit") && !a.lower_given && !a.upper_given) {
    fail(ErrorKind::kInvalidArgument, fmt::format("--model {} needs --lower and/or --upper", a.model));
  }

  Dataset data = table_to_dataset(read_csv_file(a.data), {a.target, ""});
  apply_log_transform(a.log_transform, data.feature_names, data.features);
  const std::vector<double> fill = lower_medians(data.features);
  apply_imputation(fill, data.features);

  std::optional<std::vector<int>> labels;
  if (a.model == "logit" || a.model == "boosted-logit") {
    labels = make_labels(data.response, a.upper_given ? std::optional<double>(spec.upper) : std::nullopt);
  }
  SigmaSearchConfig search;
  search.grid = a.sigma_grid;
  search.refine = a.refine;
  TrainOutcome t = fit_spec(spec, data, labels ? &*labels : nullptr, search, a.sigma_search);
  t.doc.feature_names = data.feature_names;
  t.doc.preprocessing.log_transform = a.log_transform;
  t.doc.preprocessing.impute = fill;
  save_model(a.out, t.doc);

  std::size_t n_trees = 0;
  if (const auto* m = std::get_if<BoostedEnsemble>(&t.doc.model)) n_trees = m->trees().size();
  std::string report;
  report += fmt::format("model: {}\n", a.model);
  report += fmt::format("rows: {}\n", data.rows());
  report += fmt::format("features: {}\n", data.cols());
  report += fmt::format("snapped_to_bounds: {}\n", t.snapped);
  report += fmt::format("sigma: {}\n", format_number(t.sigma));
  report += fmt::format("trees: {}\n", n_trees);
  report += fmt::format("final_training_loss: {}\n", format_number(t.training_loss));
  report += fmt::format("status: {}\n", t.status);
  report += fmt::format("seed: {}\n", a.seed);
  const std::string report_path = a.report.empty() ? a.out + ".report.txt" : a.report;
  write_text_file(report_path, report);
  if (!t.sigma_trace.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : t.sigma_trace) rows.push_back({format_number(p.sigma), format_number(p.loglik)});
    write_table(a.out + ".sigma.csv", {"sigma", "profile_loglik"}, std::move(rows));
  }
  out << report;
  return kExitOk;
}

// ---------------------------------------------------------------- predict

// Feature matrix for a model: columns picked by the model's feature names
// when it has them, else all columns in file order.
Matrix model_features(const ModelDocument& doc, const CsvTable& table) {
  if (doc.feature_names.empty()) {
    Dataset d = table_to_dataset(table, {});
    if (d.cols() != model_width(doc)) {
      fail(ErrorKind::kSchema, fmt::format("model expects {} features, data has {}", model_width(doc), d.cols()));
    }
    return d.features;
  }
  Matrix x(table.rows.size(), doc.feature_names.size());
  for (std::size_t k = 0; k < doc.feature_names.size(); ++k) {
    const std::size_t c = table.column(doc.feature_names[k]);
    for (std::size_t r = 0; r < table.rows.size(); ++r) x(r, k) = parse_cell(table.rows[r][c], table.header[c], r + 1);
  }
  return x;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, const std::string& out_path,
                const std::string& output) {
  if (output != "latent" && output != "prob" && output != "both") {
    fail(ErrorKind::kInvalidArgument, fmt::format("--output must be latent, prob or both, not '{}'", output));
  }
  const ModelDocument doc = load_model(model_path);
  const Matrix x = model_features(doc, read_csv_file(data_path));
  std::vector<double> latent, prob;
  if (output != "prob") latent = predict_document(doc, x);
  if (output != "latent") prob = predict_document_prob(doc, x);

  std::vector<std::string> header{"row"};
  if (output != "prob") header.push_back("latent");
  if (output != "latent") header.push_back("prob");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    if (!latent.empty()) row.push_back(format_number(latent[r]));
    if (!prob.empty()) row.push_back(format_number(prob[r]));
    rows.push_back(std::move(row));
  }
  write_table(out_path, std::move(header), std::move(rows));
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

std::string roc_legend(const std::string& name, double mean, double lo, double hi) {
  return fmt::format("{}: AUROC {} [{}, {}]", name, fmt_auc(mean), fmt_auc(lo), fmt_auc(hi));
}

struct SimulateArgs {
  std::string scenario, preset, outdir, models;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::vector<int> trees;
  std::vector<double> shrinkage;
  std::vector<int> depth;
  std::vector<double> sigma;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.scenario.empty() == a.preset.empty()) fail(ErrorKind::kInvalidArgument, "give exactly one of --scenario or --preset");
  StudyConfig cfg;
  if (!a.scenario.empty()) cfg = parse_scenario_config(read_text_file(a.scenario));
  else cfg.scenario = preset(a.preset);
  if (a.replications) cfg.scenario.replications = *a.replications;
  if (a.seed) cfg.scenario.seed = *a.seed;
  if (!a.models.empty()) {
    cfg.roster.clear();
    for (const auto& m : split(a.models, ',')) cfg.roster.push_back(study_model_from_string(m));
  }
  if (!a.trees.empty()) cfg.grid.n_trees = a.trees;
  if (!a.shrinkage.empty()) cfg.grid.shrinkage = a.shrinkage;
  if (!a.depth.empty()) cfg.grid.depth = a.depth;
  if (!a.sigma.empty()) cfg.grid.sigma = a.sigma;

  const StudyResult result = run_study(cfg);
  ensure_dir(a.outdir);

  std::vector<std::vector<std::string>> summary, selections;
  SvgPlot plot;
  plot.title = "ROC (pointwise mean and 95% band)";
  plot.x_label = "False positive rate";
  plot.y_label = "True positive rate";
  plot.diagonal = true;
  plot.x_range = {0.0, 1.0};
  plot.y_range = {0.0, 1.0};
  for (const auto& m : result.models) {
    const std::string name = to_string(m.model);
    const RocBand& b = m.band;
    summary.push_back({name, fmt_auc(b.mean_auroc), fmt_auc(b.auroc_lower), fmt_auc(b.auroc_upper),
                       std::to_string(b.n_curves)});
    std::vector<std::vector<std::string>> band_rows;
    for (std::size_t g = 0; g < b.grid.size(); ++g) {
      band_rows.push_back({format_number(b.grid[g]), format_number(b.mean_tpr[g]), format_number(b.lower_tpr[g]),
                           format_number(b.upper_tpr[g])});
    }
    write_table(join_path(a.outdir, fmt::format("roc_band_{}.csv", name)), {"fpr", "mean_tpr", "lower_tpr", "upper_tpr"},
                std::move(band_rows));
    for (std::size_t k = 0; k < m.curves.size(); ++k) {
      selections.push_back({std::to_string(result.used_replications[k]), name, m.selections[k],
                            format_number(m.curves[k].auroc)});
    }
    plot.series.push_back({roc_legend(name, b.mean_auroc, b.auroc_lower, b.auroc_upper), b.grid, b.mean_tpr,
                           b.lower_tpr, b.upper_tpr, false});
  }
  write_table(join_path(a.outdir, "auroc_summary.csv"), {"model", "mean_auroc", "q2.5", "q97.5", "n_curves"}, summary);
  write_table(join_path(a.outdir, "selections.csv"), {"replication", "model", "selection", "test_auroc"},
              std::move(selections));
  write_text_file(join_path(a.outdir, "roc.svg"), render_svg(plot));

  std::string report = fmt::format("decision_fn: {}\nreplications_used: {}\nreplications_degenerate: {}\n",
                                   to_string(cfg.scenario.decision_fn), result.used_replications.size(),
                                   result.degenerate_replications.size());
  for (const auto& row : summary) report += fmt::format("{}: mean AUROC {} [{}, {}]\n", row[0], row[1], row[2], row[3]);
  write_text_file(join_path(a.outdir, "study_report.txt"), report);
  out << report;
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate / compare

struct EvaluateArgs {
  std::string data, target, time_col, outdir;
  std::vector<std::string> models;
  std::size_t min_train = 100;
  double maturity_days = 61.0;
  std::optional<double> label_threshold;
};

// Scores are default probabilities so rows scored by different refits are
// comparable.
ModelFactory spec_factory(const ModelSpec& spec, const std::optional<double>& threshold) {
  return [spec, threshold](const Dataset& train) -> Scorer {
    if (spec.kind == "constant") return [](std::span<const double>) { return 0.5; };
    std::vector<int> labels;
    if (spec.kind == "logit" || spec.kind == "boosted-logit") labels = make_labels(train.response, threshold);
    TrainOutcome t = fit_spec(spec, train, &labels, SigmaSearchConfig{}, false);
    auto doc = std::make_shared<ModelDocument>(std::move(t.doc));
    return [doc](std::span<const double> x) {
      Matrix m(1, x.size(), std::vector<double>(x.begin(), x.end()));
      return predict_document_prob(*doc, m)[0];
    };
  };
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  require(!a.models.empty(), "give at least one --models spec");
  const CsvTable table = read_csv_file(a.data);
  if (!table.has_column(a.time_col)) fail(ErrorKind::kSchema, fmt::format("timestamp column '{}' not found", a.time_col));
  const Dataset data = table_to_dataset(table, {a.target, a.time_col});
  const std::vector<int> labels = make_labels(data.response, a.label_threshold);
  TemporalCvConfig cv{a.min_train, a.maturity_days};
  ensure_dir(a.outdir);

  struct Scored {
    std::string name;
    TemporalCvResult result;
  };
  std::vector<Scored> scored;
  std::vector<std::vector<std::string>> auroc_rows;
  SvgPlot plot;
  plot.title = "Temporal cross-validation ROC";
  plot.x_label = "False positive rate";
  plot.y_label = "True positive rate";
  plot.diagonal = true;
  plot.x_range = {0.0, 1.0};
  plot.y_range = {0.0, 1.0};
  for (std::size_t i = 0; i < a.models.size(); ++i) {
    const ModelSpec spec = parse_model_spec(a.models[i]);
    const std::string name = fmt::format("m{}_{}", i + 1, spec.kind);
    TemporalCvResult r = temporal_cv(data, labels, spec_factory(spec, a.label_threshold), cv);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < r.rows.size(); ++k) {
      rows.push_back({std::to_string(r.rows[k] + 1), format_number(r.scores[k]), std::to_string(r.labels[k])});
    }
    write_table(join_path(a.outdir, fmt::format("scores_{}.csv", name)), {"row", "score", "label"}, std::move(rows));
    if (r.roc) {
      std::vector<std::vector<std::string>> pts;
      std::vector<double> xs, ys;
      for (const auto& p : r.roc->points) {
        pts.push_back({format_number(p.fpr), format_number(p.tpr)});
        xs.push_back(p.fpr);
        ys.push_back(p.tpr);
      }
      write_table(join_path(a.outdir, fmt::format("roc_{}.csv", name)), {"fpr", "tpr"}, std::move(pts));
      plot.series.push_back({fmt::format("{}: AUROC {}", name, fmt_auc(r.roc->auroc)), xs, ys, {}, {}, false});
    }
    auroc_rows.push_back({name, a.models[i], r.roc ? format_number(r.roc->auroc) : "NA", std::to_string(r.rows.size())});
    scored.push_back({name, std::move(r)});
  }
  write_table(join_path(a.outdir, "auroc.csv"), {"model", "spec", "auroc", "n_scored"}, auroc_rows);
  write_text_file(join_path(a.outdir, "roc.svg"), render_svg(plot));

  std::vector<std::vector<std::string>> delong_rows;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    for (std::size_t j = i + 1; j < scored.size(); ++j) {
      const auto& ra = scored[i].result;
      const auto& rb = scored[j].result;
      if (!ra.roc || !rb.roc) continue;
      const DelongResult d = delong_test(ra.scores, rb.scores, ra.labels);
      delong_rows.push_back({scored[i].name, scored[j].name, format_number(d.auroc_a), format_number(d.auroc_b),
                             format_number(d.z), format_number(d.p_value)});
    }
  }
  write_table(join_path(a.outdir, "delong.csv"), {"model_a", "model_b", "auroc_a", "auroc_b", "z", "p_value"},
              std::move(delong_rows));
  for (const auto& row : auroc_rows) out << fmt::format("{} ({}): AUROC {} on {} rows\n", row[0], row[1], row[2], row[3]);
  return kExitOk;
}

// A named column, else the last one.
std::vector<double> read_column(const std::string& path, const std::string& name) {
  const CsvTable t = read_csv_file(path);
  if (t.header.empty()) fail(ErrorKind::kSchema, fmt::format("'{}' has no columns", path));
  const std::size_t c = t.has_column(name) ? t.column(name) : t.header.size() - 1;
  std::vector<double> v;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double x = parse_cell(t.rows[r][c], t.header[c], r + 1);
    if (std::isnan(x)) fail(ErrorKind::kSchema, fmt::format("'{}' row {}: missing value", path, r + 1));
    v.push_back(x);
  }
  return v;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& labels_path,
                const std::string& out_path, std::ostream& out) {
  const auto a = read_column(a_path, "score");
  const auto b = read_column(b_path, "score");
  const auto l = read_column(labels_path, "label");
  std::vector<int> labels;
  for (double v : l) {
    if (v != 0.0 && v != 1.0) fail(ErrorKind::kSchema, "labels must be 0 or 1");
    labels.push_back(static_cast<int>(v));
  }
  if (a.size() != l.size() || b.size() != l.size()) fail(ErrorKind::kSchema, "score and label files differ in length");
  const DelongResult d = delong_test(a, b, labels);
  const std::vector<std::string> header{"auroc_a", "auroc_b", "z", "p_value"};
  const std::vector<std::string> row{format_number(d.auroc_a), format_number(d.auroc_b), format_number(d.z),
                                     format_number(d.p_value)};
  if (!out_path.empty()) write_table(out_path, header, {row});
  out << to_csv(CsvTable{header, {row}});
  return kExitOk;
}

// ---------------------------------------------------------------- explain

struct ExplainArgs {
  std::string model, data, outdir, pd, local, var, interval = "i";
  bool importance = false;
  std::size_t grid_size = 50;
  std::vector<double> delta;
};

std::size_t variable_index(const ModelDocument& doc, const std::string& name) {
  const auto& names = doc.feature_names;
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(ErrorKind::kInvalidArgument, fmt::format("unknown variable '{}'", name));
  return static_cast<std::size_t>(it - names.begin());
}

int cmd_explain(const ExplainArgs& a, std::ostream& out) {
  const int modes = (a.importance ? 1 : 0) + (a.pd.empty() ? 0 : 1) + (a.local.empty() ? 0 : 1);
  if (modes != 1) fail(ErrorKind::kInvalidArgument, "give exactly one of --importance, --pd or --local");
  const ModelDocument doc = load_model(a.model);
  const auto* model = std::get_if<BoostedEnsemble>(&doc.model);
  if (model == nullptr) fail(ErrorKind::kInvalidArgument, "explain needs a boosted model");
  ensure_dir(a.outdir);
  const std::vector<std::string> names = doc.feature_names.empty() ? std::vector<std::string>{} : doc.feature_names;
  auto name_of = [&](std::size_t k) { return names.empty() ? fmt::format("x{}", k + 1) : names[k]; };

  if (a.importance) {
    const ImportanceReport rep = variable_importance(*model, model->n_features());
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, double>> bars;
    for (std::size_t k : rep.ranked) {
      rows.push_back({name_of(k), format_number(rep.scores[k])});
      bars.emplace_back(name_of(k), rep.scores[k]);
    }
    write_table(join_path(a.outdir, "importance.csv"), {"variable", "importance"}, std::move(rows));
    write_text_file(join_path(a.outdir, "importance.svg"), render_bar_svg("Variable importance", bars));
    out << fmt::format("wrote importance for {} variables\n", rep.scores.size());
    return kExitOk;
  }

  Matrix x = model_features(doc, read_csv_file(a.data));
  apply_preprocessing(doc, x);
  for (double v : x.data()) {
    if (std::isnan(v)) fail(ErrorKind::kNumerical, "missing feature value with no imputation fill");
  }

  if (!a.pd.empty()) {
    std::vector<std::size_t> vars;
    for (const auto& v : split(a.pd, ',')) vars.push_back(variable_index(doc, v));
    const PartialDependence pd = partial_dependence(*model, x, vars, a.grid_size);
    std::vector<std::vector<std::string>> rows;
    if (vars.size() == 1) {
      for (std::size_t g = 0; g < pd.axes[0].size(); ++g) {
        rows.push_back({format_number(pd.axes[0][g]), format_number(pd.values[g])});
      }
      write_table(join_path(a.outdir, "pd.csv"), {name_of(vars[0]), "partial_dependence"}, std::move(rows));
      SvgPlot plot;
      plot.title = fmt::format("Partial dependence on {}", name_of(vars[0]));
      plot.x_label = name_of(vars[0]);
      plot.y_label = "F";
      plot.series.push_back({"partial dependence", pd.axes[0], pd.values, {}, {}, false});
      write_text_file(join_path(a.outdir, "pd.svg"), render_svg(plot));
    } else {
      std::size_t k = 0;
      for (double u : pd.axes[0]) {
        for (double v : pd.axes[1]) rows.push_back({format_number(u), format_number(v), format_number(pd.values[k++])});
      }
      write_table(join_path(a.outdir, "pd2.csv"), {name_of(vars[0]), name_of(vars[1]), "partial_dependence"},
                  std::move(rows));
    }
    out << fmt::format("wrote partial dependence on {} grid points\n", pd.values.size());
    return kExitOk;
  }

  // --local: a 1-based data row, or a comma-separated raw feature vector.
  std::vector<double> x_prime;
  const auto parts = split(a.local, ',');
  if (parts.size() == 1 && model->n_features() != 1) {
    const double r = parse_number("--local", parts[0]);
    if (r < 1 || r > static_cast<double>(x.rows()) || r != std::floor(r)) {
      fail(ErrorKind::kInvalidArgument, fmt::format("--local row {} is out of range 1..{}", parts[0], x.rows()));
    }
    const auto row = x.row(static_cast<std::size_t>(r) - 1);
    x_prime.assign(row.begin(), row.end());
  } else {
    Matrix v(1, parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) v(0, k) = parse_number("--local", parts[k]);
    apply_preprocessing(doc, v);
    x_prime.assign(v.data().begin(), v.data().end());
  }
  if (a.var.empty()) fail(ErrorKind::kInvalidArgument, "--local needs --var");
  const std::size_t s = variable_index(doc, a.var);
  LocalOptions opt;
  opt.strategy = interval_strategy_from_string(a.interval);
  opt.grid_size = std::max<std::size_t>(a.grid_size, 2);
  if (!a.delta.empty()) {
    opt.delta = a.delta.size() == 1 ? std::vector<double>(model->n_features(), a.delta[0]) : a.delta;
  }
  const auto summaries = summarize_features(x);
  const LocalCurve c = local_partial_dependence(*model, summaries, x_prime, s, opt);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    rows.push_back({format_number(c.grid[g]), format_number(c.values[g]), g == c.marker ? "1" : "0"});
  }
  write_table(join_path(a.outdir, "local.csv"), {name_of(s), "prediction", "is_observation"}, std::move(rows));
  SvgPlot plot;
  plot.title = fmt::format("Local partial dependence on {}", name_of(s));
  plot.x_label = name_of(s);
  plot.y_label = "F";
  plot.series.push_back({"local partial dependence", c.grid, c.values, {}, {}, false});
  plot.markers.push_back({x_prime[s], c.prediction});
  write_text_file(join_path(a.outdir, "local.svg"), render_svg(plot));

  const auto full = local_importance(*model, summaries, x_prime, opt, false);
  const auto wins = local_importance(*model, summaries, x_prime, opt, true);
  std::vector<std::vector<std::string>> imp;
  for (std::size_t k = 0; k < full.size(); ++k) imp.push_back({name_of(k), format_number(full[k]), format_number(wins[k])});
  write_table(join_path(a.outdir, "local_importance.csv"), {"variable", "range", "winsorized_range"}, std::move(imp));
  out << fmt::format("prediction: {}\n", format_number(c.prediction));
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kSchema:
      return kExitSchema;
    case ErrorKind::kBounds:
      return kExitBounds;
    case ErrorKind::kNumerical:
      return kExitNumerical;
  }
  return kExitInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient tree-boosted Tobit models for imbalanced binary classification"};
  app.name("grabit");
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fit a model and write it as JSON");
  t->add_option("--data", train.data, "Training CSV")->required();
  t->add_option("--target", train.target, "Response column")->required();
  t->add_option("--model", train.model, "grabit | tobit | logit | boosted-logit");
  auto* lower_opt = t->add_option("--lower", train.lower, "Lower censoring bound (-inf for none)");
  auto* upper_opt = t->add_option("--upper", train.upper, "Upper censoring bound (inf for none)");
  auto* sigma_opt = t->add_option("--sigma", train.sigma, "Latent scale for grabit");
  auto* search_opt = t->add_flag("--sigma-search", train.sigma_search, "Choose sigma by profile likelihood");
  sigma_opt->excludes(search_opt);
  t->add_option("--sigma-grid", train.sigma_grid, "Sigma grid for --sigma-search")->delimiter(',');
  t->add_flag("--refine", train.refine, "Golden-section refinement after the grid search");
  t->add_option("--trees", train.trees, "Number of trees");
  t->add_option("--shrinkage", train.shrinkage, "Shrinkage");
  t->add_option("--depth", train.depth, "Tree depth");
  t->add_option("--log-transform", train.log_transform, "Columns to log-transform")->delimiter(',');
  t->add_option("--seed", train.seed, "Recorded in the report; training is deterministic");
  t->add_option("--out", train.out, "Model JSON path")->required();
  t->add_option("--report", train.report, "Training report path (default <out>.report.txt)");

  std::string p_model, p_data, p_out, p_output = "both";
  auto* p = app.add_subcommand("predict", "Score a CSV with a saved model");
  p->add_option("--model", p_model)->required();
  p->add_option("--data", p_data)->required();
  p->add_option("--out", p_out)->required();
  p->add_option("--output", p_output, "latent | prob | both");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a simulation study");
  s->add_option("--scenario", sim.scenario, "Scenario key = value file");
  s->add_option("--preset", sim.preset, "Named preset");
  s->add_option("--models", sim.models, "Comma-separated roster");
  s->add_option("--replications", sim.replications);
  s->add_option("--seed", sim.seed);
  s->add_option("--trees", sim.trees, "Tree-count grid")->delimiter(',');
  s->add_option("--shrinkage", sim.shrinkage, "Shrinkage grid")->delimiter(',');
  s->add_option("--depth", sim.depth, "Depth grid")->delimiter(',');
  s->add_option("--sigma", sim.sigma, "Sigma grid")->delimiter(',');
  s->add_option("--outdir", sim.outdir)->required();

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Temporal cross-validation of model specs");
  e->add_option("--data", ev.data)->required();
  e->add_option("--target", ev.target)->required();
  e->add_option("--time-col", ev.time_col)->required();
  e->add_option("--models", ev.models, "Model specs, e.g. grabit:lower=0,upper=60,sigma=grid")->required();
  e->add_option("--min-train", ev.min_train);
  e->add_option("--maturity-days", ev.maturity_days);
  e->add_option("--label-threshold", ev.label_threshold, "Default iff target >= this (default: target is 0/1)");
  e->add_option("--outdir", ev.outdir)->required();

  std::string c_a, c_b, c_labels, c_out;
  auto* c = app.add_subcommand("compare", "DeLong test of two paired score files");
  c->add_option("--scores-a", c_a)->required();
  c->add_option("--scores-b", c_b)->required();
  c->add_option("--labels", c_labels)->required();
  c->add_option("--out", c_out, "Optional CSV output");

  ExplainArgs ex;
  auto* x = app.add_subcommand("explain", "Variable importance and partial dependence");
  x->add_option("--model", ex.model)->required();
  x->add_option("--data", ex.data);
  x->add_flag("--importance", ex.importance);
  x->add_option("--pd", ex.pd, "var or var1,var2");
  x->add_option("--local", ex.local, "1-based row or comma-separated feature vector");
  x->add_option("--var", ex.var);
  x->add_option("--interval", ex.interval, "i | ii | iii | iv");
  x->add_option("--delta", ex.delta, "Half-width for interval iv")->delimiter(',');
  x->add_option("--grid-size", ex.grid_size);
  x->add_option("--outdir", ex.outdir)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& h) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (t->parsed()) {
      train.lower_given = lower_opt->count() > 0;
      train.upper_given = upper_opt->count() > 0;
      return cmd_train(train, out);
    }
    if (p->parsed()) return cmd_predict(p_model, p_data, p_out, p_output);
    if (s->parsed()) return cmd_simulate(sim, out);
    if (e->parsed()) return cmd_evaluate(ev, out);
    if (c->parsed()) return cmd_compare(c_a, c_b, c_labels, c_out, out);
    if (x->parsed()) {
      if (!ex.importance && ex.data.empty()) fail(ErrorKind::kInvalidArgument, "--data is required here");
      return cmd_explain(ex, out);
    }
  } catch (const Error& ge) {
    err << "error: " << ge.what() << "\n";
    return exit_code(ge.kind());
  } catch (const std::exception& se) {
    err << "internal error: " << se.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace grabit
