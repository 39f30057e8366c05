#include "grabit/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <json.hpp>

#include "grabit/csv.hpp"
#include "grabit/error.hpp"

namespace grabit {
namespace {

using nlohmann::json;

// JSON has no infinities; bounds are written as numbers or "inf" / "-inf".
json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double bound_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    fail(ErrorKind::kSchema, fmt::format("invalid bound '{}'", s));
  }
  return j.get<double>();
}

json loss_to_json(LossKind kind, const CensoringBounds& b, double sigma) {
  json j{{"kind", to_string(kind)}};
  if (kind == LossKind::kTobit) {
    j["lower"] = bound_to_json(b.lower);
    j["upper"] = bound_to_json(b.upper);
    j["sigma"] = sigma;
  }
  return j;
}

Loss loss_from_json(const json& j) {
  const LossKind kind = loss_kind_from_string(j.at("kind").get<std::string>());
  switch (kind) {
    case LossKind::kTobit:
      return Loss::tobit(CensoringBounds::make(bound_from_json(j.at("lower")), bound_from_json(j.at("upper"))),
                         j.at("sigma").get<double>());
    case LossKind::kBernoulliLogit:
      return Loss::bernoulli_logit();
    case LossKind::kSquared:
      return Loss::squared();
  }
  fail(ErrorKind::kSchema, "unknown loss");
}

json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value},
                     {"gain", n.gain},
                     {"count", n.count}});
  }
  return nodes;
}

RegressionTree tree_from_json(const json& j, std::size_t p) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j) {
    TreeNode t;
    t.feature = n.at("feature").get<int>();
    t.threshold = n.at("threshold").get<double>();
    t.left = n.at("left").get<int>();
    t.right = n.at("right").get<int>();
    t.value = n.at("value").get<double>();
    t.gain = n.at("gain").get<double>();
    t.count = n.at("count").get<std::size_t>();
    if (!std::isfinite(t.value)) fail(ErrorKind::kSchema, "tree leaf value is not finite");
    nodes.push_back(t);
  }
  return RegressionTree(std::move(nodes), p);
}

json doubles_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double d : v) {
    if (std::isnan(d)) a.push_back(nullptr);
    else a.push_back(d);
  }
  return a;
}

std::vector<double> doubles_from_json(const json& j) {
  std::vector<double> v;
  for (const auto& e : j) v.push_back(e.is_null() ? std::nan("") : e.get<double>());
  return v;
}

}  // namespace

std::string model_to_json(const ModelDocument& doc) {
  json j;
  j["format"] = "grabit-model";
  j["format_version"] = kModelFormatVersion;
  j["feature_names"] = doc.feature_names;
  j["preprocessing"] = {{"log_transform", doc.preprocessing.log_transform},
                        {"impute", doubles_to_json(doc.preprocessing.impute)}};
  if (const auto* m = std::get_if<BoostedEnsemble>(&doc.model)) {
    j["kind"] = "boosted";
    j["loss"] = loss_to_json(m->loss().kind(), m->loss().bounds(), m->loss().sigma());
    j["n_features"] = m->n_features();
    j["f0"] = m->f0();
    j["shrinkage"] = m->shrinkage();
    json trees = json::array();
    for (const auto& t : m->trees()) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
  } else {
    const auto& lm = std::get<LinearModel>(doc.model);
    j["kind"] = "linear";
    j["loss"] = loss_to_json(lm.kind, lm.bounds, lm.sigma);
    j["n_features"] = lm.coefficients.size();
    j["intercept"] = lm.intercept;
    j["coefficients"] = lm.coefficients;
    j["fit"] = {{"status", to_string(lm.status)},
                {"iterations", lm.iterations},
                {"mean_loss", lm.mean_loss},
                {"gradient_norm", lm.gradient_norm}};
  }
  return j.dump(1) + "\n";
}

ModelDocument model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "grabit-model") fail(ErrorKind::kSchema, "not a model document");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorKind::kSchema, fmt::format("unsupported model format version {}", version));
    }
    const std::size_t p = j.at("n_features").get<std::size_t>();
    const std::string kind = j.at("kind").get<std::string>();
    std::vector<std::string> names = j.at("feature_names").get<std::vector<std::string>>();
    if (!names.empty() && names.size() != p) fail(ErrorKind::kSchema, "feature names do not match n_features");
    Preprocessing pre;
    pre.log_transform = j.at("preprocessing").at("log_transform").get<std::vector<std::string>>();
    pre.impute = doubles_from_json(j.at("preprocessing").at("impute"));
    if (!pre.impute.empty() && pre.impute.size() != p) fail(ErrorKind::kSchema, "impute values do not match n_features");

    if (kind == "boosted") {
      std::vector<RegressionTree> trees;
      for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t, p));
      BoostedEnsemble m(loss_from_json(j.at("loss")), j.at("f0").get<double>(), j.at("shrinkage").get<double>(),
                        std::move(trees), p);
      return {std::move(m), std::move(names), std::move(pre)};
    }
    if (kind == "linear") {
      LinearModel lm;
      const Loss loss = loss_from_json(j.at("loss"));
      lm.kind = loss.kind();
      if (lm.kind == LossKind::kTobit) {
        lm.bounds = loss.bounds();
        lm.sigma = loss.sigma();
      }
      lm.intercept = j.at("intercept").get<double>();
      lm.coefficients = j.at("coefficients").get<std::vector<double>>();
      if (lm.coefficients.size() != p) fail(ErrorKind::kSchema, "coefficient count does not match n_features");
      const auto& fit = j.at("fit");
      const std::string status = fit.at("status").get<std::string>();
      for (auto s : {FitStatus::kConverged, FitStatus::kMaxIterations, FitStatus::kSeparation}) {
        if (to_string(s) == status) lm.status = s;
      }
      lm.iterations = fit.at("iterations").get<int>();
      lm.mean_loss = fit.at("mean_loss").get<double>();
      lm.gradient_norm = fit.at("gradient_norm").get<double>();
      return {std::move(lm), std::move(names), std::move(pre)};
    }
    fail(ErrorKind::kSchema, fmt::format("unknown model kind '{}'", kind));
  } catch (const json::exception& e) {
    fail(ErrorKind::kSchema, fmt::format("malformed model document: {}", e.what()));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) fail(ErrorKind::kSchema, e.what());
    throw;
  }
}

void save_model(const std::string& path, const ModelDocument& doc) { write_text_file(path, model_to_json(doc)); }

ModelDocument load_model(const std::string& path) { return model_from_json(read_text_file(path)); }

std::size_t model_width(const ModelDocument& doc) {
  if (const auto* m = std::get_if<BoostedEnsemble>(&doc.model)) return m->n_features();
  return std::get<LinearModel>(doc.model).coefficients.size();
}

void apply_log_transform(const std::vector<std::string>& columns, const std::vector<std::string>& names, Matrix& x) {
  for (const auto& col : columns) {
    const auto it = std::find(names.begin(), names.end(), col);
    if (it == names.end()) fail(ErrorKind::kSchema, fmt::format("log-transform column '{}' not found", col));
    const auto c = static_cast<std::size_t>(it - names.begin());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      double& v = x(r, c);
      if (std::isnan(v)) continue;
      if (!(v > 0.0)) {
        fail(ErrorKind::kNumerical,
             fmt::format("log-transform column '{}' has a non-positive value {} at row {}", col, v, r + 1));
      }
      v = std::log(v);
    }
  }
}

void apply_imputation(const std::vector<double>& fill, Matrix& x) {
  if (fill.empty()) return;
  require(fill.size() == x.cols(), "imputation values do not match the column count");
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      if (std::isnan(x(r, c)) && !std::isnan(fill[c])) x(r, c) = fill[c];
    }
  }
}

void apply_preprocessing(const ModelDocument& doc, Matrix& x) {
  if (x.cols() != model_width(doc)) {
    fail(ErrorKind::kSchema, fmt::format("model expects {} features, data has {}", model_width(doc), x.cols()));
  }
  apply_log_transform(doc.preprocessing.log_transform, doc.feature_names, x);
  apply_imputation(doc.preprocessing.impute, x);
}

std::vector<double> predict_document(const ModelDocument& doc, const Matrix& x) {
  Matrix xt = x;
  apply_preprocessing(doc, xt);
  for (double v : xt.data()) {
    if (std::isnan(v)) fail(ErrorKind::kNumerical, "missing feature value with no imputation fill");
  }
  if (const auto* m = std::get_if<BoostedEnsemble>(&doc.model)) return predict_latent(*m, xt);
  const auto& lm = std::get<LinearModel>(doc.model);
  std::vector<double> f(xt.rows());
  for (std::size_t r = 0; r < xt.rows(); ++r) f[r] = predict_linear(lm, xt.row(r));
  return f;
}

std::vector<double> predict_document_prob(const ModelDocument& doc, const Matrix& x) {
  Matrix xt = x;
  apply_preprocessing(doc, xt);
  for (double v : xt.data()) {
    if (std::isnan(v)) fail(ErrorKind::kNumerical, "missing feature value with no imputation fill");
  }
  std::vector<double> p(xt.rows());
  if (const auto* m = std::get_if<BoostedEnsemble>(&doc.model)) {
    if (m->loss().kind() == LossKind::kBernoulliLogit) {
      for (std::size_t r = 0; r < xt.rows(); ++r) {
        const double f = predict_latent(*m, xt.row(r));
        p[r] = f >= 0.0 ? 1.0 / (1.0 + std::exp(-f)) : std::exp(f) / (1.0 + std::exp(f));
      }
    } else {
      for (std::size_t r = 0; r < xt.rows(); ++r) p[r] = predict_default_prob(*m, xt.row(r));
    }
    return p;
  }
  const auto& lm = std::get<LinearModel>(doc.model);
  for (std::size_t r = 0; r < xt.rows(); ++r) p[r] = predict_default_prob(lm, xt.row(r));
  return p;
}

}  // namespace grabit
