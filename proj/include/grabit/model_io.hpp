#pragma once

#include <string>
#include <variant>
#include <vector>

#include "grabit/boosting.hpp"
#include "grabit/dataset.hpp"
#include "grabit/linear.hpp"

namespace grabit {

inline constexpr int kModelFormatVersion = 1;

/// Input transforms applied before the model sees a row: natural log of the
/// named columns, then NaN cells replaced by the per-column fill value.
struct Preprocessing {
  std::vector<std::string> log_transform;
  std::vector<double> impute;  // per feature; empty means no imputation

  bool operator==(const Preprocessing&) const = default;
};

struct ModelDocument {
  std::variant<LinearModel, BoostedEnsemble> model;
  std::vector<std::string> feature_names;
  Preprocessing preprocessing;
};

/// Versioned JSON. Doubles are written in shortest round-trip form, so a
/// saved and reloaded model predicts bit-identically.
std::string model_to_json(const ModelDocument& doc);
/// Throws kSchema on malformed documents or an unsupported format version.
ModelDocument model_from_json(const std::string& text);

void save_model(const std::string& path, const ModelDocument& doc);
ModelDocument load_model(const std::string& path);

std::size_t model_width(const ModelDocument& doc);

/// Applies the log transforms in place; a value <= 0 throws naming the
/// column. Missing cells (NaN) are left for imputation.
void apply_log_transform(const std::vector<std::string>& columns, const std::vector<std::string>& names, Matrix& x);
void apply_imputation(const std::vector<double>& fill, Matrix& x);
void apply_preprocessing(const ModelDocument& doc, Matrix& x);

/// Latent F per row, after preprocessing.
std::vector<double> predict_document(const ModelDocument& doc, const Matrix& x);
/// Default probability per row. Throws for models without one.
std::vector<double> predict_document_prob(const ModelDocument& doc, const Matrix& x);

}  // namespace grabit
