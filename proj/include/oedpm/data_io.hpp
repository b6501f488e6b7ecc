#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oedpm/ensemble.hpp"
#include "oedpm/matrix.hpp"

namespace oedpm {

struct Dataset {
  Matrix features;                       // N x p
  std::optional<std::vector<int>> labels; // 1 = outlier, 0 = inlier
  std::vector<std::string> feature_names;
  std::string source;

  std::size_t size() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
};

struct CsvOptions {
  bool has_header = true;
  std::optional<std::string> label_column; // column name, or 0-based index when numeric
  char delimiter = ',';
};

// RFC-4180-style numeric CSV. The label column, when named, is removed from
// the features and binarized (any nonzero value counts as an outlier).
// Parsing is locale-independent (dot decimal separator).
Dataset load_csv(const std::string& path, const CsvOptions& options = {});

// Feature-matrix writer (17 significant digits, value-exact round trip);
// labels, when present, go to a trailing "outlier" column.
void write_csv(const Dataset& dataset, const std::string& path, char delimiter = ',');

// Per-feature z-scoring with population standard deviation; columns with
// std below 1e-12 use std = 1. Fitted on training data only.
struct Standardizer {
  Vector means;
  Vector stds;

  static Standardizer fit(const Matrix& features);
  Matrix apply(const Matrix& features) const;
};

Metrics evaluate(const DetectionReport& report, const std::vector<int>& labels);

enum class ReportFormat { kCsv, kJson };

// CSV: "index,score,is_outlier" rows with 6-decimal scores. JSON: scores,
// memberships, thresholds, config echo and metrics when present. Output is
// byte-identical across runs with equal inputs.
void write_report(const DetectionReport& report, const std::string& path, ReportFormat format);

// Parses a JSON report back (used for round-trip checks and tooling).
DetectionReport read_report_json(const std::string& path);

} // namespace oedpm
