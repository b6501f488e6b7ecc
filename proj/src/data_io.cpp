#include "oedpm/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace oedpm {

namespace {

// One CSV record honoring quoted fields; returns false at end of input.
bool read_record(std::istream& in, char delimiter, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  int c;
  while ((c = in.get()) != EOF) {
    saw_any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get();
      break;
    } else {
      field.push_back(ch);
    }
  }
  if (!saw_any) return false;
  fields.push_back(std::move(field));
  return true;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw DataError("non-numeric cell '" + cell + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
  return value;
}

} // namespace

Dataset load_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> record;
  while (read_record(in, options.delimiter, record)) {
    if (record.size() == 1 && record[0].empty()) continue; // blank line
    rows.push_back(record);
  }
  if (rows.empty()) throw DataError("empty input file: " + path);

  std::vector<std::string> header;
  std::size_t first_data_row = 0;
  if (options.has_header) {
    header = rows[0];
    first_data_row = 1;
    if (rows.size() == 1) throw DataError("no data rows in " + path);
  }
  const std::size_t width = rows[first_data_row].size();
  if (options.has_header && header.size() != width)
    throw DataError("header width differs from data width in " + path);

  // Resolve the label column: by name against the header, or by 0-based
  // index when the selector is numeric.
  std::optional<std::size_t> label_index;
  if (options.label_column) {
    const std::string& sel = *options.label_column;
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == sel) label_index = j;
    if (!label_index) {
      std::size_t parsed = 0;
      const auto [ptr, ec] = std::from_chars(sel.data(), sel.data() + sel.size(), parsed);
      if (ec == std::errc{} && ptr == sel.data() + sel.size() && parsed < width)
        label_index = parsed;
    }
    if (!label_index)
      throw DataError("label column '" + sel + "' not found in " + path);
  }

  const std::size_t n = rows.size() - first_data_row;
  const std::size_t p = width - (label_index ? 1 : 0);
  if (p == 0) throw DataError("no feature columns in " + path);

  Dataset dataset;
  dataset.source = path;
  dataset.features = Matrix(n, p);
  if (label_index) dataset.labels.emplace(n, 0);
  for (std::size_t j = 0; j < width; ++j) {
    if (label_index && j == *label_index) continue;
    dataset.feature_names.push_back(options.has_header ? header[j]
                                                       : "f" + std::to_string(j));
  }

  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = rows[r + first_data_row];
    if (cells.size() != width)
      throw DataError("ragged row " + std::to_string(r + first_data_row + 1) + " in " + path +
                      ": expected " + std::to_string(width) + " fields, got " +
                      std::to_string(cells.size()));
    std::size_t out_col = 0;
    for (std::size_t j = 0; j < width; ++j) {
      const double value = parse_cell(cells[j], r + first_data_row + 1, j + 1);
      if (label_index && j == *label_index) {
        (*dataset.labels)[r] = value != 0.0 ? 1 : 0;
      } else {
        if (!std::isfinite(value))
          throw DataError("non-finite value at row " + std::to_string(r + first_data_row + 1) +
                          ", column " + std::to_string(j + 1) + " in " + path);
        dataset.features(r, out_col++) = value;
      }
    }
  }
  return dataset;
}

void write_csv(const Dataset& dataset, const std::string& path, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  const std::size_t p = dataset.dim();

  for (std::size_t j = 0; j < p; ++j) {
    out << (j < dataset.feature_names.size() ? dataset.feature_names[j]
                                             : "f" + std::to_string(j));
    if (j + 1 < p || dataset.labels) out << delimiter;
  }
  if (dataset.labels) out << "outlier";
  out << '\n';

  char buf[40];
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.features(i, j));
      out << buf;
      if (j + 1 < p || dataset.labels) out << delimiter;
    }
    if (dataset.labels) out << (*dataset.labels)[i];
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

Standardizer Standardizer::fit(const Matrix& features) {
  const std::size_t n = features.rows();
  const std::size_t p = features.cols();
  if (n == 0) throw UsageError("Standardizer::fit: empty matrix");

  Standardizer s;
  s.means.assign(p, 0.0);
  s.stds.assign(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = features.row(i);
    for (std::size_t j = 0; j < p; ++j) s.means[j] += row[j];
  }
  for (double& m : s.means) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = features.row(i);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = row[j] - s.means[j];
      s.stds[j] += d * d;
    }
  }
  for (double& v : s.stds) {
    v = std::sqrt(v / static_cast<double>(n));
    if (v < 1e-12) v = 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& features) const {
  check_same_cols(features, means.size(), "Standardizer::apply");
  Matrix out(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const double* src = features.row(i);
    double* dst = out.row(i);
    for (std::size_t j = 0; j < features.cols(); ++j)
      dst[j] = (src[j] - means[j]) / stds[j];
  }
  return out;
}

Metrics evaluate(const DetectionReport& report, const std::vector<int>& labels) {
  if (labels.size() != report.memberships.size())
    throw UsageError("evaluate: labels length " + std::to_string(labels.size()) +
                     " does not match report length " +
                     std::to_string(report.memberships.size()));

  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = report.memberships[i] != 0;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++m.tp;
    else if (predicted && !actual) ++m.fp;
    else if (!predicted && actual) ++m.fn;
    else ++m.tn;
  }
  m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

namespace {

nlohmann::json config_to_json(const EnsembleConfig& config) {
  nlohmann::json j;
  j["ensemble_size"] = config.ensemble_size;
  j["threshold_mode"] = config.threshold_mode == ThresholdMode::kQuantile ? "quantile" : "iqr";
  if (config.contamination) j["contamination"] = *config.contamination;
  j["covariance_mode"] =
      config.covariance_mode == dpgm::CovarianceMode::kDiagonal ? "diagonal" : "full";
  j["truncation"] = config.truncation;
  j["master_seed"] = config.master_seed;
  return j;
}

} // namespace

void write_report(const DetectionReport& report, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);

  if (format == ReportFormat::kCsv) {
    out << "index,score,is_outlier\n";
    char buf[32];
    for (std::size_t i = 0; i < report.scores.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.6f", report.scores[i]);
      out << i << ',' << buf << ',' << report.memberships[i] << '\n';
    }
  } else {
    nlohmann::json j;
    j["scores"] = report.scores;
    j["memberships"] = report.memberships;
    j["thresholds"] = report.thresholds;
    j["config"] = config_to_json(report.config);
    if (report.metrics) {
      nlohmann::json m;
      m["precision"] = report.metrics->precision;
      m["recall"] = report.metrics->recall;
      m["f1"] = report.metrics->f1;
      m["tp"] = report.metrics->tp;
      m["fp"] = report.metrics->fp;
      m["fn"] = report.metrics->fn;
      m["tn"] = report.metrics->tn;
      j["metrics"] = m;
    }
    out << j.dump(2) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

DetectionReport read_report_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open report file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid JSON report " + path + ": " + e.what());
  }

  DetectionReport report;
  report.scores = j.at("scores").get<std::vector<double>>();
  report.memberships = j.at("memberships").get<std::vector<int>>();
  report.thresholds = j.at("thresholds").get<std::vector<double>>();
  const auto& c = j.at("config");
  report.config.ensemble_size = c.at("ensemble_size").get<int>();
  report.config.threshold_mode =
      c.at("threshold_mode").get<std::string>() == "iqr" ? ThresholdMode::kIqr
                                                         : ThresholdMode::kQuantile;
  if (c.contains("contamination"))
    report.config.contamination = c.at("contamination").get<double>();
  else
    report.config.contamination.reset();
  report.config.covariance_mode = c.at("covariance_mode").get<std::string>() == "full"
                                      ? dpgm::CovarianceMode::kFull
                                      : dpgm::CovarianceMode::kDiagonal;
  report.config.truncation = c.at("truncation").get<int>();
  report.config.master_seed = c.at("master_seed").get<std::uint64_t>();
  if (j.contains("metrics")) {
    Metrics m;
    const auto& jm = j.at("metrics");
    m.precision = jm.at("precision").get<double>();
    m.recall = jm.at("recall").get<double>();
    m.f1 = jm.at("f1").get<double>();
    m.tp = jm.at("tp").get<long>();
    m.fp = jm.at("fp").get<long>();
    m.fn = jm.at("fn").get<long>();
    m.tn = jm.at("tn").get<long>();
    report.metrics = m;
  }
  return report;
}

} // namespace oedpm
