#include "oedpm/run.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace oedpm {

namespace {

struct LoadedRun {
  Dataset train;
  Matrix train_std;
  Standardizer standardizer;
};

LoadedRun load_training(const RunConfig& config) {
  CsvOptions options;
  options.label_column = config.label_column;
  LoadedRun loaded;
  loaded.train = load_csv(config.input_path, options);
  loaded.standardizer = Standardizer::fit(loaded.train.features);
  loaded.train_std = loaded.standardizer.apply(loaded.train.features);
  return loaded;
}

std::string default_output(ReportFormat format) {
  return format == ReportFormat::kCsv ? "report.csv" : "report.json";
}

void print_metrics(std::ostream& out, const Metrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "precision=%.6f recall=%.6f f1=%.6f tp=%ld fp=%ld fn=%ld tn=%ld",
                m.precision, m.recall, m.f1, m.tp, m.fp, m.fn, m.tn);
  out << buf << '\n';
}

std::string format_phi(double phi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", phi);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

} // namespace

void run_detect(const RunConfig& config) {
  config.ensemble.validate();
  LoadedRun loaded = load_training(config);

  std::optional<Dataset> test;
  if (config.test_path) {
    CsvOptions options;
    options.label_column = config.label_column;
    test = load_csv(*config.test_path, options);
  }
  const Matrix test_std =
      test ? loaded.standardizer.apply(test->features) : loaded.train_std;
  const std::vector<int>* labels = nullptr;
  if (test && test->labels) labels = &*test->labels;
  else if (!test && loaded.train.labels) labels = &*loaded.train.labels;

  std::cerr << "[oedpm] fitting " << config.ensemble.ensemble_size << " components on "
            << loaded.train.size() << "x" << loaded.train.dim() << " (seed "
            << config.ensemble.master_seed << ")\n";
  const auto components = fit_detector(loaded.train_std, config.ensemble);
  std::cerr << "[oedpm] scoring " << test_std.rows() << " instances\n";
  DetectionReport report = score(test_std, components, config.ensemble);

  if (labels) {
    report.metrics = evaluate(report, *labels);
    print_metrics(std::cout, *report.metrics);
  }

  const std::string out_path =
      config.output_path.empty() ? default_output(config.format) : config.output_path;
  write_report(report, out_path, config.format);
  std::cerr << "[oedpm] report written to " << out_path << "\n";
}

void run_sweep(const RunConfig& config) {
  config.ensemble.validate();
  if (config.phis.empty()) throw ConfigError("sweep requires at least one phi value");
  for (double phi : config.phis)
    if (!(phi > 0.0 && phi < 1.0))
      throw ConfigError("sweep phi must lie in (0, 1), got " + format_phi(phi));

  LoadedRun loaded = load_training(config);
  if (!loaded.train.labels)
    throw ConfigError("sweep mode requires a label column");
  const std::vector<int>& labels = *loaded.train.labels;

  std::cerr << "[oedpm] fitting " << config.ensemble.ensemble_size << " components on "
            << loaded.train.size() << "x" << loaded.train.dim() << " (seed "
            << config.ensemble.master_seed << ")\n";
  auto components = fit_detector(loaded.train_std, config.ensemble);

  // The fit does not depend on phi; each row only re-derives thresholds.
  std::ostringstream table;
  table << "phi,f1\n";
  char buf[32];
  for (double phi : config.phis) {
    recompute_thresholds(components, loaded.train_std, ThresholdMode::kQuantile, phi);
    const DetectionReport report = score(loaded.train_std, components, config.ensemble);
    const Metrics m = evaluate(report, labels);
    std::snprintf(buf, sizeof buf, "%.6f", m.f1);
    table << format_phi(phi) << ',' << buf << '\n';
  }
  recompute_thresholds(components, loaded.train_std, ThresholdMode::kIqr, std::nullopt);
  const DetectionReport report = score(loaded.train_std, components, config.ensemble);
  const Metrics m = evaluate(report, labels);
  std::snprintf(buf, sizeof buf, "%.6f", m.f1);
  table << "iqr," << buf << '\n';

  write_text(config.output_path, table.str());
}

void run_bench(const RunConfig& config) {
  config.ensemble.validate();
  if (config.manifest_path.empty()) throw ConfigError("bench mode requires --manifest");

  // Manifest: CSV with header "name,path,label_col".
  std::ifstream in(config.manifest_path);
  if (!in) throw DataError("cannot open manifest: " + config.manifest_path);
  std::vector<std::array<std::string, 3>> entries;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "name,path,label_col") continue;
    }
    std::array<std::string, 3> entry;
    std::istringstream ls(line);
    if (!std::getline(ls, entry[0], ',') || !std::getline(ls, entry[1], ',') ||
        !std::getline(ls, entry[2]))
      throw DataError("malformed manifest line: " + line);
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw UsageError("manifest lists no datasets");

  std::ostringstream table;
  table << "dataset,n,p,outlier_pct,f1,seconds,status\n";
  char buf[64];
  double f1_sum = 0.0;
  std::size_t ok_count = 0;
  bool any_failed = false;
  for (const auto& [name, path, label_col] : entries) {
    std::cerr << "[oedpm] bench: " << name << "\n";
    try {
      CsvOptions options;
      options.label_column = label_col;
      const Dataset dataset = load_csv(path, options);
      if (!dataset.labels) throw DataError("dataset " + name + " has no labels");
      const auto start = std::chrono::steady_clock::now();
      const Standardizer standardizer = Standardizer::fit(dataset.features);
      const Matrix features = standardizer.apply(dataset.features);
      const auto components = fit_detector(features, config.ensemble);
      const DetectionReport report = score(features, components, config.ensemble);
      const Metrics m = evaluate(report, *dataset.labels);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      long outliers = 0;
      for (int label : *dataset.labels) outliers += label;
      const double pct = 100.0 * static_cast<double>(outliers) /
                         static_cast<double>(dataset.size());
      std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.3f", pct, m.f1, seconds);
      table << name << ',' << dataset.size() << ',' << dataset.dim() << ',' << buf
            << ",ok\n";
      f1_sum += m.f1;
      ++ok_count;
    } catch (const std::exception& e) {
      any_failed = true;
      std::string reason = e.what();
      for (char& c : reason)
        if (c == ',' || c == '\n') c = ';';
      table << name << ",,,,,," << "error: " << reason << '\n';
    }
  }
  if (ok_count > 0) {
    std::snprintf(buf, sizeof buf, "%.6f", f1_sum / static_cast<double>(ok_count));
    table << "Average,,,," << buf << ",,\n";
  }

  write_text(config.output_path, table.str());
  if (any_failed) throw DataError("one or more bench datasets failed");
}

int run(const RunConfig& config) {
  try {
    switch (config.mode) {
      case RunMode::kDetect: run_detect(config); break;
      case RunMode::kSweep: run_sweep(config); break;
      case RunMode::kBench: run_bench(config); break;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace oedpm
