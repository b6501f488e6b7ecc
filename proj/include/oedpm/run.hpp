#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oedpm/data_io.hpp"
#include "oedpm/ensemble.hpp"

namespace oedpm {

enum class RunMode { kDetect, kSweep, kBench };

struct RunConfig {
  RunMode mode = RunMode::kDetect;
  std::string input_path;
  std::optional<std::string> test_path;    // default: score the training set
  std::optional<std::string> label_column;
  EnsembleConfig ensemble;
  std::string output_path;                 // empty: sweep/bench print to stdout
  ReportFormat format = ReportFormat::kCsv;
  std::vector<double> phis = {0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
  std::string manifest_path;
};

// Exit codes: 0 success, 1 unexpected, 2 config error, 3 data error,
// 4 numeric error. Diagnostics go to stderr, results to files/stdout.
int run(const RunConfig& config);

// The individual modes; these throw instead of returning codes.
void run_detect(const RunConfig& config);
void run_sweep(const RunConfig& config);
void run_bench(const RunConfig& config);

} // namespace oedpm
