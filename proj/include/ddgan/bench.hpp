#pragma once

#include <iosfwd>

#include "ddgan/config.hpp"
#include "ddgan/geometry.hpp"

namespace ddgan {

/// Process exit codes of the benchmark driver.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitDivergence = 3, kExitIo = 4 };

/// Maps the library's exception types onto exit codes.
int exit_code_for(const std::exception& e);

/// Writes the binary dataset and a JSON sidecar next to it.
void cmd_synthesize(const RunConfig& config, std::ostream& out);

/// Trains from the dataset file; writes the log CSV and the final checkpoint.
TrainingLog cmd_train(const RunConfig& config, std::ostream& out);

struct EvaluationSummary {
  std::size_t points = 0;
  double max_abs_u_x = 0.0;
  Point2 max_abs_u_x_at;
  double max_abs_u_y = 0.0;
  Point2 max_abs_u_y_at;
  double residual_mean_sq = 0.0;  // mean |div sigma|^2 over the test points
  double residual_max = 0.0;      // max |div sigma|
  double physics_loss = 0.0;      // L_C on the test points plus soft boundary
  double mean_distance = 0.0;
};

/// Evaluates the checkpoint on the uniform test set; writes fields CSV and summary JSON.
EvaluationSummary cmd_evaluate(const RunConfig& config, std::ostream& out);

/// synthesize-data, train and evaluate in sequence.
EvaluationSummary cmd_full(const RunConfig& config, std::ostream& out);

}  // namespace ddgan
