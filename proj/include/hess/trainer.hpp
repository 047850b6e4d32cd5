#pragma once

// Levenberg-Marquardt trainer for the open-loop (measured feedback) form.
// Rows are split chronologically into train/validation/test blocks; each
// epoch is one accepted full-batch step. The damping factor mu shrinks on
// acceptance and grows on rejection; training returns the weights from the
// best-validation epoch.

#include <utility>
#include <vector>

#include <json.hpp>

#include "hess/narx.hpp"
#include "hess/types.hpp"

namespace hess {

struct TrainConfig {
  int max_epochs = 200;
  double mu_init = 1e-3;
  double mu_increase = 10.0;
  double mu_decrease = 0.1;
  double mu_max = 1e10;
  double goal_mse = 0.0;  // stop once train MSE falls to this level
  int val_patience = 6;   // tolerated consecutive validation-MSE increases
  double train_ratio = 0.70;
  double val_ratio = 0.15;
  double test_ratio = 0.15;
  std::uint64_t seed = 0;  // weight initialization
};

void validate(const TrainConfig& cfg);

enum class StopReason { MaxEpochs, Goal, ValPatience, MuOverflow };
std::string to_string(StopReason r);
StopReason stop_reason_from_string(const std::string& s);

struct TrainReport {
  int epochs_run = 0;  // accepted epochs
  std::vector<double> train_mse;  // one entry per accepted epoch
  std::vector<double> val_mse;
  std::vector<double> test_mse;
  int accepted_steps = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
  std::string weights_checksum;  // fingerprint of the returned weights
};

nlohmann::json to_json(const TrainReport& r);
TrainReport report_from_json(const nlohmann::json& j);

// Chronological, contiguous split: floor(n * train_ratio) training rows,
// floor(n * val_ratio) validation rows, remainder test. Requires n >= 10.
struct SplitIndices {
  Index n_train = 0;
  Index n_val = 0;
  Index n_test = 0;
  Index val_begin() const { return n_train; }
  Index test_begin() const { return n_train + n_val; }
  Index total() const { return n_train + n_val + n_test; }
};

SplitIndices split_rows(Index n_rows, const TrainConfig& cfg);
SplitIndices split_rows(const RegressorSet& rows, const TrainConfig& cfg);

// Residuals e_i = target_i - forward(row_i) and their jacobian with respect
// to the flattened weights (columns in flatten_weights order).
VecXd residuals(const NarxNetwork& net, const Eigen::Ref<const MatXd>& rows,
                const Eigen::Ref<const VecXd>& targets);
MatXd lm_jacobian(const NarxNetwork& net, const Eigen::Ref<const MatXd>& rows);

// Solves (J'J + mu I) d = J'e for the update w <- w - d. One iterative
// refinement pass keeps the residual of the solve below 1e-8 relative.
VecXd solve_damped(const Eigen::Ref<const MatXd>& jtj,
                   const Eigen::Ref<const VecXd>& g, double mu);

std::pair<NarxNetwork, TrainReport> train_narx(NarxNetwork net,
                                               const RegressorSet& rows,
                                               const TrainConfig& cfg);

// Static baseline: same machinery on a feedback-free network. The rows must
// have been built with the matching feedback-free config. A zero-epoch
// budget returns the freshly initialized network unchanged.
std::pair<NarxNetwork, TrainReport> train_ann_baseline(const NarxConfig& cfg,
                                                       const RegressorSet& rows,
                                                       const TrainConfig& tc);

}  // namespace hess
