#pragma once

// NARX network core: regressor construction, forward pass, open-loop
// (measured feedback) and closed-loop (own-output feedback) prediction.
//
// A regressor row for time step n is laid out as
//   [ y(n-k) for k in output_delays ] ++
//   [ x_c(n-k) for k in input_delays ]   for each input channel c in order.
// With the default configuration (delays {1,2} both sides, channels current
// then voltage) a row reads
//   [ y(n-1), y(n-2), I(n-1), I(n-2), V(n-1), V(n-2) ].
// All series fed to this module are expected in normalized units.

#include <deque>

#include <json.hpp>

#include "hess/series.hpp"
#include "hess/types.hpp"

namespace hess {

struct NarxConfig {
  std::vector<int> input_delays{1, 2};
  std::vector<int> output_delays{1, 2};  // empty = feedback-free variant
  int hidden_neurons = 16;
  int input_channels = 2;  // current, voltage

  int regressor_len() const;
  int max_input_lag() const;
  int max_output_lag() const;  // 0 when feedback-free
  int max_lag() const;
  bool feedback_free() const { return output_delays.empty(); }
  bool operator==(const NarxConfig&) const = default;
};

// Throws InvalidConfig. Feedback-free configs pass only when
// allow_feedback_free is set; that variant is the static baseline model.
void validate(const NarxConfig& cfg, bool allow_feedback_free = false);

// Same exogenous regressor, no output feedback.
NarxConfig ann_variant(NarxConfig cfg);

// Three-layer network: tanh hidden layer, linear output.
struct NarxNetwork {
  NarxConfig config;
  MatXd hidden_weights;  // hidden_neurons x regressor_len
  VecXd hidden_bias;     // hidden_neurons
  VecXd output_weights;  // hidden_neurons
  double output_bias = 0.0;

  Index weight_count() const;
};

// Initial weights uniform in [-0.5, 0.5] scaled by 1/sqrt(regressor_len).
NarxNetwork make_network(const NarxConfig& cfg, Rng& rng);
void validate(const NarxNetwork& net);

double forward(const NarxNetwork& net, const Eigen::Ref<const VecXd>& row);
VecXd forward_batch(const NarxNetwork& net, const Eigen::Ref<const MatXd>& rows);

// Trainable parameters in a fixed order: hidden_weights neuron by neuron,
// then hidden_bias, output_weights, output_bias. The trainer's jacobian
// columns follow the same order.
VecXd flatten_weights(const NarxNetwork& net);
void set_weights(NarxNetwork& net, const Eigen::Ref<const VecXd>& w);

struct RegressorSet {
  MatXd values;            // n_rows x regressor_len
  VecXd targets;           // n_rows
  Index first_target = 0;  // sample index predicted by row 0
  Index size() const { return values.rows(); }
};

// One row per step n in [max_lag, N); lagged soc values fill the feedback
// slots (series must carry soc unless cfg is feedback-free).
RegressorSet build_open_loop_rows(const SampleSeries& series,
                                  const NarxConfig& cfg);

// Measured-feedback prediction. Output has series length; the first max_lag
// entries repeat the measured soc (no window exists there yet).
VecXd predict_open_loop(const NarxNetwork& net, const SampleSeries& series);

// Closed-loop estimation state. Until step n0 every feedback slot is filled
// with the constant bootstrap value soc0; from n0 on the slots replay the
// model's own outputs, kept in history_y (most recent first). history_x
// mirrors the exogenous samples the same way.
struct ClosedLoopState {
  double soc0 = 0.0;  // bootstrap feedback value, network output space
  Index n0 = -1;      // feedback switch step; negative selects max_lag + 1
  std::deque<double> history_y;
  std::deque<VecXd> history_x;
};

// Fills the history rings for a run whose first predicted step is `begin`:
// output history primed with soc0, input history with the measured samples
// just before `begin`.
void prime_state(ClosedLoopState& st, const NarxNetwork& net,
                 const SampleSeries& series, Index begin);

// Regressor row the estimator uses at step n given the current state.
VecXd closed_loop_row(const NarxNetwork& net, const ClosedLoopState& st,
                      Index n);

// Pushes one step's outcome into the rings. x_n is the measured input
// sample at step n (one value per input channel).
void advance_state(ClosedLoopState& st, const NarxNetwork& net, double y_n,
                   const Eigen::Ref<const VecXd>& x_n);

// Runs the estimator over the whole series. Output has series length; the
// first max_lag entries hold soc0. Estimates are not clamped here so that
// the output is a pure function of the network and the input channels.
VecXd predict_closed_loop(const NarxNetwork& net, const SampleSeries& series,
                          ClosedLoopState init);

// Schema "narx-v1"; weights round-trip bit exactly.
nlohmann::json to_json(const NarxNetwork& net);
NarxNetwork network_from_json(const nlohmann::json& j);

}  // namespace hess
