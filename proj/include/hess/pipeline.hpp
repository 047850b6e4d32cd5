#pragma once

// End-to-end estimation pipeline: coulomb-counted ground truth, cleansing,
// normalization, charge/discharge segmentation, model fitting and closed-loop
// SOC estimation with error metrics.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hess/narx.hpp"
#include "hess/series.hpp"
#include "hess/trainer.hpp"
#include "hess/types.hpp"

namespace hess {

// ---- ground truth ----

struct CoulombConfig {
  double capacity_c = 0.0;  // nominal capacity in coulombs
  double soc_init = 1.0;    // fraction at the first sample

  static CoulombConfig from_ah(double ah, double soc_init = 1.0) {
    return {ah * 3600.0, soc_init};
  }
};

struct CoulombResult {
  VecXd soc;          // fraction, clamped to [0, 1]
  Index clamp_count;  // samples whose raw value left [0, 1]
};

// Trapezoidal integration of the current channel:
//   soc_k = soc_init - (1/C) sum_j dt (I_j + I_{j+1}) / 2.
CoulombResult coulomb_count(const SampleSeries& s, const CoulombConfig& cfg);

// ---- cleansing ----

struct CleanseRules {
  double voltage_min = 0.0;  // plausibility bounds, not device cutoffs
  double voltage_max = 1000.0;
  double current_ceiling_a = 1e6;
  double max_flagged_fraction = 0.10;
};

struct CleanseEntry {
  Index index;
  std::string reason;
};

struct CleanseResult {
  SampleSeries series;  // same timeline, flagged samples re-interpolated
  std::vector<CleanseEntry> removed;
};

// Flags non-finite samples and implausible magnitudes, then fills each
// flagged sample by linear interpolation between its nearest intact
// neighbours (nearest value at the ends). Throws TooManyOutliers when more
// than max_flagged_fraction of the samples are flagged.
CleanseResult cleanse(const SampleSeries& s, const CleanseRules& rules = {});

// ---- normalization ----

// Affine maps fitted on training data only: current and voltage go to
// [-1, 1]. Soc passes through unscaled; it is already a capacity fraction
// and rescaling it would detach bootstrap values from their physical
// meaning on data whose training window misses part of the soc range.
struct NormStats {
  double current_min = 0, current_max = 0;
  double voltage_min = 0, voltage_max = 0;
};

// Stats over the first n_samples entries; throws DegenerateChannel when a
// channel is constant there.
NormStats compute_norm_stats(const SampleSeries& s, Index n_samples);

SampleSeries normalize(const SampleSeries& s, const NormStats& stats);

// ---- segmentation ----

struct Segment {
  Regime regime;
  Index begin, end;  // half-open sample range
};

struct SegmentRules {
  double deadband_a = -1.0;  // negative selects 1% of the RMS current
  Index min_len = 3;         // shorter runs merge into a neighbour
};

// Splits a series into charge/discharge segments by current sign. Samples
// inside the deadband continue the surrounding regime. The result is a
// disjoint cover of [0, N).
std::vector<Segment> segment_by_regime(const SampleSeries& s,
                                       const SegmentRules& rules = {});

// ---- metrics ----

struct Metrics {
  double mae_pct = 0;   // mean absolute error, percentage points of SOC
  double rmse_pct = 0;  // root mean square error, percentage points
  Index n_points = 0;
};

Metrics evaluate(const Eigen::Ref<const VecXd>& actual,
                 const Eigen::Ref<const VecXd>& estimated);

// ---- fitted estimator ----

enum class ModelKind { Narx, Ann };
enum class Soc0Policy { Provided, LastKnown };

std::string to_string(ModelKind m);
std::string to_string(Soc0Policy p);

// A supercapacitor bundle holds one network; a battery bundle holds one per
// regime, trained on disjoint row sets. last_known_soc0 is the normalized
// soc of the final training-window sample, used by the LastKnown policy.
struct EstimatorBundle {
  Device device = Device::Battery;
  ModelKind model = ModelKind::Narx;
  NarxConfig config;  // config of the trained networks
  NormStats norm;
  std::optional<NarxNetwork> single;
  std::optional<NarxNetwork> charge_net;
  std::optional<NarxNetwork> discharge_net;
  Soc0Policy soc0_policy = Soc0Policy::Provided;
  double last_known_soc0 = 0.0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const EstimatorBundle& b);
EstimatorBundle bundle_from_json(const nlohmann::json& j);

struct FitOptions {
  CleanseRules cleanse;
  SegmentRules segments;  // min_len below max_lag+1 is raised to it
  // Candidate sigmas for the seeded gaussian jitter added to the feedback
  // slots of the training rows. Smooth data otherwise admits one-step maps
  // that look perfect open loop and drift or diverge once the estimator
  // replays its own outputs; the jitter stands in for that replay error.
  // Each candidate is trained and the one with the lowest closed-loop error
  // on the validation spans is kept, per network. Empty disables jitter.
  std::vector<double> feedback_jitter = {1e-4, 1e-3, 3e-3};
};

struct NamedReport {
  std::string name;  // "single", "charge", "discharge"
  TrainReport report;
  double feedback_jitter = 0;  // sigma picked by validation
};

struct FitResult {
  EstimatorBundle bundle;
  std::vector<NamedReport> reports;
};

// Cleanses, fits normalization on the leading training span, builds
// open-loop rows (per regime for batteries) and trains with LM.
FitResult fit_estimator(const SampleSeries& series, Device device,
                        const NarxConfig& cfg, const TrainConfig& tc,
                        ModelKind kind = ModelKind::Narx,
                        const FitOptions& opts = {});

struct SegmentEstimate {
  std::optional<Regime> regime;
  Index begin, end;
};

struct EstimateResult {
  VecXd soc;  // fraction, clamped to [0, 1]
  Index clamp_count = 0;
  std::vector<SegmentEstimate> segments;
};

// Closed-loop estimation over a series without ground truth. soc0 is the
// bootstrap fraction; when absent, the bundle's policy decides (Provided
// makes it mandatory). Battery series are segmented and each segment is
// estimated by its regime's network, chaining the bootstrap across
// segment boundaries.
EstimateResult estimate_soc(const EstimatorBundle& bundle,
                            const SampleSeries& series,
                            std::optional<double> soc0 = std::nullopt);

// ---- test-split evaluation ----

struct SpanMetrics {
  std::optional<Regime> regime;
  Index begin, end;  // sample range evaluated
  Metrics metrics;
};

struct TestEvaluation {
  Metrics overall;
  std::vector<SpanMetrics> spans;
};

// Replays the fit-time row bookkeeping on a ground-truth series, then runs
// closed-loop estimation over the samples owned by held-out test rows. Each
// contiguous test span is seeded with the true soc just before it, so the
// metrics measure closed-loop behaviour on data the trainer never saw.
TestEvaluation evaluate_on_test_split(const EstimatorBundle& bundle,
                                      const SampleSeries& series,
                                      const TrainConfig& tc,
                                      const FitOptions& opts = {});

}  // namespace hess
