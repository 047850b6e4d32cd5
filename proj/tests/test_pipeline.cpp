#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hess/pipeline.hpp"

using namespace hess;

namespace {

SampleSeries blank_series(Index n, double dt = 1.0) {
  SampleSeries s;
  s.t = VecXd::LinSpaced(n, 0.0, dt * double(n - 1));
  s.current = VecXd::Zero(n);
  s.voltage = VecXd::Constant(n, 2.0);
  return s;
}

// Supercapacitor-shaped run: sinusoidal exchange current, coulomb-counted
// soc ground truth, voltage affine in soc and current.
SampleSeries sc_run(Index n) {
  SampleSeries s = blank_series(n);
  s.device = Device::Supercapacitor;
  for (Index k = 0; k < n; ++k)
    s.current[k] = 0.8 * std::sin(2.0 * std::numbers::pi * double(k) / 80.0);
  CoulombConfig cc{3000.0, 0.5};
  s.soc = coulomb_count(s, cc).soc;
  s.voltage = (1.0 + 2.0 * s.soc.array() - 0.05 * s.current.array()).matrix();
  return s;
}

// Battery-shaped run: alternating constant-current blocks so both regimes
// appear several times.
SampleSeries battery_run(Index n) {
  SampleSeries s = blank_series(n);
  for (Index k = 0; k < n; ++k)
    s.current[k] = (k / 60) % 2 == 0 ? 0.5 : -0.5;
  CoulombConfig cc{600.0, 0.5};
  s.soc = coulomb_count(s, cc).soc;
  s.voltage = (3.0 + s.soc.array() - 0.02 * s.current.array()).matrix();
  return s;
}

TrainConfig quick_train(int epochs = 15, std::uint64_t seed = 42) {
  TrainConfig tc;
  tc.max_epochs = epochs;
  tc.seed = seed;
  return tc;
}

}  // namespace

TEST_CASE("coulomb counting tracks an analytic sine discharge") {
  const Index n = 1001;
  const double dt = 0.1;
  const double omega = 2.0 * std::numbers::pi / 50.0;
  const double amp = 0.5, cap = 200.0, soc0 = 0.8;
  SampleSeries s = blank_series(n, dt);
  for (Index k = 0; k < n; ++k) s.current[k] = amp * std::sin(omega * s.t[k]);

  const CoulombResult r = coulomb_count(s, {cap, soc0});
  CHECK(r.clamp_count == 0);
  for (Index k = 0; k < n; ++k) {
    const double exact =
        soc0 - amp / (cap * omega) * (1.0 - std::cos(omega * s.t[k]));
    CHECK(std::abs(r.soc[k] - exact) <= 1e-4);
  }
}

TEST_CASE("coulomb counting is exact for constant current") {
  const Index n = 100;
  SampleSeries s = blank_series(n, 1.0);
  s.current.setConstant(2.0);  // positive current discharges
  const double cap = 7200.0;
  const CoulombResult r = coulomb_count(s, {cap, 1.0});
  for (Index k = 0; k < n; ++k)
    CHECK(std::abs(r.soc[k] - (1.0 - 2.0 * double(k) / cap)) <= 1e-12);
}

TEST_CASE("coulomb counting chains across a split point") {
  SampleSeries s = sc_run(200);
  const CoulombResult full = coulomb_count(s, {3000.0, 0.5});
  const Index m = 120;
  const CoulombResult tail =
      coulomb_count(s.slice(m, 200), {3000.0, full.soc[m]});
  for (Index j = 0; j < tail.soc.size(); ++j)
    CHECK(std::abs(tail.soc[j] - full.soc[m + j]) <= 1e-12);
}

TEST_CASE("coulomb counting clamps and counts excursions") {
  SampleSeries s = blank_series(50, 1.0);
  s.current.setConstant(3.0);
  const CoulombResult r = coulomb_count(s, {100.0, 0.5});
  // raw soc crosses zero between samples 16 and 17
  CHECK(r.soc[16] > 0.0);
  CHECK(r.soc[17] == 0.0);
  CHECK(r.soc[49] == 0.0);
  CHECK(r.clamp_count == 50 - 17);

  CHECK_THROWS_AS(coulomb_count(s, {0.0, 0.5}), InvalidConfig);
  CHECK_THROWS_AS(coulomb_count(s, {100.0, 1.5}), InvalidSoc0);
  s.current[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(coulomb_count(s, {100.0, 0.5}), InvalidSeries);
}

TEST_CASE("cleansing repairs flagged samples by interpolation") {
  SampleSeries s = blank_series(20, 1.0);
  s.current = VecXd::LinSpaced(20, 0.0, 1.9);  // slope 0.1 per sample
  s.soc = VecXd::LinSpaced(20, 0.9, 0.9 - 19 * 0.01);

  SUBCASE("single non-finite current") {
    s.current[5] = std::numeric_limits<double>::quiet_NaN();
    const CleanseResult r = cleanse(s);
    CHECK(std::abs(r.series.current[5] - 0.5) <= 1e-12);
    REQUIRE(r.removed.size() == 1);
    CHECK(r.removed[0].index == 5);
    CHECK(r.removed[0].reason == "current_nonfinite");
  }
  SUBCASE("consecutive bad run") {
    s.current[4] = std::numeric_limits<double>::infinity();
    s.current[5] = std::numeric_limits<double>::quiet_NaN();
    const CleanseResult r = cleanse(s);
    // both filled on the line between intact samples 3 and 6
    CHECK(std::abs(r.series.current[4] - 0.4) <= 1e-12);
    CHECK(std::abs(r.series.current[5] - 0.5) <= 1e-12);
    CHECK(r.removed.size() == 2);
  }
  SUBCASE("bad first sample copies the nearest intact value") {
    s.voltage[0] = -4.0;  // below the plausibility floor
    const CleanseResult r = cleanse(s);
    CHECK(r.series.voltage[0] == r.series.voltage[1]);
    CHECK(r.removed[0].reason == "voltage_bounds");
  }
  SUBCASE("current ceiling") {
    CleanseRules rules;
    rules.current_ceiling_a = 10.0;
    s.current[7] = 50.0;
    const CleanseResult r = cleanse(s, rules);
    CHECK(std::abs(r.series.current[7] - 0.7) <= 1e-12);
    CHECK(r.removed[0].reason == "current_ceiling");
  }
  SUBCASE("soc channel is repaired too") {
    s.soc[9] = std::numeric_limits<double>::quiet_NaN();
    const CleanseResult r = cleanse(s);
    CHECK(std::abs(r.series.soc[9] - (0.9 - 9 * 0.01)) <= 1e-12);
    CHECK(r.removed[0].reason == "soc_nonfinite");
  }
  SUBCASE("reasons accumulate per sample") {
    s.current[2] = std::numeric_limits<double>::quiet_NaN();
    s.voltage[2] = std::numeric_limits<double>::quiet_NaN();
    const CleanseResult r = cleanse(s);
    CHECK(r.removed[0].reason == "current_nonfinite+voltage_nonfinite");
  }
  SUBCASE("too many flagged samples") {
    for (Index k : {2, 5, 8}) s.current[k] = 1e9;
    CleanseRules rules;
    rules.current_ceiling_a = 1e6;
    rules.max_flagged_fraction = 0.10;  // 3 of 20 exceeds the cap
    CHECK_THROWS_AS(cleanse(s, rules), TooManyOutliers);
  }
}

TEST_CASE("normalization stats come from the leading window only") {
  SampleSeries s = blank_series(40, 1.0);
  s.current = VecXd::LinSpaced(40, -2.0, 1.9);
  s.voltage = VecXd::LinSpaced(40, 2.0, 5.9);
  s.current[35] = 50.0;  // outside the stats window
  const NormStats st = compute_norm_stats(s, 30);
  CHECK(st.current_min == -2.0);
  CHECK(st.current_max == s.current[29]);
  CHECK(st.voltage_max == s.voltage[29]);

  const SampleSeries norm = normalize(s, st);
  CHECK(norm.current[0] == -1.0);
  CHECK(norm.current[29] == 1.0);
  // inverse affine map restores the raw channels
  const double di = st.current_max - st.current_min;
  const double dv = st.voltage_max - st.voltage_min;
  for (Index k = 0; k < s.size(); ++k) {
    const double i_back = (norm.current[k] + 1.0) / 2.0 * di + st.current_min;
    const double v_back = (norm.voltage[k] + 1.0) / 2.0 * dv + st.voltage_min;
    CHECK(std::abs(i_back - s.current[k]) <=
          1e-12 * std::max(1.0, std::abs(s.current[k])));
    CHECK(std::abs(v_back - s.voltage[k]) <=
          1e-12 * std::max(1.0, std::abs(s.voltage[k])));
  }
}

TEST_CASE("soc passes through normalization untouched") {
  SampleSeries s = sc_run(100);
  const NormStats st = compute_norm_stats(s, 80);
  const SampleSeries norm = normalize(s, st);
  CHECK(norm.soc == s.soc);
  CHECK(norm.t == s.t);
}

TEST_CASE("normalization guards degenerate windows") {
  SampleSeries s = blank_series(20, 1.0);  // constant channels
  CHECK_THROWS_AS(compute_norm_stats(s, 10), DegenerateChannel);
  s.current = VecXd::LinSpaced(20, 0.0, 1.9);
  s.voltage = VecXd::LinSpaced(20, 2.0, 3.9);
  CHECK_THROWS_AS(compute_norm_stats(s, 1), DimensionMismatch);
  CHECK_THROWS_AS(compute_norm_stats(s, 21), DimensionMismatch);
  CHECK_NOTHROW(compute_norm_stats(s, 20));
}

TEST_CASE("segmentation splits by current sign") {
  SampleSeries s = blank_series(14, 1.0);
  SegmentRules rules;
  rules.deadband_a = 0.1;
  rules.min_len = 2;

  SUBCASE("two clean runs") {
    for (Index k = 0; k < 6; ++k) s.current[k] = 1.0;
    for (Index k = 6; k < 14; ++k) s.current[k] = -1.0;
    const auto segs = segment_by_regime(s, rules);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].regime == Regime::Discharge);
    CHECK(segs[0].begin == 0);
    CHECK(segs[0].end == 6);
    CHECK(segs[1].regime == Regime::Charge);
    CHECK(segs[1].end == 14);
  }
  SUBCASE("deadband continues the surrounding regime") {
    for (Index k = 0; k < 5; ++k) s.current[k] = -1.0;
    for (Index k = 5; k < 9; ++k) s.current[k] = 0.05;  // inside deadband
    for (Index k = 9; k < 14; ++k) s.current[k] = -1.0;
    const auto segs = segment_by_regime(s, rules);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].regime == Regime::Charge);
    CHECK(segs[0].begin == 0);
    CHECK(segs[0].end == 14);
  }
  SUBCASE("short runs fold into a neighbour") {
    for (Index k = 0; k < 6; ++k) s.current[k] = 1.0;
    for (Index k = 6; k < 8; ++k) s.current[k] = -1.0;
    for (Index k = 8; k < 14; ++k) s.current[k] = 1.0;
    rules.min_len = 3;
    const auto segs = segment_by_regime(s, rules);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].regime == Regime::Discharge);
    CHECK(segs[0].begin == 0);
    CHECK(segs[0].end == 14);
  }
  SUBCASE("leading deadband joins the first signed run") {
    s.current[0] = 0.0;
    s.current[1] = 0.0;
    for (Index k = 2; k < 14; ++k) s.current[k] = 1.0;
    const auto segs = segment_by_regime(s, rules);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].begin == 0);
  }
  SUBCASE("all-deadband series has no segments") {
    CHECK_THROWS_AS(segment_by_regime(s, rules), NoSegments);
  }
}

TEST_CASE("segmentation is a disjoint alternating cover") {
  SampleSeries s = blank_series(300, 1.0);
  Rng rng(19);
  double level = 0.0;
  for (Index k = 0; k < s.size(); ++k) {
    level += rng.uniform(-0.4, 0.4);
    s.current[k] = level;
  }
  SegmentRules rules;
  rules.min_len = 5;
  const auto segs = segment_by_regime(s, rules);
  REQUIRE(!segs.empty());
  CHECK(segs.front().begin == 0);
  CHECK(segs.back().end == s.size());
  for (size_t i = 0; i < segs.size(); ++i) {
    CHECK(segs[i].begin < segs[i].end);
    if (segs.size() > 1) CHECK(segs[i].end - segs[i].begin >= rules.min_len);
    if (i > 0) {
      CHECK(segs[i].begin == segs[i - 1].end);
      CHECK(segs[i].regime != segs[i - 1].regime);
    }
  }
}

TEST_CASE("error metrics match hand arithmetic") {
  VecXd actual(3), est(3);
  actual << 0.5, 0.6, 0.7;
  est << 0.45, 0.63, 0.7;
  const Metrics m = evaluate(actual, est);
  CHECK(m.n_points == 3);
  CHECK(std::abs(m.mae_pct - 100.0 * (0.05 + 0.03 + 0.0) / 3.0) <= 1e-9);
  const double ms = (0.05 * 0.05 + 0.03 * 0.03) / 3.0;
  CHECK(std::abs(m.rmse_pct - 100.0 * std::sqrt(ms)) <= 1e-9);

  CHECK_THROWS_AS(evaluate(actual, VecXd::Zero(2)), LengthMismatch);
  CHECK_THROWS_AS(evaluate(VecXd(), VecXd()), LengthMismatch);
}

TEST_CASE("perfect estimates score zero error") {
  VecXd v = VecXd::LinSpaced(10, 0.1, 0.9);
  const Metrics m = evaluate(v, v);
  CHECK(m.mae_pct == 0.0);
  CHECK(m.rmse_pct == 0.0);
}

TEST_CASE("fitting a supercapacitor yields one network") {
  const SampleSeries s = sc_run(400);
  const TrainConfig tc = quick_train();
  const FitResult fit =
      fit_estimator(s, Device::Supercapacitor, NarxConfig{}, tc);

  CHECK(fit.bundle.device == Device::Supercapacitor);
  CHECK(fit.bundle.model == ModelKind::Narx);
  REQUIRE(fit.bundle.single.has_value());
  CHECK_FALSE(fit.bundle.charge_net.has_value());
  CHECK_FALSE(fit.bundle.discharge_net.has_value());
  REQUIRE(fit.reports.size() == 1);
  CHECK(fit.reports[0].name == "single");
  CHECK(fit.reports[0].report.epochs_run > 0);

  // stats window: max_lag plus the training share of the remaining samples
  const Index n_stats = 2 + Index(std::floor(0.70 * double(400 - 2)));
  const NormStats st = compute_norm_stats(s, n_stats);
  CHECK(fit.bundle.norm.current_min == st.current_min);
  CHECK(fit.bundle.norm.voltage_max == st.voltage_max);
  CHECK(fit.bundle.last_known_soc0 == s.soc[n_stats - 1]);

  // the chosen jitter sigma is one of the candidates
  const FitOptions opts;
  bool in_grid = false;
  for (double c : opts.feedback_jitter)
    in_grid = in_grid || fit.reports[0].feedback_jitter == c;
  CHECK(in_grid);
}

TEST_CASE("fitting a battery yields one network per regime") {
  const SampleSeries s = battery_run(400);
  const FitResult fit =
      fit_estimator(s, Device::Battery, NarxConfig{}, quick_train());
  CHECK_FALSE(fit.bundle.single.has_value());
  REQUIRE(fit.bundle.charge_net.has_value());
  REQUIRE(fit.bundle.discharge_net.has_value());
  REQUIRE(fit.reports.size() == 2);
  CHECK(fit.reports[0].name == "charge");
  CHECK(fit.reports[1].name == "discharge");
}

TEST_CASE("fit options control the jitter grid") {
  const SampleSeries s = sc_run(300);
  FitOptions opts;

  SUBCASE("custom grid") {
    opts.feedback_jitter = {1e-4, 3e-3};
    const FitResult fit = fit_estimator(s, Device::Supercapacitor, NarxConfig{},
                                        quick_train(10), ModelKind::Narx, opts);
    const double got = fit.reports[0].feedback_jitter;
    CHECK((got == 1e-4 || got == 3e-3));
  }
  SUBCASE("empty grid disables jitter") {
    opts.feedback_jitter.clear();
    const FitResult fit = fit_estimator(s, Device::Supercapacitor, NarxConfig{},
                                        quick_train(10), ModelKind::Narx, opts);
    CHECK(fit.reports[0].feedback_jitter == 0.0);
  }
  SUBCASE("baseline model ignores the grid") {
    const FitResult fit = fit_estimator(s, Device::Supercapacitor, NarxConfig{},
                                        quick_train(10), ModelKind::Ann, opts);
    CHECK(fit.reports[0].feedback_jitter == 0.0);
    CHECK(fit.bundle.config.output_delays.empty());
  }
}

TEST_CASE("fitting requires ground truth") {
  SampleSeries s = sc_run(100);
  s.soc.resize(0);
  CHECK_THROWS_AS(
      fit_estimator(s, Device::Supercapacitor, NarxConfig{}, quick_train()),
      MissingGroundTruth);
}

TEST_CASE("estimation follows the bootstrap policy") {
  const SampleSeries s = sc_run(300);
  FitResult fit =
      fit_estimator(s, Device::Supercapacitor, NarxConfig{}, quick_train());

  SampleSeries unlabeled = s;
  unlabeled.soc.resize(0);

  SUBCASE("provided policy demands a value") {
    CHECK_THROWS_AS(estimate_soc(fit.bundle, unlabeled), InvalidSoc0);
  }
  SUBCASE("provided value must be a fraction") {
    CHECK_THROWS_AS(estimate_soc(fit.bundle, unlabeled, 1.2), InvalidSoc0);
    CHECK_THROWS_AS(estimate_soc(fit.bundle, unlabeled, -0.1), InvalidSoc0);
  }
  SUBCASE("explicit value runs and stays in range") {
    const EstimateResult r = estimate_soc(fit.bundle, unlabeled, 0.5);
    REQUIRE(r.soc.size() == unlabeled.size());
    CHECK(r.soc.minCoeff() >= 0.0);
    CHECK(r.soc.maxCoeff() <= 1.0);
    REQUIRE(r.segments.size() == 1);
    CHECK_FALSE(r.segments[0].regime.has_value());
  }
  SUBCASE("last-known policy falls back to the training endpoint") {
    fit.bundle.soc0_policy = Soc0Policy::LastKnown;
    CHECK_NOTHROW(estimate_soc(fit.bundle, unlabeled));
  }
  SUBCASE("device tag mismatch is rejected") {
    unlabeled.meta["device"] = "battery";
    CHECK_THROWS_AS(estimate_soc(fit.bundle, unlabeled, 0.5), ChannelMismatch);
  }
}

TEST_CASE("battery estimation chains segments by regime") {
  const SampleSeries s = battery_run(400);
  const FitResult fit =
      fit_estimator(s, Device::Battery, NarxConfig{}, quick_train());
  SampleSeries unlabeled = s;
  unlabeled.soc.resize(0);
  const EstimateResult r = estimate_soc(fit.bundle, unlabeled, 0.5);
  REQUIRE(r.segments.size() >= 2);
  Index covered = 0;
  for (size_t i = 0; i < r.segments.size(); ++i) {
    REQUIRE(r.segments[i].regime.has_value());
    if (i > 0) {
      CHECK(r.segments[i].begin == r.segments[i - 1].end);
      CHECK(*r.segments[i].regime != *r.segments[i - 1].regime);
    }
    covered += r.segments[i].end - r.segments[i].begin;
  }
  CHECK(covered == s.size());
}

TEST_CASE("out-of-range estimates are clamped and counted") {
  const SampleSeries s = sc_run(60);
  EstimatorBundle b;
  b.device = Device::Supercapacitor;
  b.config = NarxConfig{};
  b.norm = compute_norm_stats(s, 50);
  Rng rng(1);
  NarxNetwork net = make_network(b.config, rng);
  VecXd w = flatten_weights(net);
  w.setZero();
  w[w.size() - 1] = 2.0;  // constant output well above any fraction
  set_weights(net, w);
  b.single = net;

  SampleSeries unlabeled = s;
  unlabeled.soc.resize(0);
  const EstimateResult r = estimate_soc(b, unlabeled, 0.5);
  CHECK(r.clamp_count == s.size() - b.config.max_lag());
  CHECK(r.soc.tail(s.size() - b.config.max_lag()).minCoeff() == 1.0);
}

TEST_CASE("bundle serde round trips bit exactly") {
  const SampleSeries s = battery_run(400);
  const FitResult fit =
      fit_estimator(s, Device::Battery, NarxConfig{}, quick_train(8));
  const std::string text = to_json(fit.bundle).dump();
  const EstimatorBundle back = bundle_from_json(nlohmann::json::parse(text));

  CHECK(back.device == fit.bundle.device);
  CHECK(back.model == fit.bundle.model);
  CHECK(back.config == fit.bundle.config);
  CHECK(back.norm.current_min == fit.bundle.norm.current_min);
  CHECK(back.norm.current_max == fit.bundle.norm.current_max);
  CHECK(back.norm.voltage_min == fit.bundle.norm.voltage_min);
  CHECK(back.norm.voltage_max == fit.bundle.norm.voltage_max);
  CHECK(back.soc0_policy == fit.bundle.soc0_policy);
  CHECK(back.last_known_soc0 == fit.bundle.last_known_soc0);
  CHECK(back.seed == fit.bundle.seed);
  REQUIRE(back.charge_net.has_value());
  REQUIRE(back.discharge_net.has_value());
  CHECK(flatten_weights(*back.charge_net) ==
        flatten_weights(*fit.bundle.charge_net));
  CHECK(flatten_weights(*back.discharge_net) ==
        flatten_weights(*fit.bundle.discharge_net));

  SUBCASE("config mismatch between bundle and network is rejected") {
    nlohmann::json j = to_json(fit.bundle);
    j["config"]["hidden_neurons"] = 8;
    CHECK_THROWS_AS(bundle_from_json(j), InvalidConfig);
  }
  SUBCASE("wrong format tag") {
    nlohmann::json j = to_json(fit.bundle);
    j["format"] = "something-else";
    CHECK_THROWS_AS(bundle_from_json(j), InvalidConfig);
  }
}

TEST_CASE("held-out evaluation covers only post-training samples") {
  const SampleSeries s = sc_run(400);
  const TrainConfig tc = quick_train();
  const FitResult fit =
      fit_estimator(s, Device::Supercapacitor, NarxConfig{}, tc);
  const TestEvaluation ev = evaluate_on_test_split(fit.bundle, s, tc);

  REQUIRE(!ev.spans.empty());
  Index pooled = 0;
  double abs_sum = 0.0, sq_sum = 0.0;
  for (const SpanMetrics& span : ev.spans) {
    CHECK(span.begin < span.end);
    CHECK(span.end <= s.size());
    CHECK(span.metrics.n_points == span.end - span.begin);
    pooled += span.metrics.n_points;
    abs_sum += span.metrics.mae_pct / 100.0 * double(span.metrics.n_points);
    const double ms = span.metrics.rmse_pct / 100.0;
    sq_sum += ms * ms * double(span.metrics.n_points);
  }
  CHECK(ev.overall.n_points == pooled);
  CHECK(std::abs(ev.overall.mae_pct - 100.0 * abs_sum / double(pooled)) <=
        1e-9);
  CHECK(std::abs(ev.overall.rmse_pct -
                 100.0 * std::sqrt(sq_sum / double(pooled))) <= 1e-9);

  // the held-out block sits at the chronological end of the row range
  const Index lag = fit.bundle.config.max_lag();
  const SplitIndices split = split_rows(s.size() - lag, tc);
  CHECK(ev.spans.front().begin == lag + split.test_begin());
  CHECK(ev.spans.back().end == s.size());

  const TestEvaluation again = evaluate_on_test_split(fit.bundle, s, tc);
  CHECK(again.overall.mae_pct == ev.overall.mae_pct);
  CHECK(again.overall.rmse_pct == ev.overall.rmse_pct);
}

TEST_CASE("fitting twice with one seed gives identical bundles") {
  const SampleSeries s = sc_run(300);
  const TrainConfig tc = quick_train(10);
  const FitResult a =
      fit_estimator(s, Device::Supercapacitor, NarxConfig{}, tc);
  const FitResult b =
      fit_estimator(s, Device::Supercapacitor, NarxConfig{}, tc);
  CHECK(flatten_weights(*a.bundle.single) == flatten_weights(*b.bundle.single));
  CHECK(a.reports[0].feedback_jitter == b.reports[0].feedback_jitter);
  CHECK(to_json(a.bundle).dump() == to_json(b.bundle).dump());
}
