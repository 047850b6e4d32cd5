#include <doctest.h>

#include <cmath>
#include <vector>

#include "hess/narx.hpp"

using namespace hess;

namespace {

// Normalized-unit series with full soc ground truth.
SampleSeries rand_series(Index n, std::uint64_t seed) {
  Rng rng(seed);
  SampleSeries s;
  s.t = VecXd::LinSpaced(n, 0.0, double(n - 1));
  s.current.resize(n);
  s.voltage.resize(n);
  s.soc.resize(n);
  for (Index k = 0; k < n; ++k) {
    s.current[k] = rng.uniform(-1.0, 1.0);
    s.voltage[k] = rng.uniform(-1.0, 1.0);
    s.soc[k] = rng.uniform(0.05, 0.95);
  }
  return s;
}

// Scalar reference forward pass, kept independent of the library's Eigen
// expressions.
double forward_reference(const NarxNetwork& net, const VecXd& row) {
  double y = net.output_bias;
  for (Index i = 0; i < net.hidden_weights.rows(); ++i) {
    double a = net.hidden_bias[i];
    for (Index j = 0; j < net.hidden_weights.cols(); ++j)
      a += net.hidden_weights(i, j) * row[j];
    y += net.output_weights[i] * std::tanh(a);
  }
  return y;
}

// Closed-loop reference: gathers every regressor slot by direct indexing
// into the series and the estimates emitted so far. Bootstrap slots hold
// soc0 until step n0; afterwards slot k reads est[n - k] once that step has
// been produced. Uses the library forward() so any mismatch against
// predict_closed_loop isolates the history bookkeeping.
VecXd closed_loop_reference(const NarxNetwork& net, const SampleSeries& s,
                            double soc0, Index n0) {
  const NarxConfig& cfg = net.config;
  const Index lag = cfg.max_lag();
  VecXd est(s.size());
  est.head(lag).setConstant(soc0);
  VecXd row(cfg.regressor_len());
  for (Index n = lag; n < s.size(); ++n) {
    Index c = 0;
    for (int k : cfg.output_delays)
      row[c++] = (n < n0 || n - k < lag) ? soc0 : est[n - k];
    for (int k : cfg.input_delays) row[c++] = s.current[n - k];
    for (int k : cfg.input_delays) row[c++] = s.voltage[n - k];
    est[n] = forward(net, row);
  }
  return est;
}

}  // namespace

TEST_CASE("config geometry and the default layout") {
  NarxConfig cfg;
  CHECK(cfg.regressor_len() == 6);
  CHECK(cfg.max_input_lag() == 2);
  CHECK(cfg.max_output_lag() == 2);
  CHECK(cfg.max_lag() == 2);
  CHECK_FALSE(cfg.feedback_free());

  const NarxConfig ann = ann_variant(cfg);
  CHECK(ann.feedback_free());
  CHECK(ann.regressor_len() == 4);
  CHECK(ann.max_lag() == 2);
  CHECK_THROWS_AS(validate(ann), InvalidConfig);
  CHECK_NOTHROW(validate(ann, true));

  Rng rng(7);
  const NarxNetwork net = make_network(cfg, rng);
  CHECK(net.weight_count() == 129);  // 16*6 + 16 + 16 + 1
  const double bound = 0.5 / std::sqrt(6.0) + 1e-15;
  CHECK(flatten_weights(net).cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("config validation rejects bad delay sets") {
  NarxConfig cfg;

  SUBCASE("empty input delays") {
    cfg.input_delays.clear();
    CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  }
  SUBCASE("zero delay") {
    cfg.input_delays = {0, 1};
    CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  }
  SUBCASE("non-ascending output delays") {
    cfg.output_delays = {2, 2};
    CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  }
  SUBCASE("no hidden neurons") {
    cfg.hidden_neurons = 0;
    CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  }
  SUBCASE("wrong channel count") {
    cfg.input_channels = 3;
    CHECK_THROWS_AS(validate(cfg), InvalidConfig);
  }
}

TEST_CASE("open-loop rows match a hand-built window") {
  const SampleSeries s = rand_series(40, 11);

  NarxConfig cfg;
  SUBCASE("default delays") {}
  SUBCASE("sparse asymmetric delays") {
    cfg.input_delays = {1, 3};
    cfg.output_delays = {2, 4};
    cfg.hidden_neurons = 3;
  }

  const Index lag = cfg.max_lag();
  const RegressorSet set = build_open_loop_rows(s, cfg);
  REQUIRE(set.size() == s.size() - lag);
  CHECK(set.first_target == lag);
  CHECK(set.values.cols() == cfg.regressor_len());

  for (Index r = 0; r < set.size(); ++r) {
    const Index n = lag + r;
    Index c = 0;
    for (int k : cfg.output_delays) CHECK(set.values(r, c++) == s.soc[n - k]);
    for (int k : cfg.input_delays) CHECK(set.values(r, c++) == s.current[n - k]);
    for (int k : cfg.input_delays) CHECK(set.values(r, c++) == s.voltage[n - k]);
    CHECK(set.targets[r] == s.soc[n]);
  }
}

TEST_CASE("open-loop rows demand enough samples and ground truth") {
  NarxConfig cfg;
  CHECK_THROWS_AS(build_open_loop_rows(rand_series(2, 1), cfg), SeriesTooShort);
  SampleSeries s = rand_series(20, 1);
  s.soc.resize(0);
  CHECK_THROWS_AS(build_open_loop_rows(s, cfg), MissingGroundTruth);
}

TEST_CASE("forward agrees with a scalar reference") {
  NarxConfig cfg;
  Rng rng(3);
  const NarxNetwork net = make_network(cfg, rng);

  MatXd rows(32, cfg.regressor_len());
  for (Index r = 0; r < rows.rows(); ++r)
    for (Index c = 0; c < rows.cols(); ++c) rows(r, c) = rng.uniform(-1.0, 1.0);

  const VecXd batch = forward_batch(net, rows);
  for (Index r = 0; r < rows.rows(); ++r) {
    const VecXd row = rows.row(r).transpose();
    const double y = forward(net, row);
    CHECK(std::abs(y - forward_reference(net, row)) <= 1e-12);
    CHECK(std::abs(y - batch[r]) <= 1e-12);
  }
  CHECK_THROWS_AS(forward(net, VecXd::Zero(5)), DimensionMismatch);
}

TEST_CASE("weight vector round trips bit exactly") {
  NarxConfig cfg;
  Rng rng(5);
  const NarxNetwork net = make_network(cfg, rng);
  const VecXd w = flatten_weights(net);
  REQUIRE(w.size() == net.weight_count());

  Rng other(99);
  NarxNetwork copy = make_network(cfg, other);
  set_weights(copy, w);
  CHECK(flatten_weights(copy) == w);

  const VecXd probe = VecXd::LinSpaced(cfg.regressor_len(), -0.8, 0.8);
  CHECK(forward(copy, probe) == forward(net, probe));
  CHECK_THROWS_AS(set_weights(copy, VecXd::Zero(10)), DimensionMismatch);
}

TEST_CASE("closed loop replays its own outputs through the rings") {
  NarxConfig cfg;
  Index hold = 0;  // extra bootstrap steps past the default switch
  SUBCASE("default delays, default switch") {}
  SUBCASE("default delays, held bootstrap") { hold = 4; }
  SUBCASE("sparse asymmetric delays, default switch") {
    cfg.input_delays = {1, 3};
    cfg.output_delays = {2, 4};
    cfg.hidden_neurons = 3;
  }
  SUBCASE("sparse asymmetric delays, held bootstrap") {
    cfg.input_delays = {1, 3};
    cfg.output_delays = {2, 4};
    cfg.hidden_neurons = 3;
    hold = 4;
  }

  const Index lag = cfg.max_lag();
  for (std::uint64_t seed : {4u, 17u}) {
    const SampleSeries s = rand_series(60, seed);
    Rng rng(seed + 1);
    const NarxNetwork net = make_network(cfg, rng);

    ClosedLoopState st;
    st.soc0 = 0.42;
    st.n0 = hold > 0 ? lag + 1 + hold : -1;  // -1 selects lag + 1
    const VecXd est = predict_closed_loop(net, s, st);
    const VecXd ref = closed_loop_reference(net, s, 0.42, lag + 1 + hold);
    REQUIRE(est.size() == s.size());
    for (Index n = 0; n < est.size(); ++n) CHECK(est[n] == ref[n]);
  }
}

TEST_CASE("bootstrap fills feedback slots until the switch step") {
  NarxConfig cfg;
  Rng rng(21);
  const NarxNetwork net = make_network(cfg, rng);
  const SampleSeries s = rand_series(30, 8);
  const Index lag = cfg.max_lag();

  ClosedLoopState st;
  st.soc0 = 0.7;
  st.n0 = lag + 4;
  prime_state(st, net, s, lag);

  std::vector<double> emitted;
  for (Index n = lag; n < lag + 8; ++n) {
    const VecXd row = closed_loop_row(net, st, n);
    for (size_t j = 0; j < cfg.output_delays.size(); ++j) {
      const int k = cfg.output_delays[j];
      const double want =
          (n < st.n0 || n - k < lag)
              ? st.soc0
              : emitted[static_cast<size_t>(n - k - lag)];
      CHECK(row[static_cast<Index>(j)] == want);
    }
    // exogenous slots always read the measured samples
    CHECK(row[2] == s.current[n - 1]);
    CHECK(row[3] == s.current[n - 2]);
    CHECK(row[4] == s.voltage[n - 1]);
    CHECK(row[5] == s.voltage[n - 2]);
    const double y = 0.1 * double(n);  // distinct fabricated outputs
    emitted.push_back(y);
    VecXd x(2);
    x << s.current[n], s.voltage[n];
    advance_state(st, net, y, x);
  }
}

TEST_CASE("closed-loop head holds the bootstrap value") {
  NarxConfig cfg;
  Rng rng(2);
  const NarxNetwork net = make_network(cfg, rng);
  const SampleSeries s = rand_series(25, 3);
  ClosedLoopState st;
  st.soc0 = 0.33;
  const VecXd est = predict_closed_loop(net, s, st);
  for (Index n = 0; n < cfg.max_lag(); ++n) CHECK(est[n] == 0.33);
}

TEST_CASE("feedback-free closed loop equals open loop") {
  const NarxConfig cfg = ann_variant(NarxConfig{});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    const NarxNetwork net = make_network(cfg, rng);
    const SampleSeries s = rand_series(50, seed + 10);

    const VecXd open = predict_open_loop(net, s);
    ClosedLoopState st;
    st.soc0 = 0.5;
    const VecXd closed = predict_closed_loop(net, s, st);

    const Index lag = cfg.max_lag();
    // heads differ by contract: measured soc vs bootstrap constant
    CHECK(open.head(lag) == s.soc.head(lag));
    for (Index n = 0; n < lag; ++n) CHECK(closed[n] == 0.5);
    for (Index n = lag; n < s.size(); ++n) CHECK(open[n] == closed[n]);
  }
}

TEST_CASE("network serde round trips bit exactly") {
  NarxConfig cfg;
  cfg.hidden_neurons = 5;
  Rng rng(31);
  const NarxNetwork net = make_network(cfg, rng);

  const std::string text = to_json(net).dump();
  const NarxNetwork back = network_from_json(nlohmann::json::parse(text));
  CHECK(back.config == net.config);
  CHECK(flatten_weights(back) == flatten_weights(net));

  SUBCASE("wrong format tag") {
    nlohmann::json j = to_json(net);
    j["format"] = "narx-v2";
    CHECK_THROWS_AS(network_from_json(j), InvalidConfig);
  }
  SUBCASE("weight shape mismatch") {
    nlohmann::json j = to_json(net);
    auto hw = j["hidden_weights"].get<std::vector<double>>();
    hw.pop_back();
    j["hidden_weights"] = hw;
    CHECK_THROWS_AS(network_from_json(j), DimensionMismatch);
  }
}

TEST_CASE("closed-loop guard rails") {
  NarxConfig cfg;
  Rng rng(12);
  const NarxNetwork net = make_network(cfg, rng);

  ClosedLoopState st;
  st.soc0 = 1.5;
  CHECK_THROWS_AS(predict_closed_loop(net, rand_series(20, 1), st),
                  InvalidSoc0);
  st.soc0 = 0.5;
  CHECK_THROWS_AS(predict_closed_loop(net, rand_series(2, 1), st),
                  SeriesTooShort);
}
