#include "hess/narx.hpp"

#include <algorithm>
#include <cmath>

namespace hess {
namespace {

void check_delays(const std::vector<int>& delays, const char* what) {
  for (size_t i = 0; i < delays.size(); ++i) {
    if (delays[i] < 1)
      throw InvalidConfig(std::string(what) + " delays must be >= 1");
    if (i > 0 && delays[i] <= delays[i - 1])
      throw InvalidConfig(std::string(what) +
                          " delays must be strictly ascending");
  }
}

VecXd input_sample(const SampleSeries& s, Index n) {
  VecXd x(2);
  x << s.current[n], s.voltage[n];
  return x;
}

}  // namespace

int NarxConfig::regressor_len() const {
  return static_cast<int>(output_delays.size()) +
         input_channels * static_cast<int>(input_delays.size());
}

int NarxConfig::max_input_lag() const {
  return input_delays.empty() ? 0 : input_delays.back();
}

int NarxConfig::max_output_lag() const {
  return output_delays.empty() ? 0 : output_delays.back();
}

int NarxConfig::max_lag() const {
  return std::max(max_input_lag(), max_output_lag());
}

void validate(const NarxConfig& cfg, bool allow_feedback_free) {
  if (cfg.input_delays.empty())
    throw InvalidConfig("input delay set must not be empty");
  check_delays(cfg.input_delays, "input");
  check_delays(cfg.output_delays, "output");
  if (cfg.output_delays.empty() && !allow_feedback_free)
    throw InvalidConfig("output delay set must not be empty");
  if (cfg.hidden_neurons < 1) throw InvalidConfig("hidden_neurons must be >= 1");
  if (cfg.input_channels != 2)
    throw InvalidConfig("expected the two channels current, voltage");
}

NarxConfig ann_variant(NarxConfig cfg) {
  cfg.output_delays.clear();
  return cfg;
}

Index NarxNetwork::weight_count() const {
  return hidden_weights.size() + hidden_bias.size() + output_weights.size() + 1;
}

NarxNetwork make_network(const NarxConfig& cfg, Rng& rng) {
  validate(cfg, true);
  const int h = cfg.hidden_neurons;
  const int r = cfg.regressor_len();
  const double scale = 1.0 / std::sqrt(static_cast<double>(r));
  NarxNetwork net;
  net.config = cfg;
  net.hidden_weights.resize(h, r);
  net.hidden_bias.resize(h);
  net.output_weights.resize(h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < r; ++j)
      net.hidden_weights(i, j) = rng.uniform(-0.5, 0.5) * scale;
  for (int i = 0; i < h; ++i) net.hidden_bias[i] = rng.uniform(-0.5, 0.5) * scale;
  for (int i = 0; i < h; ++i)
    net.output_weights[i] = rng.uniform(-0.5, 0.5) * scale;
  net.output_bias = rng.uniform(-0.5, 0.5) * scale;
  return net;
}

void validate(const NarxNetwork& net) {
  validate(net.config, true);
  const int h = net.config.hidden_neurons;
  const int r = net.config.regressor_len();
  if (net.hidden_weights.rows() != h || net.hidden_weights.cols() != r ||
      net.hidden_bias.size() != h || net.output_weights.size() != h)
    throw DimensionMismatch("network dimensions do not match its config");
  if (!net.hidden_weights.allFinite() || !net.hidden_bias.allFinite() ||
      !net.output_weights.allFinite() || !std::isfinite(net.output_bias))
    throw InvalidConfig("network weights must be finite");
}

double forward(const NarxNetwork& net, const Eigen::Ref<const VecXd>& row) {
  if (row.size() != net.config.regressor_len())
    throw DimensionMismatch("regressor row length does not match config");
  const VecXd z =
      ((net.hidden_weights * row + net.hidden_bias).array().tanh()).matrix();
  return net.output_weights.dot(z) + net.output_bias;
}

VecXd forward_batch(const NarxNetwork& net, const Eigen::Ref<const MatXd>& rows) {
  if (rows.cols() != net.config.regressor_len())
    throw DimensionMismatch("regressor row length does not match config");
  MatXd z = (rows * net.hidden_weights.transpose()).rowwise() +
            net.hidden_bias.transpose();
  z = z.array().tanh();
  return (z * net.output_weights).array() + net.output_bias;
}

VecXd flatten_weights(const NarxNetwork& net) {
  VecXd w(net.weight_count());
  Index p = 0;
  for (Index i = 0; i < net.hidden_weights.rows(); ++i)
    for (Index j = 0; j < net.hidden_weights.cols(); ++j)
      w[p++] = net.hidden_weights(i, j);
  w.segment(p, net.hidden_bias.size()) = net.hidden_bias;
  p += net.hidden_bias.size();
  w.segment(p, net.output_weights.size()) = net.output_weights;
  p += net.output_weights.size();
  w[p] = net.output_bias;
  return w;
}

void set_weights(NarxNetwork& net, const Eigen::Ref<const VecXd>& w) {
  if (w.size() != net.weight_count())
    throw DimensionMismatch("weight vector length does not match network");
  Index p = 0;
  for (Index i = 0; i < net.hidden_weights.rows(); ++i)
    for (Index j = 0; j < net.hidden_weights.cols(); ++j)
      net.hidden_weights(i, j) = w[p++];
  net.hidden_bias = w.segment(p, net.hidden_bias.size());
  p += net.hidden_bias.size();
  net.output_weights = w.segment(p, net.output_weights.size());
  p += net.output_weights.size();
  net.output_bias = w[p];
}

RegressorSet build_open_loop_rows(const SampleSeries& series,
                                  const NarxConfig& cfg) {
  validate(cfg, true);
  validate(series);
  const Index n = series.size();
  const Index lag = cfg.max_lag();
  if (n <= lag)
    throw SeriesTooShort("need more than " + std::to_string(lag) +
                         " samples to build regressor rows");
  if (!series.has_soc())
    throw MissingGroundTruth("regressor targets need the soc channel");

  const Index rows = n - lag;
  const auto ny = static_cast<Index>(cfg.output_delays.size());
  const auto nx = static_cast<Index>(cfg.input_delays.size());
  RegressorSet set;
  set.values.resize(rows, cfg.regressor_len());
  set.targets.resize(rows);
  set.first_target = lag;
  for (Index r = 0; r < rows; ++r) {
    const Index step = lag + r;
    Index c = 0;
    for (Index j = 0; j < ny; ++j)
      set.values(r, c++) = series.soc[step - cfg.output_delays[j]];
    for (Index j = 0; j < nx; ++j)
      set.values(r, c++) = series.current[step - cfg.input_delays[j]];
    for (Index j = 0; j < nx; ++j)
      set.values(r, c++) = series.voltage[step - cfg.input_delays[j]];
    set.targets[r] = series.soc[step];
  }
  return set;
}

VecXd predict_open_loop(const NarxNetwork& net, const SampleSeries& series) {
  validate(net);
  const RegressorSet rows = build_open_loop_rows(series, net.config);
  VecXd out(series.size());
  out.head(rows.first_target) = series.soc.head(rows.first_target);
  // per-row forward keeps the arithmetic identical to the closed-loop path
  for (Index r = 0; r < rows.size(); ++r)
    out[rows.first_target + r] =
        forward(net, rows.values.row(r).transpose());
  return out;
}

void prime_state(ClosedLoopState& st, const NarxNetwork& net,
                 const SampleSeries& series, Index begin) {
  const NarxConfig& cfg = net.config;
  if (begin < cfg.max_lag() || begin > series.size())
    throw DimensionMismatch("closed-loop start leaves an incomplete window");
  if (!(st.soc0 >= 0.0 && st.soc0 <= 1.0))
    throw InvalidSoc0("soc0 must lie in [0, 1]");
  if (st.n0 < 0) st.n0 = cfg.max_lag() + 1;
  st.history_y.assign(static_cast<size_t>(cfg.max_output_lag()), st.soc0);
  st.history_x.clear();
  for (Index k = 1; k <= cfg.max_input_lag(); ++k)
    st.history_x.push_back(input_sample(series, begin - k));
}

VecXd closed_loop_row(const NarxNetwork& net, const ClosedLoopState& st,
                      Index n) {
  const NarxConfig& cfg = net.config;
  VecXd row(cfg.regressor_len());
  Index c = 0;
  for (int k : cfg.output_delays)
    row[c++] = n < st.n0 ? st.soc0
                         : st.history_y[static_cast<size_t>(k - 1)];
  for (Index ch = 0; ch < cfg.input_channels; ++ch)
    for (int k : cfg.input_delays)
      row[c++] = st.history_x[static_cast<size_t>(k - 1)][ch];
  return row;
}

void advance_state(ClosedLoopState& st, const NarxNetwork& net, double y_n,
                   const Eigen::Ref<const VecXd>& x_n) {
  const NarxConfig& cfg = net.config;
  if (cfg.max_output_lag() > 0) {
    st.history_y.push_front(y_n);
    st.history_y.pop_back();
  }
  if (cfg.max_input_lag() > 0) {
    st.history_x.push_front(x_n);
    st.history_x.pop_back();
  }
}

VecXd predict_closed_loop(const NarxNetwork& net, const SampleSeries& series,
                          ClosedLoopState init) {
  validate(net);
  validate(series);
  const Index lag = net.config.max_lag();
  if (series.size() <= lag)
    throw SeriesTooShort("need more than " + std::to_string(lag) +
                         " samples for closed-loop estimation");
  prime_state(init, net, series, lag);

  VecXd est(series.size());
  est.head(lag).setConstant(init.soc0);
  for (Index n = lag; n < series.size(); ++n) {
    const double y = forward(net, closed_loop_row(net, init, n));
    est[n] = y;
    advance_state(init, net, y, input_sample(series, n));
  }
  return est;
}

nlohmann::json to_json(const NarxNetwork& net) {
  nlohmann::json j;
  j["format"] = "narx-v1";
  j["input_delays"] = net.config.input_delays;
  j["output_delays"] = net.config.output_delays;
  j["hidden_neurons"] = net.config.hidden_neurons;
  j["input_channels"] = net.config.input_channels;
  std::vector<double> hw(net.hidden_weights.size());
  for (Index i = 0; i < net.hidden_weights.rows(); ++i)
    for (Index k = 0; k < net.hidden_weights.cols(); ++k)
      hw[static_cast<size_t>(i * net.hidden_weights.cols() + k)] =
          net.hidden_weights(i, k);
  j["hidden_weights"] = hw;
  j["hidden_bias"] = std::vector<double>(
      net.hidden_bias.data(), net.hidden_bias.data() + net.hidden_bias.size());
  j["output_weights"] =
      std::vector<double>(net.output_weights.data(),
                          net.output_weights.data() + net.output_weights.size());
  j["output_bias"] = net.output_bias;
  return j;
}

NarxNetwork network_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "narx-v1")
    throw InvalidConfig("expected a narx-v1 document");
  NarxConfig cfg;
  cfg.input_delays = j.at("input_delays").get<std::vector<int>>();
  cfg.output_delays = j.at("output_delays").get<std::vector<int>>();
  cfg.hidden_neurons = j.at("hidden_neurons").get<int>();
  cfg.input_channels = j.at("input_channels").get<int>();
  validate(cfg, true);

  NarxNetwork net;
  net.config = cfg;
  const int h = cfg.hidden_neurons;
  const int r = cfg.regressor_len();
  const auto hw = j.at("hidden_weights").get<std::vector<double>>();
  const auto hb = j.at("hidden_bias").get<std::vector<double>>();
  const auto ow = j.at("output_weights").get<std::vector<double>>();
  if (hw.size() != static_cast<size_t>(h * r) ||
      hb.size() != static_cast<size_t>(h) || ow.size() != static_cast<size_t>(h))
    throw DimensionMismatch("weight arrays do not match the declared shape");
  net.hidden_weights.resize(h, r);
  for (int i = 0; i < h; ++i)
    for (int k = 0; k < r; ++k)
      net.hidden_weights(i, k) = hw[static_cast<size_t>(i * r + k)];
  net.hidden_bias = Eigen::Map<const VecXd>(hb.data(), h);
  net.output_weights = Eigen::Map<const VecXd>(ow.data(), h);
  net.output_bias = j.at("output_bias").get<double>();
  validate(net);
  return net;
}

}  // namespace hess
