#include "hess/trainer.hpp"

#include <cmath>
#include <limits>

namespace hess {
namespace {

double mse_of(const Eigen::Ref<const VecXd>& e) {
  return e.size() == 0 ? 0.0 : e.squaredNorm() / static_cast<double>(e.size());
}

std::string weights_fingerprint(const VecXd& w) {
  return checksum_hex(std::string_view(
      reinterpret_cast<const char*>(w.data()), sizeof(double) * w.size()));
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.max_epochs < 0) throw InvalidConfig("max_epochs must be >= 0");
  if (!(cfg.mu_init > 0) || !(cfg.mu_max > cfg.mu_init))
    throw InvalidConfig("need 0 < mu_init < mu_max");
  if (!(cfg.mu_increase > 1) || !(cfg.mu_decrease > 0) ||
      !(cfg.mu_decrease < 1))
    throw InvalidConfig("need mu_increase > 1 and mu_decrease in (0, 1)");
  if (cfg.goal_mse < 0) throw InvalidConfig("goal_mse must be >= 0");
  if (cfg.val_patience < 0) throw InvalidConfig("val_patience must be >= 0");
  if (!(cfg.train_ratio > 0) || !(cfg.val_ratio > 0) || !(cfg.test_ratio > 0))
    throw InvalidConfig("split ratios must be positive");
  if (std::abs(cfg.train_ratio + cfg.val_ratio + cfg.test_ratio - 1.0) > 1e-9)
    throw InvalidConfig("split ratios must sum to 1");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::Goal: return "goal";
    case StopReason::ValPatience: return "val_patience";
    case StopReason::MuOverflow: return "mu_overflow";
  }
  return "unknown";
}

StopReason stop_reason_from_string(const std::string& s) {
  if (s == "max_epochs") return StopReason::MaxEpochs;
  if (s == "goal") return StopReason::Goal;
  if (s == "val_patience") return StopReason::ValPatience;
  if (s == "mu_overflow") return StopReason::MuOverflow;
  throw InvalidConfig("unknown stop reason: " + s);
}

nlohmann::json to_json(const TrainReport& r) {
  nlohmann::json j;
  j["format"] = "train-report-v1";
  j["epochs_run"] = r.epochs_run;
  j["train_mse"] = r.train_mse;
  j["val_mse"] = r.val_mse;
  j["test_mse"] = r.test_mse;
  j["accepted_steps"] = r.accepted_steps;
  j["stop_reason"] = to_string(r.stop_reason);
  j["weights_checksum"] = r.weights_checksum;
  return j;
}

TrainReport report_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "train-report-v1")
    throw InvalidConfig("expected a train-report-v1 document");
  TrainReport r;
  r.epochs_run = j.at("epochs_run").get<int>();
  r.train_mse = j.at("train_mse").get<std::vector<double>>();
  r.val_mse = j.at("val_mse").get<std::vector<double>>();
  r.test_mse = j.at("test_mse").get<std::vector<double>>();
  r.accepted_steps = j.at("accepted_steps").get<int>();
  r.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
  r.weights_checksum = j.at("weights_checksum").get<std::string>();
  return r;
}

SplitIndices split_rows(Index n_rows, const TrainConfig& cfg) {
  validate(cfg);
  if (n_rows < 10)
    throw TooFewRows("need at least 10 rows to split, got " +
                     std::to_string(n_rows));
  SplitIndices s;
  s.n_train = static_cast<Index>(std::floor(double(n_rows) * cfg.train_ratio));
  s.n_val = static_cast<Index>(std::floor(double(n_rows) * cfg.val_ratio));
  s.n_test = n_rows - s.n_train - s.n_val;
  return s;
}

SplitIndices split_rows(const RegressorSet& rows, const TrainConfig& cfg) {
  return split_rows(rows.size(), cfg);
}

VecXd residuals(const NarxNetwork& net, const Eigen::Ref<const MatXd>& rows,
                const Eigen::Ref<const VecXd>& targets) {
  if (rows.rows() != targets.size())
    throw LengthMismatch("row/target count mismatch");
  return targets - forward_batch(net, rows);
}

MatXd lm_jacobian(const NarxNetwork& net, const Eigen::Ref<const MatXd>& rows) {
  const Index n = rows.rows();
  const Index h = net.config.hidden_neurons;
  const Index r = net.config.regressor_len();
  if (rows.cols() != r)
    throw DimensionMismatch("regressor row length does not match config");

  // th = tanh(W x + b) per row; residual e = y - (v . th + b_out), so
  //   de/dW(i,j) = -v_i (1 - th_i^2) x_j,  de/db_i = -v_i (1 - th_i^2),
  //   de/dv_i = -th_i,                     de/db_out = -1.
  MatXd th = (rows * net.hidden_weights.transpose()).rowwise() +
             net.hidden_bias.transpose();
  th = th.array().tanh();
  const MatXd gate = (1.0 - th.array().square()).matrix();  // n x h

  MatXd jac(n, net.weight_count());
  for (Index i = 0; i < h; ++i) {
    const VecXd col = -net.output_weights[i] * gate.col(i);
    jac.block(0, i * r, n, r) = rows.array().colwise() * col.array();
    jac.col(h * r + i) = col;
  }
  jac.block(0, h * r + h, n, h) = -th;
  jac.col(h * r + 2 * h).setConstant(-1.0);
  return jac;
}

VecXd solve_damped(const Eigen::Ref<const MatXd>& jtj,
                   const Eigen::Ref<const VecXd>& g, double mu) {
  MatXd a = jtj;
  a.diagonal().array() += mu;
  Eigen::LLT<MatXd> llt(a);
  if (llt.info() != Eigen::Success)
    throw SingularSystem("damped normal equations are not positive definite");
  VecXd d = llt.solve(g);
  d += llt.solve(g - a * d);  // one refinement pass
  if (!d.allFinite())
    throw SingularSystem("damped solve produced non-finite step");
  return d;
}

namespace {

std::pair<NarxNetwork, TrainReport> lm_optimize(NarxNetwork net,
                                                const RegressorSet& rows,
                                                const TrainConfig& cfg) {
  validate(cfg);
  validate(net);
  if (rows.values.cols() != net.config.regressor_len())
    throw DimensionMismatch("rows were built for a different regressor");
  const SplitIndices split = split_rows(rows, cfg);

  const auto train_x = rows.values.topRows(split.n_train);
  const auto train_y = rows.targets.head(split.n_train);
  const auto val_x = rows.values.middleRows(split.val_begin(), split.n_val);
  const auto val_y = rows.targets.segment(split.val_begin(), split.n_val);
  const auto test_x = rows.values.middleRows(split.test_begin(), split.n_test);
  const auto test_y = rows.targets.segment(split.test_begin(), split.n_test);

  TrainReport report;
  VecXd w = flatten_weights(net);
  VecXd e = residuals(net, train_x, train_y);
  double train_mse = mse_of(e);
  if (!std::isfinite(train_mse))
    throw NonFiniteLoss("training loss is not finite at the start");

  double mu = cfg.mu_init;
  double best_val = std::numeric_limits<double>::infinity();
  double prev_val = std::numeric_limits<double>::infinity();
  VecXd best_w = w;
  int val_streak = 0;
  report.stop_reason = StopReason::MaxEpochs;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const MatXd jac = lm_jacobian(net, train_x);
    const MatXd jtj = jac.transpose() * jac;
    const VecXd g = jac.transpose() * e;

    bool accepted = false;
    while (true) {
      const VecXd step = solve_damped(jtj, g, mu);
      const VecXd w_new = w - step;
      set_weights(net, w_new);
      const VecXd e_new = residuals(net, train_x, train_y);
      const double mse_new = mse_of(e_new);
      if (std::isfinite(mse_new) && mse_new < train_mse) {
        w = w_new;
        e = e_new;
        train_mse = mse_new;
        mu *= cfg.mu_decrease;
        accepted = true;
        break;
      }
      set_weights(net, w);
      mu *= cfg.mu_increase;
      if (mu > cfg.mu_max) break;
    }
    if (!accepted) {
      report.stop_reason = StopReason::MuOverflow;
      break;
    }

    ++report.accepted_steps;
    ++report.epochs_run;
    const double val_mse = mse_of(residuals(net, val_x, val_y));
    const double test_mse = mse_of(residuals(net, test_x, test_y));
    report.train_mse.push_back(train_mse);
    report.val_mse.push_back(val_mse);
    report.test_mse.push_back(test_mse);

    if (val_mse < best_val) {
      best_val = val_mse;
      best_w = w;
    }
    val_streak = val_mse > prev_val ? val_streak + 1 : 0;
    prev_val = val_mse;

    if (train_mse <= cfg.goal_mse) {
      report.stop_reason = StopReason::Goal;
      break;
    }
    if (val_streak > cfg.val_patience) {
      report.stop_reason = StopReason::ValPatience;
      break;
    }
  }

  if (report.epochs_run > 0) set_weights(net, best_w);
  report.weights_checksum = weights_fingerprint(flatten_weights(net));
  return {std::move(net), std::move(report)};
}

}  // namespace

std::pair<NarxNetwork, TrainReport> train_narx(NarxNetwork net,
                                               const RegressorSet& rows,
                                               const TrainConfig& cfg) {
  validate(net.config, false);
  return lm_optimize(std::move(net), rows, cfg);
}

std::pair<NarxNetwork, TrainReport> train_ann_baseline(const NarxConfig& cfg,
                                                       const RegressorSet& rows,
                                                       const TrainConfig& tc) {
  if (!cfg.feedback_free())
    throw InvalidConfig("baseline config must be feedback free");
  validate(cfg, true);
  validate(tc);
  Rng rng(tc.seed);
  NarxNetwork net = make_network(cfg, rng);
  return lm_optimize(std::move(net), rows, tc);
}

}  // namespace hess
