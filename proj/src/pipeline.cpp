#include "hess/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hess {
namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double lerp_t(double t, double t0, double v0, double t1, double v1) {
  return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

// Fills bad entries of one channel in place by linear interpolation between
// intact neighbours; nearest intact value at the ends.
void repair_channel(VecXd& ch, const VecXd& t, const std::vector<bool>& bad) {
  const Index n = ch.size();
  for (Index k = 0; k < n; ++k) {
    if (!bad[static_cast<size_t>(k)]) continue;
    Index left = k - 1;
    while (left >= 0 && bad[static_cast<size_t>(left)]) --left;
    Index right = k + 1;
    while (right < n && bad[static_cast<size_t>(right)]) ++right;
    if (left >= 0 && right < n)
      ch[k] = lerp_t(t[k], t[left], ch[left], t[right], ch[right]);
    else if (left >= 0)
      ch[k] = ch[left];
    else if (right < n)
      ch[k] = ch[right];
    // all-bad channels are rejected by the flagged-fraction cap earlier
  }
}

double input_scale(double lo, double hi, const char* what) {
  if (!(hi > lo))
    throw DegenerateChannel(std::string(what) + " channel has no spread");
  return hi - lo;
}

}  // namespace

CoulombResult coulomb_count(const SampleSeries& s, const CoulombConfig& cfg) {
  validate(s);
  validate_physical(s);
  if (!(cfg.capacity_c > 0)) throw InvalidConfig("capacity must be positive");
  if (!(cfg.soc_init >= 0 && cfg.soc_init <= 1))
    throw InvalidSoc0("initial soc must lie in [0, 1]");

  CoulombResult out;
  out.soc.resize(s.size());
  out.clamp_count = 0;
  double used_c = 0.0;
  out.soc[0] = cfg.soc_init;
  for (Index k = 1; k < s.size(); ++k) {
    const double dt = s.t[k] - s.t[k - 1];
    used_c += dt * (s.current[k - 1] + s.current[k]) / 2.0;
    const double raw = cfg.soc_init - used_c / cfg.capacity_c;
    if (raw < 0.0 || raw > 1.0) ++out.clamp_count;
    out.soc[k] = clamp01(raw);
  }
  return out;
}

CleanseResult cleanse(const SampleSeries& s, const CleanseRules& rules) {
  validate(s);
  const Index n = s.size();
  std::vector<bool> bad_i(n, false), bad_v(n, false), bad_soc(n, false);
  std::map<Index, std::string> reasons;
  auto flag = [&](Index k, const char* why) {
    auto& r = reasons[k];
    if (!r.empty()) r += '+';
    r += why;
  };

  for (Index k = 0; k < n; ++k) {
    if (!std::isfinite(s.current[k])) {
      bad_i[static_cast<size_t>(k)] = true;
      flag(k, "current_nonfinite");
    } else if (std::abs(s.current[k]) > rules.current_ceiling_a) {
      bad_i[static_cast<size_t>(k)] = true;
      flag(k, "current_ceiling");
    }
    if (!std::isfinite(s.voltage[k])) {
      bad_v[static_cast<size_t>(k)] = true;
      flag(k, "voltage_nonfinite");
    } else if (!(s.voltage[k] > rules.voltage_min) ||
               !(s.voltage[k] < rules.voltage_max)) {
      bad_v[static_cast<size_t>(k)] = true;
      flag(k, "voltage_bounds");
    }
    if (s.has_soc() && !std::isfinite(s.soc[k])) {
      bad_soc[static_cast<size_t>(k)] = true;
      flag(k, "soc_nonfinite");
    }
  }

  const double flagged = static_cast<double>(reasons.size());
  if (flagged > rules.max_flagged_fraction * static_cast<double>(n))
    throw TooManyOutliers(std::to_string(reasons.size()) + " of " +
                          std::to_string(n) + " samples flagged");

  CleanseResult out;
  out.series = s;
  repair_channel(out.series.current, s.t, bad_i);
  repair_channel(out.series.voltage, s.t, bad_v);
  if (s.has_soc()) repair_channel(out.series.soc, s.t, bad_soc);
  for (const auto& [k, why] : reasons) out.removed.push_back({k, why});
  return out;
}

NormStats compute_norm_stats(const SampleSeries& s, Index n_samples) {
  validate(s);
  if (n_samples < 2 || n_samples > s.size())
    throw DimensionMismatch("stats window out of range");
  NormStats st;
  st.current_min = s.current.head(n_samples).minCoeff();
  st.current_max = s.current.head(n_samples).maxCoeff();
  st.voltage_min = s.voltage.head(n_samples).minCoeff();
  st.voltage_max = s.voltage.head(n_samples).maxCoeff();
  input_scale(st.current_min, st.current_max, "current");
  input_scale(st.voltage_min, st.voltage_max, "voltage");
  return st;
}

SampleSeries normalize(const SampleSeries& s, const NormStats& st) {
  SampleSeries out = s;
  const double di = input_scale(st.current_min, st.current_max, "current");
  const double dv = input_scale(st.voltage_min, st.voltage_max, "voltage");
  out.current = (2.0 * (s.current.array() - st.current_min) / di - 1.0).matrix();
  out.voltage = (2.0 * (s.voltage.array() - st.voltage_min) / dv - 1.0).matrix();
  return out;
}

std::vector<Segment> segment_by_regime(const SampleSeries& s,
                                       const SegmentRules& rules) {
  validate(s);
  const Index n = s.size();
  double db = rules.deadband_a;
  if (db < 0) {
    const double rms =
        std::sqrt(s.current.squaredNorm() / static_cast<double>(n));
    db = 0.01 * rms;
  }

  std::vector<Segment> runs;
  std::optional<Regime> cur;
  Index start = 0;
  for (Index k = 0; k < n; ++k) {
    std::optional<Regime> reg;
    if (s.current[k] > db)
      reg = Regime::Discharge;
    else if (s.current[k] < -db)
      reg = Regime::Charge;
    if (!reg) continue;  // deadband samples follow the surrounding regime
    if (!cur) {
      cur = reg;  // leading deadband joins the first signed run
    } else if (*cur != *reg) {
      runs.push_back({*cur, start, k});
      cur = reg;
      start = k;
    }
  }
  if (!cur) throw NoSegments("no sample leaves the current deadband");
  runs.push_back({*cur, start, n});

  // fold short runs into a neighbour until everything meets min_len
  while (runs.size() > 1) {
    size_t victim = runs.size();
    for (size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].end - runs[i].begin < rules.min_len) {
        victim = i;
        break;
      }
    }
    if (victim == runs.size()) break;
    if (victim > 0) {
      runs[victim - 1].end = runs[victim].end;
      runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(victim));
    } else {
      runs[1].begin = runs[0].begin;
      runs.erase(runs.begin());
    }
    for (size_t i = 0; i + 1 < runs.size();) {
      if (runs[i].regime == runs[i + 1].regime) {
        runs[i].end = runs[i + 1].end;
        runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      } else {
        ++i;
      }
    }
  }
  return runs;
}

Metrics evaluate(const Eigen::Ref<const VecXd>& actual,
                 const Eigen::Ref<const VecXd>& estimated) {
  if (actual.size() != estimated.size())
    throw LengthMismatch("actual/estimated lengths differ");
  if (actual.size() == 0) throw LengthMismatch("nothing to evaluate");
  const VecXd err = actual - estimated;
  Metrics m;
  m.n_points = actual.size();
  m.mae_pct = 100.0 * err.array().abs().mean();
  m.rmse_pct = 100.0 * std::sqrt(err.squaredNorm() /
                                 static_cast<double>(err.size()));
  return m;
}

std::string to_string(ModelKind m) {
  return m == ModelKind::Narx ? "narx" : "ann";
}

std::string to_string(Soc0Policy p) {
  return p == Soc0Policy::Provided ? "provided" : "last_known";
}

namespace {

ModelKind model_from_string(const std::string& s) {
  if (s == "narx") return ModelKind::Narx;
  if (s == "ann") return ModelKind::Ann;
  throw InvalidConfig("unknown model kind: " + s);
}

Soc0Policy policy_from_string(const std::string& s) {
  if (s == "provided") return Soc0Policy::Provided;
  if (s == "last_known") return Soc0Policy::LastKnown;
  throw InvalidConfig("unknown soc0 policy: " + s);
}

struct NetPlan {
  std::string name;
  std::optional<Regime> regime;
  RegressorSet rows;
  std::vector<Index> row_sample;  // absolute sample index per row
};

struct FitPlan {
  SampleSeries cleansed;
  NormStats norm;
  SampleSeries normalized;
  std::vector<Segment> segments;  // battery only
  std::vector<NetPlan> nets;
  Index n_stats = 0;
};

void append_rows(NetPlan& plan, const RegressorSet& rs, Index sample_offset) {
  const Index old = plan.rows.size();
  if (old == 0) {
    plan.rows = rs;
  } else {
    MatXd values(old + rs.size(), rs.values.cols());
    values.topRows(old) = plan.rows.values;
    values.bottomRows(rs.size()) = rs.values;
    VecXd targets(old + rs.size());
    targets.head(old) = plan.rows.targets;
    targets.tail(rs.size()) = rs.targets;
    plan.rows.values = std::move(values);
    plan.rows.targets = std::move(targets);
  }
  for (Index i = 0; i < rs.size(); ++i)
    plan.row_sample.push_back(sample_offset + rs.first_target + i);
}

FitPlan make_fit_plan(const SampleSeries& series, Device device,
                      const NarxConfig& cfg, const TrainConfig& tc,
                      const FitOptions& opts) {
  validate(cfg, true);
  validate(tc);
  FitPlan plan;
  plan.cleansed = cleanse(series, opts.cleanse).series;
  validate_physical(plan.cleansed);
  if (!plan.cleansed.has_soc())
    throw MissingGroundTruth("fitting needs the soc channel");

  const Index lag = cfg.max_lag();
  const Index n = plan.cleansed.size();
  if (n <= lag + 1) throw SeriesTooShort("series shorter than the lag window");
  plan.n_stats =
      lag + static_cast<Index>(std::floor(
                tc.train_ratio * static_cast<double>(n - lag)));
  plan.n_stats = std::max<Index>(plan.n_stats, 2);
  plan.norm = compute_norm_stats(plan.cleansed, plan.n_stats);
  plan.normalized = normalize(plan.cleansed, plan.norm);

  if (device == Device::Supercapacitor) {
    NetPlan np;
    np.name = "single";
    append_rows(np, build_open_loop_rows(plan.normalized, cfg), 0);
    plan.nets.push_back(std::move(np));
    return plan;
  }

  SegmentRules seg_rules = opts.segments;
  seg_rules.min_len = std::max<Index>(seg_rules.min_len, lag + 1);
  plan.segments = segment_by_regime(plan.cleansed, seg_rules);
  for (Regime regime : {Regime::Charge, Regime::Discharge}) {
    NetPlan np;
    np.name = to_string(regime);
    np.regime = regime;
    for (const Segment& seg : plan.segments) {
      if (seg.regime != regime || seg.end - seg.begin <= lag) continue;
      const SampleSeries sub = plan.normalized.slice(seg.begin, seg.end);
      append_rows(np, build_open_loop_rows(sub, cfg), seg.begin);
    }
    if (np.rows.size() > 0) plan.nets.push_back(std::move(np));
  }
  if (plan.nets.empty()) throw NoSegments("no usable regime segments");
  return plan;
}

const NarxNetwork& bundle_net(const EstimatorBundle& b,
                              const std::optional<Regime>& regime) {
  const std::optional<NarxNetwork>* slot = &b.single;
  if (regime)
    slot = *regime == Regime::Charge ? &b.charge_net : &b.discharge_net;
  if (!slot->has_value())
    throw InvalidConfig("bundle has no network for " +
                        (regime ? to_string(*regime) : std::string("single")));
  return **slot;
}

struct SpanAccum {
  std::vector<SpanMetrics> spans;
  double abs_sum = 0, sq_sum = 0;
  Index n_total = 0;
};

// Closed-loop replay over the maximal runs of consecutive samples owned by
// rows [r_begin, r_end) of a net plan. Each run is seeded with the true soc
// just before it.
void replay_row_spans(const NarxNetwork& net, const FitPlan& plan,
                      const NetPlan& np, Index r_begin, Index r_end,
                      SpanAccum& acc) {
  const Index lag = net.config.max_lag();
  Index r = r_begin;
  while (r < r_end) {
    Index run_end = r + 1;
    while (run_end < r_end &&
           np.row_sample[static_cast<size_t>(run_end)] ==
               np.row_sample[static_cast<size_t>(run_end - 1)] + 1)
      ++run_end;
    const Index s0 = np.row_sample[static_cast<size_t>(r)];
    const Index s1 = np.row_sample[static_cast<size_t>(run_end - 1)] + 1;

    ClosedLoopState st;
    st.soc0 = clamp01(plan.normalized.soc[s0 - 1]);
    const VecXd est_norm =
        predict_closed_loop(net, plan.normalized.slice(s0 - lag, s1), st);

    VecXd est(s1 - s0);
    for (Index k = 0; k < est.size(); ++k) est[k] = clamp01(est_norm[lag + k]);
    const VecXd truth = plan.cleansed.soc.segment(s0, s1 - s0);

    acc.spans.push_back({np.regime, s0, s1, evaluate(truth, est)});
    acc.abs_sum += (truth - est).array().abs().sum();
    acc.sq_sum += (truth - est).squaredNorm();
    acc.n_total += est.size();
    r = run_end;
  }
}

}  // namespace

FitResult fit_estimator(const SampleSeries& series, Device device,
                        const NarxConfig& cfg, const TrainConfig& tc,
                        ModelKind kind, const FitOptions& opts) {
  validate(cfg, false);
  const NarxConfig used = kind == ModelKind::Ann ? ann_variant(cfg) : cfg;
  FitPlan plan = make_fit_plan(series, device, used, tc, opts);

  FitResult out;
  out.bundle.device = device;
  out.bundle.model = kind;
  out.bundle.config = used;
  out.bundle.norm = plan.norm;
  out.bundle.soc0_policy = Soc0Policy::Provided;
  out.bundle.last_known_soc0 = clamp01(plan.normalized.soc[plan.n_stats - 1]);
  out.bundle.seed = tc.seed;

  const Index n_feedback = static_cast<Index>(used.output_delays.size());
  std::vector<double> grid = opts.feedback_jitter;
  if (n_feedback == 0 || grid.empty()) grid = {0.0};

  std::size_t net_index = 0;
  for (NetPlan& np : plan.nets) {
    ++net_index;
    const SplitIndices split = split_rows(np.rows, tc);

    std::pair<NarxNetwork, TrainReport> best;
    double best_sigma = 0, best_mse = 0;
    bool have_best = false;
    for (double sigma : grid) {
      RegressorSet rows = np.rows;
      if (sigma > 0) {
        Rng jrng(tc.seed ^ (0x9e3779b97f4a7c15ull * net_index));
        for (Index r = 0; r < rows.values.rows(); ++r)
          for (Index c = 0; c < n_feedback; ++c)
            rows.values(r, c) += sigma * jrng.normal();
      }
      std::pair<NarxNetwork, TrainReport> trained = [&] {
        if (kind == ModelKind::Ann) return train_ann_baseline(used, rows, tc);
        Rng rng(tc.seed);
        return train_narx(make_network(used, rng), rows, tc);
      }();

      double mse = 0;
      if (grid.size() > 1) {
        SpanAccum acc;
        replay_row_spans(trained.first, plan, np, split.val_begin(),
                         split.test_begin(), acc);
        mse = acc.n_total > 0
                  ? acc.sq_sum / static_cast<double>(acc.n_total)
                  : trained.second.val_mse.back();
      }
      if (!have_best || mse < best_mse) {
        best = std::move(trained);
        best_sigma = sigma;
        best_mse = mse;
        have_best = true;
      }
    }

    if (!np.regime)
      out.bundle.single = std::move(best.first);
    else if (*np.regime == Regime::Charge)
      out.bundle.charge_net = std::move(best.first);
    else
      out.bundle.discharge_net = std::move(best.first);
    out.reports.push_back({np.name, std::move(best.second), best_sigma});
  }
  return out;
}

EstimateResult estimate_soc(const EstimatorBundle& bundle,
                            const SampleSeries& series,
                            std::optional<double> soc0) {
  validate(series);
  validate_physical(series);
  if (auto it = series.meta.find("device");
      it != series.meta.end() &&
      device_from_string(it->second) != bundle.device)
    throw ChannelMismatch("series was recorded for a " + it->second +
                          ", bundle fits a " + to_string(bundle.device));

  const Index lag = bundle.config.max_lag();
  double seed;
  if (soc0) {
    if (!(*soc0 >= 0 && *soc0 <= 1))
      throw InvalidSoc0("soc0 must lie in [0, 1]");
    seed = *soc0;
  } else if (bundle.soc0_policy == Soc0Policy::LastKnown) {
    seed = clamp01(bundle.last_known_soc0);
  } else {
    throw InvalidSoc0("this bundle requires an explicit soc0");
  }

  const SampleSeries normalized = normalize(series, bundle.norm);
  std::vector<SegmentEstimate> parts;
  if (bundle.device == Device::Supercapacitor) {
    parts.push_back({std::nullopt, 0, series.size()});
  } else {
    SegmentRules rules;
    rules.min_len = lag + 1;
    for (const Segment& seg : segment_by_regime(series, rules))
      parts.push_back({seg.regime, seg.begin, seg.end});
  }

  EstimateResult out;
  out.soc.resize(series.size());
  for (const SegmentEstimate& part : parts) {
    const NarxNetwork& net = bundle_net(bundle, part.regime);
    ClosedLoopState st;
    st.soc0 = seed;
    const VecXd est =
        predict_closed_loop(net, normalized.slice(part.begin, part.end), st);
    out.soc.segment(part.begin, est.size()) = est;
    seed = clamp01(est[est.size() - 1]);
  }

  out.segments = parts;
  for (Index k = 0; k < out.soc.size(); ++k) {
    const double frac = out.soc[k];
    if (frac < 0.0 || frac > 1.0) ++out.clamp_count;
    out.soc[k] = clamp01(frac);
  }
  return out;
}

TestEvaluation evaluate_on_test_split(const EstimatorBundle& bundle,
                                      const SampleSeries& series,
                                      const TrainConfig& tc,
                                      const FitOptions& opts) {
  FitPlan plan = make_fit_plan(series, bundle.device, bundle.config, tc, opts);

  TestEvaluation out;
  SpanAccum acc;
  for (const NetPlan& np : plan.nets) {
    const NarxNetwork& net = bundle_net(bundle, np.regime);
    const SplitIndices split = split_rows(np.rows, tc);
    replay_row_spans(net, plan, np, split.test_begin(), split.total(), acc);
  }
  if (acc.n_total == 0) throw TooFewRows("no held-out samples to evaluate");
  out.spans = std::move(acc.spans);
  const double abs_sum = acc.abs_sum, sq_sum = acc.sq_sum;
  const Index n_total = acc.n_total;
  out.overall.n_points = n_total;
  out.overall.mae_pct = 100.0 * abs_sum / static_cast<double>(n_total);
  out.overall.rmse_pct =
      100.0 * std::sqrt(sq_sum / static_cast<double>(n_total));
  return out;
}

nlohmann::json to_json(const EstimatorBundle& b) {
  nlohmann::json j;
  j["format"] = "hess-bundle-v1";
  j["device"] = to_string(b.device);
  j["model"] = to_string(b.model);
  j["config"] = {{"input_delays", b.config.input_delays},
                 {"output_delays", b.config.output_delays},
                 {"hidden_neurons", b.config.hidden_neurons},
                 {"input_channels", b.config.input_channels}};
  j["norm"] = {{"current_min", b.norm.current_min},
               {"current_max", b.norm.current_max},
               {"voltage_min", b.norm.voltage_min},
               {"voltage_max", b.norm.voltage_max}};
  j["soc0_policy"] = to_string(b.soc0_policy);
  j["last_known_soc0"] = b.last_known_soc0;
  j["seed"] = b.seed;
  nlohmann::json nets = nlohmann::json::object();
  if (b.single) nets["single"] = to_json(*b.single);
  if (b.charge_net) nets["charge"] = to_json(*b.charge_net);
  if (b.discharge_net) nets["discharge"] = to_json(*b.discharge_net);
  j["networks"] = nets;
  return j;
}

EstimatorBundle bundle_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "hess-bundle-v1")
    throw InvalidConfig("expected a hess-bundle-v1 document");
  EstimatorBundle b;
  b.device = device_from_string(j.at("device").get<std::string>());
  b.model = model_from_string(j.at("model").get<std::string>());
  const auto& jc = j.at("config");
  b.config.input_delays = jc.at("input_delays").get<std::vector<int>>();
  b.config.output_delays = jc.at("output_delays").get<std::vector<int>>();
  b.config.hidden_neurons = jc.at("hidden_neurons").get<int>();
  b.config.input_channels = jc.at("input_channels").get<int>();
  validate(b.config, true);
  const auto& jn = j.at("norm");
  b.norm.current_min = jn.at("current_min").get<double>();
  b.norm.current_max = jn.at("current_max").get<double>();
  b.norm.voltage_min = jn.at("voltage_min").get<double>();
  b.norm.voltage_max = jn.at("voltage_max").get<double>();
  b.soc0_policy = policy_from_string(j.at("soc0_policy").get<std::string>());
  b.last_known_soc0 = j.at("last_known_soc0").get<double>();
  b.seed = j.at("seed").get<std::uint64_t>();
  const auto& nets = j.at("networks");
  if (nets.contains("single")) b.single = network_from_json(nets["single"]);
  if (nets.contains("charge")) b.charge_net = network_from_json(nets["charge"]);
  if (nets.contains("discharge"))
    b.discharge_net = network_from_json(nets["discharge"]);
  for (const auto* net : {&b.single, &b.charge_net, &b.discharge_net})
    if (net->has_value() && !((*net)->config == b.config))
      throw InvalidConfig("network config differs from bundle config");
  return b;
}

}  // namespace hess
