#include "hess/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hess/narx.hpp"
#include "hess/pipeline.hpp"
#include "hess/series.hpp"
#include "hess/sim.hpp"
#include "hess/trainer.hpp"

namespace hess {
namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt_num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string checksum_of(const std::string& content) {
  return "fnv1a64:" + checksum_hex(content);
}

int classify(const std::exception& e) {
  if (dynamic_cast<const InvalidSoc0*>(&e) ||
      dynamic_cast<const InvalidConfig*>(&e))
    return kExitUsage;
  if (dynamic_cast<const SingularSystem*>(&e) ||
      dynamic_cast<const NonFiniteLoss*>(&e) ||
      dynamic_cast<const TooFewRows*>(&e))
    return kExitTraining;
  if (dynamic_cast<const Error*>(&e)) return kExitData;
  return 1;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string preset;
  std::string profile;
  std::string presets_dir = "presets";
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double dt = 0.0;
  double sigma_v = -1.0;
  double sigma_i = -1.0;
  bool noiseless = false;
};

int cmd_simulate(const SimulateArgs& args) {
  const Preset preset = load_preset(args.presets_dir, args.preset);
  std::string profile = args.profile;
  if (profile.empty()) profile = preset.entries.front().profiles.begin()->first;

  nlohmann::json manifest;
  manifest["format"] = "hess-manifest-v1";
  manifest["preset"] = preset.name;
  manifest["profile"] = profile;
  const std::uint64_t noise_seed =
      args.seed_set ? args.seed : preset.noise_seed;
  SimOptions opts;
  opts.sigma_v = args.sigma_v >= 0 ? args.sigma_v : preset.sigma_v;
  opts.sigma_i = args.sigma_i >= 0 ? args.sigma_i : preset.sigma_i;
  if (args.noiseless) opts.sigma_v = opts.sigma_i = 0.0;
  opts.noise_seed = noise_seed;
  manifest["seed"] = noise_seed;
  manifest["noise"] = {{"sigma_v", opts.sigma_v},
                       {"sigma_i", opts.sigma_i},
                       {"seed", noise_seed}};
  if (args.dt > 0) manifest["dt"] = args.dt;

  fs::create_directories(args.out);
  nlohmann::json files = nlohmann::json::array();
  for (const PresetEntry& entry : preset.entries) {
    auto it = entry.profiles.find(profile);
    if (it == entry.profiles.end())
      throw UnknownPreset("preset " + preset.name + " has no profile " +
                          profile);
    SimResult res = run_preset_entry(entry, it->second, opts, args.dt);
    res.series.meta["preset"] = preset.name;
    res.series.meta["profile"] = profile;
    res.series.meta["seed"] = std::to_string(noise_seed);

    std::string name = preset.name;
    if (!entry.label.empty()) name += "_" + entry.label;
    name += "_" + profile + ".csv";
    const std::string content = to_csv(res.series, &res.notes);
    write_file_atomic((fs::path(args.out) / name).string(), content);

    nlohmann::json jf;
    jf["name"] = name;
    jf["samples"] = res.series.size();
    jf["checksum"] = checksum_of(content);
    jf["soc_init"] = it->second.soc_init;
    jf["device"] = to_string(entry.device);
    if (entry.device == Device::Battery)
      jf["params"] = {{"capacity_ah", entry.battery.capacity_ah},
                      {"r0", entry.battery.r0},
                      {"r1", entry.battery.r1},
                      {"c1", entry.battery.c1},
                      {"v_min", entry.battery.v_min},
                      {"v_max", entry.battery.v_max},
                      {"temperature_tag", entry.battery.temperature_tag}};
    else
      jf["params"] = {{"capacitance_f", entry.sc.capacitance_f},
                      {"esr", entry.sc.esr},
                      {"leak_r", entry.sc.leak_r},
                      {"v_rated", entry.sc.v_rated},
                      {"temperature_tag", entry.sc.temperature_tag}};
    files.push_back(jf);
    std::cout << "wrote " << name << " (" << res.series.size() << " samples)\n";
  }
  manifest["files"] = files;
  write_file_atomic((fs::path(args.out) / "manifest.json").string(),
                    manifest.dump(2) + "\n");
  std::cout << "wrote manifest.json\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string device;
  std::string model = "narx";
  std::string out = ".";
  std::uint64_t seed = 0;
  int epochs = 200;
  int hidden = 16;
  double capacity_ah = 0.0;
  double soc_init = 1.0;
};

ModelKind parse_model(const std::string& s) {
  if (s == "narx") return ModelKind::Narx;
  if (s == "ann") return ModelKind::Ann;
  throw InvalidConfig("--model must be narx or ann");
}

int cmd_train(const TrainArgs& args) {
  SampleSeries series = read_csv(args.data);
  const Device device =
      args.device.empty() ? series.device : device_from_string(args.device);
  if (!series.has_soc()) {
    if (!(args.capacity_ah > 0))
      throw InvalidConfig(
          "data has no soc column; pass --capacity-ah to derive ground truth "
          "by coulomb counting");
    series.soc =
        coulomb_count(series,
                      CoulombConfig::from_ah(args.capacity_ah, args.soc_init))
            .soc;
  }

  NarxConfig cfg;
  cfg.hidden_neurons = args.hidden;
  TrainConfig tc;
  tc.seed = args.seed;
  tc.max_epochs = args.epochs;

  const ModelKind kind = parse_model(args.model);
  FitResult fit = fit_estimator(series, device, cfg, tc, kind);

  fs::create_directories(args.out);
  write_file_atomic((fs::path(args.out) / "model.json").string(),
                    to_json(fit.bundle).dump(2) + "\n");
  nlohmann::json jrep;
  jrep["format"] = "hess-train-v1";
  jrep["seed"] = tc.seed;
  jrep["model"] = to_string(kind);
  jrep["device"] = to_string(device);
  jrep["data"] = args.data;
  nlohmann::json arr = nlohmann::json::array();
  for (const NamedReport& nr : fit.reports) {
    nlohmann::json r = to_json(nr.report);
    r["name"] = nr.name;
    r["feedback_jitter"] = nr.feedback_jitter;
    arr.push_back(r);
  }
  jrep["reports"] = arr;
  write_file_atomic((fs::path(args.out) / "train_report.json").string(),
                    jrep.dump(2) + "\n");

  for (const NamedReport& nr : fit.reports) {
    const TrainReport& r = nr.report;
    std::cout << nr.name << ": " << r.epochs_run << " epochs, train mse "
              << (r.train_mse.empty() ? std::string("n/a")
                                      : fmt_num(r.train_mse.back()))
              << ", stop " << to_string(r.stop_reason) << "\n";
  }
  std::cout << "wrote model.json, train_report.json\n";
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string data;
  std::string model_file;
  std::string out = ".";
  double soc0 = -1.0;
  bool soc0_set = false;
};

int cmd_estimate(const EstimateArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(args.model_file);
  if (!in) throw IoError("cannot open " + args.model_file);
  nlohmann::json jb;
  try {
    in >> jb;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(args.model_file + ": " + e.what());
  }
  const EstimatorBundle bundle = bundle_from_json(jb);
  const SampleSeries series = read_csv(args.data);

  std::optional<double> soc0;
  if (args.soc0_set) soc0 = args.soc0;
  const EstimateResult res = estimate_soc(bundle, series, soc0);
  const double elapsed = seconds_since(t0);

  std::ostringstream csv;
  csv << (series.has_soc() ? "t,soc_true,soc_est,abs_err\n" : "t,soc_est\n");
  for (Index k = 0; k < series.size(); ++k) {
    csv << fmt_num(series.t[k]);
    if (series.has_soc())
      csv << ',' << fmt_num(series.soc[k]) << ',' << fmt_num(res.soc[k]) << ','
          << fmt_num(std::abs(series.soc[k] - res.soc[k]));
    else
      csv << ',' << fmt_num(res.soc[k]);
    csv << "\n";
  }
  fs::create_directories(args.out);
  write_file_atomic((fs::path(args.out) / "estimate.csv").string(), csv.str());

  nlohmann::json jm;
  jm["format"] = "hess-metrics-v1";
  jm["n_points"] = series.size();
  jm["clamp_count"] = res.clamp_count;
  jm["elapsed_s"] = elapsed;
  jm["seed"] = bundle.seed;
  if (soc0) jm["soc0"] = *soc0;
  nlohmann::json segs = nlohmann::json::array();
  for (const SegmentEstimate& s : res.segments)
    segs.push_back({{"regime", s.regime ? to_string(*s.regime) : "single"},
                    {"begin", s.begin},
                    {"end", s.end}});
  jm["segments"] = segs;
  if (series.has_soc()) {
    const Metrics m = evaluate(series.soc, res.soc);
    jm["mae_pct"] = m.mae_pct;
    jm["rmse_pct"] = m.rmse_pct;
    std::cout << "mae " << fmt_fixed(m.mae_pct) << "%  rmse "
              << fmt_fixed(m.rmse_pct) << "%  (" << m.n_points << " points)\n";
  }
  write_file_atomic((fs::path(args.out) / "metrics.json").string(),
                    jm.dump(2) + "\n");
  std::cout << "wrote estimate.csv, metrics.json (" << fmt_fixed(elapsed)
            << " s)\n";
  return 0;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  std::string preset;
  std::string profile;
  std::string presets_dir = "presets";
  std::string out = ".";
  std::uint64_t seed = 42;
  int epochs = 200;
  int hidden = 16;
};

int cmd_compare(const CompareArgs& args) {
  const auto t_start = std::chrono::steady_clock::now();
  std::ostringstream log;
  const Preset preset = load_preset(args.presets_dir, args.preset);
  std::string profile = args.profile;
  if (profile.empty()) profile = preset.entries.front().profiles.begin()->first;

  NarxConfig cfg;
  cfg.hidden_neurons = args.hidden;
  TrainConfig tc;
  tc.seed = args.seed;
  tc.max_epochs = args.epochs;

  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream table;
  table << "scenario                 device          model  mae_pct  rmse_pct\n";
  for (const PresetEntry& entry : preset.entries) {
    auto it = entry.profiles.find(profile);
    if (it == entry.profiles.end())
      throw UnknownPreset("preset " + preset.name + " has no profile " +
                          profile);
    SimOptions opts;
    opts.sigma_v = preset.sigma_v;
    opts.sigma_i = preset.sigma_i;
    opts.noise_seed = args.seed;
    auto t_sim = std::chrono::steady_clock::now();
    const SimResult sim = run_preset_entry(entry, it->second, opts);
    log << "simulate " << to_string(entry.device) << " "
        << seconds_since(t_sim) << " s\n";

    std::string scenario = preset.name;
    if (!entry.label.empty()) scenario += "_" + entry.label;
    scenario += "_" + profile;

    for (ModelKind kind : {ModelKind::Narx, ModelKind::Ann}) {
      auto t_fit = std::chrono::steady_clock::now();
      const FitResult fit =
          fit_estimator(sim.series, entry.device, cfg, tc, kind);
      const TestEvaluation ev =
          evaluate_on_test_split(fit.bundle, sim.series, tc);
      log << "fit+eval " << scenario << " " << to_string(kind) << " "
          << seconds_since(t_fit) << " s\n";

      rows.push_back({{"scenario", scenario},
                      {"device", to_string(entry.device)},
                      {"model", to_string(kind)},
                      {"mae_pct", ev.overall.mae_pct},
                      {"rmse_pct", ev.overall.rmse_pct},
                      {"n_points", ev.overall.n_points}});
      char line[160];
      std::snprintf(line, sizeof(line), "%-24s %-15s %-6s %8s %9s\n",
                    scenario.c_str(), to_string(entry.device).c_str(),
                    to_string(kind).c_str(),
                    fmt_fixed(ev.overall.mae_pct).c_str(),
                    fmt_fixed(ev.overall.rmse_pct).c_str());
      table << line;
    }
  }

  nlohmann::json jc;
  jc["format"] = "hess-comparison-v1";
  jc["preset"] = preset.name;
  jc["profile"] = profile;
  jc["seed"] = args.seed;
  jc["epochs"] = args.epochs;
  jc["noise"] = {{"sigma_v", preset.sigma_v}, {"sigma_i", preset.sigma_i}};
  jc["rows"] = rows;
  fs::create_directories(args.out);
  write_file_atomic((fs::path(args.out) / "comparison.json").string(),
                    jc.dump(2) + "\n");
  write_file_atomic((fs::path(args.out) / "comparison.txt").string(),
                    table.str());
  log << "total " << seconds_since(t_start) << " s\n";
  write_file_atomic((fs::path(args.out) / "compare.log").string(), log.str());
  std::cout << table.str();
  std::cout << "wrote comparison.json, comparison.txt, compare.log\n";
  return 0;
}

// ---------------------------------------------------------------- selftest

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    VecXd a(4), b(4);
    a << 0.5, 0.5, 0.5, 0.5;
    b << 0.51, 0.49, 0.5, 0.5;
    const Metrics m = evaluate(a, b);
    check("metrics arithmetic",
          std::abs(m.mae_pct - 0.5) < 1e-9 &&
              std::abs(m.rmse_pct - 0.7071067811865476) < 1e-9);
  }
  {
    NormStats st;
    st.current_min = -3.2;
    st.current_max = 1.7;
    st.voltage_min = 2.5;
    st.voltage_max = 4.2;
    SampleSeries s;
    Rng rng(7);
    s.t = VecXd::LinSpaced(100, 0, 99);
    s.current.resize(100);
    s.voltage.resize(100);
    for (Index k = 0; k < 100; ++k) {
      s.current[k] = rng.uniform(st.current_min, st.current_max);
      s.voltage[k] = rng.uniform(st.voltage_min, st.voltage_max);
    }
    const SampleSeries n = normalize(s, st);
    const double di = st.current_max - st.current_min;
    const double dv = st.voltage_max - st.voltage_min;
    bool ok = true;
    for (Index k = 0; k < 100 && ok; ++k) {
      const double ci = st.current_min + (n.current[k] + 1) * di / 2;
      const double cv = st.voltage_min + (n.voltage[k] + 1) * dv / 2;
      ok = std::abs(ci - s.current[k]) < 1e-12 &&
           std::abs(cv - s.voltage[k]) < 1e-12 &&
           std::abs(n.current[k]) <= 1 + 1e-12 && std::abs(n.voltage[k]) <= 1 + 1e-12;
    }
    check("normalization inverse", ok);
  }
  {
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 3 && ok; ++seed) {
      Rng rng(seed);
      NarxConfig cfg;
      cfg.hidden_neurons = 4;
      NarxNetwork net = make_network(cfg, rng);
      MatXd row(1, cfg.regressor_len());
      for (int j = 0; j < cfg.regressor_len(); ++j)
        row(0, j) = rng.uniform(-1, 1);
      VecXd target(1);
      target << rng.uniform();
      const MatXd jac = lm_jacobian(net, row);
      VecXd w = flatten_weights(net);
      const double h = 1e-6;
      for (Index p = 0; p < w.size() && ok; ++p) {
        VecXd wp = w, wm = w;
        wp[p] += h;
        wm[p] -= h;
        NarxNetwork tmp = net;
        set_weights(tmp, wp);
        const double ep = target[0] - forward(tmp, VecXd(row.row(0)));
        set_weights(tmp, wm);
        const double em = target[0] - forward(tmp, VecXd(row.row(0)));
        const double fd = (ep - em) / (2 * h);
        ok = std::abs(fd - jac(0, p)) <=
             1e-5 * std::max(1.0, std::abs(jac(0, p)));
      }
    }
    check("jacobian finite differences", ok);
  }
  {
    ScParams sc;
    sc.capacitance_f = 5.0;
    sc.esr = 0.05;
    CccvSpec spec;
    spec.cc_current_a = 0.5;
    spec.cc_max_s = 15;
    spec.rest_s = 5;
    spec.discharge_current_a = 0.5;
    spec.discharge_max_s = 12;
    spec.cycles = 2;
    SimOptions opts;
    opts.soc_init = 0.4;
    const SimResult res = simulate_sc(sc, profile_cccv(spec), opts);
    const CoulombResult cc =
        coulomb_count(res.series, {sc.capacity_c(), opts.soc_init});
    check("simulator matches coulomb counter",
          (cc.soc - res.series.soc).cwiseAbs().maxCoeff() <= 1e-9);
  }
  {
    Rng rng(11);
    NarxConfig cfg;
    cfg.hidden_neurons = 5;
    NarxNetwork net = make_network(cfg, rng);
    net.hidden_weights.leftCols(2).setZero();  // feedback slots dead
    SampleSeries s;
    const Index n = 40;
    s.t.setLinSpaced(n, 0, double(n - 1));
    s.current.resize(n);
    s.voltage.resize(n);
    s.soc.resize(n);
    for (Index k = 0; k < n; ++k) {
      s.current[k] = rng.uniform(-1, 1);
      s.voltage[k] = rng.uniform(0.1, 1);
      s.soc[k] = rng.uniform();
    }
    ClosedLoopState st;
    st.soc0 = 0.3;
    const VecXd closed = predict_closed_loop(net, s, st);
    const VecXd open = predict_open_loop(net, s);
    bool ok = true;
    for (Index k = cfg.max_lag(); k < n; ++k)
      ok = ok && closed[k] == open[k];
    check("feedback-free closed loop equals open loop", ok);
  }
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + ": " + ec.message());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"soc estimation toolkit for hybrid battery/supercapacitor packs"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--preset", sim_args.preset, "preset name")->required();
  sim->add_option("--profile", sim_args.profile, "profile within the preset");
  sim->add_option("--presets", sim_args.presets_dir, "preset directory");
  sim->add_option("--out", sim_args.out, "output directory");
  auto* seed_opt = sim->add_option("--seed", sim_args.seed, "noise seed");
  sim->add_option("--dt", sim_args.dt, "sampling interval override, seconds");
  sim->add_option("--sigma-v", sim_args.sigma_v, "voltage noise sigma, volts");
  sim->add_option("--sigma-i", sim_args.sigma_i, "current noise sigma, amps");
  sim->add_flag("--noiseless", sim_args.noiseless, "disable sensor noise");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "fit an estimator to a dataset");
  train->add_option("--data", train_args.data, "input CSV")->required();
  train->add_option("--device", train_args.device, "battery or supercapacitor");
  train->add_option("--model", train_args.model, "narx or ann");
  train->add_option("--out", train_args.out, "output directory");
  train->add_option("--seed", train_args.seed, "weight initialization seed");
  train->add_option("--epochs", train_args.epochs, "epoch budget");
  train->add_option("--hidden-neurons", train_args.hidden, "hidden layer width");
  train->add_option("--capacity-ah", train_args.capacity_ah,
                    "nominal capacity for coulomb-counted ground truth");
  train->add_option("--soc-init", train_args.soc_init,
                    "initial soc for coulomb counting");

  EstimateArgs est_args;
  CLI::App* est = app.add_subcommand("estimate", "run closed-loop estimation");
  est->add_option("--data", est_args.data, "input CSV")->required();
  est->add_option("--model-file", est_args.model_file, "bundle JSON")
      ->required();
  est->add_option("--out", est_args.out, "output directory");
  auto* soc0_opt = est->add_option("--soc0", est_args.soc0,
                                   "bootstrap soc fraction in [0, 1]");

  CompareArgs cmp_args;
  CLI::App* cmp = app.add_subcommand(
      "compare", "train and score the narx and ann models side by side");
  cmp->add_option("--preset", cmp_args.preset, "preset name")->required();
  cmp->add_option("--profile", cmp_args.profile, "profile within the preset");
  cmp->add_option("--presets", cmp_args.presets_dir, "preset directory");
  cmp->add_option("--out", cmp_args.out, "output directory");
  cmp->add_option("--seed", cmp_args.seed, "experiment seed");
  cmp->add_option("--epochs", cmp_args.epochs, "epoch budget");
  cmp->add_option("--hidden-neurons", cmp_args.hidden, "hidden layer width");

  CLI::App* self = app.add_subcommand("selftest", "run built-in quick checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  sim_args.seed_set = seed_opt->count() > 0;
  est_args.soc0_set = soc0_opt->count() > 0;

  try {
    if (*sim) return cmd_simulate(sim_args);
    if (*train) return cmd_train(train_args);
    if (*est) return cmd_estimate(est_args);
    if (*cmp) return cmd_compare(cmp_args);
    if (*self) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
  return kExitUsage;
}

}  // namespace hess
