#include "hess/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <filesystem>
#include <fstream>

namespace hess {
namespace {

struct Run {
  Phase phase;
  Index begin = 0;
  Index count = 0;
};

std::vector<Run> group_runs(const CurrentProfile& p) {
  std::vector<Run> runs;
  for (Index k = 0; k < p.samples.size(); ++k) {
    if (runs.empty() || runs.back().phase != p.phase_labels[size_t(k)])
      runs.push_back({p.phase_labels[size_t(k)], k, 0});
    ++runs.back().count;
  }
  return runs;
}

void check_soc_init(double soc_init) {
  if (!(soc_init >= 0.0 && soc_init <= 1.0))
    throw InvalidSoc0("initial soc must lie in [0, 1]");
}

// Terminal voltage at the coupled soc' = A - B*i must equal vcv. V(i) is
// strictly decreasing in i, so the root is unique; scan the OCV pieces
// (including the clamped flats past the outer knots) for the consistent one.
double solve_cv_current(const EcmBatteryParams& p, double a, double b,
                        double v1, double vcv) {
  const OcvCurve& ocv = p.ocv;
  const Index nseg = ocv.segment_count();
  {
    const double i = (ocv.volt_knots[nseg] - v1 - vcv) / p.r0;
    if (a - b * i >= ocv.soc_knots[nseg]) return i;
  }
  for (Index s = nseg - 1; s >= 0; --s) {
    const double m = (ocv.volt_knots[s + 1] - ocv.volt_knots[s]) /
                     (ocv.soc_knots[s + 1] - ocv.soc_knots[s]);
    const double c = ocv.volt_knots[s] - m * ocv.soc_knots[s];
    const double i = (m * a + c - v1 - vcv) / (p.r0 + m * b);
    const double soc = a - b * i;
    if (soc >= ocv.soc_knots[s] - 1e-12 && soc <= ocv.soc_knots[s + 1] + 1e-12)
      return i;
  }
  return (ocv.volt_knots[0] - v1 - vcv) / p.r0;
}

SimResult assemble(std::vector<double> t, std::vector<double> i,
                   std::vector<double> v, std::vector<double> soc,
                   std::vector<std::string> notes, double dt, Device device,
                   const std::string& temperature, const SimOptions& opts) {
  if (soc.size() < 2)
    throw SeriesTooShort("cutoffs left fewer than two samples");
  const auto n = static_cast<Index>(soc.size());
  for (Index k = 0; k < n; ++k) t[size_t(k)] = double(k) * dt;
  if (opts.sigma_i > 0 || opts.sigma_v > 0) {
    Rng rng(opts.noise_seed);
    for (Index k = 0; k < n; ++k) {
      i[size_t(k)] += rng.normal(opts.sigma_i);
      v[size_t(k)] += rng.normal(opts.sigma_v);
    }
  }
  SimResult out;
  out.series.t = Eigen::Map<const VecXd>(t.data(), n);
  out.series.current = Eigen::Map<const VecXd>(i.data(), n);
  out.series.voltage = Eigen::Map<const VecXd>(v.data(), n);
  out.series.soc = Eigen::Map<const VecXd>(soc.data(), n);
  out.series.device = device;
  out.series.meta["temperature"] = temperature;
  out.notes = std::move(notes);
  return out;
}

}  // namespace

double OcvCurve::operator()(double soc) const {
  const Index n = soc_knots.size();
  if (soc <= soc_knots[0]) return volt_knots[0];
  if (soc >= soc_knots[n - 1]) return volt_knots[n - 1];
  const Index s = segment_of(soc);
  const double w =
      (soc - soc_knots[s]) / (soc_knots[s + 1] - soc_knots[s]);
  return volt_knots[s] + w * (volt_knots[s + 1] - volt_knots[s]);
}

Index OcvCurve::segment_of(double soc) const {
  Index s = 0;
  while (s + 2 < soc_knots.size() && soc >= soc_knots[s + 1]) ++s;
  return s;
}

void validate(const OcvCurve& c) {
  if (c.soc_knots.size() != c.volt_knots.size() || c.soc_knots.size() < 2)
    throw InvalidSpec("ocv curve needs matching knot arrays, length >= 2");
  for (Index k = 1; k < c.soc_knots.size(); ++k) {
    if (!(c.soc_knots[k] > c.soc_knots[k - 1]))
      throw InvalidSpec("ocv soc knots must be strictly increasing");
    if (!(c.volt_knots[k] > c.volt_knots[k - 1]))
      throw InvalidSpec("ocv voltage knots must be strictly increasing");
  }
}

OcvCurve default_liion_ocv() {
  OcvCurve c;
  c.soc_knots.resize(8);
  c.volt_knots.resize(8);
  c.soc_knots << 0.0, 0.05, 0.2, 0.4, 0.6, 0.8, 0.95, 1.0;
  c.volt_knots << 2.5, 3.0, 3.45, 3.6, 3.7, 3.85, 4.05, 4.2;
  return c;
}

OcvCurve load_ocv_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::vector<double> soc, volt;
  bool header = false;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "soc,voltage")
        throw IoError(path + ": expected header soc,voltage");
      header = true;
      continue;
    }
    const size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 2 fields");
    soc.push_back(std::stod(line.substr(0, comma)));
    volt.push_back(std::stod(line.substr(comma + 1)));
  }
  OcvCurve c;
  c.soc_knots = Eigen::Map<const VecXd>(soc.data(), Index(soc.size()));
  c.volt_knots = Eigen::Map<const VecXd>(volt.data(), Index(volt.size()));
  validate(c);
  return c;
}

void validate(const EcmBatteryParams& p) {
  if (!(p.capacity_ah > 0)) throw InvalidSpec("capacity must be positive");
  if (!(p.r0 > 0) || !(p.r1 > 0) || !(p.c1 > 0))
    throw InvalidSpec("circuit elements must be positive");
  if (!(p.v_min < p.v_max)) throw InvalidSpec("need v_min < v_max");
  validate(p.ocv);
}

void validate(const ScParams& p) {
  if (!(p.capacitance_f > 0)) throw InvalidSpec("capacitance must be positive");
  if (!(p.esr >= 0)) throw InvalidSpec("esr must be non-negative");
  if (!(p.leak_r > 0)) throw InvalidSpec("leakage resistance must be positive");
  if (!(p.v_rated > 0)) throw InvalidSpec("rated voltage must be positive");
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::CcCharge: return "cc_charge";
    case Phase::CvCharge: return "cv_charge";
    case Phase::Rest: return "rest";
    case Phase::Discharge: return "discharge";
    case Phase::Drive: return "drive";
  }
  return "unknown";
}

void validate(const CurrentProfile& p) {
  if (!(p.dt > 0)) throw InvalidSpec("profile dt must be positive");
  if (p.samples.size() == 0) throw InvalidSpec("profile is empty");
  if (static_cast<Index>(p.phase_labels.size()) != p.samples.size())
    throw LengthMismatch("one phase label per sample required");
  if (!p.samples.allFinite()) throw InvalidSpec("profile currents not finite");
  if (p.cv_term_current_a < 0 || p.cv_voltage < 0)
    throw InvalidSpec("cv parameters must be non-negative");
}

CurrentProfile profile_cccv(const CccvSpec& spec) {
  if (!(spec.dt > 0)) throw InvalidSpec("dt must be positive");
  if (spec.cycles < 1) throw InvalidSpec("need at least one cycle");
  if (spec.cc_current_a < 0 || spec.discharge_current_a < 0)
    throw InvalidSpec("leg currents are magnitudes");

  std::vector<double> i;
  std::vector<Phase> ph;
  auto leg = [&](Phase phase, double amps, double secs) {
    const auto n = static_cast<Index>(std::llround(secs / spec.dt));
    for (Index k = 0; k < n; ++k) {
      i.push_back(amps);
      ph.push_back(phase);
    }
  };
  for (int c = 0; c < spec.cycles; ++c) {
    if (spec.cc_current_a > 0 && spec.cc_max_s > 0)
      leg(Phase::CcCharge, -spec.cc_current_a, spec.cc_max_s);
    if (spec.cc_current_a > 0 && spec.cv_max_s > 0)
      leg(Phase::CvCharge, 0.0, spec.cv_max_s);
    if (spec.rest_s > 0) leg(Phase::Rest, 0.0, spec.rest_s);
    if (spec.discharge_current_a > 0 && spec.discharge_max_s > 0)
      leg(Phase::Discharge, spec.discharge_current_a, spec.discharge_max_s);
    if (spec.tail_rest_s > 0) leg(Phase::Rest, 0.0, spec.tail_rest_s);
  }
  if (i.empty()) throw InvalidSpec("cccv spec describes no samples");

  CurrentProfile out;
  out.dt = spec.dt;
  out.samples = Eigen::Map<const VecXd>(i.data(), Index(i.size()));
  out.phase_labels = std::move(ph);
  out.cv_voltage = spec.cv_voltage;
  out.cv_term_current_a = spec.cv_term_current_a;
  return out;
}

CurrentProfile profile_udds_like(std::uint64_t seed, double duration_s,
                                 double peak_current_a, double dt) {
  if (!(dt > 0) || !(duration_s >= 60))
    throw InvalidSpec("drive profiles need dt > 0 and at least 60 s");
  if (!(peak_current_a > 0)) throw InvalidSpec("peak current must be positive");

  // integer-second breakpoints of a piecewise-linear envelope; the shape is
  // therefore independent of the sampling interval
  Rng rng(seed);
  std::vector<std::pair<double, double>> bp{{0.0, 0.0}};
  double tc = 2.0;  // short initial idle
  bp.emplace_back(tc, 0.0);

  // trapezoidal burst; returns the charge it moves
  auto burst = [&](double amp_signed, double hold) {
    const double up = 2.0 + std::floor(rng.uniform() * 3.0);
    const double down = 2.0 + std::floor(rng.uniform() * 3.0);
    bp.emplace_back(tc + up, amp_signed);
    bp.emplace_back(tc + up + hold, amp_signed);
    bp.emplace_back(tc + up + hold + down, 0.0);
    tc += up + hold + down;
    return std::abs(amp_signed) * (hold + (up + down) / 2.0);
  };

  // Charge-sustaining traffic: every discharge burst is answered by a regen
  // burst of comparable charge. A slow modulation of the exchange ratio
  // sweeps the state of charge through a band and back, the way route grade
  // does, so later stretches revisit earlier operating points.
  while (tc < duration_s + 2.0) {
    if (rng.uniform() < 0.22) {  // idle dwell between pairs
      tc += 2.0 + std::floor(rng.uniform() * 7.0);
      bp.emplace_back(tc, 0.0);
      continue;
    }
    const double amp_d = peak_current_a * rng.uniform(0.3, 0.75);
    const double hold_d = 3.0 + std::floor(rng.uniform() * 10.0);
    const double moved = burst(amp_d, hold_d);

    if (rng.uniform() < 0.3) {  // coast before the regen leg
      tc += 2.0 + std::floor(rng.uniform() * 5.0);
      bp.emplace_back(tc, 0.0);
    }
    const double sweep =
        std::sin(2.0 * std::numbers::pi * 3.0 * tc / duration_s);
    const double target = moved * (1.0 + 0.35 * sweep) * rng.uniform(0.9, 1.1);
    const double amp_r = peak_current_a * rng.uniform(0.35, 0.9);
    const double hold_r =
        std::clamp(std::round(target / amp_r - 2.5), 2.0, 30.0);
    burst(-amp_r, hold_r);
  }

  const auto n = static_cast<Index>(std::llround(duration_s / dt));
  CurrentProfile out;
  out.dt = dt;
  out.samples.resize(n);
  out.phase_labels.assign(size_t(n), Phase::Drive);
  size_t seg = 0;
  for (Index k = 0; k < n; ++k) {
    const double t = double(k) * dt;
    while (seg + 2 < bp.size() && t >= bp[seg + 1].first) ++seg;
    const auto& [t0, v0] = bp[seg];
    const auto& [t1, v1] = bp[seg + 1];
    double v = t >= t1 ? v1 : v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    out.samples[k] = std::clamp(v, -peak_current_a, peak_current_a);
  }
  return out;
}

SimResult simulate_battery(const EcmBatteryParams& p,
                           const CurrentProfile& profile,
                           const SimOptions& opts) {
  validate(p);
  validate(profile);
  check_soc_init(opts.soc_init);
  const double voc0 = p.ocv(opts.soc_init);
  if (voc0 < p.v_min || voc0 > p.v_max)
    throw CutoffAtStart("rest voltage at the initial soc is outside cutoffs");

  const double dt = profile.dt;
  const double cn = p.capacity_c();
  const double vcv = profile.cv_voltage > 0 ? profile.cv_voltage : p.v_max;
  std::vector<double> ti, ii, vi, si;
  std::vector<std::string> notes;
  double soc_prev = 0, i_prev = 0, v1 = 0;
  bool first = true;

  for (const Run& run : group_runs(profile)) {
    for (Index j = 0; j < run.count; ++j) {
      double a, b, v1_now;
      if (first) {
        a = opts.soc_init;
        b = 0.0;
        v1_now = 0.0;
      } else {
        v1_now = v1 + dt * (i_prev / p.c1 - v1 / (p.r1 * p.c1));
        a = soc_prev - dt * i_prev / (2.0 * cn);
        b = dt / (2.0 * cn);
      }
      const double i_now = run.phase == Phase::CvCharge
                               ? solve_cv_current(p, a, b, v1_now, vcv)
                               : profile.samples[run.begin + j];
      const double soc_now = a - b * i_now;
      const double v_now = p.ocv(soc_now) - i_now * p.r0 - v1_now;

      bool halt = false;
      switch (run.phase) {
        case Phase::CcCharge: halt = v_now >= p.v_max; break;
        case Phase::CvCharge:
          halt = profile.cv_term_current_a > 0 &&
                 std::abs(i_now) <= profile.cv_term_current_a;
          break;
        case Phase::Discharge: halt = v_now <= p.v_min; break;
        case Phase::Drive: halt = v_now <= p.v_min || v_now >= p.v_max; break;
        case Phase::Rest: break;
      }
      if (halt) break;

      ti.push_back(0);
      ii.push_back(i_now);
      vi.push_back(v_now);
      si.push_back(soc_now);
      notes.push_back(to_string(run.phase));
      v1 = v1_now;
      soc_prev = soc_now;
      i_prev = i_now;
      first = false;
    }
  }
  return assemble(std::move(ti), std::move(ii), std::move(vi), std::move(si),
                  std::move(notes), dt, Device::Battery, p.temperature_tag,
                  opts);
}

SimResult simulate_sc(const ScParams& p, const CurrentProfile& profile,
                      const SimOptions& opts) {
  validate(p);
  validate(profile);
  check_soc_init(opts.soc_init);

  const double dt = profile.dt;
  const double c = p.capacitance_f;
  const double vcv = profile.cv_voltage > 0 ? profile.cv_voltage : p.v_rated;
  std::vector<double> ti, ii, vi, si;
  std::vector<std::string> notes;
  double q_prev = 0, i_prev = 0;
  bool first = true;

  for (const Run& run : group_runs(profile)) {
    for (Index j = 0; j < run.count; ++j) {
      double aq, half;
      if (first) {
        aq = opts.soc_init * c * p.v_rated;
        half = 0.0;
      } else {
        aq = q_prev - (dt / 2.0) * i_prev - dt * (q_prev / c) / p.leak_r;
        half = dt / 2.0;
      }
      const double i_now = run.phase == Phase::CvCharge
                               ? (aq / c - vcv) / (p.esr + half / c)
                               : profile.samples[run.begin + j];
      const double q_now = aq - half * i_now;
      const double v_now = q_now / c - i_now * p.esr;

      bool halt = false;
      switch (run.phase) {
        case Phase::CcCharge: halt = v_now >= p.v_rated; break;
        case Phase::CvCharge:
          halt = profile.cv_term_current_a > 0 &&
                 std::abs(i_now) <= profile.cv_term_current_a;
          break;
        case Phase::Discharge: halt = v_now <= 0.0; break;
        case Phase::Drive: halt = v_now <= 0.0 || v_now >= p.v_rated; break;
        case Phase::Rest: break;
      }
      if (halt) break;

      ti.push_back(0);
      ii.push_back(i_now);
      vi.push_back(v_now);
      si.push_back(q_now / (c * p.v_rated));
      notes.push_back(to_string(run.phase));
      q_prev = q_now;
      i_prev = i_now;
      first = false;
    }
  }
  return assemble(std::move(ti), std::move(ii), std::move(vi), std::move(si),
                  std::move(notes), dt, Device::Supercapacitor,
                  p.temperature_tag, opts);
}

std::vector<std::string> list_presets(const std::string& dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec))
    if (e.path().extension() == ".json")
      names.push_back(e.path().stem().string());
  if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
  std::sort(names.begin(), names.end());
  return names;
}

namespace {

CccvSpec cccv_from_json(const nlohmann::json& j) {
  CccvSpec s;
  s.dt = j.value("dt", 1.0);
  s.cc_current_a = j.value("cc_current_a", 0.0);
  s.cc_max_s = j.value("cc_max_s", 0.0);
  s.cv_voltage = j.value("cv_voltage", 0.0);
  s.cv_term_current_a = j.value("cv_term_current_a", 0.0);
  s.cv_max_s = j.value("cv_max_s", 0.0);
  s.rest_s = j.value("rest_s", 0.0);
  s.discharge_current_a = j.value("discharge_current_a", 0.0);
  s.discharge_max_s = j.value("discharge_max_s", 0.0);
  s.tail_rest_s = j.value("tail_rest_s", 0.0);
  s.cycles = j.value("cycles", 1);
  return s;
}

}  // namespace

Preset load_preset(const std::string& dir, const std::string& name) {
  const std::filesystem::path path =
      std::filesystem::path(dir) / (name + ".json");
  std::ifstream in(path);
  if (!in) throw UnknownPreset("no preset file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }

  Preset out;
  out.name = j.value("name", name);
  if (j.contains("noise")) {
    out.sigma_v = j["noise"].value("sigma_v", 0.0);
    out.sigma_i = j["noise"].value("sigma_i", 0.0);
    out.noise_seed = j["noise"].value("seed", std::uint64_t(0));
  }
  if (!j.contains("devices") || !j["devices"].is_array() ||
      j["devices"].empty())
    throw InvalidSpec(path.string() + ": needs a devices array");

  for (const auto& jd : j["devices"]) {
    PresetEntry e;
    e.label = jd.value("label", "");
    if (jd.contains("battery")) {
      e.device = Device::Battery;
      const auto& jb = jd["battery"];
      e.battery.capacity_ah = jb.at("capacity_ah").get<double>();
      e.battery.r0 = jb.at("r0").get<double>();
      e.battery.r1 = jb.at("r1").get<double>();
      e.battery.c1 = jb.at("c1").get<double>();
      e.battery.v_min = jb.at("v_min").get<double>();
      e.battery.v_max = jb.at("v_max").get<double>();
      e.battery.temperature_tag = jb.value("temperature_tag", "25C");
      if (jb.contains("ocv_file"))
        e.battery.ocv = load_ocv_csv(
            (std::filesystem::path(dir) / jb["ocv_file"].get<std::string>())
                .string());
      else
        e.battery.ocv = default_liion_ocv();
      validate(e.battery);
    } else if (jd.contains("supercapacitor")) {
      e.device = Device::Supercapacitor;
      const auto& js = jd["supercapacitor"];
      e.sc.capacitance_f = js.at("capacitance_f").get<double>();
      e.sc.esr = js.at("esr").get<double>();
      e.sc.leak_r = js.value("leak_r", 1e15);
      e.sc.v_rated = js.at("v_rated").get<double>();
      e.sc.temperature_tag = js.value("temperature_tag", "25C");
      validate(e.sc);
    } else {
      throw InvalidSpec(path.string() +
                        ": device entry needs battery or supercapacitor");
    }
    if (!jd.contains("profiles") || jd["profiles"].empty())
      throw InvalidSpec(path.string() + ": device entry has no profiles");
    for (const auto& [pname, jp] : jd["profiles"].items()) {
      ProfileSpec ps;
      ps.type = jp.at("type").get<std::string>();
      ps.soc_init = jp.value("soc_init", 1.0);
      if (ps.type == "cccv") {
        ps.cccv = cccv_from_json(jp);
      } else if (ps.type == "udds") {
        ps.udds_duration_s = jp.at("duration_s").get<double>();
        ps.udds_peak_a = jp.at("peak_current_a").get<double>();
        ps.udds_seed = jp.value("seed", std::uint64_t(0));
      } else {
        throw InvalidSpec(path.string() + ": unknown profile type " + ps.type);
      }
      e.profiles[pname] = ps;
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

CurrentProfile build_profile(const ProfileSpec& spec, double dt_override) {
  if (spec.type == "cccv") {
    CccvSpec c = spec.cccv;
    if (dt_override > 0) c.dt = dt_override;
    return profile_cccv(c);
  }
  if (spec.type == "udds")
    return profile_udds_like(spec.udds_seed, spec.udds_duration_s,
                             spec.udds_peak_a,
                             dt_override > 0 ? dt_override : 1.0);
  throw InvalidSpec("unknown profile type " + spec.type);
}

SimResult run_preset_entry(const PresetEntry& entry, const ProfileSpec& spec,
                           const SimOptions& opts, double dt_override) {
  const CurrentProfile profile = build_profile(spec, dt_override);
  SimOptions o = opts;
  o.soc_init = spec.soc_init;
  return entry.device == Device::Battery
             ? simulate_battery(entry.battery, profile, o)
             : simulate_sc(entry.sc, profile, o);
}

}  // namespace hess
