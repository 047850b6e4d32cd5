#pragma once

// Equivalent-circuit simulators used to manufacture ground-truth datasets:
// a first-order Thevenin battery model and an ideal-capacitor model with
// series resistance and a leakage path. Both integrate with forward Euler
// on the device state while SOC itself accumulates with the same trapezoid
// rule the coulomb counter uses, so the two agree to rounding error when
// leakage is negligible.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hess/series.hpp"
#include "hess/types.hpp"

namespace hess {

// Monotone piecewise-linear open-circuit voltage curve over soc in [0, 1].
struct OcvCurve {
  VecXd soc_knots;
  VecXd volt_knots;

  double operator()(double soc) const;  // clamped outside the knot range
  Index segment_of(double soc) const;
  Index segment_count() const { return soc_knots.size() - 1; }
};

void validate(const OcvCurve& c);
OcvCurve default_liion_ocv();
OcvCurve load_ocv_csv(const std::string& path);

struct EcmBatteryParams {
  double capacity_ah = 7.08;
  double r0 = 0.010;  // ohmic resistance
  double r1 = 0.015;  // polarization branch
  double c1 = 1500.0;
  OcvCurve ocv;
  double v_min = 2.5;
  double v_max = 4.2;
  std::string temperature_tag = "25C";

  double capacity_c() const { return capacity_ah * 3600.0; }
};

struct ScParams {
  double capacitance_f = 25.0;
  double esr = 0.042;
  double leak_r = 1e15;  // effectively lossless by default
  double v_rated = 2.7;
  std::string temperature_tag = "25C";

  // nominal charge between 0 V and rated voltage
  double capacity_c() const { return capacitance_f * v_rated; }
};

void validate(const EcmBatteryParams& p);
void validate(const ScParams& p);

enum class Phase { CcCharge, CvCharge, Rest, Discharge, Drive };
std::string to_string(Phase p);

// Requested excitation. Samples hold the discharge-positive current demand;
// a CvCharge phase ignores them and regulates the terminal voltage instead.
struct CurrentProfile {
  double dt = 1.0;
  VecXd samples;
  std::vector<Phase> phase_labels;       // one per sample
  double cv_voltage = 0.0;               // 0 selects the device charge limit
  double cv_term_current_a = 0.0;        // CV ends once |i| falls to this
};

void validate(const CurrentProfile& p);

struct CccvSpec {
  double dt = 1.0;
  double cc_current_a = 0.0;  // charge magnitude; 0 skips CC and CV
  double cc_max_s = 0.0;
  double cv_voltage = 0.0;
  double cv_term_current_a = 0.0;
  double cv_max_s = 0.0;
  double rest_s = 0.0;
  double discharge_current_a = 0.0;  // 0 skips the discharge leg
  double discharge_max_s = 0.0;
  double tail_rest_s = 0.0;
  int cycles = 1;
};

CurrentProfile profile_cccv(const CccvSpec& spec);

// Drive-style excitation: discharge bursts answered by regen bursts of
// comparable charge, with idle gaps. A slow modulation of the exchange
// ratio sweeps the state of charge through a band and back. The envelope is
// built on integer-second breakpoints, so the same seed yields the same
// physical profile at any dt. Both signs appear within the first minute.
CurrentProfile profile_udds_like(std::uint64_t seed, double duration_s,
                                 double peak_current_a, double dt = 1.0);

struct SimOptions {
  double sigma_v = 0.0;  // gaussian noise on the logged voltage
  double sigma_i = 0.0;  // gaussian noise on the logged current
  std::uint64_t noise_seed = 0;
  double soc_init = 1.0;
};

struct SimResult {
  SampleSeries series;              // t, current, voltage, soc
  std::vector<std::string> notes;   // phase label per sample
};

// A phase halts early when the terminal voltage reaches a cutoff or the CV
// termination current is met; the remaining phases still run and the logged
// timeline stays contiguous. Noise only touches the logged current/voltage,
// never the state or the soc channel.
SimResult simulate_battery(const EcmBatteryParams& p,
                           const CurrentProfile& profile,
                           const SimOptions& opts);
SimResult simulate_sc(const ScParams& p, const CurrentProfile& profile,
                      const SimOptions& opts);

// ---- presets ----

struct ProfileSpec {
  std::string type;  // "cccv" | "udds"
  CccvSpec cccv;
  double udds_duration_s = 0.0;
  double udds_peak_a = 0.0;
  std::uint64_t udds_seed = 0;
  double soc_init = 1.0;
};

struct PresetEntry {
  std::string label;  // file-name component; empty for single-device presets
  Device device = Device::Battery;
  EcmBatteryParams battery;
  ScParams sc;
  std::map<std::string, ProfileSpec> profiles;
};

struct Preset {
  std::string name;
  std::vector<PresetEntry> entries;
  double sigma_v = 0.0;
  double sigma_i = 0.0;
  std::uint64_t noise_seed = 0;
};

std::vector<std::string> list_presets(const std::string& dir);
Preset load_preset(const std::string& dir, const std::string& name);

// Builds the excitation described by a preset profile at an optional dt
// override, then runs the matching simulator.
CurrentProfile build_profile(const ProfileSpec& spec, double dt_override = 0);
SimResult run_preset_entry(const PresetEntry& entry, const ProfileSpec& spec,
                           const SimOptions& opts, double dt_override = 0);

}  // namespace hess
