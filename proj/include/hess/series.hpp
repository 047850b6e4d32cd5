#pragma once

// Uniformly sampled measurement log for one device. Sign convention:
// positive current discharges the device. The soc channel is optional and
// carries the fraction of charge remaining in [0, 1] when present.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hess/types.hpp"

namespace hess {

struct SampleSeries {
  VecXd t;        // seconds, uniform spacing
  VecXd current;  // amperes, positive = discharge
  VecXd voltage;  // volts
  VecXd soc;      // optional ground truth; size 0 when absent
  Device device = Device::Battery;
  std::map<std::string, std::string> meta;

  Index size() const { return t.size(); }
  bool has_soc() const { return soc.size() > 0; }
  double dt() const;
  // half-open [begin, end); keeps original timestamps and metadata
  SampleSeries slice(Index begin, Index end) const;
};

// Structural invariants: all channels the same length (>= 2), t strictly
// increasing with constant spacing to 1e-9 relative. Value-level checks
// (finite, positive voltage) are separate because cleansing is allowed to
// repair value defects but never structural ones.
void validate(const SampleSeries& s);
void validate_physical(const SampleSeries& s);

// CSV layout: header "t,current,voltage[,soc]", one row per sample.
// '#' starts a comment that runs to end of line; full-line comments of the
// form "# key: value" round-trip through SampleSeries::meta ("device" is
// mapped onto the device field). Numbers are written with shortest
// round-trip precision, so write -> read is bit exact.
SampleSeries read_csv(const std::string& path);
SampleSeries read_csv(std::istream& in, const std::string& origin);
void write_csv(const SampleSeries& s, std::ostream& out,
               const std::vector<std::string>* row_notes = nullptr);
std::string to_csv(const SampleSeries& s,
                   const std::vector<std::string>* row_notes = nullptr);

}  // namespace hess
