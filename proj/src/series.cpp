#include "hess/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hess {
namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view tok, const std::string& origin, size_t line) {
  const char* b = tok.data();
  const char* e = tok.data() + tok.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  double v = 0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw IoError(origin + ":" + std::to_string(line) + ": bad number '" +
                  std::string(tok) + "'");
  return v;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

double SampleSeries::dt() const {
  if (t.size() < 2) throw SeriesTooShort("dt() needs at least two samples");
  return (t[t.size() - 1] - t[0]) / static_cast<double>(t.size() - 1);
}

SampleSeries SampleSeries::slice(Index begin, Index end) const {
  if (begin < 0 || end > size() || begin >= end)
    throw DimensionMismatch("slice [" + std::to_string(begin) + ", " +
                            std::to_string(end) + ") out of range");
  SampleSeries out;
  out.t = t.segment(begin, end - begin);
  out.current = current.segment(begin, end - begin);
  out.voltage = voltage.segment(begin, end - begin);
  if (has_soc()) out.soc = soc.segment(begin, end - begin);
  out.device = device;
  out.meta = meta;
  return out;
}

void validate(const SampleSeries& s) {
  const Index n = s.t.size();
  if (n < 2) throw SeriesTooShort("series needs at least two samples");
  if (s.current.size() != n || s.voltage.size() != n)
    throw LengthMismatch("channel lengths differ");
  if (s.has_soc() && s.soc.size() != n)
    throw LengthMismatch("soc length differs from timeline");
  const double step = (s.t[n - 1] - s.t[0]) / static_cast<double>(n - 1);
  if (!(step > 0)) throw InvalidSeries("timeline not increasing");
  for (Index k = 1; k < n; ++k) {
    const double d = s.t[k] - s.t[k - 1];
    if (!(d > 0)) throw InvalidSeries("timeline not strictly increasing");
    if (std::abs(d - step) > 1e-9 * step)
      throw InvalidSeries("sampling interval not uniform");
  }
}

void validate_physical(const SampleSeries& s) {
  for (Index k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s.current[k]) || !std::isfinite(s.voltage[k]))
      throw InvalidSeries("non-finite sample at index " + std::to_string(k));
    if (!(s.voltage[k] > 0))
      throw InvalidSeries("non-positive voltage at index " + std::to_string(k));
    if (s.has_soc() && !std::isfinite(s.soc[k]))
      throw InvalidSeries("non-finite soc at index " + std::to_string(k));
  }
}

SampleSeries read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_csv(in, path);
}

SampleSeries read_csv(std::istream& in, const std::string& origin) {
  std::string line;
  size_t lineno = 0;
  bool header_seen = false;
  bool with_soc = false;
  SampleSeries s;
  std::vector<double> t, i, v, soc;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view view(line);
    size_t hash = view.find('#');
    if (hash != std::string_view::npos) {
      if (trim(view.substr(0, hash)).empty()) {
        // full-line comment; "# key: value" feeds metadata
        std::string body = trim(view.substr(hash + 1));
        size_t colon = body.find(':');
        if (colon != std::string::npos) {
          std::string key = trim(body.substr(0, colon));
          std::string val = trim(body.substr(colon + 1));
          if (!key.empty() && key.find(' ') == std::string::npos) {
            if (key == "device")
              s.device = device_from_string(val);
            else
              s.meta[key] = val;
          }
        }
        continue;
      }
      view = view.substr(0, hash);
    }
    if (trim(view).empty()) continue;

    auto fields = split_fields(view);
    if (!header_seen) {
      if (fields.size() < 3 || trim(fields[0]) != "t" ||
          trim(fields[1]) != "current" || trim(fields[2]) != "voltage")
        throw IoError(origin + ": expected header t,current,voltage[,soc]");
      if (fields.size() == 4 && trim(fields[3]) == "soc")
        with_soc = true;
      else if (fields.size() != 3)
        throw IoError(origin + ": expected header t,current,voltage[,soc]");
      header_seen = true;
      continue;
    }
    const size_t want = with_soc ? 4 : 3;
    if (fields.size() != want)
      throw IoError(origin + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(want) + " fields");
    t.push_back(parse_double(fields[0], origin, lineno));
    i.push_back(parse_double(fields[1], origin, lineno));
    v.push_back(parse_double(fields[2], origin, lineno));
    if (with_soc) soc.push_back(parse_double(fields[3], origin, lineno));
  }
  if (!header_seen) throw IoError(origin + ": empty file");

  const auto n = static_cast<Index>(t.size());
  s.t = Eigen::Map<const VecXd>(t.data(), n);
  s.current = Eigen::Map<const VecXd>(i.data(), n);
  s.voltage = Eigen::Map<const VecXd>(v.data(), n);
  if (with_soc) s.soc = Eigen::Map<const VecXd>(soc.data(), n);
  validate(s);
  return s;
}

void write_csv(const SampleSeries& s, std::ostream& out,
               const std::vector<std::string>* row_notes) {
  if (row_notes && static_cast<Index>(row_notes->size()) != s.size())
    throw LengthMismatch("row note count differs from series length");
  out << "# device: " << to_string(s.device) << "\n";
  for (const auto& [k, v] : s.meta) out << "# " << k << ": " << v << "\n";
  out << "t,current,voltage";
  if (s.has_soc()) out << ",soc";
  out << "\n";
  for (Index k = 0; k < s.size(); ++k) {
    out << fmt(s.t[k]) << ',' << fmt(s.current[k]) << ',' << fmt(s.voltage[k]);
    if (s.has_soc()) out << ',' << fmt(s.soc[k]);
    if (row_notes && !(*row_notes)[static_cast<size_t>(k)].empty())
      out << " # " << (*row_notes)[static_cast<size_t>(k)];
    out << "\n";
  }
}

std::string to_csv(const SampleSeries& s,
                   const std::vector<std::string>* row_notes) {
  std::ostringstream os;
  write_csv(s, os, row_notes);
  return os.str();
}

}  // namespace hess
