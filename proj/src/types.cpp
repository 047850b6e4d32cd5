#include "hess/types.hpp"

#include <cmath>

namespace hess {

std::string to_string(Device d) {
  return d == Device::Battery ? "battery" : "supercapacitor";
}

std::string to_string(Regime r) {
  return r == Regime::Charge ? "charge" : "discharge";
}

Device device_from_string(const std::string& s) {
  if (s == "battery") return Device::Battery;
  if (s == "supercapacitor" || s == "sc") return Device::Supercapacitor;
  throw InvalidConfig("unknown device: " + s);
}

double Rng::normal(double sigma) {
  if (has_spare_) {
    has_spare_ = false;
    return spare_ * sigma;
  }
  double u, v, s;
  do {
    u = uniform(-1.0, 1.0);
    v = uniform(-1.0, 1.0);
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m * sigma;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string checksum_hex(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a64(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace hess
