#pragma once

// Shared scalar/matrix aliases, error taxonomy and the deterministic RNG
// used across the toolkit. Everything downstream works in double precision;
// the templated aliases keep signatures generic where it costs nothing.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hess {

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatXd = MatX<double>;
using VecXd = VecX<double>;
using Index = Eigen::Index;

enum class Device { Battery, Supercapacitor };
enum class Regime { Charge, Discharge };

std::string to_string(Device d);
std::string to_string(Regime r);
Device device_from_string(const std::string& s);

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidSeries : Error { using Error::Error; };
struct SeriesTooShort : Error { using Error::Error; };
struct MissingGroundTruth : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InvalidSoc0 : Error { using Error::Error; };
struct TooFewRows : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct TooManyOutliers : Error { using Error::Error; };
struct DegenerateChannel : Error { using Error::Error; };
struct NoSegments : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct ChannelMismatch : Error { using Error::Error; };
struct InvalidSpec : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct CutoffAtStart : Error { using Error::Error; };
struct UnknownPreset : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Deterministic random source. mt19937_64 has a fully specified sequence,
// and the uniform/normal draws below avoid std::*_distribution, whose output
// is implementation defined. Golden files depend on this staying fixed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Marsaglia polar method; one spare kept between calls
  double normal(double sigma = 1.0);
  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// FNV-1a, used to fingerprint weight vectors and output artifacts.
std::uint64_t fnv1a64(std::string_view bytes);
std::string checksum_hex(std::string_view bytes);

}  // namespace hess
