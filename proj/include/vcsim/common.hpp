#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vcsim {

inline constexpr double kKmhPerMps = 3.6;
inline constexpr double kGravity = 9.81;

constexpr double kmh_to_mps(double kmh) { return kmh / kKmhPerMps; }
constexpr double mps_to_kmh(double mps) { return mps * kKmhPerMps; }

constexpr double clamp(double x, double lo, double hi) { return std::max(lo, std::min(hi, x)); }

/// Cubic smoothstep on [0,1].
constexpr double smoothstep(double x) {
  const double t = clamp(x, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

enum class Mode { Original, VelocityControl };

inline const char* to_string(Mode m) { return m == Mode::Original ? "ORIGINAL" : "VC"; }

/// Raised for malformed inputs (configs, anchor sets, out-of-domain arguments).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what) : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace vcsim
