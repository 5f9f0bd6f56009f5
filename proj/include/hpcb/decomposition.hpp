#pragma once

#include <cmath>
#include <string>

#include "hpcb/multi_index.hpp"

namespace hpcb {

namespace detail {
inline double exp_bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// C-infinity step from 1 (u <= 0) down to 0 (u >= 1).
inline double smooth_step_down(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  const double a = exp_bump(1.0 - u);
  const double b = exp_bump(u);
  return a / (a + b);
}
}  // namespace detail

/// Dyadic decomposition of unity generated by an even cutoff phi_0 with
/// phi_0 = 1 on [-1,1] and phi_0 = 0 outside [-2,2].
class DecompositionOfUnity {
 public:
  enum class Profile {
    Standard,  // transition s(|x|-1)
    Skewed,    // transition s((|x|-1)^2), a second admissible cutoff
  };

  explicit DecompositionOfUnity(Profile profile = Profile::Standard) : profile_(profile) {}

  static DecompositionOfUnity standard() { return DecompositionOfUnity(Profile::Standard); }
  static DecompositionOfUnity skewed() { return DecompositionOfUnity(Profile::Skewed); }

  Profile profile() const { return profile_; }
  std::string name() const { return profile_ == Profile::Standard ? "standard" : "skewed"; }

  double phi0(double x) const {
    const double u = std::abs(x) - 1.0;
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    return detail::smooth_step_down(profile_ == Profile::Standard ? u : u * u);
  }

  /// phi_j(x) = phi_0(2^{-j}x) - phi_0(2^{-j+1}x) for j >= 1.
  double phi(int j, double x) const {
    if (j < 0) return 0.0;
    if (j == 0) return phi0(x);
    return phi0(std::ldexp(x, -j)) - phi0(std::ldexp(x, -j + 1));
  }

  double phi(const MultiIndex& level, const MultiIndex& k) const {
    double v = 1.0;
    for (int i = 0; i < level.dim() && v != 0.0; ++i) v *= phi(level[i], static_cast<double>(k[i]));
    return v;
  }

  /// Smallest and largest nonnegative integer k that can have phi_j(k) != 0.
  static int support_lo(int j) { return j == 0 ? 0 : (1 << (j - 1)); }
  static int support_hi(int j) { return 1 << (j + 1); }

 private:
  Profile profile_;
};

}  // namespace hpcb
