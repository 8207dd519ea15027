#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapfilter {

/// Validation failures: malformed inputs, off-lattice values, class/geometry
/// violations. Maps to CLI exit code 1.
class validation_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failures: non-convergence, loss of positive definiteness after
/// the regularization fallback, divergence. Maps to CLI exit code 2.
class numeric_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failures while writing run artifacts. Maps to CLI exit code 3.
class io_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pointwise floor applied to f+g before it is used as a denominator.
inline constexpr double density_floor = 1e-12;

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Nearest lattice index of t on a grid of step dt. Off-lattice values are
/// rejected, not rounded.
inline std::int64_t lattice_index(double t, double dt, const char* what) {
  const double q = t / dt;
  const double r = std::nearbyint(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
    throw validation_error(std::string(what) + " = " + std::to_string(t) +
                           " is not a multiple of the grid step " + std::to_string(dt));
  }
  return static_cast<std::int64_t>(r);
}

/// cos/sin of 2*pi*r/m for r = 0..m-1. All lattice trigonometry goes through
/// this table with arguments reduced mod m, so products like cos(lambda_k t_j)
/// are evaluated at full precision regardless of |k*j|.
class TrigTable {
 public:
  explicit TrigTable(std::int64_t m) : m_(m), cos_(m), sin_(m) {
    for (std::int64_t r = 0; r < m; ++r) {
      const double th = 2.0 * pi * static_cast<double>(r) / static_cast<double>(m);
      cos_[static_cast<std::size_t>(r)] = std::cos(th);
      sin_[static_cast<std::size_t>(r)] = std::sin(th);
    }
  }

  std::int64_t modulus() const { return m_; }

  // cos(2*pi*p/m), sin(2*pi*p/m) for any signed p
  double cosp(std::int64_t p) const { return cos_[idx(p)]; }
  double sinp(std::int64_t p) const { return sin_[idx(p)]; }

 private:
  std::size_t idx(std::int64_t p) const {
    std::int64_t r = p % m_;
    if (r < 0) r += m_;
    return static_cast<std::size_t>(r);
  }
  std::int64_t m_;
  std::vector<double> cos_, sin_;
};

}  // namespace gapfilter
