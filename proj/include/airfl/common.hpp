#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace airfl {

using Vec2 = Eigen::Vector2d;

// Single exception type for the whole library. Messages name the offending
// field or dimension so config errors surface verbatim at the CLI.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

// Pairwise summation: order-independent to regrouping within 1e-12 relative,
// used wherever averages must be reproducible across chunked evaluation.
inline double pairwise_sum(const double* data, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_mean(const std::vector<double>& xs) {
  require(!xs.empty(), "pairwise_mean: empty input");
  return pairwise_sum(xs.data(), xs.size()) / static_cast<double>(xs.size());
}

inline double sq(double x) { return x * x; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace airfl
