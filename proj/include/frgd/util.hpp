#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace frgd {

// Deterministic RNG used everywhere seeds matter. We roll the distributions
// by hand because std:: distribution output is implementation-defined and
// artifacts must be byte-identical across reruns.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  int next_int(int lo, int hi_inclusive) {
    return lo + int(next_below(std::uint64_t(hi_inclusive - lo + 1)));
  }

  double next_exponential(double mean) {
    double u = next_double();
    return -mean * std::log1p(-u);
  }

  double next_normal(double mu = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mu + sigma * spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mu + sigma * r * std::cos(a);
  }

  // Fisher-Yates over indices [0, n)
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = int(next_below(std::uint64_t(i + 1)));
      std::swap(p[i], p[j]);
    }
    return p;
  }

  // Independent stream derived from this seed and a stream tag.
  Rng fork(std::uint64_t tag) const {
    Rng r(state_ ^ (0xd1342543de82ef95ull * (tag + 1)));
    r.next_u64();
    return r;
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

inline double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / double(xs.size());
}

// population standard deviation
inline double stddev_of(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / double(xs.size()));
}

// Burstiness of a gap sequence: (sigma - mu) / (sigma + mu); 0 when undefined.
inline double burstiness(std::span<const double> gaps) {
  if (gaps.empty()) return 0.0;
  double mu = mean_of(gaps);
  double sd = stddev_of(gaps);
  double denom = sd + mu;
  if (denom <= 0.0) return 0.0;
  return (sd - mu) / denom;
}

}  // namespace frgd
