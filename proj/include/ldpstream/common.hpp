// Copyright 2026 The ldpstream Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldpstream {

// Item indices are 0-based throughout the C++ API.
using FrequencyVector = std::vector<double>;
using Rng = std::mt19937_64;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class InvalidAllocationError : public Error {
 public:
  using Error::Error;
};

// Mixes a run seed with a stream tag so that independent components draw
// from unrelated generators (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatchError(std::string(what) + ": dimension mismatch (" +
                                 std::to_string(a) + " vs " +
                                 std::to_string(b) + ")");
  }
}

// Mean of squared differences, i.e. (1/d) sum_k (a[k] - b[k])^2.
inline double mean_squared_distance(std::span<const double> a,
                                    std::span<const double> b) {
  check_same_size(a.size(), b.size(), "mean_squared_distance");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double e = a[k] - b[k];
    s += e * e;
  }
  return s / static_cast<double>(a.size());
}

// Ties resolve to the lowest index.
inline std::size_t argmax_index(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

inline std::size_t argmin_index(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] < v[best]) best = k;
  }
  return best;
}

// Largest-remainder rounding of non-negative reals to integers summing to
// `total`. Remainders are ranked descending with ties to the lowest index.
inline std::vector<std::int64_t> largest_remainder_round(
    std::span<const double> x, std::int64_t total) {
  const std::size_t d = x.size();
  std::vector<std::int64_t> out(d, 0);
  if (d == 0) return out;
  std::vector<double> frac(d, 0.0);
  std::int64_t assigned = 0;
  for (std::size_t k = 0; k < d; ++k) {
    const double v = std::max(0.0, x[k]);
    // Guard against values like 2.9999999999 that should be 3.
    const double fl = std::floor(v + 1e-9);
    out[k] = static_cast<std::int64_t>(fl);
    frac[k] = std::max(0.0, v - fl);
    assigned += out[k];
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (assigned < total) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                     std::size_t b) {
      return frac[a] > frac[b];
    });
    std::int64_t need = total - assigned;
    for (std::size_t i = 0; need > 0; i = (i + 1) % d, --need) {
      ++out[order[i]];
    }
  } else if (assigned > total) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                     std::size_t b) {
      return frac[a] < frac[b];
    });
    std::int64_t extra = assigned - total;
    for (std::size_t i = 0; extra > 0; i = (i + 1) % d) {
      if (out[order[i]] > 0) {
        --out[order[i]];
        --extra;
      }
    }
  }
  return out;
}

inline bool is_distribution(std::span<const double> f, double tol = 1e-9) {
  double s = 0.0;
  for (double v : f) {
    if (!(v >= -tol)) return false;
    s += v;
  }
  return std::abs(s - 1.0) <= tol;
}

inline FrequencyVector uniform_vector(std::size_t d) {
  return FrequencyVector(d, 1.0 / static_cast<double>(d));
}

// Binomial draw that tolerates zero trials and degenerate probabilities.
inline std::int64_t draw_binomial(std::int64_t trials, double p, Rng& rng) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::int64_t> dist(trials, p);
  return dist(rng);
}

// Partial Fisher-Yates: moves k uniformly chosen elements of `pool` to its
// tail and returns them, removing them from the pool.
template <class T>
std::vector<T> take_random(std::vector<T>& pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  std::vector<T> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t j = pick(rng);
    std::swap(pool[j], pool.back());
    out.push_back(pool.back());
    pool.pop_back();
  }
  return out;
}

}  // namespace ldpstream
