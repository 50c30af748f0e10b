#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "saomre/effects.hpp"
#include "saomre/network.hpp"

namespace testutil {

using saomre::EffectKind;
using saomre::Network;

// Literal defining sums on a raw 0/1 array; shares no code with the library.
struct Oracle {
  std::size_t n;
  std::vector<int> a;
  std::vector<double> v;

  explicit Oracle(const Network& x, std::vector<double> cov) : n(x.size()), a(n * n), v(std::move(cov)) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a[i * n + j] = x.tie(i, j) ? 1 : 0;
  }
  int t(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  double sim(std::size_t i, std::size_t j) const {
    const double range = *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
    return 1.0 - std::abs(v[i] - v[j]) / (range > 0 ? range : 1.0);
  }
  double sim_mean() const {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += sim(i, j);
    return s / static_cast<double>(n * (n - 1));
  }

  double value(EffectKind k, std::size_t i) const {
    double s = 0;
    switch (k) {
      case EffectKind::OutDegree:
        for (std::size_t j = 0; j < n; ++j) s += t(i, j);
        return s;
      case EffectKind::Reciprocity:
        for (std::size_t j = 0; j < n; ++j) s += t(i, j) * t(j, i);
        return s;
      case EffectKind::TransitiveTriplets:
        for (std::size_t j = 0; j < n; ++j)
          for (std::size_t h = 0; h < n; ++h) s += t(i, j) * t(i, h) * t(h, j);
        return s;
      case EffectKind::OutDegreeActivity:
        for (std::size_t j = 0; j < n; ++j) s += t(i, j);
        return s * s;
      case EffectKind::CovariateAlter:
        for (std::size_t j = 0; j < n; ++j) s += t(i, j) * v[j];
        return s;
      case EffectKind::CovariateEgo:
        for (std::size_t j = 0; j < n; ++j) s += v[i] * t(i, j);
        return s;
      case EffectKind::CovariateSimilarity: {
        const double m = sim_mean();
        for (std::size_t j = 0; j < n; ++j) s += t(i, j) * (sim(i, j) - m);
        return s;
      }
    }
    return s;
  }
};

}  // namespace testutil
