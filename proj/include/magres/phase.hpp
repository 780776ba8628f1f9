// Copyright 2026 The magres Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "magres/common.hpp"

namespace magres {

/// Continuous argument along a sampled path of complex logarithms. Each step
/// takes the representative of the imaginary increment in (-pi, pi].
inline std::vector<double> unwrap_log_phase(const std::vector<Complex>& logs) {
  std::vector<double> out(logs.size());
  if (logs.empty()) return out;
  out[0] = logs[0].imag();
  for (std::size_t k = 1; k < logs.size(); ++k)
    out[k] = out[k - 1] + wrap_angle(logs[k].imag() - logs[k - 1].imag());
  return out;
}

/// Largest absolute phase increment between consecutive samples (closed path).
inline double max_phase_step(const std::vector<Complex>& logs, bool closed) {
  double m = 0.0;
  const std::size_t n = logs.size();
  for (std::size_t k = 0; k + 1 < n + (closed ? 1 : 0); ++k) {
    const std::size_t k1 = (k + 1) % n;
    m = std::max(m, std::abs(wrap_angle(logs[k1].imag() - logs[k].imag())));
  }
  return m;
}

/// Winding number (as a real) of a closed sampled path of logarithms.
inline double winding_from_logs(const std::vector<Complex>& logs) {
  double total = 0.0;
  const std::size_t n = logs.size();
  for (std::size_t k = 0; k < n; ++k)
    total += wrap_angle(logs[(k + 1) % n].imag() - logs[k].imag());
  return total / (2.0 * kPi);
}

}  // namespace magres
