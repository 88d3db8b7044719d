#pragma once

#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "phasor/tape.hpp"

namespace phasor {

struct GradCheckOptions {
  double eps = 1e-4;
  // Cap on checked components per parameter (-1 = every component); sampled
  // deterministically when capped.
  int64_t max_components_per_param = -1;
  uint64_t sample_seed = 1234;
  // Nonsmoothness probe: components whose one-sided difference quotients at
  // +/-eps disagree sit on a subgradient region (e.g. the modReLU kink);
  // they are counted but excluded from the max. The threshold is relative,
  // using the same max(1, |numeric|) denominator as the error itself, so a
  // kink that slips through cannot contribute more than kink_tol.
  bool detect_kinks = false;
  double kink_tol = 5e-5;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  int64_t checked = 0;
  int64_t excluded = 0;
  std::string worst;  // "param[idx]" of the max error
};

// Central-difference verification of reverse-mode gradients. `loss(true)`
// must rebuild the graph from current parameter values, run backward
// (accumulating into param->grad), and return the scalar loss; `loss(false)`
// must skip backward. The function must be deterministic given parameters.
template <class S>
GradCheckReport grad_check(const std::vector<Parameter<S>*>& params,
                           const std::type_identity_t<std::function<S(bool)>>& loss,
                           const GradCheckOptions& opt = {});

}  // namespace phasor
