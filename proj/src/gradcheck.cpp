#include "phasor/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "phasor/rng.hpp"

namespace phasor {

template <class S>
GradCheckReport grad_check(const std::vector<Parameter<S>*>& params,
                           const std::type_identity_t<std::function<S(bool)>>& loss,
                           const GradCheckOptions& opt) {
  for (Parameter<S>* p : params) p->grad.zero();
  loss(true);

  std::vector<Tensor<S>> analytic;
  analytic.reserve(params.size());
  for (Parameter<S>* p : params) analytic.push_back(p->grad.clone());

  GradCheckReport rep;
  Rng rng(opt.sample_seed);
  const S eps = S(opt.eps);
  // Base-point loss, needed by the nonsmoothness probe; the graph is
  // deterministic so one evaluation serves every component.
  const S base = opt.detect_kinks ? loss(false) : S(0);

  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<S>* p = params[pi];
    const int64_t n = p->value.numel();

    std::vector<int64_t> idx;
    if (opt.max_components_per_param < 0 || n <= opt.max_components_per_param) {
      idx.resize(size_t(n));
      for (int64_t i = 0; i < n; ++i) idx[size_t(i)] = i;
    } else {
      for (int64_t i = 0; i < opt.max_components_per_param; ++i)
        idx.push_back(rng.uniform_int(n));
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    }

    for (int64_t i : idx) {
      const S saved = p->value[i];
      p->value[i] = saved + eps;
      const S lp = loss(false);
      p->value[i] = saved - eps;
      const S lm = loss(false);
      p->value[i] = saved;
      const S numeric = (lp - lm) / (S(2) * eps);
      bool excluded = false;
      if (opt.detect_kinks) {
        // Forward slope (lp-base)/eps and backward slope (base-lm)/eps split
        // at a kink; half their gap is exactly the bias the straddling
        // central difference picks up, so a component is excluded precisely
        // when that bias could push it past the comparison tolerance.
        const double gap =
            std::abs(double(lp) + double(lm) - 2.0 * double(base)) /
            (2.0 * double(eps));
        if (gap > opt.kink_tol * std::max(1.0, std::abs(double(numeric))))
          excluded = true;
      }
      ++rep.checked;
      if (excluded) {
        ++rep.excluded;
        continue;
      }
      const double a = double(analytic[pi][i]);
      const double nm = double(numeric);
      const double rel = std::abs(a - nm) / std::max(1.0, std::abs(nm));
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst = p->name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return rep;
}

template GradCheckReport grad_check<float>(const std::vector<Parameter<float>*>&,
                                           const std::function<float(bool)>&,
                                           const GradCheckOptions&);
template GradCheckReport grad_check<double>(const std::vector<Parameter<double>*>&,
                                            const std::function<double(bool)>&,
                                            const GradCheckOptions&);

}  // namespace phasor
