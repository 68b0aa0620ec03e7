#ifndef TCVAR_WORST_CASE_HPP
#define TCVAR_WORST_CASE_HPP

#include "tcvar/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tcvar {

/// A topic distribution inside the alpha-covered uncertainty set
/// { p >= 0, sum p = 1, alpha p <= p_train }.
template <typename Scalar = double>
struct WorstCaseWeights {
  Vector<Scalar> p_z;

  Scalar objective(const Vector<Scalar>& losses) const { return p_z.dot(losses); }
};

namespace detail {

template <typename Scalar>
void check_worst_case_inputs(const Vector<Scalar>& losses, const Vector<Scalar>& p_train, Scalar alpha) {
  if (!(alpha > Scalar(0))) {
    throw Error("alpha must be positive");
  }
  if (alpha > Scalar(1)) {
    throw Error("alpha must not exceed 1");
  }
  if (losses.size() != p_train.size() || losses.size() == 0) {
    throw Error("losses and topic prior must be nonempty and of equal length");
  }
  if (!losses.allFinite() || !p_train.allFinite()) {
    throw Error("non-finite topic loss or prior");
  }
  if ((p_train.array() < Scalar(0)).any()) {
    throw Error("topic prior must be nonnegative");
  }
  if (p_train.sum() < alpha - Scalar(1e-12)) {
    throw Error("uncertainty set empty");
  }
}

} // namespace detail

/// Maximiser of sum_k p[k] * losses[k] over the alpha-covered set: walk the
/// topics by decreasing loss (smaller id first on ties) and give each
/// min(p_train[k] / alpha, mass still unassigned).
///
/// p_train only has to be nonnegative with total at least alpha; it need not
/// sum to one.
template <typename Scalar>
WorstCaseWeights<Scalar> worst_case_topic_distribution(const Vector<Scalar>& losses, const Vector<Scalar>& p_train,
                                                       Scalar alpha) {
  detail::check_worst_case_inputs(losses, p_train, alpha);
  const auto K = losses.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return losses(a) > losses(b); });

  WorstCaseWeights<Scalar> out{Vector<Scalar>::Zero(K)};
  Scalar remaining = 1;
  for (Eigen::Index k : order) {
    if (remaining <= Scalar(0)) {
      break;
    }
    const Scalar cap = p_train(k) / alpha;
    // Snap to the cap when the leftover differs only by rounding, so that
    // alpha = 1 with a normalised prior reproduces the prior exactly.
    const Scalar take = cap < remaining + Scalar(1e-12) ? cap : remaining;
    out.p_z(k) = take;
    remaining -= take;
  }
  return out;
}

/// Exact LP solution by enumerating basic feasible solutions of the polytope:
/// every vertex has all coordinates at 0 or at their cap except at most one.
template <typename Scalar>
WorstCaseWeights<Scalar> brute_force_worst_case(const Vector<Scalar>& losses, const Vector<Scalar>& p_train,
                                                Scalar alpha) {
  detail::check_worst_case_inputs(losses, p_train, alpha);
  const auto K = losses.size();
  if (K > 12) {
    throw Error("brute force worst case supports at most 12 topics");
  }
  const Vector<Scalar> cap = p_train / alpha;
  const Scalar tol = 1e-12;
  bool found = false;
  Scalar best = 0;
  Vector<Scalar> best_p = Vector<Scalar>::Zero(K);
  Vector<Scalar> p(K);
  for (unsigned mask = 0; mask < (1u << K); ++mask) {
    Scalar at_cap = 0;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (mask & (1u << k)) {
        at_cap += cap(k);
      }
    }
    for (Eigen::Index free = 0; free < K; ++free) {
      if (mask & (1u << free)) {
        continue;
      }
      const Scalar rest = Scalar(1) - at_cap;
      if (rest < -tol || rest > cap(free) + tol) {
        continue;
      }
      for (Eigen::Index k = 0; k < K; ++k) {
        p(k) = (mask & (1u << k)) ? cap(k) : Scalar(0);
      }
      p(free) = std::max(rest, Scalar(0));
      const Scalar value = p.dot(losses);
      if (!found || value > best) {
        found = true;
        best = value;
        best_p = p;
      }
    }
    // every coordinate at its cap
    if (mask == (1u << K) - 1 && std::abs(at_cap - Scalar(1)) <= tol) {
      const Scalar value = cap.dot(losses);
      if (!found || value > best) {
        found = true;
        best = value;
        best_p = cap;
      }
    }
  }
  if (!found) {
    throw Error("uncertainty set empty");
  }
  return {best_p};
}

} // namespace tcvar

#endif
