#ifndef TCVAR_GRAD_CHECK_HPP
#define TCVAR_GRAD_CHECK_HPP

#include "tcvar/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tcvar {

/// Central finite differences of nll(x) against the analytic gradient on a
/// random subsample of coordinates (all of them when there are fewer than
/// `min_coords`). Returns max |g_fd - g| / max(1, |g_fd|).
template <LanguageModel M>
double grad_check(const M& model, const EncodedSentence& x, double epsilon, std::uint64_t seed = 0,
                  std::size_t min_coords = 100) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw Error("grad_check epsilon must lie in [1e-6, 1e-3]");
  }
  using Scalar = typename M::Scalar;
  const auto analytic = gradient(model, x);
  const auto n = static_cast<std::size_t>(model.params().size());
  std::vector<std::size_t> coords(n);
  std::iota(coords.begin(), coords.end(), 0);
  if (n > min_coords) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < min_coords; ++i) {
      std::swap(coords[i], coords[i + static_cast<std::size_t>(rng() % (n - i))]);
    }
    coords.resize(min_coords);
  }
  M probe = model;
  double worst = 0.0;
  for (std::size_t c : coords) {
    const auto i = static_cast<Eigen::Index>(c);
    const Scalar orig = probe.params()(i);
    probe.params()(i) = orig + static_cast<Scalar>(epsilon);
    const double up = probe.nll(x);
    probe.params()(i) = orig - static_cast<Scalar>(epsilon);
    const double down = probe.nll(x);
    probe.params()(i) = orig;
    const double fd = (up - down) / (2.0 * epsilon);
    const double err = std::abs(fd - static_cast<double>(analytic(i))) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

} // namespace tcvar

#endif
