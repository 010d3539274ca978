#include "mipsim/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "mipsim/errors.hpp"

namespace mipsim {

double hoeffding_halfwidth(std::uint64_t trials, double beta) {
  if (trials == 0) throw ConfigError("confidence interval over zero trials");
  if (!(beta > 0 && beta < 1)) throw ConfigError("beta must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / beta) / (2.0 * static_cast<double>(trials)));
}

double binomial_sigma(double p, std::uint64_t trials) {
  if (trials == 0) throw ConfigError("binomial sigma over zero trials");
  return std::sqrt(p * (1 - p) / static_cast<double>(trials));
}

double chi_square_uniform_pvalue(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw ConfigError("chi-square needs at least two cells");
  double total = 0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0) throw ConfigError("chi-square over zero observations");
  const double expected = total / static_cast<double>(counts.size());
  double stat = 0;
  for (auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    stat += diff * diff / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace mipsim
