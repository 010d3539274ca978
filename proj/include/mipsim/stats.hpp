#pragma once

// Interval and goodness-of-fit helpers for Monte-Carlo experiments.

#include <cstdint>
#include <span>

namespace mipsim {

/// Two-sided Hoeffding half-width sqrt(ln(2/beta) / (2N)) at confidence 1 - beta.
double hoeffding_halfwidth(std::uint64_t trials, double beta);

/// Binomial standard deviation of a proportion, sqrt(p(1-p)/N).
double binomial_sigma(double p, std::uint64_t trials);

/// Upper-tail p-value of Pearson's chi-square statistic against the uniform
/// distribution over counts.size() cells.
double chi_square_uniform_pvalue(std::span<const std::uint64_t> counts);

}  // namespace mipsim
