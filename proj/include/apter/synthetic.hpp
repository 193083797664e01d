#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "apter/survival.hpp"

namespace apter {

/// n subjects with d standard normal covariates of which the first k drive
/// the failure rate 10 * exp(x_1 + ... + x_k); independent exponential
/// censoring with rate `censor_rate`.
struct SyntheticConfig {
    std::size_t n = 100;
    std::size_t d = 100;
    std::size_t k = 10;
    double censor_rate = 0.1;
    std::uint64_t seed = 0;
};

struct SyntheticDraw {
    SurvivalDataset data;
    std::vector<double> failure_times;  // T
    std::vector<double> censor_times;   // C
};

/// Subject i draws from its own substream (seed, i), so the first n'
/// subjects of a larger draw equal a draw of size n'.
SyntheticDraw generate(const SyntheticConfig& config);

}  // namespace apter
