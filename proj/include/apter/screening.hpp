#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "apter/experts.hpp"
#include "apter/survival.hpp"

namespace apter {

struct ScreeningResult {
    std::vector<std::size_t> retained;  // distinct feature indices, in selection order
    std::vector<double> scores;         // |m_j| of each retained feature when it was selected
    std::size_t iterations = 0;
};

/// Marginal utilities m_j = sum_i response_i * x_ij over all features.
std::vector<double> marginal_utilities(const SurvivalDataset& data, std::span<const double> response);

/// Sure independence screening: keeps the `count` features with the largest
/// |m_j|, ties going to the lower index. Features are used as given; call
/// standardize_columns() first if their scales differ.
ScreeningResult sis(const SurvivalDataset& data, std::span<const double> response, std::size_t count);

/// As above, restricted to `candidates`.
ScreeningResult sis(const SurvivalDataset& data, std::span<const double> response, std::size_t count,
                    std::span<const std::size_t> candidates);

/// Chooses nu for a fit of `bank` on `train`.
using NuChooser = std::function<double(const ExpertBank& bank, const SurvivalDataset& train)>;

NuChooser theoretical_nu_chooser();

inline constexpr std::size_t kMaxIsisIterations = 20;

/// Iterated SIS: SIS on the observed times, then repeatedly fit signed
/// APTER on the retained features and screen the unretained ones against the
/// fitted prognostic scores, until `target` distinct features are held, no
/// new feature appears, or kMaxIsisIterations rounds have run.
ScreeningResult isis(const SurvivalDataset& data, std::size_t per_step, std::size_t target,
                     const NuChooser& nu_policy = theoretical_nu_chooser());

/// Copy of `data` with every covariate column z-scored (constant columns
/// are only centred).
SurvivalDataset standardize_columns(const SurvivalDataset& data);

}  // namespace apter
