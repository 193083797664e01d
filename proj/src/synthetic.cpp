#include "apter/synthetic.hpp"

#include <cmath>
#include <string>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "apter/error.hpp"
#include "apter/random.hpp"

namespace apter {

SyntheticDraw generate(const SyntheticConfig& config) {
    if (config.n < 1) throw ArgumentError("synthetic: n must be >= 1");
    if (config.d < 1) throw ArgumentError("synthetic: d must be >= 1");
    if (config.k > config.d) throw ArgumentError("synthetic: k must not exceed d");
    if (!(config.censor_rate > 0.0) || !std::isfinite(config.censor_rate)) {
        throw ArgumentError("synthetic: censor rate must be positive");
    }

    std::vector<SurvivalRecord> records(config.n);
    std::vector<double> failures(config.n), censors(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        Engine rng = make_engine(config.seed, i);
        boost::random::normal_distribution<double> normal(0.0, 1.0);
        boost::random::uniform_01<double> unit;
        boost::random::exponential_distribution<double> censoring(config.censor_rate);

        auto& rec = records[i];
        rec.covariates.resize(config.d);
        for (double& v : rec.covariates) v = normal(rng);

        double linear = 0.0;
        for (std::size_t j = 0; j < config.k; ++j) linear += rec.covariates[j];

        double z = 0.0;
        while (z <= 0.0) z = unit(rng);  // open interval (0, 1)
        const double t = -std::log(z) / (10.0 * std::exp(linear));
        const double c = censoring(rng);

        failures[i] = t;
        censors[i] = c;
        rec.event = t <= c;
        rec.time = rec.event ? t : c;
    }
    return {SurvivalDataset(std::move(records), config.d), std::move(failures), std::move(censors)};
}

}  // namespace apter
