#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eqi/distribution.hpp"
#include "eqi/fisher.hpp"

namespace eqi::experiments {

/// RNG scheme (recorded in reports): std::mt19937_64 seeded per replication
/// with splitmix64(master_seed ^ splitmix64(replication_index)).
inline constexpr const char* kRngName = "mt19937_64+splitmix64";

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index);

struct TrialBatch {
    std::map<std::string, long> counts;
    long trials = 0;
    std::uint64_t seed = 0;
};

/// Multinomial draw of M trials; deterministic for a given seed.
TrialBatch sample(const CountDistribution& dist, long M, std::uint64_t seed);

struct EstimationReport {
    std::vector<double> estimates;
    std::vector<double> sample_variance;
    std::vector<double> crb;
    std::vector<double> bias;
    bool converged = true;
    int replications = 0;
    double runtime_seconds = 0.0;
    std::string rng = kRngName;
};

/// Maximum-likelihood fit of a multinomial model: golden-section search for
/// one parameter, Nelder-Mead for several. Bounds are per-parameter
/// (lo, hi); the fit is flagged (not silently accepted) on non-convergence.
struct MleFit {
    std::vector<double> estimate;
    double log_likelihood = 0.0;
    bool converged = true;
};
MleFit mle(const TrialBatch& batch,
           const std::function<CountDistribution(const std::vector<double>&)>& model,
           const std::vector<std::pair<double, double>>& bounds);

/// Repeated sample -> mle experiments against a known truth; reports sample
/// variance, CRB = 1/(M F) from the supplied per-trial Fisher informations,
/// and bias, per parameter.
EstimationReport mle_efficiency(
    const std::function<CountDistribution(const std::vector<double>&)>& model,
    const std::vector<double>& truth, const std::vector<double>& per_trial_fi,
    const std::vector<std::pair<double, double>>& bounds, long M, int replications,
    std::uint64_t master_seed);

struct SweepRow {
    double d_over_sigma;
    double fi_analytic;
    double fi_numeric;
    double mle_variance;
    double crb;
};

enum class Strategy { direct, spade, twin_beam_echo };

/// Separation sweep: per-trial FI (analytic where available plus a
/// finite-difference value) and a Monte-Carlo MLE variance at each separation.
/// `r` is the echo squeezing (ignored for direct/spade-passive), `eps` the
/// scene brightness, M the trials per replication.
std::vector<SweepRow> rayleigh_sweep(Strategy strategy, const std::vector<double>& d_grid,
                                     double eps, double r, long M, int replications,
                                     std::uint64_t seed);

}  // namespace eqi::experiments
