#include "eqi/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "eqi/protocols.hpp"
#include "eqi/scene.hpp"

namespace eqi::experiments {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ splitmix64(index));
}

TrialBatch sample(const CountDistribution& dist, long M, std::uint64_t seed) {
    if (M <= 0) throw std::invalid_argument("sample: M must be positive");
    dist.validate();
    std::mt19937_64 rng(seed);

    TrialBatch batch;
    batch.trials = M;
    batch.seed = seed;
    // Conditional-binomial decomposition of the multinomial draw.
    long remaining = M;
    double rem_p = 1.0;
    for (const auto& [label, p] : dist.outcomes) {
        long n = 0;
        if (remaining > 0) {
            const double cond = std::clamp(p / rem_p, 0.0, 1.0);
            if (cond >= 1.0) {
                n = remaining;
            } else if (cond > 0.0) {
                std::binomial_distribution<long> bin(remaining, cond);
                n = bin(rng);
            }
        }
        batch.counts[label] = n;
        remaining -= n;
        rem_p -= p;
    }
    if (remaining != 0)
        batch.counts.rbegin()->second += remaining;  // numerical residue, assign to last
    return batch;
}

namespace {

double log_likelihood(const TrialBatch& batch, const CountDistribution& dist) {
    double ll = 0.0;
    for (const auto& [label, p] : dist.outcomes) {
        const auto it = batch.counts.find(label);
        const long n = it == batch.counts.end() ? 0 : it->second;
        if (n == 0) continue;
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += n * std::log(p);
    }
    return ll;
}

MleFit golden_section(const TrialBatch& batch,
                      const std::function<CountDistribution(const std::vector<double>&)>& model,
                      double lo, double hi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double x) { return log_likelihood(batch, model({x})); };
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    const double tol = 1e-10 * (hi - lo);
    int iters = 0;
    while (b - a > tol && iters++ < 300) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return MleFit{{x}, f(x), b - a <= tol * 10.0};
}

MleFit nelder_mead(const TrialBatch& batch,
                   const std::function<CountDistribution(const std::vector<double>&)>& model,
                   const std::vector<std::pair<double, double>>& bounds) {
    const int n = static_cast<int>(bounds.size());
    auto clamp_point = [&](std::vector<double> x) {
        for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], bounds[i].first, bounds[i].second);
        return x;
    };
    auto f = [&](const std::vector<double>& x) {
        return -log_likelihood(batch, model(clamp_point(x)));  // minimize
    };

    std::vector<std::vector<double>> simplex;
    std::vector<double> x0(n);
    for (int i = 0; i < n; ++i) x0[i] = 0.5 * (bounds[i].first + bounds[i].second);
    simplex.push_back(x0);
    for (int i = 0; i < n; ++i) {
        auto x = x0;
        x[i] += 0.1 * (bounds[i].second - bounds[i].first);
        simplex.push_back(clamp_point(x));
    }
    std::vector<double> fv(simplex.size());
    for (size_t i = 0; i < simplex.size(); ++i) fv[i] = f(simplex[i]);

    bool converged = false;
    for (int iter = 0; iter < 2000; ++iter) {
        std::vector<size_t> order(simplex.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
        if (std::abs(fv[order.back()] - fv[order.front()]) <
            1e-12 * (1.0 + std::abs(fv[order.front()]))) {
            converged = true;
            break;
        }
        const auto& worst = simplex[order.back()];
        std::vector<double> centroid(n, 0.0);
        for (size_t k = 0; k + 1 < order.size(); ++k)
            for (int i = 0; i < n; ++i) centroid[i] += simplex[order[k]][i] / n;

        auto blend = [&](double t) {
            std::vector<double> x(n);
            for (int i = 0; i < n; ++i) x[i] = centroid[i] + t * (centroid[i] - worst[i]);
            return clamp_point(x);
        };
        auto xr = blend(1.0);
        double fr = f(xr);
        if (fr < fv[order.front()]) {
            auto xe = blend(2.0);
            const double fe = f(xe);
            if (fe < fr) {
                simplex[order.back()] = xe;
                fv[order.back()] = fe;
            } else {
                simplex[order.back()] = xr;
                fv[order.back()] = fr;
            }
        } else if (fr < fv[order[order.size() - 2]]) {
            simplex[order.back()] = xr;
            fv[order.back()] = fr;
        } else {
            auto xc = blend(-0.5);
            const double fc = f(xc);
            if (fc < fv[order.back()]) {
                simplex[order.back()] = xc;
                fv[order.back()] = fc;
            } else {
                for (size_t k = 1; k < order.size(); ++k) {
                    for (int i = 0; i < n; ++i)
                        simplex[order[k]][i] =
                            0.5 * (simplex[order[k]][i] + simplex[order.front()][i]);
                    fv[order[k]] = f(simplex[order[k]]);
                }
            }
        }
    }
    const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
    return MleFit{simplex[best], -fv[best], converged};
}

}  // namespace

MleFit mle(const TrialBatch& batch,
           const std::function<CountDistribution(const std::vector<double>&)>& model,
           const std::vector<std::pair<double, double>>& bounds) {
    if (bounds.empty()) throw std::invalid_argument("mle: bounds required");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi)) throw std::invalid_argument("mle: invalid bounds");
    if (bounds.size() == 1)
        return golden_section(batch, model, bounds[0].first, bounds[0].second);
    return nelder_mead(batch, model, bounds);
}

EstimationReport mle_efficiency(
    const std::function<CountDistribution(const std::vector<double>&)>& model,
    const std::vector<double>& truth, const std::vector<double>& per_trial_fi,
    const std::vector<std::pair<double, double>>& bounds, long M, int replications,
    std::uint64_t master_seed) {
    if (truth.size() != per_trial_fi.size() || truth.size() != bounds.size())
        throw std::invalid_argument("mle_efficiency: parameter bookkeeping mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    const CountDistribution true_dist = model(truth);

    const int n = static_cast<int>(truth.size());
    std::vector<std::vector<double>> estimates(n);
    bool all_converged = true;
    for (int rep = 0; rep < replications; ++rep) {
        const TrialBatch batch = sample(true_dist, M, replication_seed(master_seed, rep));
        const MleFit fit = mle(batch, model, bounds);
        all_converged = all_converged && fit.converged;
        for (int i = 0; i < n; ++i) estimates[i].push_back(fit.estimate[i]);
    }

    EstimationReport rep;
    rep.converged = all_converged;
    rep.replications = replications;
    for (int i = 0; i < n; ++i) {
        double mean = 0.0;
        for (double e : estimates[i]) mean += e;
        mean /= replications;
        double var = 0.0;
        for (double e : estimates[i]) var += (e - mean) * (e - mean);
        var /= (replications - 1);
        rep.estimates.push_back(mean);
        rep.sample_variance.push_back(var);
        rep.bias.push_back(mean - truth[i]);
        rep.crb.push_back(1.0 / (static_cast<double>(M) * per_trial_fi[i]));
    }
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<SweepRow> rayleigh_sweep(Strategy strategy, const std::vector<double>& d_grid,
                                     double eps, double r, long M, int replications,
                                     std::uint64_t seed) {
    using protocols::ProbeConfig;
    using protocols::ProbeKind;
    using scene::ModeBasis;
    using scene::Scene;
    using scene::SceneKind;
    using scene::Source;

    const double sigma = 1.0;  // all separations in units of sigma
    const ModeBasis basis = ModeBasis::hg(sigma, 20);

    auto make_scene = [&](double s) {
        return Scene{{Source{0.5 * s, 0.5}, Source{-0.5 * s, 0.5}},
                     SceneKind::emission, eps, sigma, 0.0};
    };

    ProbeConfig probe;
    double amp = 1.0;
    if (strategy == Strategy::twin_beam_echo) {
        probe.kind = ProbeKind::twin_beam_echo;
        probe.squeeze_r = {r};
        amp = std::cosh(r) * std::cosh(r);
    } else {
        probe.kind = ProbeKind::vacuum;
    }

    double pixel_width = 0.0;
    const Eigen::VectorXd pixels =
        strategy == Strategy::direct
            ? protocols::uniform_pixel_grid(sigma, 6.0, 40, pixel_width)
            : Eigen::VectorXd();

    auto dist_at = [&](double s) -> CountDistribution {
        if (strategy == Strategy::direct)
            return protocols::direct_detection(make_scene(s), pixels, pixel_width);
        return protocols::spade(make_scene(s), basis, probe, false);
    };

    std::vector<SweepRow> rows;
    for (size_t gi = 0; gi < d_grid.size(); ++gi) {
        const double s = d_grid[gi];
        SweepRow row{};
        row.d_over_sigma = s;

        const auto fd = fisher::classical_fi([&](double x) { return dist_at(x); }, s);
        if (strategy == Strategy::direct) {
            // Per detected photon; scale by the detection rate eps.
            row.fi_numeric = eps * fd.value;
            row.fi_analytic = eps * s * s / 8.0;
        } else {
            row.fi_numeric = fd.value;
            row.fi_analytic = 0.5 * eps * amp;
        }
        row.crb = 1.0 / (static_cast<double>(M) * row.fi_numeric);

        if (replications > 1) {
            auto model = [&](const std::vector<double>& th) { return dist_at(th[0]); };
            const auto report = mle_efficiency(
                model, {s}, {row.fi_numeric},
                {{std::max(1e-4, s / 5.0), 5.0 * s}}, M, replications,
                replication_seed(seed, gi));
            row.mle_variance = report.sample_variance[0];
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace eqi::experiments
