#include "eqi/fisher.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace eqi::fisher {

namespace {

constexpr double kProbFloor = 1e-15;

double step_for(double theta, double dtheta) {
    if (dtheta > 0.0) return dtheta;
    return std::max(1e-3 * std::abs(theta), 1e-6);
}

std::map<std::string, double> as_map(const CountDistribution& d) {
    std::map<std::string, double> m;
    for (const auto& [label, p] : d.outcomes) m[label] += p;
    return m;
}

/// Central-difference derivatives of every outcome probability at step h.
std::map<std::string, double> outcome_derivatives(
    const std::function<CountDistribution(double)>& dist_fn, double theta, double h) {
    const auto hi = as_map(dist_fn(theta + h));
    const auto lo = as_map(dist_fn(theta - h));
    std::map<std::string, double> dp;
    for (const auto& [label, p] : hi) {
        const auto it = lo.find(label);
        if (it == lo.end())
            throw std::runtime_error("classical_fi: outcome '" + label +
                                     "' not present at both difference points");
        dp[label] = (p - it->second) / (2.0 * h);
    }
    return dp;
}

}  // namespace

FisherResult classical_fi(const std::function<CountDistribution(double)>& dist_fn,
                          double theta, double dtheta) {
    const double h = step_for(theta, dtheta);
    const auto center = as_map(dist_fn(theta));
    const auto coarse = outcome_derivatives(dist_fn, theta, h);
    const auto fine = outcome_derivatives(dist_fn, theta, 0.5 * h);

    FisherResult res;
    res.method = Method::finite_difference;
    double fi_coarse = 0.0, fi_fine = 0.0;
    for (const auto& [label, p] : center) {
        if (p < kProbFloor) {
            res.dropped_mass += std::max(p, 0.0);
            continue;
        }
        const double dc = coarse.at(label);
        const double df = fine.at(label);
        // Richardson extrapolation of the derivative (error O(h^2)).
        const double dr = (4.0 * df - dc) / 3.0;
        fi_coarse += dc * dc / p;
        fi_fine += dr * dr / p;
    }
    res.value = fi_fine;
    res.error_estimate = std::abs(fi_fine - fi_coarse);
    if (res.value < 0.0)
        throw std::runtime_error("classical_fi: negative information (differencing failure)");
    return res;
}

Eigen::MatrixXd fisher_matrix(
    const std::function<CountDistribution(const std::vector<double>&)>& dist_fn,
    const std::vector<double>& theta) {
    const int n = static_cast<int>(theta.size());
    const auto center = as_map(dist_fn(theta));

    std::vector<std::map<std::string, double>> dp(n);
    for (int i = 0; i < n; ++i) {
        const double h = step_for(theta[i], 0.0);
        std::vector<double> hi = theta, lo = theta;
        hi[i] += h;
        lo[i] -= h;
        const auto mhi = as_map(dist_fn(hi));
        const auto mlo = as_map(dist_fn(lo));
        for (const auto& [label, p] : mhi) dp[i][label] = (p - mlo.at(label)) / (2.0 * h);
    }

    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [label, p] : center) {
        if (p < kProbFloor) continue;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) F(i, j) += dp[i].at(label) * dp[j].at(label) / p;
    }
    return F;
}

double table1_reference(Task task, Probe probe, const TaskParams& p) {
    switch (task) {
        case Task::loss:
            if (probe == Probe::optimal) return p.N_S / p.gamma;
            if (probe == Probe::coherent) return (1.0 - p.gamma) * p.N_S;
            break;
        case Task::amp:
            if (probe == Probe::optimal) return (1.0 + p.N_S) / p.gamma;
            if (probe == Probe::coherent) return 1.0 / p.gamma + (1.0 - p.gamma) * p.N_S;
            break;
        case Task::agn:
            if (probe == Probe::optimal) return (1.0 + 2.0 * p.N_S) / p.gamma;
            if (probe == Probe::coherent) return 1.0 / p.gamma;
            break;
        case Task::subdiff_fluor:
            if (probe == Probe::optimal) return p.eps * (1.0 + p.N_S) / 2.0;
            if (probe == Probe::vacuum) return p.eps / 2.0;
            if (probe == Probe::coherent)
                return p.eps / 2.0 + p.N_S * p.eps * p.eps * p.s * p.s / 16.0;
            break;
        case Task::subdiff_abs:
            if (probe == Probe::optimal) return p.N_S * p.gamma;
            if (probe == Probe::coherent) return p.N_S * p.gamma * p.gamma * p.s * p.s / 4.0;
            break;
    }
    throw std::invalid_argument("table1_reference: no closed form for this task/probe pair");
}

double exact_channel_qfi(Task task, double gamma, double N_S) {
    if (gamma <= 0.0) throw std::invalid_argument("exact_channel_qfi: gamma must be > 0");
    const double e = std::exp(gamma);
    switch (task) {
        case Task::loss:
            return N_S * std::exp(-gamma) / (1.0 - std::exp(-gamma));
        case Task::amp:
            return (1.0 + N_S) * e / (e - 1.0);
        default:
            throw std::invalid_argument("exact_channel_qfi: closed forms exist for loss/amp only");
    }
}

double coherent_baselines(Task task, double gamma, double alpha_sq) {
    if (alpha_sq < 0.0) throw std::invalid_argument("coherent_baselines: |alpha|^2 must be >= 0");
    const double e = std::exp(gamma);
    switch (task) {
        case Task::loss:
            return std::exp(-gamma) * alpha_sq;
        case Task::amp:
            return e / (e - 1.0) + e * alpha_sq / (2.0 * e - 1.0);
        case Task::agn:
            return 1.0 / (gamma * (1.0 + gamma));
        default:
            throw std::invalid_argument("coherent_baselines: loss/amp/agn only");
    }
}

double gaussian_mean_qfi(const Eigen::VectorXd& dmu, const Eigen::MatrixXd& Sigma) {
    if (Sigma.rows() != dmu.size() || Sigma.rows() != Sigma.cols())
        throw std::invalid_argument("gaussian_mean_qfi: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gaussian_mean_qfi: Sigma must be positive definite");
    return 2.0 * dmu.dot(llt.solve(dmu));
}

}  // namespace eqi::fisher
