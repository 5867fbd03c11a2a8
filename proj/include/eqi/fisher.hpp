#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "eqi/distribution.hpp"

namespace eqi::fisher {

enum class Method { analytic, finite_difference, numeric_qfi };

struct FisherResult {
    double value = 0.0;
    Method method = Method::finite_difference;
    double error_estimate = 0.0;
    double dropped_mass = 0.0;  // probability excluded by the p < 1e-15 cut
};

/// Classical Fisher information of a parametrized outcome distribution via
/// Richardson-extrapolated central differences. Step defaults to
/// 1e-3 * |theta| with an absolute floor of 1e-6.
FisherResult classical_fi(const std::function<CountDistribution(double)>& dist_fn,
                          double theta, double dtheta = 0.0);

/// Multiparameter Fisher matrix F_ij = sum_x (d_i p_x)(d_j p_x)/p_x.
Eigen::MatrixXd fisher_matrix(
    const std::function<CountDistribution(const std::vector<double>&)>& dist_fn,
    const std::vector<double>& theta);

enum class Task { loss, amp, agn, subdiff_fluor, subdiff_abs };
enum class Probe { optimal, vacuum, coherent };

struct TaskParams {
    double N_S = 0.0;    // mean signal photons
    double gamma = 0.0;  // channel rate (gamma_loss / gamma_amp / gamma_agn / gamma_up)
    double eps = 0.0;    // total scene brightness (fluorescence imaging)
    double s = 0.0;      // separation d/sigma (subdiffraction tasks)
};

/// Leading-order reference sensitivities of the five estimation tasks for the
/// optimal, vacuum, and coherent probe classes. Throws for task/probe pairs
/// without a closed form.
double table1_reference(Task task, Probe probe, const TaskParams& p);

/// Full (non-perturbative) channel QFIs: loss N_S e^-g/(1-e^-g) and
/// amplification (1+N_S) e^g/(e^g - 1).
double exact_channel_qfi(Task task, double gamma, double N_S);

/// Exact coherent-state baselines: loss e^-g |a|^2; amplification
/// e^g/(e^g-1) + e^g |a|^2/(2 e^g - 1); AGN 1/(g(1+g)) (amplitude-independent).
double coherent_baselines(Task task, double gamma, double alpha_sq);

/// Mean-displacement contribution to the Gaussian QFI:
/// 2 (d_theta mu)^T Sigma^-1 (d_theta mu).
double gaussian_mean_qfi(const Eigen::VectorXd& dmu, const Eigen::MatrixXd& Sigma);

}  // namespace eqi::fisher
