#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "eqi/distribution.hpp"

namespace eqi::fock {

using CMatrix = Eigen::MatrixXcd;

/// Exact multimode density matrix on the truncated number basis
/// |n_1 ... n_M>, n_i <= cutoff. Basis ordering: the last mode index varies
/// fastest. Design envelope: <= 3 modes at moderate cutoffs.
struct FockDensityMatrix {
    int modes = 1;
    int cutoff = 8;
    CMatrix rho;

    int dim_per_mode() const { return cutoff + 1; }
    long dim() const;
    static FockDensityMatrix vacuum(int modes, int cutoff);
    static FockDensityMatrix number_state(const std::vector<int>& ns, int cutoff);
    /// Truncated coherent state |alpha> (single mode), renormalized.
    static FockDensityMatrix coherent(double alpha, int cutoff);

    /// Hermiticity defect, trace, and minimum eigenvalue diagnostics.
    void validate(double min_eig_tol = 1e-10) const;
    /// Clips eigenvalues in [-tol, 0) to zero and renormalizes; eigenvalues
    /// below -tol are an error.
    void clip_and_renormalize(double tol = 1e-10);
};

/// Single-mode annihilation operator on the truncated space.
CMatrix annihilation(int cutoff);
/// Lifts a single-mode operator to `modes` modes, acting on `mode`.
CMatrix embed(const CMatrix& op, int mode, int modes, int cutoff);

struct KrausChannel {
    std::vector<CMatrix> operators;
    std::string label;

    /// || sum K^dag K - I ||_inf restricted to number states with
    /// n <= cutoff - headroom (states unaffected by truncation).
    double completeness_defect(int headroom = 1) const;
};

/// Pure-loss channel with transmittance eta: K_n = (sqrt(1-eta))^n
/// eta^{a^dag a/2} a^n / sqrt(n!).
/// Append sqrt(I - sum K^dag K) so the truncated operator set is exactly
/// trace preserving on the whole space; this removes the boundary artifact
/// of photon-raising channels near the cutoff.
KrausChannel complete_truncated(KrausChannel ch);

KrausChannel loss_kraus(double eta, int n_max);
/// Quantum-limited amplifier with gain G: K_n = sqrt(1/G)
/// (sqrt((G-1)/G))^n (a^dag)^n / sqrt(n!) G^{-a^dag a/2}.
KrausChannel amp_kraus(double G, int n_max);
/// Additive-Gaussian-noise channel of variance gamma: loss at eta = 1/G
/// followed by amplification at G = 1 + gamma.
std::vector<KrausChannel> agn_channel(double gamma, int n_max);

/// Applies a (single-mode) Kraus channel to one mode of a multimode state.
FockDensityMatrix apply_kraus(const KrausChannel& ch, const FockDensityMatrix& st, int mode);

/// First-order multimode interaction map: rho' = rho + sum_{lk} [
///   Gup_{lk} (a_k rho a_l^dag - {a_l^dag a_k, rho}/2)
/// + Gdn_{lk} (a_l^dag rho a_k - {a_k a_l^dag, rho}/2) ].
/// Trace-preserving by construction; Gup/Gdn must be Hermitian PSD.
FockDensityMatrix apply_interaction_map(const FockDensityMatrix& st,
                                        const CMatrix& gamma_up,
                                        const CMatrix& gamma_down);

/// U = exp[r (a^dag b^dag - a b)] on the two-mode truncated space.
/// Unitary up to truncation leakage; call unitarity_defect to quantify.
CMatrix two_mode_squeeze_unitary(double r, int cutoff);
double unitarity_defect(const CMatrix& U);

FockDensityMatrix apply_unitary(const CMatrix& U, const FockDensityMatrix& st);

/// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const FockDensityMatrix& a, const FockDensityMatrix& b);

struct QfiEstimate {
    double value;
    double error_estimate;
};

/// Numerical quantum Fisher information at theta via the fidelity expansion
/// F_Q ~= 8 (1 - sqrt(F(rho(theta - h/2), rho(theta + h/2)))) / h^2,
/// Richardson-extrapolated over two step sizes. dtheta = 0 selects the
/// default step 1e-3 * |theta| (floor 1e-6); the extrapolation removes the
/// O(h^2) bias and its residual is reported as the error estimate.
QfiEstimate qfi_numeric(const std::function<FockDensityMatrix(double)>& rho_fn,
                        double theta, double dtheta = 0.0);

/// Joint photon-number distribution over the requested modes (diagonal of
/// the partial trace). Labels are "n1,n2,..." over the subset in order.
CountDistribution measure_counts(const FockDensityMatrix& st, const std::vector<int>& mode_subset);

}  // namespace eqi::fock
