#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace eqi::gaussian {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Standard symplectic form for n modes, interleaved quadrature ordering
/// (q1,p1,...,qn,pn): block-diagonal copies of [[0,1],[-1,0]].
Matrix symplectic_form(int n_modes);

struct SymplecticMatrix {
    Matrix entries;
    int mode_count = 0;

    /// || S Omega S^T - Omega ||_inf
    double symplectic_defect() const;
    bool is_symplectic(double tol = 1e-10) const { return symplectic_defect() <= tol; }
    SymplecticMatrix inverse() const;
};

/// Gaussian state in the vacuum-variance-one convention: vacuum has
/// cov = identity, mean = 0.
struct CovarianceState {
    Vector mean;
    Matrix cov;

    static CovarianceState vacuum(int n_modes);
    int mode_count() const { return static_cast<int>(mean.size()) / 2; }

    /// Checks symmetry and physicality (cov + i*Omega >= 0).
    void validate(double sym_tol = 1e-12, double phys_tol = 1e-9) const;
};

struct GaussianChannel {
    Matrix X;
    Matrix Y;

    /// Smallest eigenvalue of Y + i*Omega - i*X*Omega*X^T; >= -tol for a
    /// completely positive channel. Only meaningful for exact channels --
    /// the perturbative interaction is not CP at finite eta by construction.
    double cp_defect() const;
};

/// delta-Y_th of the echo sequence, partitioned into its idler/signal blocks.
/// The stored blocks are those of delta-Y_th itself (idler_block = beta eta_up
/// beta, signal_block = alpha eta_down alpha); cross_block holds the
/// full-strength interference term -alpha (eta_up + eta_down) beta, of which
/// the actual off-diagonal block of delta-Y_th is one half.
struct ThermalPerturbation {
    Matrix signal_block;
    Matrix idler_block;
    Matrix cross_block;
    Matrix alpha;
    Matrix beta;

    /// Reassembles delta-Y_th in the (idler, signal) block ordering.
    Matrix delta_y() const;
};

/// Pairwise two-mode squeezer on `pairs` signal-idler pairs. The returned
/// matrix acts on 2*pairs modes with the idler block first:
/// S = [[alpha, beta],[beta, alpha]], alpha = direct sum of cosh(r_i) I2,
/// beta = direct sum of sinh(r_i) R(phi_i), R(phi) = [[cos,sin],[sin,-cos]].
SymplecticMatrix two_mode_squeezer(const std::vector<double>& r,
                                   const std::vector<double>& phi);

CovarianceState apply_channel(const GaussianChannel& ch, const CovarianceState& st);

/// First-order interaction channel acting on the signal block (second block)
/// of a 2-pair-block system: X_S = I + (eta_down - eta_up)/2, Y_S =
/// eta_down + eta_up; identity on the idler block. eta matrices are given in
/// quadrature covariance units on the signal quadratures.
GaussianChannel perturbative_interaction(const Matrix& eta_up, const Matrix& eta_down);

/// Exact single-shot loss (transmittance e^-gamma) on the signal block only.
GaussianChannel exact_loss_signal(double gamma, int pairs);
/// Exact quantum-limited amplifier (gain e^gamma) on the signal block only.
GaussianChannel exact_amp_signal(double gamma, int pairs);

/// Squeeze -> interact -> unsqueeze. Returns the output covariance state and
/// the extracted thermal perturbation delta-Y_th = (Sigma3 - I)/2 with its
/// closed-form blocks. The interaction must leave the idler block untouched.
std::pair<CovarianceState, ThermalPerturbation> echo_sequence(
    const std::vector<double>& r, const std::vector<double>& phi,
    const GaussianChannel& interaction);

/// First-order decomposition of a near-vacuum thermal state:
/// rho ~= vacuum_weight * |0><0| + sum_ij gamma_ij a_j^dag |0><0| a_i.
/// Throws if anomalous <a a> correlators exceed `anomalous_tol` (squeezed
/// residual: the perturbative regime is violated).
struct SinglePhotonDecomposition {
    double vacuum_weight;
    Eigen::MatrixXcd coherence;  // gamma_ij = <a_i^dag a_j>
};
SinglePhotonDecomposition single_photon_decompose(const CovarianceState& st,
                                                  double anomalous_tol = 1e-8);

}  // namespace eqi::gaussian
