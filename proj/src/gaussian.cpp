#include "eqi/gaussian.hpp"

#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>

namespace eqi::gaussian {

namespace {

using Eigen::MatrixXcd;
const std::complex<double> kI(0.0, 1.0);

Matrix rotation_like(double phi) {
    Matrix R(2, 2);
    R << std::cos(phi), std::sin(phi), std::sin(phi), -std::cos(phi);
    return R;
}

double min_eig_hermitian(const MatrixXcd& H) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void require_psd(const Matrix& m, const char* name, double tol = 1e-12) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(name) + " must be square");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
        throw std::invalid_argument(std::string(name) + " must be positive semidefinite");
}

}  // namespace

Matrix symplectic_form(int n_modes) {
    if (n_modes <= 0) throw std::invalid_argument("symplectic_form: n_modes must be positive");
    Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
    for (int k = 0; k < n_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

double SymplecticMatrix::symplectic_defect() const {
    const Matrix omega = symplectic_form(mode_count);
    return (entries * omega * entries.transpose() - omega).cwiseAbs().maxCoeff();
}

SymplecticMatrix SymplecticMatrix::inverse() const {
    // S^-1 = Omega^T S^T Omega for symplectic S; cheaper and better
    // conditioned than a general inverse.
    const Matrix omega = symplectic_form(mode_count);
    return SymplecticMatrix{omega.transpose() * entries.transpose() * omega, mode_count};
}

CovarianceState CovarianceState::vacuum(int n_modes) {
    return CovarianceState{Vector::Zero(2 * n_modes), Matrix::Identity(2 * n_modes, 2 * n_modes)};
}

void CovarianceState::validate(double sym_tol, double phys_tol) const {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw std::invalid_argument("CovarianceState: mean/cov dimension mismatch");
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > sym_tol)
        throw std::runtime_error("CovarianceState: covariance not symmetric");
    const Matrix omega = symplectic_form(mode_count());
    const MatrixXcd H = cov.cast<std::complex<double>>() + kI * omega.cast<std::complex<double>>();
    if (min_eig_hermitian(H) < -phys_tol)
        throw std::runtime_error("CovarianceState: cov + i*Omega not positive semidefinite");
}

double GaussianChannel::cp_defect() const {
    const int n = static_cast<int>(X.rows()) / 2;
    const Matrix omega = symplectic_form(n);
    const MatrixXcd H = Y.cast<std::complex<double>>() +
                        kI * (omega - X * omega * X.transpose()).cast<std::complex<double>>();
    return min_eig_hermitian(H);
}

Matrix ThermalPerturbation::delta_y() const {
    const auto n = idler_block.rows();
    Matrix dy(2 * n, 2 * n);
    dy.topLeftCorner(n, n) = idler_block;
    dy.bottomRightCorner(n, n) = signal_block;
    dy.bottomLeftCorner(n, n) = 0.5 * cross_block;
    dy.topRightCorner(n, n) = 0.5 * cross_block.transpose();
    return dy;
}

SymplecticMatrix two_mode_squeezer(const std::vector<double>& r, const std::vector<double>& phi) {
    if (r.size() != phi.size())
        throw std::invalid_argument("two_mode_squeezer: r and phi must have equal length");
    if (r.empty()) throw std::invalid_argument("two_mode_squeezer: need at least one pair");
    for (double ri : r)
        if (!std::isfinite(ri)) throw std::invalid_argument("two_mode_squeezer: non-finite r");

    const int pairs = static_cast<int>(r.size());
    const int nb = 2 * pairs;  // quadratures per sector
    Matrix alpha = Matrix::Zero(nb, nb);
    Matrix beta = Matrix::Zero(nb, nb);
    for (int i = 0; i < pairs; ++i) {
        alpha.block<2, 2>(2 * i, 2 * i) = std::cosh(r[i]) * Matrix::Identity(2, 2);
        beta.block<2, 2>(2 * i, 2 * i) = std::sinh(r[i]) * rotation_like(phi[i]);
    }
    Matrix S(2 * nb, 2 * nb);
    S.topLeftCorner(nb, nb) = alpha;
    S.topRightCorner(nb, nb) = beta;
    S.bottomLeftCorner(nb, nb) = beta;
    S.bottomRightCorner(nb, nb) = alpha;
    return SymplecticMatrix{S, 2 * pairs};
}

CovarianceState apply_channel(const GaussianChannel& ch, const CovarianceState& st) {
    if (ch.X.rows() != st.cov.rows() || ch.Y.rows() != st.cov.rows())
        throw std::invalid_argument("apply_channel: dimension mismatch");
    return CovarianceState{ch.X * st.mean, ch.X * st.cov * ch.X.transpose() + ch.Y};
}

GaussianChannel perturbative_interaction(const Matrix& eta_up, const Matrix& eta_down) {
    if (eta_up.rows() != eta_down.rows())
        throw std::invalid_argument("perturbative_interaction: eta dimension mismatch");
    require_psd(eta_up, "eta_up");
    require_psd(eta_down, "eta_down");
    const auto nb = eta_up.rows();
    if (nb % 2 != 0)
        throw std::invalid_argument("perturbative_interaction: eta must cover whole modes");
    const double scale = std::max(eta_up.cwiseAbs().maxCoeff(), eta_down.cwiseAbs().maxCoeff());
    if (scale > 0.1)
        std::cerr << "perturbative_interaction: warning, ||eta|| = " << scale
                  << " exceeds the perturbative regime (expected << 1)\n";

    GaussianChannel ch;
    ch.X = Matrix::Identity(2 * nb, 2 * nb);
    ch.Y = Matrix::Zero(2 * nb, 2 * nb);
    ch.X.bottomRightCorner(nb, nb) += 0.5 * (eta_down - eta_up);
    ch.Y.bottomRightCorner(nb, nb) = eta_down + eta_up;
    return ch;
}

GaussianChannel exact_loss_signal(double gamma, int pairs) {
    if (gamma < 0.0) throw std::invalid_argument("exact_loss_signal: gamma must be >= 0");
    const int nb = 2 * pairs;
    const double eta = std::exp(-gamma);
    GaussianChannel ch;
    ch.X = Matrix::Identity(2 * nb, 2 * nb);
    ch.Y = Matrix::Zero(2 * nb, 2 * nb);
    ch.X.bottomRightCorner(nb, nb) = std::sqrt(eta) * Matrix::Identity(nb, nb);
    ch.Y.bottomRightCorner(nb, nb) = (1.0 - eta) * Matrix::Identity(nb, nb);
    return ch;
}

GaussianChannel exact_amp_signal(double gamma, int pairs) {
    if (gamma < 0.0) throw std::invalid_argument("exact_amp_signal: gamma must be >= 0");
    const int nb = 2 * pairs;
    const double G = std::exp(gamma);
    GaussianChannel ch;
    ch.X = Matrix::Identity(2 * nb, 2 * nb);
    ch.Y = Matrix::Zero(2 * nb, 2 * nb);
    ch.X.bottomRightCorner(nb, nb) = std::sqrt(G) * Matrix::Identity(nb, nb);
    ch.Y.bottomRightCorner(nb, nb) = (G - 1.0) * Matrix::Identity(nb, nb);
    return ch;
}

std::pair<CovarianceState, ThermalPerturbation> echo_sequence(
    const std::vector<double>& r, const std::vector<double>& phi,
    const GaussianChannel& interaction) {
    const SymplecticMatrix S = two_mode_squeezer(r, phi);
    const auto dim = S.entries.rows();
    const auto nb = dim / 2;
    if (interaction.X.rows() != dim)
        throw std::invalid_argument("echo_sequence: interaction dimension mismatch");

    // The interaction must be restricted to the signal (second) block.
    Matrix xres = interaction.X - Matrix::Identity(dim, dim);
    Matrix yres = interaction.Y;
    xres.bottomRightCorner(nb, nb).setZero();
    yres.bottomRightCorner(nb, nb).setZero();
    if (xres.cwiseAbs().maxCoeff() > 1e-14 || yres.cwiseAbs().maxCoeff() > 1e-14)
        throw std::invalid_argument("echo_sequence: interaction touches the idler block");

    const Matrix sigma1 = S.entries * S.entries.transpose();
    const CovarianceState mid =
        apply_channel(interaction, CovarianceState{Vector::Zero(dim), sigma1});
    const Matrix sinv = S.inverse().entries;
    const Matrix sigma3 = sinv * mid.cov * sinv.transpose();

    // Effective first-order rates recovered from the channel's signal blocks:
    // X_S = I + (eta_down - eta_up)/2, Y_S = eta_down + eta_up.
    const Matrix xs = interaction.X.bottomRightCorner(nb, nb) - Matrix::Identity(nb, nb);
    const Matrix ys = interaction.Y.bottomRightCorner(nb, nb);
    const Matrix eta_down = 0.5 * ys + xs;
    const Matrix eta_up = 0.5 * ys - xs;

    const Matrix alpha = S.entries.topLeftCorner(nb, nb);
    const Matrix beta = S.entries.topRightCorner(nb, nb);

    ThermalPerturbation tp;
    tp.alpha = alpha;
    tp.beta = beta;
    tp.idler_block = beta * eta_up * beta;
    tp.signal_block = alpha * eta_down * alpha;
    tp.cross_block = -alpha * (eta_up + eta_down) * beta;

    return {CovarianceState{Vector::Zero(dim), sigma3}, tp};
}

SinglePhotonDecomposition single_photon_decompose(const CovarianceState& st,
                                                  double anomalous_tol) {
    if (st.mean.cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("single_photon_decompose: state must have zero mean");
    const int n = st.mode_count();
    const Matrix yp = st.cov - Matrix::Identity(2 * n, 2 * n);

    MatrixXcd gamma(n, n);
    double max_anomalous = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double qq = yp(2 * i, 2 * j);
            const double pp = yp(2 * i + 1, 2 * j + 1);
            const double qp = yp(2 * i, 2 * j + 1);
            const double pq = yp(2 * i + 1, 2 * j);
            gamma(i, j) = 0.25 * std::complex<double>(qq + pp, qp - pq);
            max_anomalous = std::max(max_anomalous, std::abs(0.25 * std::complex<double>(qq - pp, qp + pq)));
        }
    }
    if (max_anomalous > anomalous_tol)
        throw std::runtime_error(
            "single_photon_decompose: anomalous <aa> correlators of magnitude " +
            std::to_string(max_anomalous) + " exceed tolerance (squeezed residual)");
    return SinglePhotonDecomposition{1.0 - gamma.trace().real(), gamma};
}

}  // namespace eqi::gaussian
