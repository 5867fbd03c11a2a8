#include "eqi/scene.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <stdexcept>

namespace eqi::scene {

namespace {

constexpr double kPi = std::numbers::pi;

/// Normalized Hermite value H_k(x)/sqrt(2^k k!) via the stable three-term
/// recurrence (values stay O(poly) instead of overflowing).
double hermite_normalized(int k, double x) {
    double hm1 = 0.0, h = 1.0;
    for (int j = 0; j < k; ++j) {
        const double next = x * std::sqrt(2.0 / (j + 1)) * h - std::sqrt(j / (j + 1.0)) * hm1;
        hm1 = h;
        h = next;
    }
    return h;
}

/// Orthonormal Hermite function h_k(t) = H_k(t) e^{-t^2/2} / sqrt(2^k k! sqrt(pi)).
double hermite_function(int k, double t) {
    return hermite_normalized(k, t) * std::exp(-0.5 * t * t) / std::pow(kPi, 0.25);
}

}  // namespace

double GaussianPSF::value(double u) const {
    if (sigma <= 0.0) throw std::invalid_argument("GaussianPSF: sigma must be positive");
    return std::exp(-u * u / (4.0 * sigma * sigma)) / std::pow(2.0 * kPi * sigma * sigma, 0.25);
}

double hg_mode(int k, double sigma, double u) {
    if (k < 0) throw std::invalid_argument("hg_mode: k must be >= 0");
    if (sigma <= 0.0) throw std::invalid_argument("hg_mode: sigma must be positive");
    const double t = u / (std::sqrt(2.0) * sigma);
    return std::pow(2.0 * kPi * sigma * sigma, -0.25) * hermite_normalized(k, t) *
           std::exp(-u * u / (4.0 * sigma * sigma));
}

Vector displaced_psf_coeffs(double y, double sigma, int K) {
    if (sigma <= 0.0) throw std::invalid_argument("displaced_psf_coeffs: sigma must be positive");
    if (K <= 0) throw std::invalid_argument("displaced_psf_coeffs: K must be positive");
    Vector c(K);
    const double envelope = std::exp(-y * y / (4.0 * sigma * sigma));
    double term = envelope;  // (y/sigma)^k / sqrt(2^k k!) accumulated iteratively
    for (int k = 0; k < K; ++k) {
        c(k) = term;
        term *= (y / sigma) / std::sqrt(2.0 * (k + 1));
    }
    return c;
}

void Scene::validate() const {
    if (sigma <= 0.0) throw std::invalid_argument("scene: sigma must be positive");
    if (rate < 0.0) throw std::invalid_argument("scene: rate must be >= 0");
    if (sources.empty()) throw std::invalid_argument("scene: at least one source required");
    for (const auto& s : sources)
        if (s.weight < 0.0) throw std::invalid_argument("scene: weights must be >= 0");
    if (kind == SceneKind::emission) {
        double wsum = 0.0;
        for (const auto& s : sources) wsum += s.weight;
        if (std::abs(wsum - 1.0) > 1e-10)
            throw std::invalid_argument("scene: emission weights must sum to 1");
        if (rate >= 0.5)
            std::cerr << "scene: warning, epsilon = " << rate
                      << " outside the perturbative regime (< 0.5 expected)\n";
    }
    if (correlation != 0.0 && (correlation < 0.0 || correlation > 1.0))
        throw std::invalid_argument("scene: correlation must be in [0, 1]");
    if (correlation != 0.0 && sources.size() != 2)
        throw std::invalid_argument("scene: correlation supported for two-source scenes only");
}

double Scene::two_point_separation(double tol) const {
    if (sources.size() != 2) throw std::invalid_argument("scene: not a two-point scene");
    if (std::abs(sources[0].x + sources[1].x) > tol ||
        std::abs(sources[0].weight - sources[1].weight) > tol)
        throw std::invalid_argument("scene: two-point scene must be centered and balanced");
    return std::abs(sources[0].x - sources[1].x);
}

ModeBasis ModeBasis::hg(double sigma, int K) {
    ModeBasis b;
    b.kind = Kind::hg;
    b.sigma = sigma;
    b.truncation = K;
    return b;
}

Matrix ModeBasis::gram() const {
    if (kind != Kind::hg) throw std::invalid_argument("gram: implemented for HG bases");
    Vector u, w;
    gauss_hermite_sigma(sigma, u, w);
    Matrix psi(truncation, u.size());
    for (int k = 0; k < truncation; ++k)
        for (Eigen::Index i = 0; i < u.size(); ++i) psi(k, i) = hg_mode(k, sigma, u(i));
    return psi * w.asDiagonal() * psi.transpose();
}

Matrix coherence_matrix(const Scene& sc, const ModeBasis& basis) {
    sc.validate();
    if (basis.kind != ModeBasis::Kind::hg)
        throw std::invalid_argument("coherence_matrix: HG basis required (use direct detection "
                                    "helpers for pixel readout)");
    if (std::abs(basis.sigma - sc.sigma) > 1e-12)
        throw std::invalid_argument("coherence_matrix: basis/PSF sigma mismatch");
    const int K = basis.truncation;
    Matrix gamma = Matrix::Zero(K, K);
    std::vector<Vector> coeffs;
    for (const auto& src : sc.sources)
        coeffs.push_back(displaced_psf_coeffs(src.x, sc.sigma, K));
    for (size_t m = 0; m < sc.sources.size(); ++m)
        gamma += sc.rate * sc.sources[m].weight * coeffs[m] * coeffs[m].transpose();
    if (sc.correlation != 0.0) {
        const double f = sc.correlation * sc.rate *
                         std::sqrt(sc.sources[0].weight * sc.sources[1].weight);
        gamma += f * (coeffs[0] * coeffs[1].transpose() + coeffs[1] * coeffs[0].transpose());
    }
    return gamma;
}

Matrix propagate_kernel(const Matrix& gamma_xx, const Vector& wx, const Matrix& K_prop) {
    if (gamma_xx.rows() != wx.size() || K_prop.rows() != wx.size())
        throw std::invalid_argument("propagate_kernel: grid mismatch");
    const Matrix weighted = wx.asDiagonal() * K_prop;
    return weighted.transpose() * gamma_xx * weighted;
}

Matrix psf_propagator(const GaussianPSF& psf, const Vector& x_nodes, const Vector& u_nodes) {
    Matrix K(x_nodes.size(), u_nodes.size());
    for (Eigen::Index i = 0; i < x_nodes.size(); ++i)
        for (Eigen::Index j = 0; j < u_nodes.size(); ++j)
            K(i, j) = psf.value(u_nodes(j) - x_nodes(i));
    return K;
}

ParityDecomposition parity_eigenmodes(const Scene& sc, int K) {
    sc.validate();
    const double d = sc.two_point_separation();
    const double g = std::exp(-d * d / (4.0 * sc.sigma * sc.sigma));
    const double pref = sc.kind == SceneKind::emission ? 0.5 * sc.rate : sc.rate;
    const double cplus = 1.0 + sc.correlation;
    const double cminus = 1.0 - sc.correlation;

    const Vector cp = displaced_psf_coeffs(0.5 * d, sc.sigma, K);
    const Vector cm = displaced_psf_coeffs(-0.5 * d, sc.sigma, K);
    Vector vp = cp + cm;
    Vector vm = cp - cm;
    if (vp.norm() > 0.0) vp.normalize();
    if (vm.norm() > 0.0) vm.normalize();
    return ParityDecomposition{pref * cplus * (1.0 + g), pref * cminus * (1.0 - g), vp, vm};
}

std::pair<double, double> even_subspace_eigenvalues(double d, double sigma, double eps) {
    if (sigma <= 0.0) throw std::invalid_argument("even_subspace_eigenvalues: sigma must be positive");
    const double s2 = d * d / (sigma * sigma);
    const double a = eps * (1.0 - s2 / 8.0);
    const double b = eps * s2 / (8.0 * std::sqrt(2.0));
    const double disc = std::sqrt(a * a + 4.0 * b * b);
    return {0.5 * (a + disc), 0.5 * (disc - a)};
}

void gauss_hermite_sigma(double sigma, Vector& nodes, Vector& weights, int n) {
    if (sigma <= 0.0) throw std::invalid_argument("gauss_hermite_sigma: sigma must be positive");
    // Golub-Welsch: Jacobi matrix for the e^{-t^2} weight has off-diagonals
    // sqrt(k/2); eigenvalues are the nodes.
    Matrix J = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        J(k, k - 1) = std::sqrt(0.5 * k);
        J(k - 1, k) = J(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(J);
    const Vector t = es.eigenvalues();
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes(i) = std::sqrt(2.0) * sigma * t(i);
        // Total weight including the e^{+t^2} de-weighting, via the
        // orthonormal Hermite function identity w~ = 1/(n h_{n-1}(t)^2);
        // stays finite where the naive formula overflows.
        const double h = hermite_function(n - 1, t(i));
        weights(i) = std::sqrt(2.0) * sigma / (n * h * h);
    }
}

}  // namespace eqi::scene
