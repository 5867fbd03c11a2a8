#pragma once

#include <Eigen/Dense>
#include <vector>

namespace eqi::scene {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gaussian point-spread function phi(u) = exp(-u^2/4 sigma^2)/(2 pi sigma^2)^{1/4},
/// normalized so that the integral of phi^2 is 1.
struct GaussianPSF {
    double sigma = 1.0;
    double value(double u) const;
};

/// Hermite-Gaussian mode psi_k matched to a PSF of width sigma.
double hg_mode(int k, double sigma, double u);

/// Expansion coefficients of a PSF displaced by y in the HG basis:
/// c_k(y) = (2^k k!)^{-1/2} (y/sigma)^k exp(-y^2/4 sigma^2).
Vector displaced_psf_coeffs(double y, double sigma, int K);

enum class SceneKind { emission, absorption };

struct Source {
    double x = 0.0;       // position, same length units as sigma
    double weight = 1.0;  // relative weight (emission: weights sum to 1)
};

/// Collection of point sources. For emission scenes `rate` is the total
/// brightness epsilon (weights sum to 1); for absorption scenes `rate` is the
/// per-source absorption rate gamma_up and weights are relative multipliers.
/// `correlation` is the pairwise coefficient C in [0,1] for two-source scenes.
struct Scene {
    std::vector<Source> sources;
    SceneKind kind = SceneKind::emission;
    double rate = 0.0;
    double sigma = 1.0;
    double correlation = 0.0;

    void validate() const;
    /// Centered symmetric two-point scene: returns separation d, throws otherwise.
    double two_point_separation(double tol = 1e-12) const;
};

struct ModeBasis {
    enum class Kind { hg, pixel };
    Kind kind = Kind::hg;
    double sigma = 1.0;
    int truncation = 20;              // HG modes 0..K-1
    std::vector<double> pixel_edges;  // pixel basis only

    static ModeBasis hg(double sigma, int K);
    /// Gram matrix under 200-node Gauss-Hermite quadrature; identity for an
    /// orthonormal basis.
    Matrix gram() const;
};

/// Mode-basis mutual coherence (or absorption) matrix Gamma_{lk} for a scene.
Matrix coherence_matrix(const Scene& sc, const ModeBasis& basis);

/// Propagates an emitter-plane kernel gamma(x,x') sampled on nodes `x` with
/// quadrature weights `wx` through kernel samples K(x,u) (rows: x, cols: u):
/// Gamma(u,u') = sum_{x,x'} wx wx' gamma(x,x') K(x,u) K(x',u').
Matrix propagate_kernel(const Matrix& gamma_xx, const Vector& wx, const Matrix& K_prop);

/// Samples the shift-invariant PSF propagator K(x,u) = phi(u - x).
Matrix psf_propagator(const GaussianPSF& psf, const Vector& x_nodes, const Vector& u_nodes);

struct ParityDecomposition {
    double gamma_plus;
    double gamma_minus;
    Vector sym_mode;      // HG coefficients of the symmetric eigenmode
    Vector antisym_mode;  // HG coefficients of the antisymmetric eigenmode
};

/// Exact symmetric/antisymmetric eigenvalues of the rank-2 coherence of a
/// centered two-point scene: Gamma_± = (rate factor) (1 ± g), with
/// g = <phi(.-d/2), phi(.+d/2)> = exp(-d^2/4 sigma^2).
ParityDecomposition parity_eigenmodes(const Scene& sc, int K = 40);

/// Eigenvalues (Lambda_+, |Lambda_-|) of the even-parity (psi_0, psi_2)
/// subspace with coefficients truncated at second order in d/sigma:
/// Lambda_+ ~= eps (1 - d^2/8 sigma^2) and Lambda_- is suppressed as
/// d^4/sigma^4. (The untruncated even-parity block of a two-point scene is
/// rank 1, so the quartic law is a statement about the truncated expansion.)
std::pair<double, double> even_subspace_eigenvalues(double d, double sigma, double eps);

/// 200-node Gauss-Hermite quadrature scaled to sigma: nodes u_i and weights
/// w_i such that integral f(u) du ~= sum_i w_i f(u_i) for Gaussian-enveloped
/// integrands of width ~sigma.
void gauss_hermite_sigma(double sigma, Vector& nodes, Vector& weights, int n = 200);

}  // namespace eqi::scene
