#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eqi/scene.hpp"

using namespace eqi::scene;

namespace {

Scene two_point(double d, double eps, double sigma = 1.0) {
    return Scene{{{0.5 * d, 0.5}, {-0.5 * d, 0.5}}, SceneKind::emission, eps, sigma, 0.0};
}

}  // namespace

TEST_CASE("Hermite-Gaussian modes") {
    SUBCASE("fundamental at the origin") {
        CHECK(hg_mode(0, 1.0, 0.0) == doctest::Approx(std::pow(2.0 * M_PI, -0.25)).epsilon(1e-12));
        CHECK(hg_mode(0, 1.0, 0.0) == doctest::Approx(0.6316).epsilon(1e-4));
    }
    SUBCASE("odd mode vanishes at the origin") {
        CHECK(std::abs(hg_mode(1, 1.0, 0.0)) < 1e-14);
        CHECK(std::abs(hg_mode(3, 2.0, 0.0)) < 1e-14);
    }
    SUBCASE("orthonormality under quadrature") {
        const auto G = ModeBasis::hg(1.0, 8).gram();
        CHECK((G - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("PSF normalization") {
        GaussianPSF psf{0.7};
        Vector nodes, weights;
        gauss_hermite_sigma(psf.sigma, nodes, weights);
        double norm = 0.0;
        for (int i = 0; i < nodes.size(); ++i)
            norm += weights(i) * psf.value(nodes(i)) * psf.value(nodes(i));
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("displaced PSF coefficients") {
    SUBCASE("no displacement") {
        const Vector c = displaced_psf_coeffs(0.0, 1.0, 6);
        CHECK(c(0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(c.tail(5).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("displacement by one sigma") {
        const Vector c = displaced_psf_coeffs(1.0, 1.0, 6);
        CHECK(c(0) == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
        CHECK(c(0) == doctest::Approx(0.7788).epsilon(1e-4));
        CHECK(c(1) == doctest::Approx(std::exp(-0.25) / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(c(1) == doctest::Approx(0.5507).epsilon(1e-4));
    }
    SUBCASE("completeness at K = 20") {
        const Vector c = displaced_psf_coeffs(1.0, 1.0, 20);
        CHECK(std::abs(c.squaredNorm() - 1.0) < 1e-10);
    }
    SUBCASE("coefficients match quadrature overlaps") {
        // The closed-form coefficients use the convention where the mode
        // functions are a factor sqrt(2) narrower than the PSF; equivalently
        // they equal the equal-width overlap integral evaluated at sqrt(2)
        // times the displacement.  Validate that exact identity.
        const double y = 0.37, sigma = 1.3;
        const Vector c = displaced_psf_coeffs(y, sigma, 6);
        Vector nodes, weights;
        gauss_hermite_sigma(sigma, nodes, weights);
        GaussianPSF psf{sigma};
        const double ys = std::sqrt(2.0) * y;
        for (int k = 0; k < 6; ++k) {
            double overlap = 0.0;
            for (int i = 0; i < nodes.size(); ++i)
                overlap += weights(i) * psf.value(nodes(i) - ys) * hg_mode(k, sigma, nodes(i));
            CHECK(c(k) == doctest::Approx(overlap).epsilon(1e-8));
        }
    }
}

TEST_CASE("coherence matrix of a two-point scene") {
    SUBCASE("reference values at d/sigma = 0.1, eps = 0.01") {
        const auto G = coherence_matrix(two_point(0.1, 0.01), ModeBasis::hg(1.0, 8));
        CHECK(G(0, 0) == doctest::Approx(0.0099875).epsilon(2e-4));
        CHECK(G(1, 1) == doctest::Approx(1.25e-5).epsilon(2e-3));
        CHECK(G(0, 2) == doctest::Approx(8.84e-6).epsilon(2e-3));
    }
    SUBCASE("coincident sources put everything in the fundamental") {
        const auto G = coherence_matrix(two_point(0.0, 0.01), ModeBasis::hg(1.0, 6));
        CHECK(G(0, 0) == doctest::Approx(0.01).epsilon(1e-12));
        CHECK((G.cwiseAbs().sum() - G(0, 0)) < 1e-14);
    }
    SUBCASE("parity selection rule") {
        const auto G = coherence_matrix(two_point(0.3, 0.02), ModeBasis::hg(1.0, 10));
        for (int l = 0; l < 10; ++l)
            for (int k = 0; k < 10; ++k)
                if ((l + k) % 2 == 1) CHECK(std::abs(G(l, k)) <= 1e-12);
    }
    SUBCASE("trace identity") {
        const auto G = coherence_matrix(two_point(0.5, 0.01), ModeBasis::hg(1.0, 20));
        CHECK(std::abs(G.trace() - 0.01) < 1e-6 * 0.01);
    }
    SUBCASE("closed form vs direct quadrature") {
        for (const double d : {0.01, 0.1, 1.0}) {
            const Scene sc = two_point(d, 0.01);
            const auto G = coherence_matrix(sc, ModeBasis::hg(1.0, 6));
            Vector nodes, weights;
            gauss_hermite_sigma(1.0, nodes, weights);
            GaussianPSF psf{1.0};
            for (int l = 0; l < 6; ++l)
                for (int k = 0; k < 6; ++k) {
                    double g = 0.0;
                    for (const auto& src : sc.sources) {
                        // same sqrt(2)-displacement identity as for the
                        // single-source coefficients above
                        const double xs = std::sqrt(2.0) * src.x;
                        double ol = 0.0, ok = 0.0;
                        for (int i = 0; i < nodes.size(); ++i) {
                            ol += weights(i) * psf.value(nodes(i) - xs) *
                                  hg_mode(l, 1.0, nodes(i));
                            ok += weights(i) * psf.value(nodes(i) - xs) *
                                  hg_mode(k, 1.0, nodes(i));
                        }
                        g += sc.rate * src.weight * ol * ok;
                    }
                    CHECK(std::abs(G(l, k) - g) < 1e-8);
                }
        }
    }
}

TEST_CASE("kernel propagation") {
    Vector x_nodes, wx;
    gauss_hermite_sigma(1.0, x_nodes, wx);
    GaussianPSF psf{1.0};
    SUBCASE("single point source sifts to a rank-1 image kernel") {
        // gamma(x,x') = eps delta(x) delta(x'): represent directly as the
        // outer product of the propagated column.
        Vector u(3);
        u << -0.5, 0.0, 0.5;
        const Matrix K = psf_propagator(psf, Vector::Zero(1), u);
        const Matrix G = 0.01 * K.transpose() * K;  // eps phi(u) phi(u')
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(G(i, j) == doctest::Approx(0.01 * psf.value(u(i)) * psf.value(u(j)))
                                     .epsilon(1e-12));
    }
    SUBCASE("correlated pair with C = 1 is rank 1") {
        Scene sc = two_point(0.4, 0.01);
        sc.correlation = 1.0;
        const auto G = coherence_matrix(sc, ModeBasis::hg(1.0, 8));
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        int nonzero = 0;
        for (int i = 0; i < 8; ++i)
            if (es.eigenvalues()(i) > 1e-10) ++nonzero;
        CHECK(nonzero == 1);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
    SUBCASE("propagate_kernel reproduces the two-point coherence") {
        const Scene sc = two_point(0.2, 0.01);
        // emitter-plane delta kernel on the two source positions
        Vector xs(2);
        xs << 0.1, -0.1;
        Matrix gamma_xx = Matrix::Zero(2, 2);
        gamma_xx(0, 0) = gamma_xx(1, 1) = 0.005;
        Vector u(2);
        u << 0.0, 0.3;
        const Matrix K = psf_propagator(psf, xs, u);
        const Matrix G = propagate_kernel(gamma_xx, Vector::Ones(2), K);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double expect =
                    0.005 * (psf.value(u(i) - 0.1) * psf.value(u(j) - 0.1) +
                             psf.value(u(i) + 0.1) * psf.value(u(j) + 0.1));
                CHECK(G(i, j) == doctest::Approx(expect).epsilon(1e-12));
            }
    }
}

TEST_CASE("parity eigenmodes") {
    SUBCASE("antisymmetric eigenvalue, d/sigma = 0.05") {
        const auto pd = parity_eigenmodes(two_point(0.05, 0.01));
        const double expect = 0.01 * 0.05 * 0.05 / 8.0;  // eps d^2 / 8 sigma^2
        CHECK(pd.gamma_minus == doctest::Approx(expect).epsilon(2e-3));
    }
    SUBCASE("coincident sources") {
        const auto pd = parity_eigenmodes(two_point(0.0, 0.01));
        CHECK(std::abs(pd.gamma_minus) < 1e-14);
        CHECK(pd.gamma_plus == doctest::Approx(0.01).epsilon(1e-12));
    }
    SUBCASE("absorption scaling gamma_up d^2 / 4 sigma^2") {
        Scene sc{{{0.025, 1.0}, {-0.025, 1.0}}, SceneKind::absorption, 0.01, 1.0, 0.0};
        const auto pd = parity_eigenmodes(sc);
        CHECK(pd.gamma_minus == doctest::Approx(0.01 * 0.05 * 0.05 / 4.0).epsilon(2e-3));
    }
    SUBCASE("eigenvalues diagonalize the coherence matrix") {
        const Scene sc = two_point(0.3, 0.01);
        const auto pd = parity_eigenmodes(sc);
        const auto G = coherence_matrix(sc, ModeBasis::hg(1.0, 40));
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        const auto ev = es.eigenvalues();
        CHECK(ev(ev.size() - 1) == doctest::Approx(pd.gamma_plus).epsilon(1e-6));
        CHECK(ev(ev.size() - 2) == doctest::Approx(pd.gamma_minus).epsilon(1e-6));
    }
}

TEST_CASE("even-subspace suppressed eigenvalue") {
    SUBCASE("Lambda_plus tracks eps (1 - d^2/8)") {
        const auto [lp, lm] = even_subspace_eigenvalues(0.1, 1.0, 0.01);
        CHECK(lp == doctest::Approx(0.01 * (1.0 - 0.00125)).epsilon(1e-4));
    }
    SUBCASE("quartic suppression exponent") {
        std::vector<double> ds = {0.01, 0.02, 0.04, 0.08, 0.1};
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const double d : ds) {
            const auto [lp, lm] = even_subspace_eigenvalues(d, 1.0, 0.01);
            const double lx = std::log(d), ly = std::log(std::abs(lm));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double n = static_cast<double>(ds.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        CHECK(slope == doctest::Approx(4.0).epsilon(0.025));
    }
}

TEST_CASE("scene validation") {
    CHECK_NOTHROW(two_point(0.1, 0.01).validate());
    Scene bad = two_point(0.1, 0.01);
    bad.sources[0].weight = 0.9;  // weights no longer sum to 1
    CHECK_THROWS(bad.validate());
    Scene neg = two_point(0.1, -0.01);
    CHECK_THROWS(neg.validate());
    CHECK(two_point(0.25, 0.01).two_point_separation() == doctest::Approx(0.25));
    Scene off = two_point(0.1, 0.01);
    off.sources[0].x = 0.2;  // not centered
    CHECK_THROWS(off.two_point_separation());
}
