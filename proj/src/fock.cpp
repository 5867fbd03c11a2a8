#include "eqi/fock.hpp"

#include <cmath>
#include <complex>
#include <iostream>
#include <stdexcept>

namespace eqi::fock {

namespace {

using std::complex;
const complex<double> kI(0.0, 1.0);

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// sqrt(binomial(m, n)) computed in log space for stability.
double sqrt_binom(int m, int n) {
    return std::exp(0.5 * (log_factorial(m) - log_factorial(n) - log_factorial(m - n)));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

long ipow(long base, int exp) {
    long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

}  // namespace

long FockDensityMatrix::dim() const { return ipow(dim_per_mode(), modes); }

FockDensityMatrix FockDensityMatrix::vacuum(int modes, int cutoff) {
    FockDensityMatrix st;
    st.modes = modes;
    st.cutoff = cutoff;
    st.rho = CMatrix::Zero(st.dim(), st.dim());
    st.rho(0, 0) = 1.0;
    return st;
}

FockDensityMatrix FockDensityMatrix::number_state(const std::vector<int>& ns, int cutoff) {
    FockDensityMatrix st;
    st.modes = static_cast<int>(ns.size());
    st.cutoff = cutoff;
    long idx = 0;
    for (int n : ns) {
        if (n < 0 || n > cutoff)
            throw std::invalid_argument("number_state: occupation outside [0, cutoff]");
        idx = idx * st.dim_per_mode() + n;
    }
    st.rho = CMatrix::Zero(st.dim(), st.dim());
    st.rho(idx, idx) = 1.0;
    return st;
}

FockDensityMatrix FockDensityMatrix::coherent(double alpha, int cutoff) {
    FockDensityMatrix st;
    st.modes = 1;
    st.cutoff = cutoff;
    if (alpha < 0.0) throw std::invalid_argument("coherent: alpha must be >= 0");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(cutoff + 1);
    if (alpha == 0.0) {
        psi(0) = 1.0;
    } else {
        for (int n = 0; n <= cutoff; ++n)
            psi(n) = std::exp(n * std::log(alpha) - 0.5 * log_factorial(n) - 0.5 * alpha * alpha);
    }
    psi.normalize();
    st.rho = psi * psi.adjoint();
    return st;
}

void FockDensityMatrix::validate(double min_eig_tol) const {
    if (rho.rows() != dim())
        throw std::runtime_error("FockDensityMatrix: dimension inconsistent with modes/cutoff");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::runtime_error("FockDensityMatrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -min_eig_tol)
        throw std::runtime_error("FockDensityMatrix: eigenvalue " +
                                 std::to_string(es.eigenvalues().minCoeff()) +
                                 " below tolerance");
}

void FockDensityMatrix::clip_and_renormalize(double tol) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -tol)
        throw std::runtime_error("FockDensityMatrix: eigenvalue " + std::to_string(ev.minCoeff()) +
                                 " below clipping tolerance " + std::to_string(-tol));
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = std::max(ev(i), 0.0);
    const double tr = ev.sum();
    if (tr <= 0.0) throw std::runtime_error("FockDensityMatrix: zero trace after clipping");
    ev /= tr / rho.trace().real();
    rho = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix annihilation(int cutoff) {
    CMatrix a = CMatrix::Zero(cutoff + 1, cutoff + 1);
    for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

CMatrix embed(const CMatrix& op, int mode, int modes, int cutoff) {
    if (mode < 0 || mode >= modes) throw std::invalid_argument("embed: invalid mode index");
    const long d = cutoff + 1;
    CMatrix out = CMatrix::Identity(ipow(d, mode), ipow(d, mode));
    out = kron(out, op);
    const long after = ipow(d, modes - mode - 1);
    return kron(out, CMatrix::Identity(after, after));
}

double KrausChannel::completeness_defect(int headroom) const {
    if (operators.empty()) throw std::runtime_error("KrausChannel: no operators");
    const auto dim = operators.front().rows();
    CMatrix sum = CMatrix::Zero(dim, dim);
    for (const auto& K : operators) sum += K.adjoint() * K;
    const auto keep = dim - headroom;
    return (sum.topLeftCorner(keep, keep) - CMatrix::Identity(keep, keep)).cwiseAbs().maxCoeff();
}

KrausChannel complete_truncated(KrausChannel ch) {
    if (ch.operators.empty()) throw std::runtime_error("complete_truncated: no operators");
    const auto dim = ch.operators.front().rows();
    CMatrix sum = CMatrix::Zero(dim, dim);
    for (const auto& K : ch.operators) sum += K.adjoint() * K;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(CMatrix::Identity(dim, dim) - sum));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    ch.operators.push_back(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
    ch.label += " (completed)";
    return ch;
}

KrausChannel loss_kraus(double eta, int n_max) {
    if (eta <= 0.0 || eta > 1.0) throw std::invalid_argument("loss_kraus: eta must be in (0, 1]");
    KrausChannel ch;
    ch.label = "loss eta=" + std::to_string(eta);
    const int d = n_max + 1;
    for (int n = 0; n <= n_max; ++n) {
        CMatrix K = CMatrix::Zero(d, d);
        for (int m = n; m <= n_max; ++m)
            K(m - n, m) = sqrt_binom(m, n) * std::pow(1.0 - eta, 0.5 * n) *
                          std::pow(eta, 0.5 * (m - n));
        ch.operators.push_back(K);
    }
    return ch;
}

KrausChannel amp_kraus(double G, int n_max) {
    if (G < 1.0) throw std::invalid_argument("amp_kraus: G must be >= 1");
    KrausChannel ch;
    ch.label = "amp G=" + std::to_string(G);
    const int d = n_max + 1;
    for (int n = 0; n <= n_max; ++n) {
        CMatrix K = CMatrix::Zero(d, d);
        for (int m = 0; m + n <= n_max; ++m)
            K(m + n, m) = std::sqrt(1.0 / G) * std::pow((G - 1.0) / G, 0.5 * n) *
                          sqrt_binom(m + n, n) * std::pow(G, -0.5 * m);
        ch.operators.push_back(K);
    }
    return ch;
}

std::vector<KrausChannel> agn_channel(double gamma, int n_max) {
    if (gamma < 0.0) throw std::invalid_argument("agn_channel: gamma must be >= 0");
    const double G = 1.0 + gamma;
    return {loss_kraus(1.0 / G, n_max), amp_kraus(G, n_max)};
}

FockDensityMatrix apply_kraus(const KrausChannel& ch, const FockDensityMatrix& st, int mode) {
    FockDensityMatrix out = st;
    out.rho.setZero();
    for (const auto& K : ch.operators) {
        const CMatrix Kfull = embed(K, mode, st.modes, st.cutoff);
        out.rho += Kfull * st.rho * Kfull.adjoint();
    }
    return out;
}

FockDensityMatrix apply_interaction_map(const FockDensityMatrix& st,
                                        const CMatrix& gamma_up, const CMatrix& gamma_down) {
    const int K = st.modes;
    if (gamma_up.rows() != K || gamma_down.rows() != K)
        throw std::invalid_argument("apply_interaction_map: rate matrix dimension mismatch");
    if ((gamma_up - gamma_up.adjoint()).cwiseAbs().maxCoeff() > 1e-12 ||
        (gamma_down - gamma_down.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("apply_interaction_map: rate matrices must be Hermitian");

    std::vector<CMatrix> a;
    for (int k = 0; k < K; ++k) a.push_back(embed(annihilation(st.cutoff), k, K, st.cutoff));

    FockDensityMatrix out = st;
    for (int l = 0; l < K; ++l) {
        for (int k = 0; k < K; ++k) {
            const auto gu = gamma_up(l, k);
            const auto gd = gamma_down(l, k);
            if (std::abs(gu) > 0.0) {
                const CMatrix jump = a[k] * st.rho * a[l].adjoint();
                const CMatrix num = a[l].adjoint() * a[k];
                out.rho += gu * (jump - 0.5 * (num * st.rho + st.rho * num));
            }
            if (std::abs(gd) > 0.0) {
                const CMatrix jump = a[l].adjoint() * st.rho * a[k];
                const CMatrix num = a[k] * a[l].adjoint();
                out.rho += gd * (jump - 0.5 * (num * st.rho + st.rho * num));
            }
        }
    }
    return out;
}

CMatrix two_mode_squeeze_unitary(double r, int cutoff) {
    const int d = cutoff + 1;
    const CMatrix a = kron(annihilation(cutoff), CMatrix::Identity(d, d));
    const CMatrix b = kron(CMatrix::Identity(d, d), annihilation(cutoff));
    const CMatrix gen = r * (a.adjoint() * b.adjoint() - a * b);  // anti-Hermitian
    const CMatrix H = kI * gen;                                   // Hermitian
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    Eigen::VectorXcd phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(-kI * es.eigenvalues()(i));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double unitarity_defect(const CMatrix& U) {
    return (U.adjoint() * U - CMatrix::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

FockDensityMatrix apply_unitary(const CMatrix& U, const FockDensityMatrix& st) {
    if (U.rows() != st.dim()) throw std::invalid_argument("apply_unitary: dimension mismatch");
    FockDensityMatrix out = st;
    out.rho = U * st.rho * U.adjoint();
    return out;
}

namespace {

CMatrix psd_sqrt(const CMatrix& H) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const FockDensityMatrix& a, const FockDensityMatrix& b) {
    if (a.rho.rows() != b.rho.rows()) throw std::invalid_argument("fidelity: dimension mismatch");
    const CMatrix sr = psd_sqrt(a.rho);
    const CMatrix inner = sr * b.rho * sr;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(inner, Eigen::EigenvaluesOnly);
    double tr = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        tr += std::sqrt(std::max(es.eigenvalues()(i), 0.0));
    return tr * tr;
}

QfiEstimate qfi_numeric(const std::function<FockDensityMatrix(double)>& rho_fn,
                        double theta, double dtheta) {
    const double h = dtheta > 0.0 ? dtheta : std::max(1e-3 * std::abs(theta), 1e-6);
    auto estimate = [&](double step) {
        FockDensityMatrix lo = rho_fn(theta - 0.5 * step);
        FockDensityMatrix hi = rho_fn(theta + 0.5 * step);
        lo.clip_and_renormalize();
        hi.clip_and_renormalize();
        const double f = fidelity(lo, hi);
        return 8.0 * (1.0 - std::sqrt(std::min(f, 1.0))) / (step * step);
    };
    const double coarse = estimate(h);
    const double fine = estimate(0.5 * h);
    // Richardson extrapolation in h^2.
    const double value = (4.0 * fine - coarse) / 3.0;
    return QfiEstimate{value, std::abs(fine - coarse) / 3.0};
}

CountDistribution measure_counts(const FockDensityMatrix& st, const std::vector<int>& mode_subset) {
    for (int m : mode_subset)
        if (m < 0 || m >= st.modes) throw std::invalid_argument("measure_counts: invalid mode index");
    const long d = st.dim_per_mode();
    // Accumulate diagonal weight per joint occupation of the subset.
    std::vector<std::pair<std::string, double>> acc;
    std::vector<long> strides(st.modes);
    for (int m = 0; m < st.modes; ++m) strides[m] = ipow(d, st.modes - m - 1);

    std::vector<double> weights(ipow(d, static_cast<int>(mode_subset.size())), 0.0);
    for (long idx = 0; idx < st.dim(); ++idx) {
        long key = 0;
        for (int m : mode_subset) key = key * d + (idx / strides[m]) % d;
        weights[key] += st.rho(idx, idx).real();
    }
    CountDistribution dist;
    for (long key = 0; key < static_cast<long>(weights.size()); ++key) {
        std::string label;
        long rem = key;
        for (size_t i = 0; i < mode_subset.size(); ++i) {
            const long digit = rem / ipow(d, static_cast<int>(mode_subset.size() - i - 1));
            rem %= ipow(d, static_cast<int>(mode_subset.size() - i - 1));
            label += (i ? "," : "") + std::to_string(digit);
        }
        dist.outcomes.emplace_back(label, weights[key]);
    }
    return dist;
}

}  // namespace eqi::fock
