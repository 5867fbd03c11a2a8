#include "eqi/protocols.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace eqi::protocols {

namespace {

void check_rates(const Matrix& gamma_up, const Matrix& gamma_down, size_t modes,
                 const char* who) {
    if (gamma_up.rows() != static_cast<Eigen::Index>(modes) ||
        gamma_down.rows() != static_cast<Eigen::Index>(modes) ||
        gamma_up.rows() != gamma_up.cols() || gamma_down.rows() != gamma_down.cols())
        throw std::invalid_argument(std::string(who) + ": rate matrix dimension mismatch");
    for (Eigen::Index k = 0; k < gamma_up.rows(); ++k)
        if (gamma_up(k, k) < 0.0 || gamma_down(k, k) < 0.0)
            throw std::invalid_argument(std::string(who) + ": negative diagonal rate");
}

void finish(CountDistribution& dist, const char* who) {
    double total = 0.0;
    for (const auto& [label, p] : dist.outcomes) total += p;
    if (total >= 0.5)
        throw std::invalid_argument(std::string(who) +
                                    ": total click probability " + std::to_string(total) +
                                    " outside the perturbative regime");
    dist.outcomes.insert(dist.outcomes.begin(), {"none", 1.0 - total});
}

double probe_amplification(const ProbeConfig& probe, int mode, bool idler_arm) {
    auto broadcast = [&](const std::vector<double>& v) {
        if (v.empty()) throw std::invalid_argument("spade: probe squeeze parameters missing");
        return v.size() == 1 ? v[0] : v.at(mode);
    };
    switch (probe.kind) {
        case ProbeKind::vacuum:
        case ProbeKind::coherent:
            return idler_arm ? 0.0 : 1.0;
        case ProbeKind::twin_beam_echo: {
            const double r = broadcast(probe.squeeze_r);
            return idler_arm ? std::sinh(r) * std::sinh(r) : std::cosh(r) * std::cosh(r);
        }
        case ProbeKind::fock: {
            if (probe.fock_n.empty())
                throw std::invalid_argument("spade: Fock probe occupations missing");
            const int n = probe.fock_n.size() == 1 ? probe.fock_n[0] : probe.fock_n.at(mode);
            return idler_arm ? static_cast<double>(n) : static_cast<double>(n + 1);
        }
        default:
            throw std::invalid_argument("spade: unsupported probe kind");
    }
}

}  // namespace

double ProbeConfig::mean_signal_photons() const {
    switch (kind) {
        case ProbeKind::vacuum:
            return 0.0;
        case ProbeKind::coherent:
            return coherent_amp * coherent_amp;
        case ProbeKind::fock: {
            double n = 0.0;
            for (int ni : fock_n) n += ni;
            return n;
        }
        case ProbeKind::twin_beam_echo:
        case ProbeKind::single_mode_sqz_echo: {
            double n = 0.0;
            for (double r : squeeze_r) n += std::sinh(r) * std::sinh(r);
            return n;
        }
    }
    throw std::logic_error("ProbeConfig: unknown kind");
}

void NoiseConfig::validate() const {
    if (kappa_loss < 0.0 || kappa_heat < 0.0 || kappa_agn < 0.0)
        throw std::invalid_argument("NoiseConfig: rates must be >= 0");
    if (kappa_loss > 0.1 || kappa_heat > 0.1 || kappa_agn > 0.1)
        throw std::invalid_argument("NoiseConfig: rates above perturbative bound 0.1");
}

std::pair<CountDistribution, CountDistribution> twin_beam_echo(
    const Matrix& gamma_up, const Matrix& gamma_down, const std::vector<double>& r,
    const NoiseConfig& noise) {
    check_rates(gamma_up, gamma_down, r.size(), "twin_beam_echo");
    noise.validate();

    CountDistribution signal, idler;
    for (size_t k = 0; k < r.size(); ++k) {
        const double c2 = std::cosh(r[k]) * std::cosh(r[k]);
        const double s2 = std::sinh(r[k]) * std::sinh(r[k]);
        double ps = gamma_down(k, k) * c2;
        double pi = gamma_up(k, k) * s2;
        if (noise.sector == NoiseSector::signal) {
            // Mid-echo signal loss unsqueezes into idler excitations and
            // heating into signal excitations; AGN feeds both.
            ps += (noise.kappa_heat + noise.kappa_agn) * c2;
            pi += (noise.kappa_loss + noise.kappa_agn) * s2;
        } else {
            ps += (noise.kappa_loss + noise.kappa_agn) * s2;
            pi += (noise.kappa_heat + noise.kappa_agn) * c2;
        }
        signal.outcomes.emplace_back("S" + std::to_string(k), ps);
        idler.outcomes.emplace_back("I" + std::to_string(k), pi);
    }
    finish(signal, "twin_beam_echo");
    finish(idler, "twin_beam_echo");
    return {signal, idler};
}

CountDistribution fock_probe(const Matrix& gamma_up, const Matrix& gamma_down,
                             const std::vector<int>& n, const NoiseConfig& noise) {
    check_rates(gamma_up, gamma_down, n.size(), "fock_probe");
    noise.validate();
    for (Eigen::Index i = 0; i < gamma_up.rows(); ++i)
        for (Eigen::Index j = 0; j < gamma_up.cols(); ++j)
            if (i != j && (gamma_up(i, j) != 0.0 || gamma_down(i, j) != 0.0))
                throw std::invalid_argument("fock_probe: rates must be mode-diagonal");

    CountDistribution dist;
    for (size_t k = 0; k < n.size(); ++k) {
        if (n[k] < 0) throw std::invalid_argument("fock_probe: negative occupation");
        const double down_rate =
            n[k] * (gamma_up(k, k) + noise.kappa_loss + noise.kappa_agn);
        const double up_rate =
            (n[k] + 1) * (gamma_down(k, k) + noise.kappa_heat + noise.kappa_agn);
        if (n[k] > 0)  // P(n-1) undefined for vacuum modes: zero weight
            dist.outcomes.emplace_back(std::to_string(k) + ":down", down_rate);
        dist.outcomes.emplace_back(std::to_string(k) + ":up", up_rate);
    }
    finish(dist, "fock_probe");
    return dist;
}

CountDistribution single_mode_sqz_echo(const Matrix& gamma_up, const Matrix& gamma_down,
                                       const std::vector<double>& r, const NoiseConfig& noise) {
    check_rates(gamma_up, gamma_down, r.size(), "single_mode_sqz_echo");
    noise.validate();
    CountDistribution dist;
    for (size_t k = 0; k < r.size(); ++k) {
        const double c2 = std::cosh(r[k]) * std::cosh(r[k]);
        const double s2 = std::sinh(r[k]) * std::sinh(r[k]);
        // Absorption and emission land in the same single-excitation
        // subspace; every noise source does too.
        const double rate = (gamma_up(k, k) + noise.kappa_loss + noise.kappa_agn) * s2 +
                            (gamma_down(k, k) + noise.kappa_heat + noise.kappa_agn) * c2;
        dist.outcomes.emplace_back("C" + std::to_string(k), rate);
    }
    finish(dist, "single_mode_sqz_echo");
    return dist;
}

Vector uniform_pixel_grid(double sigma, double half_width_sigmas, int pixels_per_sigma,
                          double& pixel_width) {
    if (pixels_per_sigma < 20)
        throw std::invalid_argument("uniform_pixel_grid: need >= 20 pixels per sigma");
    const int half = static_cast<int>(std::ceil(half_width_sigmas * pixels_per_sigma));
    pixel_width = sigma / pixels_per_sigma;
    Vector centers(2 * half);
    for (int i = 0; i < 2 * half; ++i) centers(i) = (i - half + 0.5) * pixel_width;
    return centers;
}

CountDistribution direct_detection(const scene::Scene& sc, const Vector& pixel_centers,
                                   double pixel_width) {
    sc.validate();
    const scene::GaussianPSF psf{sc.sigma};
    double wsum = 0.0;
    for (const auto& s : sc.sources) wsum += s.weight;

    CountDistribution dist;
    double total = 0.0;
    for (Eigen::Index i = 0; i < pixel_centers.size(); ++i) {
        double p = 0.0;
        for (const auto& src : sc.sources) {
            const double amp = psf.value(pixel_centers(i) - src.x);
            p += src.weight / wsum * amp * amp * pixel_width;
        }
        total += p;
        dist.outcomes.emplace_back("px" + std::to_string(i), p);
    }
    if (total < 0.999)
        std::cerr << "direct_detection: warning, grid captures only " << total
                  << " of the intensity (coarse grid)\n";
    for (auto& [label, p] : dist.outcomes) p /= total;
    return dist;
}

CountDistribution spade(const scene::Scene& sc, const scene::ModeBasis& basis,
                        const ProbeConfig& probe, bool idler_arm) {
    const Matrix gamma = scene::coherence_matrix(sc, basis);
    CountDistribution dist;
    for (int k = 0; k < basis.truncation; ++k) {
        const double amp = probe_amplification(probe, k, idler_arm);
        dist.outcomes.emplace_back("hg" + std::to_string(k), amp * gamma(k, k));
    }
    finish(dist, "spade");
    return dist;
}

std::pair<Vector, Vector> conventional_echo(const Vector& r_u, const Vector& gamma_up_uu,
                                            const Vector& gamma_down_uu) {
    const auto n = r_u.size();
    if (gamma_up_uu.size() != n || gamma_down_uu.size() != n)
        throw std::invalid_argument("conventional_echo: grid mismatch");
    Vector signal(n), idler(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index mirror = n - 1 - i;  // conjugate-point pairing u <-> -u
        signal(i) = std::cosh(r_u(i)) * std::cosh(r_u(i)) * gamma_down_uu(i);
        idler(i) = std::sinh(r_u(mirror)) * std::sinh(r_u(mirror)) * gamma_up_uu(mirror);
    }
    return {signal, idler};
}

CountDistribution displacement_echo(double gamma_kk, double r) {
    if (gamma_kk < 0.0) throw std::invalid_argument("displacement_echo: negative rate");
    CountDistribution dist;
    dist.outcomes.emplace_back("S", gamma_kk * std::cosh(r) * std::cosh(r));
    dist.outcomes.emplace_back("I", gamma_kk * std::sinh(r) * std::sinh(r));
    finish(dist, "displacement_echo");
    return dist;
}

double twin_beam_fi_emission(double r, double gamma_down_kk) {
    return std::cosh(r) * std::cosh(r) / gamma_down_kk;
}

double twin_beam_fi_absorption(double r, double gamma_up_kk) {
    return std::sinh(r) * std::sinh(r) / gamma_up_kk;
}

double fock_fi_emission(int n, double gamma_down_kk) { return (n + 1) / gamma_down_kk; }

double fock_fi_absorption(int n, double gamma_up_kk) { return n / gamma_up_kk; }

double displacement_echo_fi(double r, double gamma_kk) {
    return (std::cosh(r) * std::cosh(r) + std::sinh(r) * std::sinh(r)) / gamma_kk;
}

double spade_separation_fi(const scene::Scene& sc, const ProbeConfig& probe, bool idler_arm) {
    sc.validate();
    sc.two_point_separation();  // restricted to two-point scenes
    double wsum = 0.0;
    for (const auto& s : sc.sources) wsum += s.weight;
    const double amp = probe_amplification(probe, 0, idler_arm);
    const double total_rate =
        sc.kind == scene::SceneKind::emission ? sc.rate : sc.rate * wsum;
    return 0.5 * amp * total_rate;
}

}  // namespace eqi::protocols
