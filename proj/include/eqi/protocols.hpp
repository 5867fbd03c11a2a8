#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "eqi/distribution.hpp"
#include "eqi/scene.hpp"

namespace eqi::protocols {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ProbeKind { twin_beam_echo, fock, single_mode_sqz_echo, coherent, vacuum };

struct ProbeConfig {
    ProbeKind kind = ProbeKind::vacuum;
    std::vector<double> squeeze_r;  // twin-beam / single-mode squeezing
    std::vector<int> fock_n;        // Fock probe occupations
    double coherent_amp = 0.0;      // |alpha| for coherent probes

    /// Mean signal photon number N_S consistent with the probe kind.
    double mean_signal_photons() const;
};

enum class NoiseSector { signal, idler };

/// Perturbative per-mode noise rates injected alongside the scene channel.
struct NoiseConfig {
    double kappa_loss = 0.0;
    double kappa_heat = 0.0;
    double kappa_agn = 0.0;
    NoiseSector sector = NoiseSector::signal;

    void validate() const;
};

/// Twin-beam echo with mode-diagonal photon counting. Returns the signal and
/// idler first-order click distributions: p_k^S = Gamma_down_kk cosh^2 r_k and
/// p_k^I = Gamma_up_kk sinh^2 r_k plus the noise terms routed per sector
/// (signal-sector loss -> idler clicks with sinh^2, heat -> signal clicks with
/// cosh^2, AGN -> both; idler-sector noise routes symmetrically).
std::pair<CountDistribution, CountDistribution> twin_beam_echo(
    const Matrix& gamma_up, const Matrix& gamma_down, const std::vector<double>& r,
    const NoiseConfig& noise = {});

/// Structured Fock probe with number-resolved readout: at most one jump
/// across modes at first order; P(n_k - 1) = n_k Gamma_up_kk and
/// P(n_k + 1) = (n_k + 1) Gamma_down_kk with noise added to the rates.
CountDistribution fock_probe(const Matrix& gamma_up, const Matrix& gamma_down,
                             const std::vector<int>& n, const NoiseConfig& noise = {});

/// Single-mode squeezing echo: absorption and emission feed the same
/// single-excitation rate Gamma_up_kk sinh^2 r + Gamma_down_kk cosh^2 r.
CountDistribution single_mode_sqz_echo(const Matrix& gamma_up, const Matrix& gamma_down,
                                       const std::vector<double>& r,
                                       const NoiseConfig& noise = {});

/// Direct detection on a pixel grid; per-detected-photon distribution
/// p(u) = Gamma(u,u)/epsilon integrated over pixels.
CountDistribution direct_detection(const scene::Scene& sc, const Vector& pixel_centers,
                                   double pixel_width);
/// Uniform grid of >= pixels_per_sigma pixels per sigma covering
/// [-half_width_sigmas, half_width_sigmas] * sigma.
Vector uniform_pixel_grid(double sigma, double half_width_sigmas, int pixels_per_sigma,
                          double& pixel_width);

/// SPADE: photon counting in the HG basis. The per-mode click probability is
/// (amplification factor of the probe) * Gamma_kk; off-diagonal coherences
/// are invisible to mode-diagonal counting. For twin-beam probes the signal
/// arm amplifies emission by cosh^2 r and the idler arm absorption by
/// sinh^2 r; `idler_arm` selects which counter is returned.
CountDistribution spade(const scene::Scene& sc, const scene::ModeBasis& basis,
                        const ProbeConfig& probe, bool idler_arm = false);

/// Conventional (pixel-wise) echo imaging with conjugate-point squeezing
/// r_u: signal intensity cosh^2 r_u * Gamma_down(u,u), idler intensity
/// sinh^2 r_{-u} * Gamma_up(-u,-u); proportionality constants fixed to 1.
std::pair<Vector, Vector> conventional_echo(const Vector& r_u, const Vector& gamma_up_uu,
                                            const Vector& gamma_down_uu);

/// Balanced displacement-field echo (Gamma_up = Gamma_down = Gamma): joint
/// signal (x) idler click distribution with rates Gamma cosh^2 r and
/// Gamma sinh^2 r.
CountDistribution displacement_echo(double gamma_kk, double r);

// -- First-order analytic Fisher informations of the click models ----------
// These are the leading-order per-trial sensitivities of the protocols
// (information carried by the click rates; O(rate) corrections from the
// no-click complement are dropped consistently with the first-order model).

double twin_beam_fi_emission(double r, double gamma_down_kk);   // cosh^2 r / Gamma
double twin_beam_fi_absorption(double r, double gamma_up_kk);   // sinh^2 r / Gamma
double fock_fi_emission(int n, double gamma_down_kk);           // (n+1) / Gamma
double fock_fi_absorption(int n, double gamma_up_kk);           // n / Gamma
double displacement_echo_fi(double r, double gamma_kk);         // (cosh^2+sinh^2)/Gamma
/// Separation FI of SPADE per trial: emission scenes eps*amp/2, absorption
/// scenes gamma_up*sinh^2 r (idler arm).
double spade_separation_fi(const scene::Scene& sc, const ProbeConfig& probe,
                           bool idler_arm = false);

}  // namespace eqi::protocols
