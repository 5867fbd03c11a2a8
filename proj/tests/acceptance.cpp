// Acceptance suite: one pass/fail line per criterion, tolerances pinned here.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eqi/experiments.hpp"
#include "eqi/fisher.hpp"
#include "eqi/fock.hpp"
#include "eqi/gaussian.hpp"
#include "eqi/protocols.hpp"
#include "eqi/scene.hpp"

namespace {

using eqi::CountDistribution;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << "criterion " << std::setw(2) << id << " [" << (pass ? "PASS" : "FAIL")
              << "] " << name << ": " << detail << std::endl;
    if (!pass) ++g_failures;
}

eqi::scene::Scene two_point(double d, double eps) {
    return eqi::scene::Scene{{{0.5 * d, 0.5}, {-0.5 * d, 0.5}},
                             eqi::scene::SceneKind::emission, eps, 1.0, 0.0};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

// 1. SPADE Fisher information: F(d/sigma)/eps = 0.5 within 1%.
void criterion_1() {
    const double eps = 0.01;
    const auto basis = eqi::scene::ModeBasis::hg(1.0, 20);
    auto dist_fn = [&](double d) {
        return eqi::protocols::spade(two_point(d, eps), basis, eqi::protocols::ProbeConfig{});
    };
    const double f = eqi::fisher::classical_fi(dist_fn, 0.1).value / eps;
    const bool pass = std::abs(f - 0.5) <= 0.005;
    report(1, "SPADE separation FI", pass, "F/eps = " + fmt(f) + " (target 0.5 +- 1%)");
}

// 2. Rayleigh-curse exponent: direct slope 2.0 +- 0.1, SPADE slope 0 +- 0.05.
void criterion_2() {
    const double eps = 0.01;
    const std::vector<double> grid = {0.01, 0.02, 0.04, 0.08, 0.1};
    double width = 0.0;
    const Vector pixels = eqi::protocols::uniform_pixel_grid(1.0, 6.0, 40, width);
    const auto basis = eqi::scene::ModeBasis::hg(1.0, 20);

    std::vector<double> fi_direct, fi_spade;
    for (const double d : grid) {
        auto direct_fn = [&](double s) {
            return eqi::protocols::direct_detection(two_point(s, eps), pixels, width);
        };
        auto spade_fn = [&](double s) {
            return eqi::protocols::spade(two_point(s, eps), basis,
                                         eqi::protocols::ProbeConfig{});
        };
        fi_direct.push_back(eqi::fisher::classical_fi(direct_fn, d).value);
        fi_spade.push_back(eqi::fisher::classical_fi(spade_fn, d).value);
    }
    const double slope_direct = loglog_slope(grid, fi_direct);
    const double slope_spade = loglog_slope(grid, fi_spade);
    const bool pass = std::abs(slope_direct - 2.0) <= 0.1 && std::abs(slope_spade) <= 0.05;
    report(2, "Rayleigh-curse exponents", pass,
           "direct slope = " + fmt(slope_direct) + " (2.0 +- 0.1), spade slope = " +
               fmt(slope_spade) + " (0 +- 0.05)");
}

// 3. Toy-echo optimality: F_C = cosh^2(1)/0.01 and sinh^2(1)/0.01 within 1%
//    of analytic; within 2% of the numeric-QFI oracle.
void criterion_3() {
    using namespace eqi::fock;
    const double r = 1.0, gamma = 0.01;
    const double c2 = std::cosh(r) * std::cosh(r), s2 = std::sinh(r) * std::sinh(r);
    const double f_down = eqi::protocols::twin_beam_fi_emission(r, gamma);
    const double f_up = eqi::protocols::twin_beam_fi_absorption(r, gamma);
    const bool analytic_ok = std::abs(f_down - c2 / gamma) <= 0.01 * c2 / gamma &&
                             std::abs(f_up - s2 / gamma) <= 0.01 * s2 / gamma;

    // Oracle: TMSV probe, exact loss/amp channel on the signal arm.
    const int cutoff = 14;
    const CMatrix U = two_mode_squeeze_unitary(r, cutoff);
    const FockDensityMatrix probe = apply_unitary(U, FockDensityMatrix::vacuum(2, cutoff));
    auto rho_loss = [&](double g) {
        return apply_kraus(loss_kraus(std::exp(-g), cutoff), probe, 0);
    };
    // the completed operator set removes the cutoff-boundary artifact that
    // otherwise poisons the fidelity derivative of the photon-raising channel
    auto rho_amp = [&](double g) {
        return apply_kraus(complete_truncated(amp_kraus(std::exp(g), cutoff)), probe, 0);
    };
    // a 0.1*gamma step keeps the fidelity deficit well above double-precision
    // noise for this nearly pure probe; Richardson removes the O(h^2) bias
    const double oracle_up = qfi_numeric(rho_loss, gamma, 0.1 * gamma).value;
    const double oracle_down = qfi_numeric(rho_amp, gamma, 0.1 * gamma).value;
    const bool oracle_ok = std::abs(f_up - oracle_up) <= 0.02 * oracle_up &&
                           std::abs(f_down - oracle_down) <= 0.02 * oracle_down;
    report(3, "toy-echo optimality", analytic_ok && oracle_ok,
           "F(G_down) = " + fmt(f_down) + " vs oracle " + fmt(oracle_down) +
               ", F(G_up) = " + fmt(f_up) + " vs oracle " + fmt(oracle_up));
}

// 4. Full sensitivity grid: optimal rows by the matching protocol's
//    first-order FI, coherent rows by the Gaussian mean term plus the
//    leading-order vacuum term; each within 2% of the closed forms.
void criterion_4() {
    using eqi::fisher::Probe;
    using eqi::fisher::Task;
    using eqi::fisher::TaskParams;
    bool pass = true;
    std::string worst = "";
    double worst_dev = 0.0;

    auto check = [&](const std::string& label, double got, double ref) {
        const double dev = std::abs(got - ref) / std::abs(ref);
        if (dev > worst_dev) {
            worst_dev = dev;
            worst = label;
        }
        if (dev > 0.02) pass = false;
    };

    for (const double n_s : {1.0, 4.0}) {
        for (const double rate : {0.01, 0.05}) {
            TaskParams p;
            p.N_S = n_s;
            p.gamma = rate;
            p.eps = rate;
            p.s = 0.1;
            const double r_sinh = std::asinh(std::sqrt(n_s));
            const double r_cosh = std::acosh(std::sqrt(1.0 + n_s));
            const double alpha = std::sqrt(n_s);
            const std::string tag = " N_S=" + fmt(n_s) + " rate=" + fmt(rate);

            // optimal rows via the matching protocols
            check("loss opt" + tag, eqi::protocols::twin_beam_fi_absorption(r_sinh, rate),
                  eqi::fisher::table1_reference(Task::loss, Probe::optimal, p));
            check("amp opt" + tag, eqi::protocols::twin_beam_fi_emission(r_cosh, rate),
                  eqi::fisher::table1_reference(Task::amp, Probe::optimal, p));
            check("agn opt" + tag, eqi::protocols::displacement_echo_fi(r_sinh, rate),
                  eqi::fisher::table1_reference(Task::agn, Probe::optimal, p));
            {
                eqi::protocols::ProbeConfig probe;
                probe.kind = eqi::protocols::ProbeKind::twin_beam_echo;
                probe.squeeze_r = {r_cosh};
                check("fluor opt" + tag,
                      eqi::protocols::spade_separation_fi(two_point(0.1, rate), probe, false),
                      eqi::fisher::table1_reference(Task::subdiff_fluor, Probe::optimal, p));
                eqi::scene::Scene abs{{{0.05, 1.0}, {-0.05, 1.0}},
                                      eqi::scene::SceneKind::absorption, rate, 1.0, 0.0};
                eqi::protocols::ProbeConfig probe_abs;
                probe_abs.kind = eqi::protocols::ProbeKind::twin_beam_echo;
                probe_abs.squeeze_r = {r_sinh};
                check("abs opt" + tag,
                      eqi::protocols::spade_separation_fi(abs, probe_abs, true),
                      eqi::fisher::table1_reference(Task::subdiff_abs, Probe::optimal, p));
            }
            check("fluor vac" + tag,
                  eqi::protocols::spade_separation_fi(two_point(0.1, rate),
                                                      eqi::protocols::ProbeConfig{}),
                  eqi::fisher::table1_reference(Task::subdiff_fluor, Probe::vacuum, p));

            // coherent rows: mean term + leading-order vacuum term
            const Matrix id2 = Matrix::Identity(2, 2);
            {
                Vector dmu = Vector::Zero(2);
                dmu(0) = -0.5 * std::sqrt(2.0) * alpha * std::exp(-0.5 * rate);
                check("loss coh" + tag, eqi::fisher::gaussian_mean_qfi(dmu, id2),
                      eqi::fisher::table1_reference(Task::loss, Probe::coherent, p));
            }
            {
                const double G = std::exp(rate);
                Vector dmu = Vector::Zero(2);
                dmu(0) = 0.5 * std::sqrt(2.0) * alpha * std::sqrt(G);
                check("amp coh" + tag,
                      1.0 / rate +
                          eqi::fisher::gaussian_mean_qfi(dmu, (2.0 * G - 1.0) * id2),
                      eqi::fisher::table1_reference(Task::amp, Probe::coherent, p));
            }
            check("agn coh" + tag, 1.0 / rate,
                  eqi::fisher::table1_reference(Task::agn, Probe::coherent, p));
            {
                const double g = std::exp(-0.1 * 0.1 / 4.0);
                Vector dmu = Vector::Zero(2);
                dmu(0) = 0.5 * std::sqrt(2.0) * alpha * (-0.25 * rate * 0.1 * g);
                check("fluor coh" + tag,
                      0.5 * rate + eqi::fisher::gaussian_mean_qfi(dmu, id2),
                      eqi::fisher::table1_reference(Task::subdiff_fluor, Probe::coherent, p));
                Vector dmu2 = Vector::Zero(2);
                dmu2(0) = -0.5 * std::sqrt(2.0) * alpha * (0.5 * rate * 0.1 * g);
                check("abs coh" + tag, eqi::fisher::gaussian_mean_qfi(dmu2, id2),
                      eqi::fisher::table1_reference(Task::subdiff_abs, Probe::coherent, p));
            }
        }
    }
    report(4, "sensitivity grid", pass,
           "worst deviation " + fmt(100.0 * worst_dev) + "% at [" + worst + "] (limit 2%)");
}

// 5. Echo theorem: closed-form blocks to first order; residual quarter-scaling
//    on eta halving; oracle click probabilities with the same scaling.
void criterion_5() {
    using namespace eqi::gaussian;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> uni_r(0.0, 2.0);

    auto random_psd = [&](int dim, double norm) {
        Matrix A(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) A(i, j) = gauss(rng);
        Matrix psd = A * A.transpose();
        psd *= norm / psd.cwiseAbs().maxCoeff();
        return psd;
    };

    bool residual_ok = true, scaling_ok = true;
    double worst_ratio = 0.0, worst_scaling = 4.0;
    for (int it = 0; it < 50; ++it) {
        const double r = uni_r(rng);
        const Matrix eu = random_psd(2, 0.01);
        const Matrix ed = random_psd(2, 0.01);
        auto residual = [&](double scale) {
            const auto ch = perturbative_interaction(scale * eu, scale * ed);
            const auto [state, tp] = echo_sequence({r}, {0.0}, ch);
            const Matrix closed = Matrix::Identity(4, 4) + 2.0 * tp.delta_y();
            return (state.cov - closed).cwiseAbs().maxCoeff();
        };
        const double res1 = residual(1.0), res2 = residual(0.5);
        const double norm = std::max(eu.cwiseAbs().maxCoeff(), ed.cwiseAbs().maxCoeff());
        // second-order terms carry up to four Bogoliubov factors, hence cosh^4(r)
        const double scale = std::pow(std::cosh(r), 4.0);
        worst_ratio = std::max(worst_ratio, res1 / (scale * norm * norm));
        if (res1 > 10.0 * scale * norm * norm) residual_ok = false;
        if (res2 > 1e-300) {
            const double scaling = res1 / res2;
            if (std::abs(scaling - 4.0) > std::abs(worst_scaling - 4.0))
                worst_scaling = scaling;
            if (scaling < 3.2 || scaling > 4.8) scaling_ok = false;
        }
    }

    // Oracle: truncated-Fock echo click probabilities, quadratic scaling.
    using namespace eqi::fock;
    const double r = 1.0;
    const int cutoff = 16;
    const CMatrix U = two_mode_squeeze_unitary(r, cutoff);
    // exact loss + amplification channels inside the echo: the residual
    // against the first-order click rates is then genuinely O(g^2)
    auto click_error = [&](double g) {
        FockDensityMatrix st = apply_unitary(U, FockDensityMatrix::vacuum(2, cutoff));
        st = apply_kraus(loss_kraus(1.0 - g, cutoff), st, 0);
        st = apply_kraus(amp_kraus(1.0 + g, cutoff), st, 0);
        st = apply_unitary(U.adjoint(), st);
        const auto counts = measure_counts(st, {0, 1});
        const double c2 = std::cosh(r) * std::cosh(r), s2 = std::sinh(r) * std::sinh(r);
        return std::max(std::abs(counts.probability("1,0") - g * c2),
                        std::abs(counts.probability("0,1") - g * s2));
    };
    const double e1 = click_error(0.01), e2 = click_error(0.005);
    const double oracle_scaling = e1 / e2;
    const bool oracle_ok = oracle_scaling >= 3.2 && oracle_scaling <= 4.8;

    report(5, "echo theorem", residual_ok && scaling_ok && oracle_ok,
           "max residual/||eta||^2 = " + fmt(worst_ratio) + " (limit 10), worst scaling " +
               fmt(worst_scaling) + ", oracle scaling " + fmt(oracle_scaling) +
               " (4 +- 20%)");
}

// 6. Noise matrix: zero entries < 1e-12, nonzero entries > 0, pattern exact.
void criterion_6() {
    using namespace eqi::protocols;
    const double r = 1.0, g = 0.01, h = 1e-3;
    const Matrix gm = Matrix::Constant(1, 1, g);

    auto with_noise = [](const std::string& kind, double kappa) {
        NoiseConfig n;
        if (kind == "loss") n.kappa_loss = kappa;
        if (kind == "heat") n.kappa_heat = kappa;
        if (kind == "agn") n.kappa_agn = kappa;
        return n;
    };
    auto deriv = [&](const std::function<double(const NoiseConfig&)>& p,
                     const std::string& kind) {
        return (p(with_noise(kind, h)) - p(with_noise(kind, 0.0))) / h;
    };

    bool pass = true;
    std::string mismatches;
    auto expect = [&](const std::string& label, double d, bool zero) {
        const bool is_zero = std::abs(d) < 1e-12;
        if (is_zero != zero || (!zero && d <= 0.0)) {
            pass = false;
            mismatches += " " + label;
        }
    };

    for (const std::string kind : {"loss", "heat", "agn"}) {
        expect("tbe-abs/" + kind,
               deriv([&](const NoiseConfig& n) {
                   return twin_beam_echo(gm, gm, {r}, n).second.probability("I0");
               }, kind),
               kind == "heat");
        expect("tbe-fluor/" + kind,
               deriv([&](const NoiseConfig& n) {
                   return twin_beam_echo(gm, gm, {r}, n).first.probability("S0");
               }, kind),
               kind == "loss");
        expect("fock-abs/" + kind,
               deriv([&](const NoiseConfig& n) {
                   return fock_probe(gm, gm, {1}, n).probability("0:down");
               }, kind),
               kind == "heat");
        expect("fock-fluor/" + kind,
               deriv([&](const NoiseConfig& n) {
                   return fock_probe(gm, gm, {1}, n).probability("0:up");
               }, kind),
               kind == "loss");
        expect("sms/" + kind,
               deriv([&](const NoiseConfig& n) {
                   return single_mode_sqz_echo(gm, gm, {r}, n).probability("C0");
               }, kind),
               false);
    }
    report(6, "noise-resilience matrix", pass,
           pass ? "3x3 derivative pattern reproduced (zeros < 1e-12)"
                : "pattern mismatch at:" + mismatches);
}

// 7. Single-mode squeezing cannot separate (G_up, G_down): condition number
//    > 1e12; twin-beam Fisher matrix diagonal and full rank.
void criterion_7() {
    using namespace eqi::protocols;
    auto sms_fn = [](const std::vector<double>& th) {
        return single_mode_sqz_echo(Matrix::Constant(1, 1, th[0]),
                                    Matrix::Constant(1, 1, th[1]), {1.0});
    };
    const Matrix F_sms = eqi::fisher::fisher_matrix(sms_fn, {0.01, 0.01});
    Eigen::JacobiSVD<Matrix> svd(F_sms);
    const double cond = svd.singularValues()(0) / svd.singularValues()(1);

    auto tbe_fn = [](const std::vector<double>& th) {
        auto [s, i] = twin_beam_echo(Matrix::Constant(1, 1, th[0]),
                                     Matrix::Constant(1, 1, th[1]), {1.0});
        CountDistribution joint;
        for (const auto& [ls, ps] : s.outcomes)
            for (const auto& [li, pi] : i.outcomes)
                joint.outcomes.emplace_back(ls + "|" + li, ps * pi);
        return joint;
    };
    const Matrix F_tbe = eqi::fisher::fisher_matrix(tbe_fn, {0.01, 0.01});
    Eigen::JacobiSVD<Matrix> svd2(F_tbe);
    const double cond_tbe = svd2.singularValues()(0) / svd2.singularValues()(1);
    const bool tbe_ok = std::abs(F_tbe(0, 1)) < 1e-6 * F_tbe(0, 0) && cond_tbe < 1e3 &&
                        F_tbe(0, 0) > 0.0 && F_tbe(1, 1) > 0.0;

    report(7, "single-mode-squeezing singularity", cond > 1e12 && tbe_ok,
           "sms condition number = " + fmt(cond) + " (> 1e12), twin-beam cond = " +
               fmt(cond_tbe) + " with off-diagonal " + fmt(F_tbe(0, 1)));
}

// 8. MLE efficiency for SPADE separation estimation at M = 1e7, 200 reps.
void criterion_8() {
    const double eps = 0.01, d_true = 0.1;
    const auto basis = eqi::scene::ModeBasis::hg(1.0, 20);
    auto model = [&](const std::vector<double>& th) {
        return eqi::protocols::spade(two_point(th[0], eps), basis,
                                     eqi::protocols::ProbeConfig{});
    };
    const double fi = 0.5 * eps;  // exact per-photon SPADE FI
    const auto rep = eqi::experiments::mle_efficiency(model, {d_true}, {fi},
                                                      {{0.02, 0.5}}, 10000000, 200, 1111);
    const double ratio = rep.sample_variance[0] / rep.crb[0];
    const bool pass = rep.converged && ratio >= 0.8 && ratio <= 1.25;
    report(8, "MLE efficiency (SPADE)", pass,
           "variance/CRB = " + fmt(ratio) + " over 200 replications (target [0.8, 1.25])");
}

// 9. Displacement-field echo FI = (cosh^2 r + sinh^2 r)/Gamma at r = 1.
void criterion_9() {
    const double r = 1.0, gamma = 0.01;
    const double f = eqi::protocols::displacement_echo_fi(r, gamma);
    const double expect = (std::cosh(r) * std::cosh(r) + std::sinh(r) * std::sinh(r)) / gamma;
    // Table I stochastic-displacement optimum with N_S = sinh^2 r
    eqi::fisher::TaskParams p;
    p.N_S = std::sinh(r) * std::sinh(r);
    p.gamma = gamma;
    const double table = eqi::fisher::table1_reference(eqi::fisher::Task::agn,
                                                       eqi::fisher::Probe::optimal, p);
    const bool pass =
        std::abs(f - expect) <= 0.01 * expect && std::abs(f - table) <= 0.01 * table;
    report(9, "displacement-field echo", pass,
           "FI = " + fmt(f) + " vs analytic " + fmt(expect) + " and grid optimum " +
               fmt(table));
}

// 10. Even-subspace suppression: Lambda_minus exponent 4.0 +- 0.1.
void criterion_10() {
    const std::vector<double> grid = {0.01, 0.02, 0.04, 0.08, 0.1};
    std::vector<double> lam;
    for (const double d : grid)
        lam.push_back(std::abs(eqi::scene::even_subspace_eigenvalues(d, 1.0, 0.01).second));
    const double slope = loglog_slope(grid, lam);
    const bool pass = std::abs(slope - 4.0) <= 0.1;
    report(10, "even-subspace suppression", pass,
           "fitted exponent = " + fmt(slope) + " (target 4.0 +- 0.1)");
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (g_failures == 0 ? "all criteria passed" : "FAILURES: " +
                                                                std::to_string(g_failures))
              << " (" << std::setprecision(3) << secs << " s)" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
