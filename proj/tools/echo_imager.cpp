// Command-line front end: reproduces the sensitivity table, verifies the
// echo theorem against the truncated-Fock oracle, and runs configured
// sweep / MLE / noise-robustness experiments with CSV+JSON reporting.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "eqi/config.hpp"
#include "eqi/experiments.hpp"
#include "eqi/fisher.hpp"
#include "eqi/fock.hpp"
#include "eqi/gaussian.hpp"
#include "eqi/protocols.hpp"
#include "eqi/scene.hpp"

namespace {

using eqi::CountDistribution;
using eqi::config::atomic_write;
using eqi::config::ConfigError;
using eqi::config::CsvWriter;
using eqi::config::format_double;
using eqi::config::NumericalError;
using eqi::fisher::Probe;
using eqi::fisher::Task;
using eqi::fisher::TaskParams;
using nlohmann::json;

double r_for_sinh2(double n) { return std::asinh(std::sqrt(n)); }
double r_for_cosh2(double c2) { return std::acosh(std::sqrt(c2)); }

// ---------------------------------------------------------------------------
// Oracle helpers (truncated-Fock numeric QFI for the table rows)

double oracle_channel_qfi(Task task, double gamma, double n_s, bool coherent_probe,
                          double* err = nullptr) {
    using namespace eqi::fock;
    const int n = static_cast<int>(std::lround(n_s));
    const int cutoff = coherent_probe ? 30 : n + 12;
    FockDensityMatrix probe = coherent_probe
                                  ? FockDensityMatrix::coherent(std::sqrt(n_s), cutoff)
                                  : FockDensityMatrix::number_state({n}, cutoff);
    auto rho_fn = [&, task](double g) {
        switch (task) {
            case Task::loss:
                return apply_kraus(loss_kraus(std::exp(-g), cutoff), probe, 0);
            case Task::amp:
                return apply_kraus(amp_kraus(std::exp(g), cutoff), probe, 0);
            case Task::agn: {
                FockDensityMatrix st = probe;
                for (const auto& ch : agn_channel(g, cutoff)) st = apply_kraus(ch, st, 0);
                return st;
            }
            default:
                throw std::logic_error("oracle_channel_qfi: unsupported task");
        }
    };
    const QfiEstimate q = qfi_numeric(rho_fn, gamma);
    if (err) *err = q.error_estimate;
    return q.value;
}

// Subdiffraction tasks reduced to the antisymmetric scene eigenmode: the
// separation enters only through its rate, so the oracle works on a single
// mode probed by |n>.
double oracle_subdiff_qfi(bool absorption, double rate, double s, int n_probe,
                          double* err = nullptr) {
    using namespace eqi::fock;
    const int cutoff = n_probe + 12;
    const FockDensityMatrix probe = FockDensityMatrix::number_state({n_probe}, cutoff);
    auto rate_minus = [&](double sep) {
        const double g = std::exp(-sep * sep / 4.0);
        return absorption ? rate * (1.0 - g) : 0.5 * rate * (1.0 - g);
    };
    auto rho_fn = [&](double sep) {
        const double gm = rate_minus(sep);
        if (absorption) return apply_kraus(loss_kraus(std::exp(-gm), cutoff), probe, 0);
        return apply_kraus(amp_kraus(1.0 + gm, cutoff), probe, 0);
    };
    const QfiEstimate q = qfi_numeric(rho_fn, s);
    if (err) *err = q.error_estimate;
    return q.value;
}

// ---------------------------------------------------------------------------
// Coherent-row estimates: mean term via gaussian_mean_qfi plus the
// leading-order vacuum term matching the reference table's expansion.

double coherent_row_estimate(Task task, const TaskParams& p) {
    using eqi::fisher::gaussian_mean_qfi;
    const double alpha = std::sqrt(p.N_S);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd dmu = Eigen::VectorXd::Zero(2);
    switch (task) {
        case Task::loss:
            // mu(g) = sqrt(2) alpha e^{-g/2}
            dmu(0) = -0.5 * std::sqrt(2.0) * alpha * std::exp(-0.5 * p.gamma);
            return gaussian_mean_qfi(dmu, sigma);
        case Task::amp: {
            const double G = std::exp(p.gamma);
            dmu(0) = 0.5 * std::sqrt(2.0) * alpha * std::sqrt(G);
            sigma *= 2.0 * G - 1.0;
            return 1.0 / p.gamma + gaussian_mean_qfi(dmu, sigma);
        }
        case Task::agn:
            return 1.0 / p.gamma;  // mean unaffected; vacuum term only
        case Task::subdiff_fluor: {
            // mu(s) = sqrt(2) alpha (1 + Gamma_+(s)/2) in the bright mode.
            const double g = std::exp(-p.s * p.s / 4.0);
            const double dgamma_plus = 0.5 * p.eps * (-0.5 * p.s * g);
            dmu(0) = 0.5 * std::sqrt(2.0) * alpha * dgamma_plus;
            return 0.5 * p.eps + gaussian_mean_qfi(dmu, sigma);
        }
        case Task::subdiff_abs: {
            const double g = std::exp(-p.s * p.s / 4.0);
            const double dgamma_up_plus = p.gamma * (0.5 * p.s * g);
            dmu(0) = -0.5 * std::sqrt(2.0) * alpha * dgamma_up_plus;
            return gaussian_mean_qfi(dmu, sigma);
        }
    }
    throw std::logic_error("coherent_row_estimate: unknown task");
}

// Achieved FI of the matching protocol (leading-order click model).
double achieved_optimal(Task task, const TaskParams& p) {
    using namespace eqi::protocols;
    switch (task) {
        case Task::loss:
            return twin_beam_fi_absorption(r_for_sinh2(p.N_S), p.gamma);
        case Task::amp:
            return twin_beam_fi_emission(r_for_cosh2(1.0 + p.N_S), p.gamma);
        case Task::agn:
            return displacement_echo_fi(r_for_sinh2(p.N_S), p.gamma);
        case Task::subdiff_fluor: {
            eqi::scene::Scene sc{{{0.5 * p.s, 0.5}, {-0.5 * p.s, 0.5}},
                                 eqi::scene::SceneKind::emission, p.eps, 1.0, 0.0};
            ProbeConfig probe;
            probe.kind = ProbeKind::twin_beam_echo;
            probe.squeeze_r = {r_for_cosh2(1.0 + p.N_S)};
            return spade_separation_fi(sc, probe, false);
        }
        case Task::subdiff_abs: {
            eqi::scene::Scene sc{{{0.5 * p.s, 1.0}, {-0.5 * p.s, 1.0}},
                                 eqi::scene::SceneKind::absorption, p.gamma, 1.0, 0.0};
            ProbeConfig probe;
            probe.kind = ProbeKind::twin_beam_echo;
            probe.squeeze_r = {r_for_sinh2(p.N_S)};
            return spade_separation_fi(sc, probe, true);
        }
    }
    throw std::logic_error("achieved_optimal: unknown task");
}

struct Table1Row {
    std::string task, probe;
    double n_s, rate, reference, achieved, ratio, oracle, oracle_err;
    bool has_oracle;
};

std::vector<Table1Row> build_table1(const std::vector<double>& ns_list,
                                    const std::vector<double>& rates, double s,
                                    bool with_oracle) {
    std::vector<Table1Row> rows;
    const std::vector<std::pair<Task, std::string>> tasks = {
        {Task::loss, "loss"},
        {Task::amp, "amp"},
        {Task::agn, "agn"},
        {Task::subdiff_fluor, "subdiff-fluor"},
        {Task::subdiff_abs, "subdiff-abs"}};

    for (double n_s : ns_list) {
        for (double rate : rates) {
            TaskParams p;
            p.N_S = n_s;
            p.gamma = rate;
            p.eps = rate;
            p.s = s;
            for (const auto& [task, name] : tasks) {
                // optimal row
                {
                    Table1Row row{};
                    row.task = name;
                    row.probe = "optimal";
                    row.n_s = n_s;
                    row.rate = rate;
                    row.reference = eqi::fisher::table1_reference(task, Probe::optimal, p);
                    row.achieved = achieved_optimal(task, p);
                    row.ratio = row.achieved / row.reference;
                    row.has_oracle = with_oracle;
                    if (with_oracle) {
                        if (task == Task::subdiff_fluor)
                            row.oracle = oracle_subdiff_qfi(false, rate, s,
                                                            static_cast<int>(std::lround(n_s)),
                                                            &row.oracle_err);
                        else if (task == Task::subdiff_abs)
                            row.oracle = oracle_subdiff_qfi(true, rate, s,
                                                            static_cast<int>(std::lround(n_s)),
                                                            &row.oracle_err);
                        else
                            row.oracle = oracle_channel_qfi(task, rate, n_s, false,
                                                            &row.oracle_err);
                    }
                    rows.push_back(row);
                }
                // vacuum row (fluorescence imaging only)
                if (task == Task::subdiff_fluor) {
                    Table1Row row{};
                    row.task = name;
                    row.probe = "vacuum";
                    row.n_s = 0.0;
                    row.rate = rate;
                    row.reference = eqi::fisher::table1_reference(task, Probe::vacuum, p);
                    eqi::scene::Scene sc{{{0.5 * s, 0.5}, {-0.5 * s, 0.5}},
                                         eqi::scene::SceneKind::emission, rate, 1.0, 0.0};
                    eqi::protocols::ProbeConfig probe;
                    probe.kind = eqi::protocols::ProbeKind::vacuum;
                    row.achieved = eqi::protocols::spade_separation_fi(sc, probe, false);
                    row.ratio = row.achieved / row.reference;
                    row.has_oracle = with_oracle;
                    if (with_oracle)
                        row.oracle = oracle_subdiff_qfi(false, rate, s, 0, &row.oracle_err);
                    rows.push_back(row);
                }
                // coherent row
                {
                    Table1Row row{};
                    row.task = name;
                    row.probe = "coherent";
                    row.n_s = n_s;
                    row.rate = rate;
                    row.reference = eqi::fisher::table1_reference(task, Probe::coherent, p);
                    row.achieved = coherent_row_estimate(task, p);
                    row.ratio = row.achieved / row.reference;
                    row.has_oracle = with_oracle && (task == Task::loss || task == Task::amp ||
                                                     task == Task::agn);
                    if (row.has_oracle)
                        row.oracle = oracle_channel_qfi(task, rate, n_s, true, &row.oracle_err);
                    rows.push_back(row);
                }
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Echo-theorem verification report

struct EchoVerifyReport {
    double max_residual_ratio = 0.0;     // ||Sigma3 - closed form||_inf / ||eta||^2
    double worst_scaling = 4.0;          // residual reduction when eta is halved
    double best_scaling = 4.0;
    double oracle_max_rel_mismatch = 0.0;  // click probabilities vs first order
    double oracle_scaling = 4.0;
    int samples = 0;
};

eqi::gaussian::Matrix random_psd(int dim, double norm, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    eqi::gaussian::Matrix A(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) A(i, j) = gauss(rng);
    eqi::gaussian::Matrix psd = A * A.transpose();
    const double top = psd.cwiseAbs().maxCoeff();
    if (top > 0.0) psd *= norm / top;
    return psd;
}

EchoVerifyReport run_echo_verify(int samples, std::uint64_t seed, double max_eta) {
    using namespace eqi::gaussian;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni_r(0.0, 2.0);
    std::uniform_int_distribution<int> uni_pairs(1, 2);

    EchoVerifyReport rep;
    rep.samples = samples;
    rep.worst_scaling = std::numeric_limits<double>::infinity();
    rep.best_scaling = 0.0;

    for (int it = 0; it < samples; ++it) {
        const int pairs = uni_pairs(rng);
        const int nb = 2 * pairs;
        std::vector<double> r(pairs), phi(pairs, 0.0);
        for (auto& ri : r) ri = uni_r(rng);
        const Matrix eta_up = random_psd(nb, max_eta, rng);
        const Matrix eta_down = random_psd(nb, max_eta, rng);

        auto residual_at = [&](double scale) {
            const auto ch = perturbative_interaction(scale * eta_up, scale * eta_down);
            const auto [state, tp] = echo_sequence(r, phi, ch);
            const Matrix closed = Matrix::Identity(2 * nb, 2 * nb) + 2.0 * tp.delta_y();
            return (state.cov - closed).cwiseAbs().maxCoeff();
        };
        const double res1 = residual_at(1.0);
        const double res2 = residual_at(0.5);
        const double norm = std::max(eta_up.cwiseAbs().maxCoeff(), eta_down.cwiseAbs().maxCoeff());
        // second-order terms carry up to four Bogoliubov factors: cosh^4(r)
        const double rmax = *std::max_element(r.begin(), r.end());
        const double scale = std::pow(std::cosh(rmax), 4.0);
        rep.max_residual_ratio = std::max(rep.max_residual_ratio, res1 / (scale * norm * norm));
        if (res2 > 1e-300) {
            const double scaling = res1 / res2;
            rep.worst_scaling = std::min(rep.worst_scaling, scaling);
            rep.best_scaling = std::max(rep.best_scaling, scaling);
        }
    }

    // Oracle cross-check on a single pair: click probabilities of the full
    // truncated-Fock echo against the first-order rates, with quadratic
    // residual scaling in Gamma.
    {
        using namespace eqi::fock;
        const double r = 1.0;
        const int cutoff = 16;
        const CMatrix U = two_mode_squeeze_unitary(r, cutoff);
        // exact loss + amplification channels on the signal arm; the residual
        // against the first-order click rates is then genuinely O(Gamma^2)
        auto click_error = [&](double gu, double gd) {
            FockDensityMatrix st = FockDensityMatrix::vacuum(2, cutoff);
            st = apply_unitary(U, st);
            st = apply_kraus(loss_kraus(1.0 - gu, cutoff), st, 0);
            st = apply_kraus(amp_kraus(1.0 + gd, cutoff), st, 0);
            st = apply_unitary(U.adjoint(), st);
            const CountDistribution counts = measure_counts(st, {0, 1});
            const double p_s = counts.probability("1,0");
            const double p_i = counts.probability("0,1");
            const double c2 = std::cosh(r) * std::cosh(r);
            const double s2 = std::sinh(r) * std::sinh(r);
            return std::max(std::abs(p_s - gd * c2), std::abs(p_i - gu * s2));
        };
        const double g = 0.01;
        const double e1 = click_error(g, g);
        const double e2 = click_error(0.5 * g, 0.5 * g);
        rep.oracle_max_rel_mismatch = e1 / g;
        rep.oracle_scaling = e2 > 1e-300 ? e1 / e2 : 4.0;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Noise-robustness matrix

struct NoiseMatrixEntry {
    std::string probe, noise, channel;
    double derivative;
    bool expected_zero;
};

std::vector<NoiseMatrixEntry> build_noise_matrix(double gamma_up, double gamma_down, double r,
                                                 int fock_n) {
    using namespace eqi::protocols;
    const Eigen::MatrixXd gu = Eigen::MatrixXd::Constant(1, 1, gamma_up);
    const Eigen::MatrixXd gd = Eigen::MatrixXd::Constant(1, 1, gamma_down);

    auto derivative = [](const std::function<double(double)>& p) {
        const double h = 1e-3;
        return (p(h) - p(0.0)) / h;  // rates are linear in kappa
    };
    auto noise_with = [](const std::string& kind, double kappa) {
        NoiseConfig n;
        if (kind == "loss") n.kappa_loss = kappa;
        if (kind == "heat") n.kappa_heat = kappa;
        if (kind == "agn") n.kappa_agn = kappa;
        return n;
    };

    std::vector<NoiseMatrixEntry> entries;
    for (const std::string noise_kind : {"loss", "heat", "agn"}) {
        // twin-beam echo: absorption read on the idler, fluorescence on the signal
        entries.push_back({"twin_beam_echo", noise_kind, "absorption",
                           derivative([&](double k) {
                               auto [s, i] = twin_beam_echo(gu, gd, {r}, noise_with(noise_kind, k));
                               return i.probability("I0");
                           }),
                           noise_kind == "heat"});
        entries.push_back({"twin_beam_echo", noise_kind, "fluorescence",
                           derivative([&](double k) {
                               auto [s, i] = twin_beam_echo(gu, gd, {r}, noise_with(noise_kind, k));
                               return s.probability("S0");
                           }),
                           noise_kind == "loss"});
        // Fock probe: absorption = n-1 subspace, fluorescence = n+1 subspace
        entries.push_back({"fock", noise_kind, "absorption",
                           derivative([&](double k) {
                               return fock_probe(gu, gd, {fock_n}, noise_with(noise_kind, k))
                                   .probability("0:down");
                           }),
                           noise_kind == "heat"});
        entries.push_back({"fock", noise_kind, "fluorescence",
                           derivative([&](double k) {
                               return fock_probe(gu, gd, {fock_n}, noise_with(noise_kind, k))
                                   .probability("0:up");
                           }),
                           noise_kind == "loss"});
        // single-mode squeezing: one excitation channel serves both tasks
        for (const std::string channel : {"absorption", "fluorescence"}) {
            entries.push_back({"single_mode_sqz_echo", noise_kind, channel,
                               derivative([&](double k) {
                                   return single_mode_sqz_echo(gu, gd, {r},
                                                               noise_with(noise_kind, k))
                                       .probability("C0");
                               }),
                               false});
        }
    }
    return entries;
}

// ---------------------------------------------------------------------------
// Output helpers

json run_summary(const json& cfg_json, std::uint64_t seed, int threads) {
    json j;
    j["version"] = eqi::config::kToolVersion;
    j["config_hash"] = eqi::config::config_hash(cfg_json);
    j["seed"] = seed;
    j["threads"] = threads;
    j["rng"] = eqi::experiments::kRngName;
    return j;
}

void write_outputs(const std::string& out_dir, const std::string& stem, const CsvWriter& csv,
                   const json& summary, const std::string& format) {
    namespace fs = std::filesystem;
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    if (format != "json") atomic_write(dir / (stem + ".csv"), csv.render());
    atomic_write(dir / (stem + ".json"), summary.dump(2) + "\n");
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incoherent-imaging echo simulator and Fisher-information toolkit"};
    // let global flags (--format, --out, ...) be given after the subcommand too
    app.fallthrough();
    app.require_subcommand(1);

    std::optional<int> threads_flag;
    std::string out_dir;
    std::string format = "csv";
    std::uint64_t seed = 42;
    app.add_option("--threads", threads_flag, "worker threads (or ECHO_IMAGER_THREADS)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", seed, "master RNG seed");

    // table1
    auto* cmd_table1 = app.add_subcommand("table1", "reproduce the sensitivity table grid");
    std::vector<double> ns_list{1.0, 4.0};
    std::vector<double> rate_list{0.01, 0.05};
    double table_s = 0.1;
    bool no_oracle = false;
    cmd_table1->add_option("--ns", ns_list, "signal photon numbers");
    cmd_table1->add_option("--rates", rate_list, "channel rates");
    cmd_table1->add_option("--separation", table_s, "d/sigma for the imaging rows");
    cmd_table1->add_flag("--no-oracle", no_oracle, "skip the numeric-QFI oracle column");

    // echo-verify
    auto* cmd_echo = app.add_subcommand("echo-verify", "randomized echo-theorem verification");
    int echo_samples = 50;
    double echo_eta = 0.01;
    cmd_echo->add_option("--samples", echo_samples, "random (r, eta) draws");
    cmd_echo->add_option("--max-eta", echo_eta, "perturbation norm bound");

    // sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "separation sweep (Rayleigh-curse study)");
    std::string sweep_strategy = "spade";
    std::vector<double> d_grid;
    double sweep_eps = 0.01, sweep_r = 1.0;
    long sweep_trials = 1000000;
    int sweep_reps = 1;
    cmd_sweep->add_option("--strategy", sweep_strategy, "direct|spade|twin_beam_echo")
        ->check(CLI::IsMember({"direct", "spade", "twin_beam_echo"}));
    cmd_sweep->add_option("--d-grid", d_grid, "separations d/sigma");
    cmd_sweep->add_option("--eps", sweep_eps, "scene brightness");
    cmd_sweep->add_option("--r", sweep_r, "echo squeezing");
    cmd_sweep->add_option("--trials", sweep_trials, "trials per replication");
    cmd_sweep->add_option("--replications", sweep_reps, "Monte-Carlo replications (1: skip MLE)");

    // fisher
    auto* cmd_fisher = app.add_subcommand("fisher", "evaluate one task/probe Fisher information");
    std::string fisher_task = "loss", fisher_probe = "optimal";
    double fisher_ns = 1.0, fisher_rate = 0.01, fisher_s = 0.1;
    cmd_fisher->add_option("--task", fisher_task, "loss|amp|agn|subdiff-fluor|subdiff-abs")
        ->check(CLI::IsMember({"loss", "amp", "agn", "subdiff-fluor", "subdiff-abs"}));
    cmd_fisher->add_option("--probe", fisher_probe, "optimal|vacuum|coherent")
        ->check(CLI::IsMember({"optimal", "vacuum", "coherent"}));
    cmd_fisher->add_option("--ns", fisher_ns, "signal photons N_S");
    cmd_fisher->add_option("--rate", fisher_rate, "channel rate");
    cmd_fisher->add_option("--separation", fisher_s, "d/sigma");

    // noise-matrix
    auto* cmd_noise = app.add_subcommand("noise-matrix", "probe-vs-noise robustness pattern");
    double nm_r = 1.0, nm_gamma = 0.01;
    int nm_n = 1;
    cmd_noise->add_option("--r", nm_r, "squeezing");
    cmd_noise->add_option("--gamma", nm_gamma, "scene rates");
    cmd_noise->add_option("--n", nm_n, "Fock occupation");

    // run
    auto* cmd_run = app.add_subcommand("run", "execute a configured experiment");
    std::string config_path;
    cmd_run->add_option("--config", config_path, "JSON scenario config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const int threads = eqi::config::resolve_threads(threads_flag);
    Eigen::setNbThreads(threads);

    try {
        if (*cmd_table1) {
            const auto rows = build_table1(ns_list, rate_list, table_s, !no_oracle);
            CsvWriter csv;
            csv.header = {"task", "probe", "N_S", "rate", "reference_fi",
                          "achieved_fi", "ratio", "oracle_qfi", "oracle_error"};
            std::cout << "task            probe     N_S  rate   reference     achieved      "
                         "ratio    oracle\n";
            for (const auto& row : rows) {
                csv.add_row({row.task, row.probe, format_double(row.n_s),
                             format_double(row.rate), format_double(row.reference),
                             format_double(row.achieved), format_double(row.ratio),
                             row.has_oracle ? format_double(row.oracle) : "",
                             row.has_oracle ? format_double(row.oracle_err) : ""});
                std::ostringstream line;
                line.setf(std::ios::left);
                line.width(16);
                line << row.task;
                line.width(10);
                line << row.probe;
                line << row.n_s << "  " << row.rate << "  ";
                line.precision(6);
                line << row.reference << "  " << row.achieved << "  " << row.ratio;
                if (row.has_oracle) line << "  " << row.oracle;
                std::cout << line.str() << "\n";
            }
            if (!out_dir.empty()) {
                json summary = run_summary(json{{"command", "table1"}}, seed, threads);
                summary["rows"] = rows.size();
                write_outputs(out_dir, "table1", csv, summary, format);
            }
        } else if (*cmd_echo) {
            const auto rep = run_echo_verify(echo_samples, seed, echo_eta);
            std::cout << "echo-verify over " << rep.samples << " random draws:\n"
                      << "  max ||Sigma3 - closed form|| / ||eta||^2 = "
                      << rep.max_residual_ratio << "\n"
                      << "  residual reduction when eta halved: [" << rep.worst_scaling << ", "
                      << rep.best_scaling << "] (expect ~4)\n"
                      << "  oracle click mismatch / Gamma = " << rep.oracle_max_rel_mismatch
                      << ", scaling " << rep.oracle_scaling << " (expect ~4)\n";
            if (rep.max_residual_ratio > 10.0)
                throw NumericalError("echo-verify: first-order residual exceeds bound");
        } else if (*cmd_sweep) {
            if (d_grid.empty()) d_grid = {0.01, 0.02, 0.04, 0.08, 0.1};
            using eqi::experiments::Strategy;
            const Strategy strategy = sweep_strategy == "direct" ? Strategy::direct
                                      : sweep_strategy == "spade" ? Strategy::spade
                                                                  : Strategy::twin_beam_echo;
            const auto rows = eqi::experiments::rayleigh_sweep(strategy, d_grid, sweep_eps,
                                                               sweep_r, sweep_trials,
                                                               sweep_reps, seed);
            CsvWriter csv;
            csv.header = {"d_over_sigma", "strategy", "fi_analytic", "fi_numeric",
                          "mle_variance", "crb"};
            std::vector<double> xs, ys;
            for (const auto& row : rows) {
                csv.add_row({format_double(row.d_over_sigma), sweep_strategy,
                             format_double(row.fi_analytic), format_double(row.fi_numeric),
                             format_double(row.mle_variance), format_double(row.crb)});
                xs.push_back(row.d_over_sigma);
                ys.push_back(row.fi_numeric);
                std::cout << "d/sigma=" << row.d_over_sigma << "  FI=" << row.fi_numeric
                          << "  (analytic " << row.fi_analytic << ")\n";
            }
            std::cout << "log-log FI slope: " << fit_loglog_slope(xs, ys) << "\n";
            json summary = run_summary(json{{"command", "sweep"}}, seed, threads);
            summary["slope"] = fit_loglog_slope(xs, ys);
            write_outputs(out_dir, "sweep_" + sweep_strategy, csv, summary, format);
        } else if (*cmd_fisher) {
            TaskParams p;
            p.N_S = fisher_ns;
            p.gamma = fisher_rate;
            p.eps = fisher_rate;
            p.s = fisher_s;
            const Task task = fisher_task == "loss" ? Task::loss
                              : fisher_task == "amp" ? Task::amp
                              : fisher_task == "agn" ? Task::agn
                              : fisher_task == "subdiff-fluor" ? Task::subdiff_fluor
                                                               : Task::subdiff_abs;
            const Probe probe = fisher_probe == "optimal" ? Probe::optimal
                                : fisher_probe == "vacuum" ? Probe::vacuum
                                                           : Probe::coherent;
            const double ref = eqi::fisher::table1_reference(task, probe, p);
            std::cout << "reference FI: " << format_double(ref) << "\n";
            if (probe == Probe::optimal)
                std::cout << "protocol-achieved FI: " << format_double(achieved_optimal(task, p))
                          << "\n";
            if (probe == Probe::coherent)
                std::cout << "mean+vacuum estimate: "
                          << format_double(coherent_row_estimate(task, p)) << "\n";
            if (task == Task::loss || task == Task::amp)
                std::cout << "exact channel QFI: "
                          << format_double(eqi::fisher::exact_channel_qfi(task, p.gamma, p.N_S))
                          << "\n";
        } else if (*cmd_noise) {
            const auto entries = build_noise_matrix(nm_gamma, nm_gamma, nm_r, nm_n);
            CsvWriter csv;
            csv.header = {"probe", "noise", "channel", "dp_dkappa", "expected_zero"};
            std::cout << "probe                 noise  channel       dp/dkappa    robust\n";
            bool pattern_ok = true;
            for (const auto& e : entries) {
                csv.add_row({e.probe, e.noise, e.channel, format_double(e.derivative),
                             e.expected_zero ? "yes" : "no"});
                const bool is_zero = std::abs(e.derivative) < 1e-12;
                if (is_zero != e.expected_zero) pattern_ok = false;
                std::ostringstream line;
                line.setf(std::ios::left);
                line.width(22);
                line << e.probe;
                line.width(7);
                line << e.noise;
                line.width(14);
                line << e.channel;
                line << e.derivative << (e.expected_zero ? "  (robust)" : "");
                std::cout << line.str() << "\n";
            }
            std::cout << (pattern_ok ? "pattern: OK\n" : "pattern: MISMATCH\n");
            if (!out_dir.empty()) {
                json summary = run_summary(json{{"command", "noise-matrix"}}, seed, threads);
                summary["pattern_ok"] = pattern_ok;
                write_outputs(out_dir, "noise_matrix", csv, summary, format);
            }
            if (!pattern_ok) throw NumericalError("noise-matrix: derivative pattern mismatch");
        } else if (*cmd_run) {
            auto cfg = eqi::config::load_config(config_path);
            if (app.count("--seed")) cfg.seed = seed;
            const json cfg_json = eqi::config::to_json(cfg);
            json summary = run_summary(cfg_json, cfg.seed, threads);
            summary["config"] = cfg_json;

            if (cfg.run_kind == eqi::config::RunKind::rayleigh_sweep) {
                using eqi::experiments::Strategy;
                const Strategy strategy =
                    cfg.strategy == eqi::config::MeasurementStrategy::direct
                        ? Strategy::direct
                        : (cfg.strategy == eqi::config::MeasurementStrategy::spade
                               ? Strategy::spade
                               : Strategy::twin_beam_echo);
                std::vector<double> grid =
                    cfg.d_grid.empty() ? std::vector<double>{0.01, 0.02, 0.04, 0.08, 0.1}
                                       : cfg.d_grid;
                const double r = cfg.probe.squeeze_r.empty() ? 0.0 : cfg.probe.squeeze_r.front();
                const auto rows = eqi::experiments::rayleigh_sweep(
                    strategy, grid, cfg.scene.rate, r, cfg.trials, cfg.replications, cfg.seed);
                CsvWriter csv;
                csv.header = {"d_over_sigma", "strategy", "fi_analytic", "fi_numeric",
                              "mle_variance", "crb"};
                std::vector<double> xs, ys;
                for (const auto& row : rows) {
                    csv.add_row({format_double(row.d_over_sigma),
                                 cfg.strategy == eqi::config::MeasurementStrategy::direct
                                     ? "direct"
                                     : "spade",
                                 format_double(row.fi_analytic), format_double(row.fi_numeric),
                                 format_double(row.mle_variance), format_double(row.crb)});
                    xs.push_back(row.d_over_sigma);
                    ys.push_back(row.fi_numeric);
                }
                summary["slope"] = fit_loglog_slope(xs, ys);
                write_outputs(out_dir, "rayleigh_sweep", csv, summary, format);
                std::cout << "rayleigh_sweep: slope " << fit_loglog_slope(xs, ys) << ", "
                          << rows.size() << " rows written\n";
            } else if (cfg.run_kind == eqi::config::RunKind::mle) {
                const double s = cfg.d_over_sigma;
                const auto basis = eqi::scene::ModeBasis::hg(1.0, cfg.hg_modes);
                auto model = [&](const std::vector<double>& th) {
                    eqi::scene::Scene sc{{{0.5 * th[0], 0.5}, {-0.5 * th[0], 0.5}},
                                         eqi::scene::SceneKind::emission, cfg.scene.rate, 1.0,
                                         0.0};
                    return eqi::protocols::spade(sc, basis, cfg.probe, false);
                };
                const double fi = 0.5 * cfg.scene.rate;  // leading-order SPADE FI
                const auto rep = eqi::experiments::mle_efficiency(
                    model, {s}, {fi}, {{s / 5.0, 5.0 * s}}, cfg.trials, cfg.replications,
                    cfg.seed);
                summary["estimate_mean"] = rep.estimates[0];
                summary["sample_variance"] = rep.sample_variance[0];
                summary["crb"] = rep.crb[0];
                summary["variance_over_crb"] = rep.sample_variance[0] / rep.crb[0];
                summary["bias"] = rep.bias[0];
                summary["converged"] = rep.converged;
                CsvWriter csv;
                csv.header = {"d_over_sigma", "estimate_mean", "sample_variance", "crb",
                              "variance_over_crb", "bias"};
                csv.add_row({format_double(s), format_double(rep.estimates[0]),
                             format_double(rep.sample_variance[0]), format_double(rep.crb[0]),
                             format_double(rep.sample_variance[0] / rep.crb[0]),
                             format_double(rep.bias[0])});
                write_outputs(out_dir, "mle", csv, summary, format);
                std::cout << "mle: variance/CRB = " << rep.sample_variance[0] / rep.crb[0]
                          << "\n";
            } else {
                const double r = cfg.probe.squeeze_r.empty() ? 1.0 : cfg.probe.squeeze_r.front();
                const int n = cfg.probe.fock_n.empty() ? 1 : cfg.probe.fock_n.front();
                const auto entries = build_noise_matrix(cfg.scene.rate, cfg.scene.rate, r, n);
                CsvWriter csv;
                csv.header = {"probe", "noise", "channel", "dp_dkappa", "expected_zero"};
                bool pattern_ok = true;
                for (const auto& e : entries) {
                    csv.add_row({e.probe, e.noise, e.channel, format_double(e.derivative),
                                 e.expected_zero ? "yes" : "no"});
                    if ((std::abs(e.derivative) < 1e-12) != e.expected_zero) pattern_ok = false;
                }
                summary["pattern_ok"] = pattern_ok;
                write_outputs(out_dir, "noise_matrix", csv, summary, format);
                std::cout << "noise_matrix: pattern " << (pattern_ok ? "OK" : "MISMATCH") << "\n";
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
