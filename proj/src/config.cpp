#include "eqi/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace eqi::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

const json& require(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) fail(path + "." + key, "missing");
    return j.at(key);
}

double number_at(const json& j, const std::string& path, const char* key, double fallback,
                 bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(path + "." + key, "missing");
        return fallback;
    }
    if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
    return j.at(key).get<double>();
}

std::string string_at(const json& j, const std::string& path, const char* key,
                      const std::string& fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required) fail(path + "." + key, "missing");
        return fallback;
    }
    if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
    return j.at(key).get<std::string>();
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
    ScenarioConfig cfg;
    if (!j.is_object()) throw ConfigError("config: root must be an object");
    const int version = static_cast<int>(number_at(j, "", "schema_version", 0, true));
    if (version != kSchemaVersion)
        fail("schema_version", "unsupported version " + std::to_string(version) +
                                   " (expected " + std::to_string(kSchemaVersion) + ")");

    // scene
    const json& sc = require(j, "", "scene");
    const std::string kind = string_at(sc, "scene", "kind", "emission");
    if (kind == "emission")
        cfg.scene.kind = scene::SceneKind::emission;
    else if (kind == "absorption")
        cfg.scene.kind = scene::SceneKind::absorption;
    else
        fail("scene.kind", "must be 'emission' or 'absorption'");
    cfg.scene.rate = number_at(sc, "scene", "rate", 0.0, true);
    cfg.scene.sigma = number_at(sc, "scene", "sigma", 1.0);
    cfg.scene.correlation = number_at(sc, "scene", "correlation", 0.0);
    if (cfg.scene.sigma <= 0.0) fail("scene.sigma", "must be > 0");
    if (cfg.scene.rate < 0.0) fail("scene.rate", "must be >= 0");
    const json& sources = require(sc, "scene", "sources");
    if (!sources.is_array() || sources.empty()) fail("scene.sources", "must be a non-empty array");
    for (size_t i = 0; i < sources.size(); ++i) {
        const std::string p = "scene.sources[" + std::to_string(i) + "]";
        scene::Source src;
        src.x = number_at(sources[i], p, "x", 0.0, true);
        src.weight = number_at(sources[i], p, "weight", 1.0);
        if (src.weight < 0.0) fail(p + ".weight", "must be >= 0");
        cfg.scene.sources.push_back(src);
    }

    // probe
    const json& pr = j.contains("probe") ? j.at("probe") : json::object();
    const std::string pkind = string_at(pr, "probe", "kind", "vacuum");
    if (pkind == "vacuum")
        cfg.probe.kind = protocols::ProbeKind::vacuum;
    else if (pkind == "twin_beam_echo")
        cfg.probe.kind = protocols::ProbeKind::twin_beam_echo;
    else if (pkind == "fock")
        cfg.probe.kind = protocols::ProbeKind::fock;
    else if (pkind == "single_mode_sqz_echo")
        cfg.probe.kind = protocols::ProbeKind::single_mode_sqz_echo;
    else if (pkind == "coherent")
        cfg.probe.kind = protocols::ProbeKind::coherent;
    else if (pkind == "vacuum")
        cfg.probe.kind = protocols::ProbeKind::vacuum;
    else
        fail("probe.kind", "unknown probe kind '" + pkind + "'");
    if (pr.contains("r")) {
        if (!pr.at("r").is_array()) fail("probe.r", "expected an array of reals");
        for (const auto& v : pr.at("r")) cfg.probe.squeeze_r.push_back(v.get<double>());
    }
    if (pr.contains("n")) {
        if (!pr.at("n").is_array()) fail("probe.n", "expected an array of integers");
        for (const auto& v : pr.at("n")) cfg.probe.fock_n.push_back(v.get<int>());
    }
    cfg.probe.coherent_amp = number_at(pr, "probe", "alpha", 0.0);

    // noise
    const json& no = j.contains("noise") ? j.at("noise") : json::object();
    cfg.noise.kappa_loss = number_at(no, "noise", "kappa_loss", 0.0);
    cfg.noise.kappa_heat = number_at(no, "noise", "kappa_heat", 0.0);
    cfg.noise.kappa_agn = number_at(no, "noise", "kappa_agn", 0.0);
    const std::string sector = string_at(no, "noise", "sector", "signal");
    if (sector == "signal")
        cfg.noise.sector = protocols::NoiseSector::signal;
    else if (sector == "idler")
        cfg.noise.sector = protocols::NoiseSector::idler;
    else
        fail("noise.sector", "must be 'signal' or 'idler'");

    // measurement
    const json& me = j.contains("measurement") ? j.at("measurement") : json::object();
    const std::string strategy = string_at(me, "measurement", "strategy", "spade");
    if (strategy == "direct")
        cfg.strategy = MeasurementStrategy::direct;
    else if (strategy == "spade")
        cfg.strategy = MeasurementStrategy::spade;
    else if (strategy == "twin_beam_echo")
        cfg.strategy = MeasurementStrategy::twin_beam_echo;
    else
        fail("measurement.strategy", "unknown strategy '" + strategy + "'");
    cfg.hg_modes = static_cast<int>(number_at(me, "measurement", "hg_modes", 20));
    cfg.pixels_per_sigma = static_cast<int>(number_at(me, "measurement", "pixels_per_sigma", 40));
    cfg.half_width_sigmas = number_at(me, "measurement", "half_width_sigmas", 6.0);
    if (cfg.hg_modes <= 0) fail("measurement.hg_modes", "must be > 0");

    // run
    const json& run = require(j, "", "run");
    const std::string rkind = string_at(run, "run", "kind", "", true);
    if (rkind == "rayleigh_sweep")
        cfg.run_kind = RunKind::rayleigh_sweep;
    else if (rkind == "mle")
        cfg.run_kind = RunKind::mle;
    else if (rkind == "noise_matrix")
        cfg.run_kind = RunKind::noise_matrix;
    else
        fail("run.kind", "unknown run kind '" + rkind + "'");
    if (run.contains("d_grid")) {
        if (!run.at("d_grid").is_array()) fail("run.d_grid", "expected an array");
        for (const auto& v : run.at("d_grid")) cfg.d_grid.push_back(v.get<double>());
    }
    cfg.d_over_sigma = number_at(run, "run", "d_over_sigma", 0.1);
    cfg.trials = static_cast<long>(number_at(run, "run", "trials", 1e6));
    cfg.seed = static_cast<std::uint64_t>(number_at(run, "run", "seed", 42));
    cfg.replications = static_cast<int>(number_at(run, "run", "replications", 200));
    if (cfg.trials <= 0) fail("run.trials", "must be > 0");
    if (cfg.replications < 2) fail("run.replications", "must be >= 2");

    try {
        cfg.scene.validate();
        cfg.noise.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: JSON parse failure in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
    json j;
    j["schema_version"] = kSchemaVersion;
    json sources = json::array();
    for (const auto& s : cfg.scene.sources) sources.push_back({{"x", s.x}, {"weight", s.weight}});
    j["scene"] = {{"kind", cfg.scene.kind == scene::SceneKind::emission ? "emission" : "absorption"},
                  {"rate", cfg.scene.rate},
                  {"sigma", cfg.scene.sigma},
                  {"correlation", cfg.scene.correlation},
                  {"sources", sources}};
    const char* pkind = "vacuum";
    switch (cfg.probe.kind) {
        case protocols::ProbeKind::vacuum: pkind = "vacuum"; break;
        case protocols::ProbeKind::twin_beam_echo: pkind = "twin_beam_echo"; break;
        case protocols::ProbeKind::fock: pkind = "fock"; break;
        case protocols::ProbeKind::single_mode_sqz_echo: pkind = "single_mode_sqz_echo"; break;
        case protocols::ProbeKind::coherent: pkind = "coherent"; break;
    }
    j["probe"] = {{"kind", pkind},
                  {"r", cfg.probe.squeeze_r},
                  {"n", cfg.probe.fock_n},
                  {"alpha", cfg.probe.coherent_amp}};
    j["noise"] = {{"kappa_loss", cfg.noise.kappa_loss},
                  {"kappa_heat", cfg.noise.kappa_heat},
                  {"kappa_agn", cfg.noise.kappa_agn},
                  {"sector", cfg.noise.sector == protocols::NoiseSector::signal ? "signal" : "idler"}};
    const char* strategy = "spade";
    if (cfg.strategy == MeasurementStrategy::direct) strategy = "direct";
    if (cfg.strategy == MeasurementStrategy::twin_beam_echo) strategy = "twin_beam_echo";
    j["measurement"] = {{"strategy", strategy},
                        {"hg_modes", cfg.hg_modes},
                        {"pixels_per_sigma", cfg.pixels_per_sigma},
                        {"half_width_sigmas", cfg.half_width_sigmas}};
    const char* rkind = "rayleigh_sweep";
    if (cfg.run_kind == RunKind::mle) rkind = "mle";
    if (cfg.run_kind == RunKind::noise_matrix) rkind = "noise_matrix";
    j["run"] = {{"kind", rkind},
                {"d_grid", cfg.d_grid},
                {"d_over_sigma", cfg.d_over_sigma},
                {"trials", cfg.trials},
                {"seed", cfg.seed},
                {"replications", cfg.replications}};
    return j;
}

std::string config_hash(const json& j) {
    const std::string canonical = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void CsvWriter::add_row(const std::vector<std::string>& row) {
    if (row.size() != header.size())
        throw std::invalid_argument("CsvWriter: row width does not match header");
    rows.push_back(row);
}

std::string CsvWriter::render() const {
    std::ostringstream os;
    auto emit = [&os](const std::vector<std::string>& fields) {
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << csv_escape(fields[i]);
        }
        os << "\r\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return os.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << contents;
        if (!out.good()) throw std::runtime_error("atomic_write: write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

int resolve_threads(std::optional<int> flag_value) {
    if (flag_value && *flag_value > 0) return *flag_value;
    if (const char* env = std::getenv("ECHO_IMAGER_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

}  // namespace eqi::config
