#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "pisac/errors.hpp"
#include "pisac/harness.hpp"

namespace pisac {

using nlohmann::json;

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::calibrate: return "calibrate";
        case Experiment::roc: return "roc";
        case Experiment::tradeoff: return "tradeoff";
        case Experiment::contour: return "contour";
        case Experiment::sweep: return "sweep";
        case Experiment::beampattern: return "beampattern";
        case Experiment::heatmap: return "heatmap";
        case Experiment::validate: return "validate";
    }
    return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
    for (Experiment e : {Experiment::calibrate, Experiment::roc, Experiment::tradeoff, Experiment::contour,
                         Experiment::sweep, Experiment::beampattern, Experiment::heatmap, Experiment::validate})
        if (to_string(e) == name) return e;
    throw ConfigError("unknown experiment '" + name + "'");
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::active: return "active";
        case Scheme::max_pd: return "max_pd";
        case Scheme::snrd_threshold: return "snrd_threshold";
        case Scheme::max_snr_t: return "max_snr_t";
        case Scheme::comm_only: return "comm_only";
        case Scheme::sensing_only: return "sensing_only";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    for (Scheme s : {Scheme::active, Scheme::max_pd, Scheme::snrd_threshold, Scheme::max_snr_t, Scheme::comm_only,
                     Scheme::sensing_only})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown scheme '" + name + "'");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

Vec2 vec2(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-element position");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> vec2_list(const json& j) {
    std::vector<Vec2> out;
    for (const auto& e : j) out.push_back(vec2(e));
    return out;
}

json to_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json to_json(const std::vector<Vec2>& v) {
    json out = json::array();
    for (const auto& p : v) out.push_back(to_json(p));
    return out;
}

template <typename T>
void read(const json& j, const char* key, T& target) {
    if (j.contains(key) && !j[key].is_null()) {
        try {
            target = j[key].get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

json scenario_to_json(const ScenarioConfig& s) {
    json j;
    j["bs_position"] = to_json(s.bs_position);
    j["sr_positions"] = to_json(s.sr_positions);
    j["target_position"] = to_json(s.target_position);
    j["cu_positions"] = to_json(s.cu_positions);
    j["n_t"] = s.n_t;
    j["n_1"] = s.n_1;
    j["n_2"] = s.n_2;
    j["n_r"] = s.n_r;
    j["carrier_wavelength"] = s.carrier_wavelength;
    j["antenna_spacing"] = s.antenna_spacing;
    j["p_t"] = s.p_t;
    j["sigma_r2"] = s.sigma_r2;
    j["sigma_c2"] = s.sigma_c2;
    j["rcs_variance"] = s.rcs_variance;
    j["block_length"] = s.block_length;
    j["sample_rate"] = s.sample_rate;
    j["target_velocity"] = to_json(s.target_velocity);
    j["seed"] = s.seed;
    j["cu_channel_variance"] = s.cu_channel_variance ? json(*s.cu_channel_variance) : json(nullptr);
    j["broadside_deg"] = s.broadside_deg;
    return j;
}

ScenarioConfig scenario_from_json(const json& j, ScenarioConfig s) {
    check_keys(j,
               {"preset", "bs_position", "sr_positions", "target_position", "cu_positions", "n_t", "n_1", "n_2", "n_r",
                "carrier_wavelength", "carrier_frequency", "antenna_spacing", "p_t", "p_t_dbw", "sigma_r2",
                "sigma_c2", "noise_dbw", "rcs_variance", "rcs_dbsm", "block_length", "sample_rate",
                "target_velocity", "seed", "cu_channel_variance", "broadside_deg"},
               "scenario");
    if (j.contains("preset")) {
        const auto preset = j["preset"].get<std::string>();
        if (preset == "multistatic")
            s = ScenarioConfig::multistatic_default();
        else if (preset == "ofdm")
            s = ScenarioConfig::ofdm_default();
        else
            throw ConfigError("unknown scenario preset '" + preset + "'");
    }
    if (j.contains("bs_position")) s.bs_position = vec2(j["bs_position"]);
    if (j.contains("sr_positions")) s.sr_positions = vec2_list(j["sr_positions"]);
    if (j.contains("target_position")) s.target_position = vec2(j["target_position"]);
    if (j.contains("cu_positions")) s.cu_positions = vec2_list(j["cu_positions"]);
    read(j, "n_t", s.n_t);
    read(j, "n_1", s.n_1);
    read(j, "n_2", s.n_2);
    read(j, "n_r", s.n_r);
    if (j.contains("carrier_frequency")) {
        s.carrier_wavelength = kSpeedOfLight / j["carrier_frequency"].get<double>();
        s.antenna_spacing = 0.5 * s.carrier_wavelength;
    }
    read(j, "carrier_wavelength", s.carrier_wavelength);
    read(j, "antenna_spacing", s.antenna_spacing);
    read(j, "p_t", s.p_t);
    if (j.contains("p_t_dbw")) s.p_t = db_to_linear(j["p_t_dbw"].get<double>());
    if (j.contains("noise_dbw")) s.sigma_r2 = s.sigma_c2 = db_to_linear(j["noise_dbw"].get<double>());
    read(j, "sigma_r2", s.sigma_r2);
    read(j, "sigma_c2", s.sigma_c2);
    read(j, "rcs_variance", s.rcs_variance);
    if (j.contains("rcs_dbsm")) s.rcs_variance = db_to_linear(j["rcs_dbsm"].get<double>());
    read(j, "block_length", s.block_length);
    read(j, "sample_rate", s.sample_rate);
    if (j.contains("target_velocity")) s.target_velocity = vec2(j["target_velocity"]);
    read(j, "seed", s.seed);
    if (j.contains("cu_channel_variance")) {
        if (j["cu_channel_variance"].is_null())
            s.cu_channel_variance.reset();
        else
            s.cu_channel_variance = j["cu_channel_variance"].get<double>();
    }
    read(j, "broadside_deg", s.broadside_deg);
    return s;
}

void ExperimentConfig::apply_scale(Scale s) {
    scale = s;
    if (s == Scale::desk) {
        pfa = 1e-2;
        n_calibration = 10000;
        n_detection = 2000;
    } else {
        pfa = 1e-3;
        n_calibration = 100000;
        n_detection = 100000;
    }
}

void ExperimentConfig::validate() const {
    scenario.validate();
    const bool calibrated = experiment == Experiment::calibrate || experiment == Experiment::roc ||
                            experiment == Experiment::tradeoff || experiment == Experiment::sweep;
    if (calibrated) {
        if (!(pfa > 0 && pfa < 1)) throw ConfigError("pfa must lie in (0, 1)");
        if (static_cast<double>(n_calibration) * pfa < 10.0)
            throw ConfigError("n_calibration * pfa must be at least 10");
        if (schemes.empty()) throw ConfigError("no schemes configured");
        if (n_detection < 1) throw ConfigError("n_detection must be positive");
    }
    for (double p : pfa_grid)
        if (!(p > 0 && p <= 1)) throw ConfigError("pfa_grid entries must lie in (0, 1]");
    if (experiment == Experiment::tradeoff && gamma_c_db_list.empty()) throw ConfigError("gamma_c_db_list is empty");
    if (experiment == Experiment::sweep) {
        if (sweep_axis != "rcs" && sweep_axis != "power") throw ConfigError("sweep_axis must be 'rcs' or 'power'");
        if ((sweep_axis == "rcs" ? rcs_dbsm_list : power_dbw_list).empty()) throw ConfigError("sweep axis is empty");
    }
    if (experiment == Experiment::contour) {
        if (contour.l < 1 || contour.m < 1 || contour.c < 1) throw ConfigError("contour dimensions must be positive");
        if (contour.n_shapes < 1) throw ConfigError("contour needs at least one channel shape");
    }
    if (experiment == Experiment::heatmap) {
        if (heatmap.nx < 1 || heatmap.ny < 1 || !(heatmap.spacing > 0)) throw ConfigError("bad heatmap grid");
        if (heatmap.n_trials < 1) throw ConfigError("heatmap needs at least one trial");
    }
    if (experiment == Experiment::beampattern && schemes.empty()) throw ConfigError("no schemes configured");
    if (gamma_d_points < 1) throw ConfigError("gamma_d_points must be positive");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    check_keys(j,
               {"experiment", "scenario", "schemes", "gamma_c_db", "gamma_d", "gamma_d_points", "n_calibration",
                "n_detection", "pfa", "pfa_grid", "gamma_c_db_list", "sweep_axis", "rcs_dbsm_list", "power_dbw_list",
                "angle_grid_deg", "contour", "heatmap", "physical_chain", "design", "scale", "output_dir", "seed"},
               "config");
    ExperimentConfig c;
    if (j.contains("experiment")) c.experiment = experiment_from_string(j["experiment"].get<std::string>());
    if (c.experiment == Experiment::heatmap || c.experiment == Experiment::beampattern)
        c.scenario = ScenarioConfig::ofdm_default();
    if (j.contains("scale")) {
        const auto s = j["scale"].get<std::string>();
        if (s != "desk" && s != "paper") throw ConfigError("scale must be 'desk' or 'paper'");
        c.apply_scale(s == "desk" ? Scale::desk : Scale::paper);
    }
    if (j.contains("scenario")) c.scenario = scenario_from_json(j["scenario"], c.scenario);
    if (j.contains("schemes")) {
        c.schemes.clear();
        for (const auto& s : j["schemes"]) c.schemes.push_back(scheme_from_string(s.get<std::string>()));
    }
    read(j, "gamma_c_db", c.gamma_c_db);
    if (j.contains("gamma_d") && !j["gamma_d"].is_null()) c.gamma_d = j["gamma_d"].get<double>();
    read(j, "gamma_d_points", c.gamma_d_points);
    read(j, "n_calibration", c.n_calibration);
    read(j, "n_detection", c.n_detection);
    read(j, "pfa", c.pfa);
    read(j, "pfa_grid", c.pfa_grid);
    read(j, "gamma_c_db_list", c.gamma_c_db_list);
    read(j, "sweep_axis", c.sweep_axis);
    read(j, "rcs_dbsm_list", c.rcs_dbsm_list);
    read(j, "power_dbw_list", c.power_dbw_list);
    read(j, "angle_grid_deg", c.angle_grid_deg);
    if (j.contains("contour")) {
        const json& k = j["contour"];
        check_keys(k, {"l", "m", "c", "snr_t_db", "snr_d_db", "n_shapes", "mc_trials"}, "contour");
        read(k, "l", c.contour.l);
        read(k, "m", c.contour.m);
        read(k, "c", c.contour.c);
        read(k, "snr_t_db", c.contour.snr_t_db);
        read(k, "snr_d_db", c.contour.snr_d_db);
        read(k, "n_shapes", c.contour.n_shapes);
        read(k, "mc_trials", c.contour.mc_trials);
    }
    if (j.contains("heatmap")) {
        const json& h = j["heatmap"];
        check_keys(h, {"nx", "ny", "spacing", "center", "n_trials", "rcs_dbsm", "scheme", "ofdm"}, "heatmap");
        read(h, "nx", c.heatmap.nx);
        read(h, "ny", c.heatmap.ny);
        read(h, "spacing", c.heatmap.spacing);
        if (h.contains("center")) c.heatmap.center = vec2(h["center"]);
        read(h, "n_trials", c.heatmap.n_trials);
        read(h, "rcs_dbsm", c.heatmap.rcs_dbsm);
        if (h.contains("scheme")) c.heatmap.scheme = scheme_from_string(h["scheme"].get<std::string>());
        read(h, "ofdm", c.heatmap.ofdm);
    }
    read(j, "physical_chain", c.physical_chain);
    if (j.contains("design")) {
        const json& d = j["design"];
        check_keys(d, {"eps", "k_max", "n_candidates", "seed"}, "design");
        read(d, "eps", c.design.eps);
        read(d, "k_max", c.design.k_max);
        read(d, "n_candidates", c.design.n_candidates);
        read(d, "seed", c.design.seed);
    }
    read(j, "output_dir", c.output_dir);
    read(j, "seed", c.seed);
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = to_string(experiment);
    j["scenario"] = scenario_to_json(scenario);
    j["schemes"] = json::array();
    for (Scheme s : schemes) j["schemes"].push_back(to_string(s));
    j["gamma_c_db"] = gamma_c_db;
    j["gamma_d"] = gamma_d ? json(*gamma_d) : json(nullptr);
    j["gamma_d_points"] = gamma_d_points;
    j["n_calibration"] = n_calibration;
    j["n_detection"] = n_detection;
    j["pfa"] = pfa;
    j["pfa_grid"] = pfa_grid;
    j["gamma_c_db_list"] = gamma_c_db_list;
    j["sweep_axis"] = sweep_axis;
    j["rcs_dbsm_list"] = rcs_dbsm_list;
    j["power_dbw_list"] = power_dbw_list;
    j["angle_grid_deg"] = angle_grid_deg;
    j["contour"] = {{"l", contour.l},
                    {"m", contour.m},
                    {"c", contour.c},
                    {"snr_t_db", contour.snr_t_db},
                    {"snr_d_db", contour.snr_d_db},
                    {"n_shapes", contour.n_shapes},
                    {"mc_trials", contour.mc_trials}};
    j["heatmap"] = {{"nx", heatmap.nx},
                    {"ny", heatmap.ny},
                    {"spacing", heatmap.spacing},
                    {"center", pisac::to_json(heatmap.center)},
                    {"n_trials", heatmap.n_trials},
                    {"rcs_dbsm", heatmap.rcs_dbsm},
                    {"scheme", to_string(heatmap.scheme)},
                    {"ofdm", heatmap.ofdm}};
    j["physical_chain"] = physical_chain;
    j["design"] = {{"eps", design.eps},
                   {"k_max", design.k_max},
                   {"n_candidates", design.n_candidates},
                   {"seed", design.seed}};
    j["scale"] = scale == Scale::desk ? "desk" : "paper";
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

void CurveTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw DimensionMismatch("row width differs from the header of " + name);
    rows.push_back(std::move(row));
}

std::size_t CurveTable::column(const std::string& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == col) return i;
    throw ConfigError("table " + name + " has no column " + col);
}

std::vector<double> CurveTable::column_values(const std::string& col) const {
    const std::size_t k = column(col);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
}

std::string CurveTable::to_csv() const {
    std::ostringstream os;
    for (const auto& [key, value] : metadata.items()) os << "# " << key << '=' << value.dump() << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << '\n';
    }
    return os.str();
}

void CurveTable::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << to_csv();
}

std::string run_id(const ExperimentConfig& config) {
    const std::string text = config.to_json().dump() + "#" + std::to_string(config.seed);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void stamp(CurveTable& table, const ExperimentConfig& config) {
    table.metadata["seed"] = config.seed;
    table.metadata["run_id"] = run_id(config);
    table.metadata["config"] = config.to_json();
}

void write_outputs(const std::vector<CurveTable>& tables, const ExperimentConfig& config, const json& extra) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["run_id"] = run_id(config);
    manifest["seed"] = config.seed;
    manifest["config"] = config.to_json();
    manifest["tables"] = json::array();
    for (const auto& t : tables) {
        const std::string file = t.name + ".csv";
        t.write_csv(dir / file);
        json entry{{"name", t.name}, {"file", file}, {"rows", t.rows.size()}, {"columns", t.columns}};
        for (const auto& [key, value] : t.metadata.items())
            if (key != "config" && key != "seed" && key != "run_id") entry[key] = value;
        manifest["tables"].push_back(entry);
    }
    if (!extra.empty()) manifest["extra"] = extra;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw ConfigError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

std::string beamformer_csv(const CMat& w) {
    std::ostringstream os;
    for (Eigen::Index n = 0; n < w.cols(); ++n) os << (n ? "," : "") << "re_w" << n << ",im_w" << n;
    os << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index n = 0; n < w.cols(); ++n)
            os << (n ? "," : "") << format_double(w(r, n).real()) << ',' << format_double(w(r, n).imag());
        os << '\n';
    }
    return os.str();
}

}  // namespace pisac
