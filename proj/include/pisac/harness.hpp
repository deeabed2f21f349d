#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pisac/beamform.hpp"
#include "pisac/detector.hpp"
#include "pisac/scenario.hpp"
#include "pisac/waveform.hpp"

namespace pisac {

enum class Experiment { calibrate, roc, tradeoff, contour, sweep, beampattern, heatmap, validate };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

/// Beamforming / detection pairings compared in the experiments.
enum class Scheme {
    active,         ///< target-gain beamformer, SRs know the symbols
    max_pd,         ///< alternating max-P_d design, passive GLRT
    snrd_threshold, ///< SNR_d-threshold design (fixed threshold or best of a sweep)
    max_snr_t,      ///< target-gain beamformer with the passive GLRT
    comm_only,      ///< minimum-power SINR design
    sensing_only,   ///< max-P_d without SINR constraints
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

enum class Scale { desk, paper };

struct ContourSpec {
    int l = 500;
    int m = 4;
    int c = 1;
    std::vector<double> snr_t_db;
    std::vector<double> snr_d_db;
    int n_shapes = 100;
    std::size_t mc_trials = 200;
};

struct HeatmapSpec {
    int nx = 40;
    int ny = 40;
    double spacing = 5.0;  ///< m
    /// Grid point (nx / 2, ny / 2) sits here.
    Vec2 center{150.0, 0.0};
    std::size_t n_trials = 100;
    /// Fixed target RCS magnitude (dBsm); the phase is drawn per trial.
    double rcs_dbsm = 20.0;
    Scheme scheme = Scheme::max_pd;
    bool ofdm = true;
};

struct ExperimentConfig {
    ScenarioConfig scenario = ScenarioConfig::multistatic_default();
    Experiment experiment = Experiment::roc;
    std::vector<Scheme> schemes{Scheme::active, Scheme::max_pd, Scheme::snrd_threshold, Scheme::max_snr_t,
                                Scheme::comm_only};
    double gamma_c_db = 12.0;
    /// Fixed SNR_d threshold (linear); unset selects the best of a sweep.
    std::optional<double> gamma_d;
    int gamma_d_points = 20;

    std::size_t n_calibration = 10000;
    std::size_t n_detection = 2000;
    double pfa = 1e-2;
    std::vector<double> pfa_grid;  ///< empty: log grid from 10 / n_calibration to 1

    std::vector<double> gamma_c_db_list{0, 4, 8, 12, 16, 20};
    std::string sweep_axis = "rcs";  ///< "rcs" (dBsm) or "power" (dBW)
    std::vector<double> rcs_dbsm_list{-10, -5, 0, 5, 10};
    std::vector<double> power_dbw_list{-20, -15, -10, -5, 0};
    std::vector<double> angle_grid_deg;  ///< empty: -90..90 step 0.5

    ContourSpec contour;
    HeatmapSpec heatmap;

    /// Generate observations through the full two-array chain instead of
    /// the equivalent model.
    bool physical_chain = false;

    DesignOptions design;
    Scale scale = Scale::desk;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    /// Throws ConfigError on missing axes or too few trials.
    void validate() const;
    /// Applies the trial counts and false-alarm rate of a preset.
    void apply_scale(Scale s);

    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const ScenarioConfig& s);
ScenarioConfig scenario_from_json(const nlohmann::json& j, ScenarioConfig base = ScenarioConfig::multistatic_default());

/// Column-named real table with its provenance.
struct CurveTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    nlohmann::json metadata = nlohmann::json::object();

    void add_row(std::vector<double> row);
    std::size_t column(const std::string& name) const;
    std::vector<double> column_values(const std::string& name) const;
    /// "# key=value" metadata lines, then a header row, then values.
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

/// FNV-1a of the config echo and seed, hex.
std::string run_id(const ExperimentConfig& config);

/// Config echo, seed and run id attached to every table.
void stamp(CurveTable& table, const ExperimentConfig& config);

/// Writes tables as CSV and a manifest.json beside them.
void write_outputs(const std::vector<CurveTable>& tables, const ExperimentConfig& config,
                   const nlohmann::json& extra = nlohmann::json::object());

/// W as CSV, a re/im column pair per CU.
std::string beamformer_csv(const CMat& w);

// ---- Monte Carlo engine --------------------------------------------------

/// A beamformer plus the detector that goes with it.
struct SchemeDesign {
    Scheme scheme = Scheme::max_pd;
    BeamformerResult beamformer;
    bool active_detector = false;
};

/// Runs the design behind a scheme on channels built with unit RCS.
SchemeDesign design_scheme(Scheme scheme, const ChannelSet& channels, double gamma_c, double p_t,
                           const ExperimentConfig& config);

struct TrialModel {
    ChannelSet channels;  ///< beamformer applied, unit RCS
    bool active_detector = false;
    double rcs_variance = 1.0;
    /// Fixed RCS magnitude with uniform phase instead of Rayleigh draws.
    std::optional<double> rcs_magnitude;
    bool physical_chain = false;
    CMat w;
};

TrialModel make_trial_model(const SchemeDesign& design, const ChannelSet& channels, const ExperimentConfig& config);

/// Detection statistic of one trial; the draws depend only on the stream.
double trial_statistic(const TrialModel& model, Hypothesis hypothesis, Rng& rng);

/// Statistics of trials 0..n-1 on streams (seed, trial).
std::vector<double> run_trials(const TrialModel& model, Hypothesis hypothesis, std::size_t n, std::uint64_t seed);

struct DetectionEstimate {
    double pd = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

DetectionEstimate detection_rate(const std::vector<double>& h1_stats, double rho);

/// Paired difference of two detection indicators on common trials.
struct PairedGap {
    double gap = 0.0;  ///< pd_a - pd_b
    double se = 0.0;
};
PairedGap paired_gap(const std::vector<double>& stats_a, double rho_a, const std::vector<double>& stats_b,
                     double rho_b);

// ---- experiments ---------------------------------------------------------

CurveTable run_calibrate(const ExperimentConfig& config);
CurveTable run_roc(const ExperimentConfig& config);
CurveTable run_tradeoff(const ExperimentConfig& config);
CurveTable run_sweep(const ExperimentConfig& config);
/// P_d surfaces over the (SNR_t, SNR_d) grid.
CurveTable run_contour(const ExperimentConfig& config);
/// P_d = level crossing along SNR_t for each SNR_d row of a contour
/// surface (bilinear interpolation on the grid).
CurveTable extract_contour(const CurveTable& surface, const std::string& pd_column, double level = 0.9);
/// SNR_t (linear) with asymptotic P_d = pd_target, single CU.
double contour_snr_t(double pd_target, int l, int m, double snr_d, double pfa, bool active);

/// a(theta)^H R a(theta) in dB over the grid.
CurveTable run_beampattern(const CMat& w, const std::vector<double>& angle_grid_deg, int n_t, double spacing,
                           double wavelength);
/// Patterns of every configured scheme on the configured scenario.
CurveTable run_beampattern(const ExperimentConfig& config);

struct HeatmapGrid {
    std::vector<Vec2> cells;
    int nx = 0;
    int ny = 0;
    std::size_t target_cell = 0;  ///< cell closest to the true target
};

HeatmapGrid make_heatmap_grid(const HeatmapSpec& spec, const Vec2& target);

/// GLRT statistic of one physical observation at every grid cell, with
/// delay-only compensation (Doppler taken as matched). Equivalent to
/// frontend_process + glrt_statistic per cell.
std::vector<double> heatmap_statistics(const Observation& raw, const ChannelSet& channels,
                                       const ScenarioConfig& scenario, const HeatmapGrid& grid);

struct HeatmapRun {
    CurveTable table;            ///< x, y, statistic of the first trial
    double peak_hit_rate = 0.0;  ///< trials whose maximum is the target cell
    std::size_t n_trials = 0;
};

HeatmapRun run_heatmap_trials(const ExperimentConfig& config, Hypothesis hypothesis = Hypothesis::h1);
CurveTable run_heatmap(const ExperimentConfig& config);

/// Dispatches on config.experiment, writes outputs, returns the tables.
std::vector<CurveTable> run_experiment(const ExperimentConfig& config);

}  // namespace pisac
