#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pisac/asymptotics.hpp"
#include "pisac/errors.hpp"
#include "pisac/harness.hpp"
#include "pisac/parallel.hpp"

namespace pisac {

using nlohmann::json;

namespace {

constexpr std::uint64_t kH0Stream = 1;
constexpr std::uint64_t kH1Stream = 2;
constexpr std::uint64_t kShapeStream = 3;

json beamformer_summary(const BeamformerResult& bf, const ChannelSet& ch) {
    json j;
    j["design"] = to_string(bf.design);
    j["kappa_unit_rcs"] = bf.kappa_achieved;
    j["power_w"] = bf.power;
    j["sinr_db"] = json::array();
    for (double s : bf.sinrs) j["sinr_db"].push_back(s > 0 ? linear_to_db(s) : -300.0);
    j["snr_d"] = snr_d_of_covariance(ch, bf.r_c);
    j["iterations"] = bf.iterations;
    if (bf.gamma_d_used) j["gamma_d"] = *bf.gamma_d_used;
    j["w_csv"] = beamformer_csv(bf.w);
    return j;
}

std::vector<double> default_pfa_grid(const ExperimentConfig& config) {
    if (!config.pfa_grid.empty()) {
        auto g = config.pfa_grid;
        std::sort(g.begin(), g.end());
        return g;
    }
    const double lo = std::max(10.0 / static_cast<double>(config.n_calibration), 1e-4);
    std::vector<double> g;
    const int n = 21;
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(1.0 / lo, static_cast<double>(i) / (n - 1)));
    if (std::find(g.begin(), g.end(), config.pfa) == g.end() && config.pfa >= lo) g.push_back(config.pfa);
    std::sort(g.begin(), g.end());
    return g;
}

ChannelSet unit_rcs_channels(const ScenarioConfig& scenario) {
    return build_channels(scenario, cplx(1.0, 0.0), CMat(scenario.n_t, 0));
}

struct SchemeRun {
    SchemeDesign design;
    TrialModel model;
    std::vector<double> h0;
    bool feasible = true;
};

SchemeRun prepare(Scheme scheme, const ChannelSet& channels, const ExperimentConfig& config, double gamma_c,
                  double p_t, bool calibrate) {
    SchemeRun run;
    try {
        run.design = design_scheme(scheme, channels, gamma_c, p_t, config);
    } catch (const Infeasible&) {
        run.feasible = false;
        return run;
    }
    run.model = make_trial_model(run.design, channels, config);
    if (calibrate)
        run.h0 = run_trials(run.model, Hypothesis::h0, config.n_calibration, stream_seed(config.seed, kH0Stream));
    return run;
}

}  // namespace

SchemeDesign design_scheme(Scheme scheme, const ChannelSet& channels, double gamma_c, double p_t,
                           const ExperimentConfig& config) {
    SchemeDesign d;
    d.scheme = scheme;
    const DesignOptions& opts = config.design;
    switch (scheme) {
        case Scheme::active:
            d.beamformer = optimize_active(channels, gamma_c, p_t, opts);
            d.active_detector = true;
            break;
        case Scheme::max_snr_t: d.beamformer = optimize_active(channels, gamma_c, p_t, opts); break;
        case Scheme::max_pd: d.beamformer = optimize_max_pd(channels, gamma_c, p_t, opts); break;
        case Scheme::sensing_only: d.beamformer = optimize_max_pd(channels, std::nullopt, p_t, opts); break;
        case Scheme::comm_only: d.beamformer = comm_only(channels, gamma_c, p_t, opts); break;
        case Scheme::snrd_threshold:
            if (config.gamma_d)
                d.beamformer = optimize_snrd_threshold(channels, gamma_c, *config.gamma_d, p_t, opts);
            else
                d.beamformer = sweep_gamma_d(channels, gamma_c, p_t, config.gamma_d_points, opts).best_result();
            break;
    }
    return d;
}

TrialModel make_trial_model(const SchemeDesign& design, const ChannelSet& channels, const ExperimentConfig& config) {
    TrialModel m;
    m.channels = channels;
    m.channels.apply_beamformer(design.beamformer.w);
    m.active_detector = design.active_detector;
    m.rcs_variance = config.scenario.rcs_variance;
    m.physical_chain = config.physical_chain;
    m.w = design.beamformer.w;
    return m;
}

double trial_statistic(const TrialModel& model, Hypothesis hypothesis, Rng& rng) {
    const ChannelSet& ch = model.channels;
    cplx rcs;
    if (model.rcs_magnitude) {
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        rcs = std::polar(*model.rcs_magnitude, phase(rng));
    } else {
        rcs = complex_normal(rng, model.rcs_variance);
    }
    const SymbolBlock s = gen_symbols_gaussian(rng, ch.c, ch.block_length);
    if (model.active_detector) {
        CMat y = complex_normal_matrix(rng, ch.m, ch.block_length, ch.sigma_r2);
        if (hypothesis == Hypothesis::h1) y += rcs * ch.h_t_tilde * s.data;
        return active_statistic(y, s, ch.sigma_r2);
    }
    if (model.physical_chain) {
        const ChannelSet scaled = ch.with_target_scale(rcs);
        const Observation raw = synth_received(scaled, model.w, s, hypothesis, rng);
        const Observation y = frontend_process(raw, scaled, true_target_tuples(scaled));
        return glrt_statistic(y, ch.sigma_r2, ch.c).statistic;
    }
    const Observation y = synth_equivalent(CMat(rcs * ch.h_t_tilde), ch.h_d_tilde, ch.sigma_r2, s, hypothesis, rng);
    return glrt_statistic(y, ch.sigma_r2, ch.c).statistic;
}

std::vector<double> run_trials(const TrialModel& model, Hypothesis hypothesis, std::size_t n, std::uint64_t seed) {
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        out[i] = trial_statistic(model, hypothesis, rng);
    });
    return out;
}

DetectionEstimate detection_rate(const std::vector<double>& h1_stats, double rho) {
    DetectionEstimate e;
    e.n = h1_stats.size();
    if (e.n == 0) return e;
    std::size_t hits = 0;
    for (double s : h1_stats)
        if (s > rho) ++hits;
    e.pd = static_cast<double>(hits) / e.n;
    e.se = std::sqrt(e.pd * (1.0 - e.pd) / e.n);
    return e;
}

PairedGap paired_gap(const std::vector<double>& a, double rho_a, const std::vector<double>& b, double rho_b) {
    if (a.size() != b.size() || a.empty()) throw DimensionMismatch("paired trials must have equal, nonzero counts");
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = (a[i] > rho_a ? 1.0 : 0.0) - (b[i] > rho_b ? 1.0 : 0.0);
        sum += d;
        sum2 += d * d;
    }
    const double n = static_cast<double>(a.size());
    PairedGap g;
    g.gap = sum / n;
    g.se = std::sqrt(std::max(0.0, sum2 / n - g.gap * g.gap) / n);
    return g;
}

CurveTable run_calibrate(const ExperimentConfig& config) {
    config.validate();
    const ChannelSet channels = unit_rcs_channels(config.scenario);
    const double gamma_c = db_to_linear(config.gamma_c_db);
    CurveTable t;
    t.name = "calibrate";
    t.columns = {"pfa", "rho_asymptotic"};
    for (Scheme s : config.schemes) t.columns.push_back("rho_" + to_string(s));
    const auto grid = default_pfa_grid(config);
    std::vector<SchemeRun> runs;
    json thresholds = json::array();
    for (Scheme s : config.schemes) {
        runs.push_back(prepare(s, channels, config, gamma_c, config.scenario.p_t, true));
        if (!runs.back().feasible) throw Infeasible("scheme " + to_string(s) + " is infeasible");
        Threshold th;
        th.rho = threshold_from_samples(runs.back().h0, config.pfa);
        th.pfa_target = config.pfa;
        th.n_trials = config.n_calibration;
        th.seed = stream_seed(config.seed, kH0Stream);
        thresholds.push_back({{"scheme", to_string(s)},
                              {"rho", th.rho},
                              {"pfa_target", th.pfa_target},
                              {"n_trials", th.n_trials},
                              {"method", to_string(th.method)},
                              {"seed", th.seed}});
    }
    const int nu = 2 * channels.m * channels.c;
    for (double p : grid) {
        std::vector<double> row{p, asymptotic_threshold(p, nu)};
        for (auto& r : runs) row.push_back(threshold_from_samples(r.h0, p));
        t.add_row(row);
    }
    stamp(t, config);
    t.metadata["thresholds"] = thresholds;
    return t;
}

CurveTable run_roc(const ExperimentConfig& config) {
    config.validate();
    const ChannelSet channels = unit_rcs_channels(config.scenario);
    const double gamma_c = db_to_linear(config.gamma_c_db);
    CurveTable t;
    t.name = "roc";
    t.columns = {"pfa"};
    for (Scheme s : config.schemes) {
        t.columns.push_back("pd_" + to_string(s));
        t.columns.push_back("se_" + to_string(s));
    }
    std::vector<SchemeRun> runs;
    std::vector<std::vector<double>> h1;
    json designs = json::object();
    for (Scheme s : config.schemes) {
        runs.push_back(prepare(s, channels, config, gamma_c, config.scenario.p_t, true));
        if (!runs.back().feasible) throw Infeasible("scheme " + to_string(s) + " is infeasible");
        h1.push_back(
            run_trials(runs.back().model, Hypothesis::h1, config.n_detection, stream_seed(config.seed, kH1Stream)));
        designs[to_string(s)] = beamformer_summary(runs.back().design.beamformer, runs.back().model.channels);
    }
    for (double p : default_pfa_grid(config)) {
        std::vector<double> row{p};
        for (std::size_t k = 0; k < runs.size(); ++k) {
            const auto e = detection_rate(h1[k], threshold_from_samples(runs[k].h0, p));
            row.push_back(e.pd);
            row.push_back(e.se);
        }
        t.add_row(row);
    }
    stamp(t, config);
    t.metadata["designs"] = designs;
    return t;
}

CurveTable run_tradeoff(const ExperimentConfig& config) {
    config.validate();
    const ChannelSet channels = unit_rcs_channels(config.scenario);
    CurveTable t;
    t.name = "tradeoff";
    t.columns = {"gamma_c_db"};
    for (Scheme s : config.schemes) {
        t.columns.push_back("pd_" + to_string(s));
        t.columns.push_back("se_" + to_string(s));
        t.columns.push_back("feasible_" + to_string(s));
    }
    auto grid = config.gamma_c_db_list;
    std::sort(grid.begin(), grid.end());
    for (double g_db : grid) {
        std::vector<double> row{g_db};
        for (Scheme s : config.schemes) {
            const SchemeRun run = prepare(s, channels, config, db_to_linear(g_db), config.scenario.p_t, true);
            if (!run.feasible) {
                row.insert(row.end(), {0.0, 0.0, 0.0});
                continue;
            }
            const auto h1 =
                run_trials(run.model, Hypothesis::h1, config.n_detection, stream_seed(config.seed, kH1Stream));
            const auto e = detection_rate(h1, threshold_from_samples(run.h0, config.pfa));
            row.insert(row.end(), {e.pd, e.se, 1.0});
        }
        t.add_row(row);
    }
    stamp(t, config);
    return t;
}

CurveTable run_sweep(const ExperimentConfig& config) {
    config.validate();
    const bool rcs_axis = config.sweep_axis == "rcs";
    const ChannelSet channels = unit_rcs_channels(config.scenario);
    const double gamma_c = db_to_linear(config.gamma_c_db);
    CurveTable t;
    t.name = rcs_axis ? "sweep_rcs" : "sweep_power";
    t.columns = {rcs_axis ? "rcs_dbsm" : "p_t_dbw"};
    for (Scheme s : config.schemes) {
        t.columns.push_back("pd_" + to_string(s));
        t.columns.push_back("se_" + to_string(s));
        t.columns.push_back("feasible_" + to_string(s));
    }
    auto axis = rcs_axis ? config.rcs_dbsm_list : config.power_dbw_list;
    std::sort(axis.begin(), axis.end());

    // The H0 distribution does not involve the target, so one calibration per
    // design covers the whole RCS axis.
    std::vector<SchemeRun> fixed;
    if (rcs_axis)
        for (Scheme s : config.schemes) fixed.push_back(prepare(s, channels, config, gamma_c, config.scenario.p_t, true));

    for (double x : axis) {
        std::vector<double> row{x};
        for (std::size_t k = 0; k < config.schemes.size(); ++k) {
            SchemeRun run = rcs_axis ? fixed[k]
                                     : prepare(config.schemes[k], channels, config, gamma_c, db_to_linear(x), true);
            if (!run.feasible) {
                row.insert(row.end(), {0.0, 0.0, 0.0});
                continue;
            }
            if (rcs_axis) run.model.rcs_variance = db_to_linear(x);
            const auto h1 =
                run_trials(run.model, Hypothesis::h1, config.n_detection, stream_seed(config.seed, kH1Stream));
            const auto e = detection_rate(h1, threshold_from_samples(run.h0, config.pfa));
            row.insert(row.end(), {e.pd, e.se, 1.0});
        }
        t.add_row(row);
    }
    stamp(t, config);
    return t;
}

namespace {

std::vector<double> arange(double lo, double hi, double step) {
    std::vector<double> v;
    for (int i = 0; lo + i * step <= hi + 1e-9; ++i) v.push_back(lo + i * step);
    return v;
}

CMat unit_frobenius(Rng& rng, int rows, int cols) {
    CMat h = complex_normal_matrix(rng, rows, cols);
    return h / h.norm();
}

}  // namespace

CurveTable run_contour(const ExperimentConfig& config) {
    config.validate();
    const ContourSpec& k = config.contour;
    const auto snr_t_grid = k.snr_t_db.empty() ? arange(-35, -10, 1) : k.snr_t_db;
    const auto snr_d_grid = k.snr_d_db.empty() ? arange(-20, 20, 5) : k.snr_d_db;
    const double sigma2 = 1.0;
    const int nu = 2 * k.m * k.c;
    const double rho_asym = asymptotic_threshold(config.pfa, nu);

    std::vector<CMat> shape_t, shape_d;
    Rng shape_rng = make_stream(config.seed, kShapeStream);
    for (int j = 0; j < k.n_shapes; ++j) {
        shape_t.push_back(unit_frobenius(shape_rng, k.m, k.c));
        shape_d.push_back(unit_frobenius(shape_rng, k.m, k.c));
    }
    // Frobenius norm^2 = M sigma^2 SNR.
    auto scale_for = [&](double snr_db) { return std::sqrt(k.m * sigma2 * db_to_linear(snr_db)); };

    auto statistic = [&](const CMat& h_t, const CMat& h_d, Hypothesis hyp, Rng& rng) {
        const SymbolBlock s = gen_symbols_gaussian(rng, k.c, k.l);
        return glrt_statistic(synth_equivalent(h_t, h_d, sigma2, s, hyp, rng), sigma2, k.c).statistic;
    };

    CurveTable t;
    t.name = "contour";
    t.columns = {"snr_t_db", "snr_d_db", "pd_asymptotic", "pd_empirical", "se_empirical", "pd_active", "kappa_mean"};
    for (std::size_t di = 0; di < snr_d_grid.size(); ++di) {
        const double sd = scale_for(snr_d_grid[di]);
        std::vector<double> h0(config.n_calibration);
        const std::uint64_t h0_seed = stream_seed(config.seed, 1000 + di);
        parallel_for(h0.size(), [&](std::size_t i) {
            Rng rng = make_stream(h0_seed, i);
            const std::size_t j = i % shape_t.size();
            h0[i] = statistic(CMat(0.0 * shape_t[j]), CMat(sd * shape_d[j]), Hypothesis::h0, rng);
        });
        const double rho_emp = threshold_from_samples(h0, config.pfa);
        for (std::size_t ti = 0; ti < snr_t_grid.size(); ++ti) {
            const double st = scale_for(snr_t_grid[ti]);
            double pd_asym = 0.0, kappa_mean = 0.0;
            for (std::size_t j = 0; j < shape_t.size(); ++j) {
                const double kap = kappa_general(st * shape_t[j], sd * shape_d[j], sigma2, k.l);
                kappa_mean += kap / shape_t.size();
                pd_asym += asymptotic_pd(rho_asym, nu, kap) / shape_t.size();
            }
            std::vector<double> h1(k.mc_trials);
            const std::uint64_t h1_seed = stream_seed(config.seed, 100000 + di * snr_t_grid.size() + ti);
            parallel_for(h1.size(), [&](std::size_t i) {
                Rng rng = make_stream(h1_seed, i);
                const std::size_t j = i % shape_t.size();
                h1[i] = statistic(CMat(st * shape_t[j]), CMat(sd * shape_d[j]), Hypothesis::h1, rng);
            });
            const auto e = detection_rate(h1, rho_emp);
            const double snr_t_lin = db_to_linear(snr_t_grid[ti]);
            const double pd_act = asymptotic_pd(rho_asym, nu, kappa_active(k.l, k.m, snr_t_lin));
            t.add_row({snr_t_grid[ti], snr_d_grid[di], pd_asym, e.pd, e.se, pd_act, kappa_mean});
        }
    }
    stamp(t, config);
    return t;
}

CurveTable extract_contour(const CurveTable& surface, const std::string& pd_column, double level) {
    const auto snr_t = surface.column_values("snr_t_db");
    const auto snr_d = surface.column_values("snr_d_db");
    const auto pd = surface.column_values(pd_column);
    std::map<double, std::vector<std::pair<double, double>>> rows;
    for (std::size_t i = 0; i < pd.size(); ++i) rows[snr_d[i]].push_back({snr_t[i], pd[i]});
    CurveTable t;
    t.name = "contour_" + pd_column;
    t.columns = {"snr_d_db", "snr_t_db"};
    json missing = json::array();
    for (auto& [d, pts] : rows) {
        std::sort(pts.begin(), pts.end());
        bool found = false;
        for (std::size_t i = 0; i + 1 < pts.size() && !found; ++i) {
            const auto [x0, y0] = pts[i];
            const auto [x1, y1] = pts[i + 1];
            if (y0 < level && y1 >= level) {
                t.add_row({d, x0 + (level - y0) * (x1 - x0) / (y1 - y0)});
                found = true;
            }
        }
        if (!found) missing.push_back(d);
    }
    t.metadata = surface.metadata;
    t.metadata["level"] = level;
    t.metadata["rows_without_crossing"] = missing;
    return t;
}

double contour_snr_t(double pd_target, int l, int m, double snr_d, double pfa, bool active) {
    const int nu = 2 * m;
    const double rho = asymptotic_threshold(pfa, nu);
    if (asymptotic_pd(rho, nu, 0.0) >= pd_target) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (asymptotic_pd(rho, nu, hi) < pd_target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (asymptotic_pd(rho, nu, mid) < pd_target ? lo : hi) = mid;
    }
    const double kappa = 0.5 * (lo + hi);
    const double per_snr_t = active ? 2.0 * l * m : kappa_single_cu(l, m, 1.0, snr_d);
    return kappa / per_snr_t;
}

CurveTable run_beampattern(const CMat& w, const std::vector<double>& angle_grid_deg, int n_t, double spacing,
                           double wavelength) {
    if (w.rows() != n_t) throw DimensionMismatch("beamformer rows differ from N_t");
    const CMat r = w * w.adjoint();
    CurveTable t;
    t.name = "beampattern";
    t.columns = {"angle_deg", "pattern", "pattern_db"};
    for (double deg : angle_grid_deg) {
        const CVec a = steering_vector(deg * kPi / 180.0, n_t, spacing, wavelength);
        const double p = std::max(a.dot(r * a).real(), 0.0);
        t.add_row({deg, p, 10.0 * std::log10(std::max(p, 1e-300))});
    }
    return t;
}

CurveTable run_beampattern(const ExperimentConfig& config) {
    config.validate();
    const ChannelSet channels = unit_rcs_channels(config.scenario);
    const double gamma_c = db_to_linear(config.gamma_c_db);
    const auto grid = config.angle_grid_deg.empty() ? arange(-90, 90, 0.5) : config.angle_grid_deg;
    CurveTable t;
    t.name = "beampattern";
    t.columns = {"angle_deg"};
    std::vector<CurveTable> patterns;
    json designs = json::object();
    for (Scheme s : config.schemes) {
        const SchemeDesign d = design_scheme(s, channels, gamma_c, config.scenario.p_t, config);
        patterns.push_back(run_beampattern(d.beamformer.w, grid, config.scenario.n_t, config.scenario.antenna_spacing,
                                           config.scenario.carrier_wavelength));
        t.columns.push_back("pattern_db_" + to_string(s));
        designs[to_string(s)] = beamformer_summary(d.beamformer, channels);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid[i]};
        for (const auto& p : patterns) row.push_back(p.rows[i][2]);
        t.add_row(row);
    }
    stamp(t, config);
    t.metadata["designs"] = designs;
    t.metadata["theta_t_deg"] = channels.geometry.theta_t * 180.0 / kPi;
    json td = json::array();
    for (double a : channels.geometry.theta_d) td.push_back(a * 180.0 / kPi);
    t.metadata["theta_d_deg"] = td;
    return t;
}

std::vector<CurveTable> run_experiment(const ExperimentConfig& config) {
    std::vector<CurveTable> tables;
    switch (config.experiment) {
        case Experiment::calibrate: tables.push_back(run_calibrate(config)); break;
        case Experiment::roc: tables.push_back(run_roc(config)); break;
        case Experiment::tradeoff: tables.push_back(run_tradeoff(config)); break;
        case Experiment::sweep: tables.push_back(run_sweep(config)); break;
        case Experiment::beampattern: tables.push_back(run_beampattern(config)); break;
        case Experiment::heatmap: tables.push_back(run_heatmap(config)); break;
        case Experiment::contour: {
            tables.push_back(run_contour(config));
            tables.push_back(extract_contour(tables.front(), "pd_asymptotic"));
            tables.push_back(extract_contour(tables.front(), "pd_empirical"));
            tables.push_back(extract_contour(tables.front(), "pd_active"));
            break;
        }
        case Experiment::validate: throw ConfigError("validation runs through run_validate");
    }
    write_outputs(tables, config);
    return tables;
}

}  // namespace pisac
