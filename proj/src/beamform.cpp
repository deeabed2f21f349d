#include "pisac/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pisac/errors.hpp"
#include "pisac/parallel.hpp"

namespace pisac {

std::string to_string(Design design) {
    switch (design) {
        case Design::max_pd: return "max_pd";
        case Design::max_pd_sensing_only: return "max_pd_sensing_only";
        case Design::snrd_threshold: return "snrd_threshold";
        case Design::active: return "active";
        case Design::active_sensing_only: return "active_sensing_only";
        case Design::comm_only: return "comm_only";
    }
    return "unknown";
}

std::vector<double> eval_sinr(const CMat& w, const std::vector<CVec>& h, double sigma_c2) {
    const int c = static_cast<int>(h.size());
    if (w.cols() != c) throw DimensionMismatch("one beamformer column per CU expected");
    std::vector<double> out(c);
    for (int n = 0; n < c; ++n) {
        if (h[n].size() != w.rows()) throw DimensionMismatch("channel length differs from N_t");
        const CRow g = h[n].adjoint() * w;
        double interference = sigma_c2;
        for (int k = 0; k < c; ++k)
            if (k != n) interference += std::norm(g(k));
        out[n] = std::norm(g(n)) / interference;
    }
    return out;
}

CVec quadratic_transform_u(const CMat& r_c, const CMat& b_matrix, const CVec& a_t) {
    const Eigen::Index m = b_matrix.rows();
    const CMat br = b_matrix * r_c;
    const CMat k = CMat::Identity(m, m) + br * b_matrix.adjoint();
    return hermitian_part(k).llt().solve(br * a_t);
}

double kappa_shape(const CMat& r_c, const CMat& b_matrix, const CVec& a_t) {
    const CVec v = b_matrix * (r_c * a_t);
    const CVec u = quadratic_transform_u(r_c, b_matrix, a_t);
    return std::max(0.0, v.dot(u).real());
}

double kappa_of_covariance(const ChannelSet& channels, const CMat& r_c) {
    return 2.0 * channels.block_length * channels.mu0 * kappa_shape(r_c, channels.b_matrix, channels.a_t);
}

double quadratic_surrogate(const CMat& r_c, const CMat& b_matrix, const CVec& a_t, const CVec& u) {
    const Eigen::Index m = b_matrix.rows();
    const CMat k = CMat::Identity(m, m) + b_matrix * r_c * b_matrix.adjoint();
    const cplx lin = u.dot(b_matrix * (r_c * a_t));
    return 2.0 * lin.real() - u.dot(k * u).real();
}

double snr_d_of_covariance(const ChannelSet& channels, const CMat& r_c) {
    return trace_product(channels.b_matrix.adjoint() * channels.b_matrix, r_c) / channels.m;
}

namespace {

// Blocks are X_n = R_n / p_t.
SdpProblem base_problem(const ChannelSet& ch, bool with_power) {
    SdpProblem p;
    p.block_dim = ch.n_t;
    p.n_blocks = ch.c;
    const CMat id = CMat::Identity(ch.n_t, ch.n_t);
    if (with_power) p.constraints.push_back({std::vector<CMat>(ch.c, id), ConstraintSense::less_equal, 1.0});
    return p;
}

void add_sinr_constraints(SdpProblem& p, const ChannelSet& ch, double gamma_c, double p_t) {
    if (!(gamma_c > 0)) throw ConfigError("SINR target must be positive");
    for (int n = 0; n < ch.c; ++n) {
        const CMat hh = ch.comm_channels[n] * ch.comm_channels[n].adjoint();
        SdpConstraint row;
        for (int k = 0; k < ch.c; ++k) row.matrices.push_back(k == n ? CMat(hh / gamma_c) : CMat(-hh));
        row.sense = ConstraintSense::greater_equal;
        row.rhs = ch.sigma_c2 / p_t;
        p.constraints.push_back(std::move(row));
    }
}

std::vector<CMat> solve_blocks(const SdpProblem& p, double p_t, const SdpOptions& opts, double* objective,
                               const char* what) {
    const SdpSolution sol = solve_sdp(p, opts);
    if (sol.status == SdpStatus::infeasible) throw Infeasible(std::string(what) + ": constraints cannot be met");
    if (sol.status != SdpStatus::optimal) throw MaxIterations(std::string(what) + ": SDP did not converge");
    if (objective) *objective = sol.objective_value;
    std::vector<CMat> r;
    for (const auto& x : sol.x_blocks) r.push_back(p_t * x);
    return r;
}

CMat sum_blocks(const std::vector<CMat>& blocks) {
    CMat r = CMat::Zero(blocks.front().rows(), blocks.front().cols());
    for (const auto& b : blocks) r += b;
    return r;
}

CMat surrogate_matrix(const ChannelSet& ch, const CVec& u) {
    const CRow ub = u.adjoint() * ch.b_matrix;  // u^H B
    const CMat lin = ch.a_t * ub;
    return lin + lin.adjoint() - ub.adjoint() * ub;
}

std::vector<CMat> outer_blocks(const CMat& w) {
    std::vector<CMat> out;
    for (Eigen::Index n = 0; n < w.cols(); ++n) out.push_back(w.col(n) * w.col(n).adjoint());
    return out;
}

bool satisfies(const CMat& w, const ChannelSet& ch, const RandomizationProblem& prob) {
    if ((w.adjoint() * w).trace().real() > prob.p_t * (1.0 + 1e-9)) return false;
    if (prob.gamma_c) {
        for (double s : eval_sinr(w, ch.comm_channels, ch.sigma_c2))
            if (s < *prob.gamma_c * (1.0 - 1e-6)) return false;
    }
    const CMat r = w * w.adjoint();
    for (const auto& [q, value] : prob.floors)
        if (trace_product(q, r) < value * (1.0 - 1e-6)) return false;
    return true;
}

// Best per-user powers for fixed unit-norm directions; nullopt if none fit.
std::optional<CMat> allocate_power(const CMat& dirs, const ChannelSet& ch, const RandomizationProblem& prob,
                                   const SdpOptions& sdp_opts) {
    const int c = static_cast<int>(dirs.cols());
    SdpProblem lp;
    lp.block_dim = 1;
    lp.n_blocks = c;
    auto scalar = [](double v) { return CMat::Constant(1, 1, cplx(v, 0.0)); };
    for (int n = 0; n < c; ++n) {
        const double gain = prob.objective.size() != 0
                                ? prob.p_t * dirs.col(n).dot(prob.objective * dirs.col(n)).real()
                                : -1.0;
        lp.objective.push_back(scalar(gain));
    }
    lp.constraints.push_back({std::vector<CMat>(c, scalar(1.0)), ConstraintSense::less_equal, 1.0});
    if (prob.gamma_c) {
        for (int n = 0; n < c; ++n) {
            SdpConstraint row;
            const CRow g = ch.comm_channels[n].adjoint() * dirs;
            for (int k = 0; k < c; ++k)
                row.matrices.push_back(scalar(k == n ? std::norm(g(k)) / *prob.gamma_c : -std::norm(g(k))));
            row.sense = ConstraintSense::greater_equal;
            row.rhs = ch.sigma_c2 / prob.p_t;
            lp.constraints.push_back(std::move(row));
        }
    }
    for (const auto& [q, value] : prob.floors) {
        SdpConstraint row;
        for (int k = 0; k < c; ++k) row.matrices.push_back(scalar(prob.p_t * dirs.col(k).dot(q * dirs.col(k)).real()));
        row.sense = ConstraintSense::greater_equal;
        row.rhs = value;
        lp.constraints.push_back(std::move(row));
    }
    const SdpSolution sol = solve_sdp(lp, sdp_opts);
    if (sol.status != SdpStatus::optimal) return std::nullopt;
    CMat w(dirs.rows(), c);
    for (int n = 0; n < c; ++n) w.col(n) = std::sqrt(std::max(0.0, prob.p_t * sol.x_blocks[n](0, 0).real())) * dirs.col(n);
    if ((w.adjoint() * w).trace().real() > prob.p_t) w *= std::sqrt(prob.p_t / (w.adjoint() * w).trace().real());
    if (!satisfies(w, ch, prob)) return std::nullopt;
    return w;
}

CMat unit_columns(const CMat& w) {
    CMat d = w;
    for (Eigen::Index n = 0; n < d.cols(); ++n) {
        const double nrm = d.col(n).norm();
        if (nrm > 0) d.col(n) /= nrm;
    }
    return d;
}

Rng design_rng(const DesignOptions& opts, Design design) {
    return make_stream(opts.seed, 0xBEA0 + static_cast<std::uint64_t>(design));
}

BeamformerResult make_result(const CMat& w, const ChannelSet& ch, Design design) {
    BeamformerResult res;
    res.w = w;
    res.design = design;
    finalize_result(res, ch);
    return res;
}

}  // namespace

void finalize_result(BeamformerResult& result, const ChannelSet& channels) {
    result.r_c = result.w * result.w.adjoint();
    result.power = result.r_c.trace().real();
    result.sinrs = eval_sinr(result.w, channels.comm_channels, channels.sigma_c2);
    result.kappa_achieved = kappa_of_covariance(channels, result.r_c);
}

BeamformerResult scale_to_power(const BeamformerResult& result, const ChannelSet& channels, double p_t) {
    BeamformerResult out = result;
    if (result.power <= 0) throw ConfigError("cannot rescale a zero beamformer");
    out.w *= std::sqrt(p_t / result.power);
    finalize_result(out, channels);
    return out;
}

CMat gaussian_randomization(const std::vector<CMat>& r_blocks, const ChannelSet& channels,
                            const RandomizationProblem& problem, int n_candidates, Rng& rng) {
    const int c = static_cast<int>(r_blocks.size());
    if (c == 0) throw DimensionMismatch("no covariance blocks");
    const int n_t = static_cast<int>(r_blocks.front().rows());
    SdpOptions lp_opts;

    std::vector<HermitianEigen> eig;
    bool rank_one = true;
    CMat principal(n_t, c);
    for (const auto& b : r_blocks) {
        eig.push_back(eigen_descending(hermitian_part(b)));
        const RVec& v = eig.back().values;
        if (v(0) <= 0 || (n_t > 1 && v(1) > 1e-6 * v(0))) rank_one = false;
    }
    for (int n = 0; n < c; ++n)
        principal.col(n) = std::sqrt(std::max(eig[n].values(0), 0.0)) * eig[n].vectors.col(0);

    if (rank_one) {
        if (satisfies(principal, channels, problem)) return principal;
        if (auto w = allocate_power(unit_columns(principal), channels, problem, lp_opts)) return *w;
    }

    std::vector<CMat> roots(c);
    for (int n = 0; n < c; ++n)
        roots[n] = eig[n].vectors * eig[n].values.cwiseMax(0.0).cwiseSqrt().asDiagonal();

    std::optional<CMat> best;
    double best_score = -std::numeric_limits<double>::infinity();
    // The principal directions compete too.
    if (auto w = allocate_power(unit_columns(principal), channels, problem, lp_opts)) {
        best = *w;
        best_score = problem.score(*w);
    }
    for (int trial = 0; trial < n_candidates; ++trial) {
        CMat dirs(n_t, c);
        for (int n = 0; n < c; ++n) dirs.col(n) = roots[n] * complex_normal_matrix(rng, n_t, 1);
        auto w = allocate_power(unit_columns(dirs), channels, problem, lp_opts);
        if (!w) continue;
        const double s = problem.score(*w);
        if (s > best_score) {
            best_score = s;
            best = *w;
        }
    }
    if (!best) throw RandomizationFailure("no randomized candidate could be made feasible");
    return *best;
}

BeamformerResult comm_only(const ChannelSet& channels, double gamma_c, double p_t, const DesignOptions& opts) {
    SdpProblem p = base_problem(channels, false);
    add_sinr_constraints(p, channels, gamma_c, p_t);
    p.objective.assign(channels.c, -CMat::Identity(channels.n_t, channels.n_t));
    double obj = 0.0;
    const auto blocks = solve_blocks(p, p_t, opts.sdp, &obj, "communication-only design");
    const double min_power = -obj * p_t;
    if (min_power > p_t * (1.0 + 1e-9))
        throw Infeasible("SINR targets need " + std::to_string(min_power) + " W, budget is " + std::to_string(p_t) +
                         " W");

    RandomizationProblem prob;
    prob.gamma_c = gamma_c;
    prob.p_t = p_t;
    prob.score = [](const CMat& w) { return -(w.adjoint() * w).trace().real(); };
    Rng rng = design_rng(opts, Design::comm_only);
    BeamformerResult res = make_result(gaussian_randomization(blocks, channels, prob, opts.n_candidates, rng),
                                       channels, Design::comm_only);
    res.sdp_objective = min_power;
    return res;
}

BeamformerResult optimize_max_pd(const ChannelSet& channels, std::optional<double> gamma_c, double p_t,
                                 const DesignOptions& opts) {
    const Design design = gamma_c ? Design::max_pd : Design::max_pd_sensing_only;
    const double scale = 2.0 * channels.block_length * channels.mu0;

    std::vector<CMat> blocks;
    if (gamma_c) {
        const BeamformerResult init = scale_to_power(comm_only(channels, *gamma_c, p_t, opts), channels, p_t);
        blocks = outer_blocks(init.w);
    } else {
        blocks.assign(channels.c, CMat::Identity(channels.n_t, channels.n_t) * (p_t / (channels.n_t * channels.c)));
    }

    SdpProblem p = base_problem(channels, true);
    if (gamma_c) add_sinr_constraints(p, channels, *gamma_c, p_t);

    BeamformerResult res;
    res.design = design;
    res.converged = false;
    double shape = kappa_shape(sum_blocks(blocks), channels.b_matrix, channels.a_t);
    res.trace.push_back(scale * shape);
    CVec u = quadratic_transform_u(sum_blocks(blocks), channels.b_matrix, channels.a_t);
    double sdp_obj = 0.0;
    for (int k = 1; k <= opts.k_max; ++k) {
        p.objective.assign(channels.c, p_t * surrogate_matrix(channels, u));
        double obj = 0.0;
        auto next = solve_blocks(p, p_t, opts.sdp, &obj, "max-P_d design");
        const double next_shape = kappa_shape(sum_blocks(next), channels.b_matrix, channels.a_t);
        res.iterations = k;
        if (next_shape < shape) {
            ++res.rejected_steps;
            res.converged = true;
            break;
        }
        const double rel = (next_shape - shape) / std::max(shape, std::numeric_limits<double>::min());
        blocks = std::move(next);
        shape = next_shape;
        sdp_obj = obj - u.squaredNorm();
        res.trace.push_back(scale * shape);
        u = quadratic_transform_u(sum_blocks(blocks), channels.b_matrix, channels.a_t);
        if (rel < opts.eps) {
            res.converged = true;
            break;
        }
    }

    RandomizationProblem prob;
    prob.gamma_c = gamma_c;
    prob.p_t = p_t;
    prob.objective = surrogate_matrix(channels, u);
    prob.score = [&channels](const CMat& w) {
        return kappa_shape(w * w.adjoint(), channels.b_matrix, channels.a_t);
    };
    Rng rng = design_rng(opts, design);
    res.w = gaussian_randomization(blocks, channels, prob, opts.n_candidates, rng);
    finalize_result(res, channels);
    res.sdp_objective = sdp_obj;
    return res;
}

namespace {

BeamformerResult target_gain_design(const ChannelSet& channels, std::optional<double> gamma_c,
                                    std::optional<double> gamma_d, double p_t, const DesignOptions& opts,
                                    Design design) {
    SdpProblem p = base_problem(channels, true);
    if (gamma_c) add_sinr_constraints(p, channels, *gamma_c, p_t);
    const CMat q = channels.b_matrix.adjoint() * channels.b_matrix / static_cast<double>(channels.m);
    if (gamma_d) {
        if (*gamma_d < 0) throw ConfigError("SNR_d threshold must be non-negative");
        p.constraints.push_back(
            {std::vector<CMat>(channels.c, CMat(p_t * q)), ConstraintSense::greater_equal, *gamma_d});
    }
    const CMat a = channels.a_t * channels.a_t.adjoint();
    p.objective.assign(channels.c, p_t * a);
    double obj = 0.0;
    const auto blocks = solve_blocks(p, p_t, opts.sdp, &obj, (to_string(design) + " design").c_str());

    RandomizationProblem prob;
    prob.gamma_c = gamma_c;
    prob.p_t = p_t;
    prob.objective = a;
    if (gamma_d && *gamma_d > 0) prob.floors.push_back({q, *gamma_d});
    prob.score = [&channels](const CMat& w) { return (channels.a_t.adjoint() * w).squaredNorm(); };
    Rng rng = design_rng(opts, design);
    BeamformerResult res =
        make_result(gaussian_randomization(blocks, channels, prob, opts.n_candidates, rng), channels, design);
    res.sdp_objective = obj;
    res.gamma_d_used = gamma_d;
    return res;
}

}  // namespace

BeamformerResult optimize_snrd_threshold(const ChannelSet& channels, double gamma_c, double gamma_d, double p_t,
                                         const DesignOptions& opts) {
    return target_gain_design(channels, gamma_c, gamma_d, p_t, opts, Design::snrd_threshold);
}

BeamformerResult optimize_active(const ChannelSet& channels, std::optional<double> gamma_c, double p_t,
                                 const DesignOptions& opts) {
    return target_gain_design(channels, gamma_c, std::nullopt, p_t, opts,
                              gamma_c ? Design::active : Design::active_sensing_only);
}

double max_achievable_snr_d(const ChannelSet& channels, double gamma_c, double p_t, const DesignOptions& opts) {
    SdpProblem p = base_problem(channels, true);
    add_sinr_constraints(p, channels, gamma_c, p_t);
    const CMat q = channels.b_matrix.adjoint() * channels.b_matrix / static_cast<double>(channels.m);
    p.objective.assign(channels.c, p_t * q);
    double obj = 0.0;
    solve_blocks(p, p_t, opts.sdp, &obj, "SNR_d maximization");
    return obj;
}

GammaDSweep sweep_gamma_d(const ChannelSet& channels, double gamma_c, double p_t, int n_points,
                          const DesignOptions& opts) {
    if (n_points < 1) throw ConfigError("sweep needs at least one point");
    const BeamformerResult active = optimize_active(channels, gamma_c, p_t, opts);
    const double snr_active = snr_d_of_covariance(channels, active.r_c);
    const double snr_max = max_achievable_snr_d(channels, gamma_c, p_t, opts);
    const double hi = std::min(100.0 * snr_active, snr_max * (1.0 - 1e-3));
    const double lo = std::min(std::max(0.1 * snr_active, 1e-3 * snr_max), hi);

    GammaDSweep sweep;
    sweep.points.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double t = n_points == 1 ? 1.0 : static_cast<double>(i) / (n_points - 1);
        sweep.points[i].gamma_d = lo * std::pow(hi / lo, t);
    }
    parallel_for(sweep.points.size(), [&](std::size_t i) {
        try {
            sweep.points[i].result = optimize_snrd_threshold(channels, gamma_c, sweep.points[i].gamma_d, p_t, opts);
        } catch (const Infeasible&) {
        } catch (const NumericalFailure&) {
            // Left empty like an infeasible point.
        }
    });
    bool found = false;
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        if (!sweep.points[i].result) continue;
        if (!found || sweep.points[i].result->kappa_achieved > sweep.best_result().kappa_achieved) {
            sweep.best = i;
            found = true;
        }
    }
    if (!found) throw Infeasible("no SNR_d threshold in the sweep was attainable");
    return sweep;
}

}  // namespace pisac
