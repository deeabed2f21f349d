#include "pisac/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "pisac/errors.hpp"

namespace pisac {

std::string to_string(SdpStatus status) {
    switch (status) {
        case SdpStatus::optimal: return "optimal";
        case SdpStatus::infeasible: return "infeasible";
        case SdpStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

void SdpProblem::validate() const {
    if (block_dim < 1 || n_blocks < 1) throw ConfigError("SDP needs at least one block of positive size");
    if (static_cast<int>(objective.size()) != n_blocks) throw DimensionMismatch("one objective matrix per block");
    auto check = [&](const CMat& a, const char* what) {
        if (a.size() == 0) return;
        if (a.rows() != block_dim || a.cols() != block_dim) throw DimensionMismatch(std::string(what) + " has wrong size");
        const double scale = std::max(1.0, a.norm());
        if ((a - a.adjoint()).norm() > 1e-12 * scale) throw ConfigError(std::string(what) + " is not Hermitian");
        if (!a.allFinite()) throw ConfigError(std::string(what) + " has non-finite entries");
    };
    for (const auto& a : objective) check(a, "objective matrix");
    for (const auto& c : constraints) {
        if (static_cast<int>(c.matrices.size()) != n_blocks)
            throw DimensionMismatch("constraint needs one matrix per block");
        for (const auto& b : c.matrices) check(b, "constraint matrix");
        if (!std::isfinite(c.rhs)) throw ConfigError("constraint rhs is not finite");
    }
}

double constraint_value(const SdpConstraint& constraint, const std::vector<CMat>& x_blocks) {
    double v = 0.0;
    for (std::size_t k = 0; k < constraint.matrices.size(); ++k)
        if (constraint.matrices[k].size() != 0) v += trace_product(constraint.matrices[k], x_blocks[k]);
    return v;
}

namespace {

// min <C, X> + c_lp' x  s.t.  <A_i, X> + a_lp_i' x = b_i,  X PSD, x >= 0.
struct StandardForm {
    std::vector<int> dims;
    int n_lp = 0;
    std::vector<CMat> c;
    RVec c_lp;
    std::vector<std::vector<CMat>> a;  // a[i][block]; 0 x 0 = zero
    std::vector<RVec> a_lp;
    RVec b;

    int rows() const { return static_cast<int>(b.size()); }
    int blocks() const { return static_cast<int>(dims.size()); }
};

struct Iterate {
    std::vector<CMat> x, z;
    RVec x_lp, z_lp, y;
};

enum class IpmOutcome { converged, max_iter, stalled, diverged, numerical };

struct IpmResult {
    Iterate it;
    IpmOutcome outcome = IpmOutcome::max_iter;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double rel_primal = 0.0;
    double rel_dual = 0.0;
    double rel_gap = 0.0;
    int iterations = 0;
};

double apply_constraint(const StandardForm& sf, int i, const std::vector<CMat>& x, const RVec& x_lp) {
    double v = sf.a_lp[i].dot(x_lp);
    for (int k = 0; k < sf.blocks(); ++k)
        if (sf.a[i][k].size() != 0) v += trace_product(sf.a[i][k], x[k]);
    return v;
}

// Largest alpha in (0, inf] with x + alpha dx PSD.
double max_step(const CMat& x, const CMat& dx) {
    Eigen::LLT<CMat> llt(x);
    if (llt.info() != Eigen::Success) return 0.0;
    const CMat t = llt.matrixL().solve(dx);
    const CMat s = llt.matrixL().solve(t.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(s), Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step_lp(const RVec& x, const RVec& dx) {
    double a = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (dx(j) < 0.0) a = std::min(a, -x(j) / dx(j));
    return a;
}

double norm_blocks(const std::vector<CMat>& m, const RVec& lp) {
    double s = lp.squaredNorm();
    for (const auto& b : m) s += b.squaredNorm();
    return std::sqrt(s);
}

IpmResult run_ipm(const StandardForm& sf, const SdpOptions& opt) {
    const int m = sf.rows();
    const int nb = sf.blocks();
    int n_total = sf.n_lp;
    for (int d : sf.dims) n_total += d;

    const double norm_b = sf.b.norm();
    const double norm_c = norm_blocks(sf.c, sf.c_lp);

    IpmResult res;
    Iterate& it = res.it;
    const double start = 1.0;
    for (int k = 0; k < nb; ++k) {
        it.x.push_back(start * CMat::Identity(sf.dims[k], sf.dims[k]));
        it.z.push_back(start * CMat::Identity(sf.dims[k], sf.dims[k]));
    }
    it.x_lp = RVec::Constant(sf.n_lp, start);
    it.z_lp = RVec::Constant(sf.n_lp, start);
    it.y = RVec::Zero(m);

    int stall = 0;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        res.iterations = iter;
        // Residuals.
        RVec rp(m);
        for (int i = 0; i < m; ++i) rp(i) = sf.b(i) - apply_constraint(sf, i, it.x, it.x_lp);
        std::vector<CMat> rd(nb);
        for (int k = 0; k < nb; ++k) {
            rd[k] = sf.c[k] - it.z[k];
            for (int i = 0; i < m; ++i)
                if (sf.a[i][k].size() != 0) rd[k] -= it.y(i) * sf.a[i][k];
        }
        RVec rd_lp = sf.c_lp - it.z_lp;
        for (int i = 0; i < m; ++i) rd_lp -= it.y(i) * sf.a_lp[i];

        double xz = it.x_lp.dot(it.z_lp);
        double pobj = sf.c_lp.dot(it.x_lp);
        for (int k = 0; k < nb; ++k) {
            xz += trace_product(it.x[k], it.z[k]);
            pobj += trace_product(sf.c[k], it.x[k]);
        }
        const double dobj = sf.b.dot(it.y);
        const double mu = xz / n_total;

        res.primal_obj = pobj;
        res.dual_obj = dobj;
        res.rel_primal = rp.norm() / (1.0 + norm_b);
        res.rel_dual = norm_blocks(rd, rd_lp) / (1.0 + norm_c);
        res.rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double rel_comp = xz / (1.0 + std::abs(pobj) + std::abs(dobj));

        if (res.rel_primal <= opt.tolerance && res.rel_dual <= opt.tolerance && res.rel_gap <= opt.tolerance &&
            rel_comp <= opt.tolerance) {
            res.outcome = IpmOutcome::converged;
            return res;
        }
        if (norm_blocks(it.x, it.x_lp) > 1e12 || it.y.norm() > 1e12) {
            res.outcome = IpmOutcome::diverged;
            return res;
        }

        // Schur complement of the HKM direction.
        std::vector<CMat> z_inv(nb);
        for (int k = 0; k < nb; ++k) {
            Eigen::LLT<CMat> llt(it.z[k]);
            if (llt.info() != Eigen::Success) {
                res.outcome = IpmOutcome::numerical;
                return res;
            }
            z_inv[k] = llt.solve(CMat::Identity(sf.dims[k], sf.dims[k]));
            z_inv[k] = hermitian_part(z_inv[k]);
        }
        std::vector<std::vector<CMat>> g(m, std::vector<CMat>(nb));  // X A_j Z^-1
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < nb; ++k)
                if (sf.a[j][k].size() != 0) g[j][k] = it.x[k] * sf.a[j][k] * z_inv[k];
        const RVec xz_ratio = it.x_lp.cwiseQuotient(it.z_lp);
        RMat schur = RMat::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                double v = (sf.a_lp[i].cwiseProduct(xz_ratio)).dot(sf.a_lp[j]);
                for (int k = 0; k < nb; ++k)
                    if (sf.a[i][k].size() != 0 && sf.a[j][k].size() != 0) v += trace_product(sf.a[i][k], g[j][k]);
                schur(i, j) = v;
                schur(j, i) = v;
            }
        Eigen::LDLT<RMat> ldlt(schur);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            res.outcome = IpmOutcome::numerical;
            return res;
        }

        // Solves for a direction given the complementarity right-hand side
        // rc = target - X (per block), i.e. dX Z + X dZ = rc Z.
        struct Direction {
            std::vector<CMat> dx, dz;
            RVec dx_lp, dz_lp, dy;
        };
        auto solve_direction = [&](const std::vector<CMat>& rc, const RVec& rc_lp) {
            Direction d;
            RVec h = rp;
            std::vector<CMat> v(nb);
            for (int k = 0; k < nb; ++k) v[k] = rc[k] - it.x[k] * rd[k] * z_inv[k];
            const RVec v_lp = rc_lp - it.x_lp.cwiseProduct(rd_lp).cwiseQuotient(it.z_lp);
            for (int i = 0; i < m; ++i) {
                double t = sf.a_lp[i].dot(v_lp);
                for (int k = 0; k < nb; ++k)
                    if (sf.a[i][k].size() != 0) t += (sf.a[i][k].transpose().cwiseProduct(v[k])).sum().real();
                h(i) -= t;
            }
            d.dy = ldlt.solve(h);
            d.dz = rd;
            d.dx.resize(nb);
            for (int k = 0; k < nb; ++k) {
                for (int i = 0; i < m; ++i)
                    if (sf.a[i][k].size() != 0) d.dz[k] -= d.dy(i) * sf.a[i][k];
                d.dz[k] = hermitian_part(d.dz[k]);
                d.dx[k] = hermitian_part(rc[k] - it.x[k] * d.dz[k] * z_inv[k]);
            }
            d.dz_lp = rd_lp;
            for (int i = 0; i < m; ++i) d.dz_lp -= d.dy(i) * sf.a_lp[i];
            d.dx_lp = rc_lp - it.x_lp.cwiseProduct(d.dz_lp).cwiseQuotient(it.z_lp);
            return d;
        };
        auto step_lengths = [&](const Direction& d) {
            double ap = max_step_lp(it.x_lp, d.dx_lp);
            double ad = max_step_lp(it.z_lp, d.dz_lp);
            for (int k = 0; k < nb; ++k) {
                ap = std::min(ap, max_step(it.x[k], d.dx[k]));
                ad = std::min(ad, max_step(it.z[k], d.dz[k]));
            }
            return std::pair{ap, ad};
        };

        // Predictor.
        std::vector<CMat> rc(nb);
        for (int k = 0; k < nb; ++k) rc[k] = -it.x[k];
        RVec rc_lp = -it.x_lp;
        const Direction aff = solve_direction(rc, rc_lp);
        auto [ap_aff, ad_aff] = step_lengths(aff);
        ap_aff = std::min(1.0, ap_aff);
        ad_aff = std::min(1.0, ad_aff);
        double xz_aff = (it.x_lp + ap_aff * aff.dx_lp).dot(it.z_lp + ad_aff * aff.dz_lp);
        for (int k = 0; k < nb; ++k)
            xz_aff += trace_product(it.x[k] + ap_aff * aff.dx[k], it.z[k] + ad_aff * aff.dz[k]);
        const double mu_aff = std::max(xz_aff, 0.0) / n_total;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Corrector: dX Z + X dZ = sigma mu I - X Z - dX_aff dZ_aff.
        for (int k = 0; k < nb; ++k) {
            const CMat target = sigma * mu * CMat::Identity(sf.dims[k], sf.dims[k]) - aff.dx[k] * aff.dz[k];
            rc[k] = target * z_inv[k] - it.x[k];
        }
        rc_lp = (RVec::Constant(sf.n_lp, sigma * mu) - aff.dx_lp.cwiseProduct(aff.dz_lp)).cwiseQuotient(it.z_lp) -
                it.x_lp;
        const Direction dir = solve_direction(rc, rc_lp);
        auto [ap, ad] = step_lengths(dir);
        const double gamma = 0.95;
        ap = std::min(1.0, gamma * ap);
        ad = std::min(1.0, gamma * ad);
        if (!(ap > 0) || !(ad > 0)) {
            res.outcome = IpmOutcome::numerical;
            return res;
        }
        for (int k = 0; k < nb; ++k) {
            it.x[k] = hermitian_part(it.x[k] + ap * dir.dx[k]);
            it.z[k] = hermitian_part(it.z[k] + ad * dir.dz[k]);
        }
        it.x_lp += ap * dir.dx_lp;
        it.z_lp += ad * dir.dz_lp;
        it.y += ad * dir.dy;

        stall = (ap < 1e-8 && ad < 1e-8) ? stall + 1 : 0;
        if (stall >= 5) {
            res.outcome = IpmOutcome::stalled;
            return res;
        }
    }
    res.iterations = opt.max_iterations;
    res.outcome = IpmOutcome::max_iter;
    return res;
}

struct Scaled {
    StandardForm sf;
    double objective_scale = 1.0;
    int n_slack = 0;
};

// Normalizes every constraint row and the objective, then converts
// inequalities with nonnegative slacks.
Scaled to_standard_form(const SdpProblem& p) {
    Scaled s;
    StandardForm& sf = s.sf;
    sf.dims.assign(p.n_blocks, p.block_dim);
    double obj_norm = 0.0;
    for (const auto& a : p.objective)
        if (a.size() != 0) obj_norm = std::max(obj_norm, a.norm());
    s.objective_scale = obj_norm > 0 ? 1.0 / obj_norm : 1.0;
    for (const auto& a : p.objective)
        sf.c.push_back(a.size() != 0 ? CMat(-s.objective_scale * a)
                                      : CMat(CMat::Zero(p.block_dim, p.block_dim)));

    for (const auto& c : p.constraints)
        if (c.sense != ConstraintSense::equal) ++s.n_slack;
    sf.n_lp = s.n_slack;
    sf.c_lp = RVec::Zero(sf.n_lp);
    sf.b.resize(p.constraints.size());
    int slack = 0;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& c = p.constraints[i];
        double row_norm = std::abs(c.rhs);
        for (const auto& b : c.matrices)
            if (b.size() != 0) row_norm = std::max(row_norm, b.norm());
        const double scale = row_norm > 0 ? 1.0 / row_norm : 1.0;
        std::vector<CMat> row;
        for (const auto& b : c.matrices) row.push_back(b.size() != 0 ? CMat(scale * b) : CMat());
        sf.a.push_back(std::move(row));
        RVec lp = RVec::Zero(sf.n_lp);
        if (c.sense == ConstraintSense::less_equal) lp(slack++) = 1.0;
        if (c.sense == ConstraintSense::greater_equal) lp(slack++) = -1.0;
        sf.a_lp.push_back(lp);
        sf.b(i) = scale * c.rhs;
    }
    return s;
}

// min sum(p + q) with <A_i, X> + a_i' x + p_i - q_i = b_i.
StandardForm phase_one(const StandardForm& sf) {
    StandardForm ph = sf;
    const int m = sf.rows();
    for (auto& c : ph.c) c.setZero();
    ph.n_lp = sf.n_lp + 2 * m;
    ph.c_lp = RVec::Zero(ph.n_lp);
    ph.c_lp.tail(2 * m).setOnes();
    for (int i = 0; i < m; ++i) {
        RVec lp = RVec::Zero(ph.n_lp);
        lp.head(sf.n_lp) = sf.a_lp[i];
        lp(sf.n_lp + 2 * i) = 1.0;
        lp(sf.n_lp + 2 * i + 1) = -1.0;
        ph.a_lp[i] = lp;
    }
    return ph;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
    problem.validate();
    const Scaled scaled = to_standard_form(problem);
    const StandardForm& sf = scaled.sf;

    SdpSolution sol;
    const IpmResult main = run_ipm(sf, options);
    sol.iterations = main.iterations;
    const bool converged = main.outcome == IpmOutcome::converged;
    // The contract tolerances, accepted when the tight target was not reached.
    const bool acceptable = main.rel_primal <= 1e-8 && main.rel_dual <= 1e-8 && main.rel_gap <= 1e-7;

    auto fill = [&](const IpmResult& r) {
        sol.x_blocks = r.it.x;
        sol.objective_value = 0.0;
        for (int k = 0; k < problem.n_blocks; ++k)
            if (problem.objective[k].size() != 0)
                sol.objective_value += trace_product(problem.objective[k], sol.x_blocks[k]);
        sol.dual_bound = -r.dual_obj / scaled.objective_scale;
        sol.gap = r.rel_gap;
        double worst = 0.0;
        for (const auto& c : problem.constraints) {
            const double v = constraint_value(c, sol.x_blocks);
            double scale = std::abs(c.rhs);
            for (const auto& b : c.matrices)
                if (b.size() != 0) scale = std::max(scale, b.norm());
            if (scale == 0) scale = 1.0;
            double viol = 0.0;
            if (c.sense == ConstraintSense::less_equal) viol = std::max(0.0, v - c.rhs);
            if (c.sense == ConstraintSense::greater_equal) viol = std::max(0.0, c.rhs - v);
            if (c.sense == ConstraintSense::equal) viol = std::abs(v - c.rhs);
            worst = std::max(worst, viol / scale);
        }
        sol.primal_violation = worst;
    };

    if (converged || acceptable) {
        fill(main);
        sol.status = SdpStatus::optimal;
        return sol;
    }

    SdpOptions ph_opt = options;
    ph_opt.tolerance = std::min(options.tolerance, 1e-10);
    const IpmResult ph = run_ipm(phase_one(sf), ph_opt);
    // Dual objective of phase one is a lower bound on the total violation.
    const double ph_value = ph.outcome == IpmOutcome::converged ? ph.primal_obj : std::max(ph.dual_obj, 0.0);
    sol.phase1_value = ph_value;
    if (ph_value > options.infeasibility_tolerance) {
        sol.status = SdpStatus::infeasible;
        sol.iterations += ph.iterations;
        return sol;
    }
    if (main.outcome == IpmOutcome::numerical || main.outcome == IpmOutcome::stalled)
        throw IllConditioned("SDP step computation failed on a feasible problem");
    fill(main);
    sol.status = SdpStatus::max_iter;
    return sol;
}

void write_sdp_problem(const SdpProblem& problem, const std::filesystem::path& path) {
    using nlohmann::json;
    auto encode = [](const CMat& a) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back({a(i, j).real(), a(i, j).imag()});
            rows.push_back(row);
        }
        return rows;
    };
    json j;
    j["block_dim"] = problem.block_dim;
    j["n_blocks"] = problem.n_blocks;
    j["objective"] = json::array();
    for (const auto& a : problem.objective) j["objective"].push_back(encode(a));
    j["constraints"] = json::array();
    for (const auto& c : problem.constraints) {
        json jc;
        jc["sense"] = c.sense == ConstraintSense::less_equal ? "<=" : c.sense == ConstraintSense::equal ? "=" : ">=";
        jc["rhs"] = c.rhs;
        jc["matrices"] = json::array();
        for (const auto& b : c.matrices) jc["matrices"].push_back(encode(b));
        j["constraints"].push_back(jc);
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace pisac
