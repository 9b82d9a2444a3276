#include "siw/ladder.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace siw::ladder {

using model::AFamily;
using model::CaseSpec;
using model::ParamSet;

std::string to_string(Termination t) {
    switch (t) {
        case Termination::requested_length: return "requested-length";
        case Termination::constraint_broken: return "constraint-broken";
        case Termination::flag_degenerate: return "flag-degenerate";
    }
    return "?";
}

ParamChain chain(const CaseSpec& cs, const AFamily& f, const ParamSet& c0, int steps) {
    ParamChain ch;
    ch.params.push_back(c0);
    for (int k = 0; k < steps; ++k) {
        const ParamSet& cur = ch.params.back();
        if (cs.conditional()) {
            double required = cs.constrained_b0(f);
            if (std::fabs(cur.b0 - required) > 1e-10 * (1.0 + std::fabs(required))) {
                ch.termination = Termination::constraint_broken;
                return ch;
            }
        }
        auto [next, r2] = model::param_step(cs, f, cur);
        ch.params.push_back(next);
        ch.shifts.push_back(r2);
    }
    return ch;
}

ParamChain reflective_chain(const ParamSet& c0, int steps) {
    ParamChain ch;
    ch.params.push_back(c0);
    for (int k = 0; k < steps; ++k) {
        auto [next, r2] = model::reflective_step(ch.params.back());
        ch.params.push_back(next);
        ch.shifts.push_back(r2);
    }
    return ch;
}

namespace {

// tP2+ = 2A (d/dz + Q/A)^2 applied symbolically
Expr apply_p2_plus(const Expr& a, const ParamSet& c, const Expr& f) {
    Expr qa = Expr::div(Expr::poly({c.b0, c.b1}), a);
    Expr once = (f.diff() + qa * f).normalized();
    Expr twice = (once.diff() + qa * once).normalized();
    return ((2.0 * a) * twice).normalized();
}

// The gauged Hamiltonians at different parameter sets live in different
// gauges: tH+(c0) = S tH-(c2) S^{-1} + R~2 with S = e^{W(c0) - W(c2)}.  The
// lifted flag blocks therefore carry this multiplicative factor.  Along an
// admissible two-step the consistency ODE integrates it in closed form,
//   S  proportional to  A(z) (z + b0+/b1+)^(-mu),   mu = 2 (R~2 + b1+)/b1+,
// with the exponential variant when b1+ = 0; a reflective step falls back to
// the explicit antiderivative of (Q2 - Q0)/(2A).
Expr gauge_mismatch(const AFamily& fam, const ParamSet& c0, const ParamSet& c2, double r2) {
    Expr a = model::a_expr(fam);
    double b1p = c2.b1 + c0.b1, b0p = c2.b0 + c0.b0;
    double rbar = r2 + b1p;
    double scale =
        std::max({1.0, std::fabs(c0.b1), std::fabs(c0.b0), std::fabs(c2.b1), std::fabs(c2.b0)});
    if (std::fabs(b1p) > 1e-12 * scale) {
        double mu = 2 * rbar / b1p;
        if (mu == 0.0) return a;
        // constant prefactors do not change the span
        return (a * Expr::pow(Expr::poly({b0p / b1p, 1.0}), -mu)).normalized();
    }
    if (std::fabs(b0p) > 1e-12 * scale) {
        double nu = 2 * rbar / b0p;
        return (a * Expr::exp((-nu) * Expr::var())).normalized();
    }
    // reflective step: W(c0) - W(c2) = -2 int Q0/(2A)
    Expr w0 = potentials::gauge_weight(fam, c0);
    Expr w2 = potentials::gauge_weight(fam, c2);
    return Expr::exp((w0 - w2).normalized()).normalized();
}

// rows: probe points, columns: basis functions, sup-normalized per column
struct ProbeMatrix {
    Eigen::MatrixXd values;
    std::vector<double> norms;
    std::vector<double> zs;  // usable probe points
};

ProbeMatrix evaluate_basis(const std::vector<Expr>& funcs, const shapecheck::Grid& probe) {
    ProbeMatrix pm;
    for (double zv : probe.z) {
        bool ok = true;
        for (const auto& f : funcs)
            if (!f.defined_at(zv)) ok = false;
        if (ok) pm.zs.push_back(zv);
    }
    pm.values.resize(long(pm.zs.size()), long(funcs.size()));
    pm.norms.assign(funcs.size(), 0.0);
    for (size_t j = 0; j < funcs.size(); ++j) {
        for (size_t i = 0; i < pm.zs.size(); ++i) {
            double v = funcs[j].eval(pm.zs[i]);
            pm.values(long(i), long(j)) = v;
            pm.norms[j] = std::max(pm.norms[j], std::fabs(v));
        }
        if (pm.norms[j] == 0.0) pm.norms[j] = 1.0;
        pm.values.col(long(j)) /= pm.norms[j];
    }
    return pm;
}

// modified Gram-Schmidt over the sup-normalized columns; residual norms
// separate genuine rank collapse (~1e-15) from mere ill-conditioning.
// det(Gram) = prod r_i^2 is reported alongside.
struct RankReport {
    int rank = 0;
    double min_residual = 1.0;
    double gram_det = 1.0;
};

RankReport column_rank(const Eigen::MatrixXd& b) {
    RankReport rep;
    Eigen::MatrixXd q = b / std::sqrt(double(b.rows()));
    for (long j = 0; j < q.cols(); ++j) {
        for (long k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
        // second pass for numerical orthogonality
        for (long k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
        double r = q.col(j).norm();
        rep.gram_det *= r * r;
        rep.min_residual = std::min(rep.min_residual, r);
        if (r > 1e-11) {
            ++rep.rank;
            q.col(j) /= r;
        } else {
            q.col(j).setZero();
        }
    }
    return rep;
}

}  // namespace

FlagBasis flag_basis(const AFamily& fam, const ParamChain& ch, int blocks,
                     const shapecheck::Grid& probe) {
    Expr a = model::a_expr(fam);
    FlagBasis fb;
    int max_blocks = std::min(blocks, ch.steps() + 1);

    std::vector<Expr> block = {Expr::constant(1.0), Expr::var()};
    for (int k = 0; k < max_blocks; ++k) {
        if (k > 0) {
            // lift {1, z} through tP2+(c^(2j)) S(c^(2j), c^(2j+2)) from the
            // inside out
            block = {Expr::constant(1.0), Expr::var()};
            for (int j = k - 1; j >= 0; --j) {
                Expr s_j = gauge_mismatch(fam, ch.params[size_t(j)], ch.params[size_t(j) + 1],
                                          ch.shifts[size_t(j)]);
                for (auto& g : block)
                    g = apply_p2_plus(a, ch.params[size_t(j)], (s_j * g).normalized());
            }
        }
        std::vector<Expr> trial = fb.funcs;
        for (const auto& g : block) trial.push_back(g);
        auto pm = evaluate_basis(trial, probe);
        if (pm.zs.size() < 2 * trial.size()) {
            fb.degenerate = true;  // not enough usable probe points to certify
            break;
        }
        auto rank = column_rank(pm.values);
        if (rank.rank < (int)trial.size()) {
            fb.degenerate = true;
            break;
        }
        fb.funcs = std::move(trial);
        fb.gram_det = rank.gram_det;
        fb.blocks = k + 1;
    }
    // normalize for downstream least squares
    if (!fb.funcs.empty()) {
        auto pm = evaluate_basis(fb.funcs, probe);
        for (size_t j = 0; j < fb.funcs.size(); ++j)
            fb.funcs[j] = Expr::mul({Expr::constant(1.0 / pm.norms[j]), fb.funcs[j]}).normalized();
    }
    return fb;
}

LadderResult solvable_spectrum(const AFamily& fam, const ParamChain& ch, int blocks,
                               const shapecheck::Grid& probe) {
    LadderResult res;
    res.chain = ch;

    FlagBasis fb = flag_basis(fam, ch, blocks, probe);
    if (fb.degenerate || fb.blocks == 0)
        throw flag_degenerate_error("solvable_spectrum: flag basis is degenerate");
    res.blocks = fb.blocks;

    // matrix of tH-(c^(0)) on the flag via least squares over the probe grid
    const ParamSet& c0 = ch.params.front();
    auto g = potentials::gauged_ops(fam, c0);
    std::vector<Expr> images;
    images.reserve(fb.funcs.size());
    for (const auto& f : fb.funcs) images.push_back(g.h_minus.apply(f));

    auto pm = evaluate_basis(fb.funcs, probe);
    // basis columns are already normalized; rebuild un-normalized value matrix
    Eigen::MatrixXd basis(pm.values.rows(), pm.values.cols());
    for (long j = 0; j < basis.cols(); ++j) basis.col(j) = pm.values.col(j) * pm.norms[size_t(j)];

    Eigen::MatrixXd rhs(long(pm.zs.size()), long(images.size()));
    for (size_t j = 0; j < images.size(); ++j)
        for (size_t i = 0; i < pm.zs.size(); ++i)
            rhs(long(i), long(j)) = images[j].eval(pm.zs[i]);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    Eigen::MatrixXd m = qr.solve(rhs);
    double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    res.closure_residual = (basis * m - rhs).cwiseAbs().maxCoeff() / scale;

    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    std::vector<double> lam;
    for (long i = 0; i < m.rows(); ++i) {
        lam.push_back(es.eigenvalues()[i].real());
        res.max_imag = std::max(res.max_imag, std::fabs(es.eigenvalues()[i].imag()));
    }
    std::sort(lam.begin(), lam.end());
    res.matrix_route = lam;

    // accumulation route: level block k holds +-b1^(2k)/2 - R + sum_{j<k} R~2(c^(2j))
    std::vector<double> acc;
    double base = 0.0;
    for (int k = 0; k < fb.blocks; ++k) {
        const ParamSet& ck = ch.params[size_t(k)];
        acc.push_back(base + ck.b1 / 2 - ck.R);
        acc.push_back(base - ck.b1 / 2 - ck.R);
        if (k < ch.steps()) base += ch.shifts[size_t(k)];
    }
    std::sort(acc.begin(), acc.end());
    res.accumulation_route = acc;

    res.route_deviation = 0.0;
    for (size_t i = 0; i < acc.size() && i < lam.size(); ++i)
        res.route_deviation = std::max(res.route_deviation, std::fabs(acc[i] - lam[i]));
    if (acc.size() != lam.size()) res.route_deviation = std::numeric_limits<double>::infinity();
    return res;
}

FlagBasis flag_basis(const CaseSpec& cs, const AFamily& f, const ParamSet& c0, int blocks,
                     const shapecheck::Grid& probe) {
    return flag_basis(f, chain(cs, f, c0, blocks - 1), blocks, probe);
}

LadderResult solvable_spectrum(const CaseSpec& cs, const AFamily& f, const ParamSet& c0,
                               int blocks, const shapecheck::Grid& probe) {
    return solvable_spectrum(f, chain(cs, f, c0, blocks - 1), blocks, probe);
}

}  // namespace siw::ladder
