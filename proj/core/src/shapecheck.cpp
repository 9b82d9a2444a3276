#include "siw/shapecheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace siw::shapecheck {

using model::AFamily;
using model::CaseSpec;
using model::ParamSet;

namespace {

// natural center and magnitude reach of the usable z-region
struct Window {
    double center = 0.0;
    double hi_exp = 1.0;  // candidates up to 10^hi_exp away from center
};

Window family_window(const AFamily& f) {
    Window w;
    if (auto* p = std::get_if<model::PowerTailCentered>(&f)) {
        w.center = -p->a1 / (2 * p->a2);
    } else if (auto* p = std::get_if<model::LogQuadCentered>(&f)) {
        w.center = -p->a1 / (2 * p->a2);
        w.hi_exp = std::max(1.0, std::fabs(p->c0 / p->d1) * 0.4343 + 0.6);
    } else if (auto* p = std::get_if<model::LogQuad>(&f)) {
        w.hi_exp = std::max(1.0, std::fabs(p->c0 / p->d1) * 0.4343 + 0.6);
    } else if (auto* p = std::get_if<model::LogLinear>(&f)) {
        w.hi_exp = std::max(1.0, std::fabs(p->c0 / p->d0) * 0.4343 + 0.6);
    } else if (auto* p = std::get_if<model::ExpTail>(&f)) {
        // A = a0 + c e^(nu z) crosses zero at z* = ln(-a0/c)/nu when signs differ
        w.hi_exp = std::max(1.0, std::log10(1.0 + std::fabs(std::log(std::fabs(p->a0 / p->c)) /
                                                            p->nu)) + 0.8);
    } else if (auto* p = std::get_if<model::OdeTail>(&f)) {
        if (p->kind != model::OdeTail::Kind::exponential && p->p1 != 0.0)
            w.center = -p->p0 / p->p1;
    }
    return w;
}

}  // namespace

Grid admissible_grid(const AFamily& f, const ParamSet& c, const GridSpec& spec) {
    Expr a = model::a_expr(f);
    Expr q = Expr::poly({c.b0, c.b1});
    Window w = family_window(f);

    std::vector<Expr> guards = spec.extra_guards;
    guards.push_back(a);
    if (spec.guard_q && !(c.b1 == 0.0 && c.b0 == 0.0)) guards.push_back(q);

    const int n_candidates = 600;
    for (double min_abs = 0.04; min_abs >= 1e-5; min_abs *= 0.25) {
        std::vector<double> pts;
        for (int i = 0; i < n_candidates / 2; ++i) {
            double ue = -2.4 + (w.hi_exp + 2.4) * (i + 0.5) / (n_candidates / 2);
            double u = std::pow(10.0, ue);
            for (double zv : {w.center + u, w.center - u}) {
                bool ok = true;
                if (spec.require_positive_a)
                    ok = a.defined_at(zv) && 2 * a.eval(zv) > min_abs;
                for (const auto& g : guards) {
                    if (!ok) break;
                    ok = g.defined_at(zv) && std::fabs(g.eval(zv)) >= min_abs;
                }
                if (ok) pts.push_back(zv);
            }
        }
        if ((int)pts.size() >= spec.n) {
            std::sort(pts.begin(), pts.end());
            Grid grid;
            size_t stride = pts.size() / spec.n;
            for (size_t i = 0; i < pts.size() && (int)grid.z.size() < spec.n;
                 i += stride ? stride : 1)
                grid.z.push_back(pts[i]);
            return grid;
        }
    }
    throw singular_point_error("admissible_grid: no usable z-region for this family", 0.0);
}

Grid uniform_window_grid(const AFamily& f, const ParamSet& c, const GridSpec& spec) {
    Expr a = model::a_expr(f);
    Expr q = Expr::poly({c.b0, c.b1});
    Window w = family_window(f);

    std::vector<Expr> guards = spec.extra_guards;
    guards.push_back(a);
    if (spec.guard_q && !(c.b1 == 0.0 && c.b0 == 0.0)) guards.push_back(q);

    const double min_abs = 0.02;
    for (double width : {3.0, 2.0, 1.2, 0.7}) {
        for (double offset : {0.15, 0.35, 0.7, 1.2, 2.0, 3.2, 5.0, 8.0}) {
            for (int side = 0; side < 2; ++side) {
                double lo = side == 0 ? w.center + offset : w.center - offset - width;
                Grid grid;
                for (int i = 0; i < spec.n; ++i) {
                    double zv = lo + width * (i + 0.5) / spec.n;
                    bool ok = true;
                    if (spec.require_positive_a)
                        ok = a.defined_at(zv) && 2 * a.eval(zv) > min_abs;
                    for (const auto& g : guards) {
                        if (!ok) break;
                        ok = g.defined_at(zv) && std::fabs(g.eval(zv)) >= min_abs;
                    }
                    if (ok) grid.z.push_back(zv);
                }
                if ((int)grid.z.size() >= (9 * spec.n) / 10) return grid;
            }
        }
    }
    return admissible_grid(f, c, spec);  // no clean window; the wide scan decides
}

std::string to_string(Label l) {
    switch (l) {
        case Label::reducible: return "reducible";
        case Label::irreducible: return "irreducible";
        case Label::irreducible_conditional: return "irreducible-conditional";
        case Label::not_si: return "not-SI";
    }
    return "?";
}

Label from_classification(model::Classification c) {
    switch (c) {
        case model::Classification::reducible: return Label::reducible;
        case model::Classification::irreducible: return Label::irreducible;
        case model::Classification::irreducible_conditional:
            return Label::irreducible_conditional;
    }
    return Label::not_si;
}

double constancy_tol(double value_scale, bool numeric_zmap) {
    return (numeric_zmap ? 1e-6 : 1e-9) * std::max(1.0, value_scale);
}

namespace {

struct ConstancyResult {
    bool constant = false;
    double mean = 0.0;
    double max_dev = 0.0;
    double scale = 0.0;
};

// is f(z) - g(z) constant across the grid?
ConstancyResult constancy(const Expr& f, const Expr& g, const Grid& grid) {
    ConstancyResult res;
    std::vector<double> r;
    r.reserve(grid.z.size());
    double scale = 0.0;
    for (double zv : grid.z) {
        if (!f.defined_at(zv) || !g.defined_at(zv)) continue;
        double fv = f.eval(zv), gv = g.eval(zv);
        r.push_back(fv - gv);
        scale = std::max({scale, std::fabs(fv), std::fabs(gv)});
    }
    if (r.size() < grid.z.size() / 2 || r.size() < 8) return res;  // not enough usable points
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= double(r.size());
    double dev = 0.0;
    for (double v : r) dev = std::max(dev, std::fabs(v - mean));
    res.mean = mean;
    res.max_dev = dev;
    res.scale = scale;
    res.constant = dev <= constancy_tol(scale);
    return res;
}

}  // namespace

SIVerdict two_step_residual(const CaseSpec& cs, const AFamily& f, const ParamSet& c0,
                            const Grid& grid) {
    auto [c2, r2] = model::param_step(cs, f, c0);
    Expr v_plus = potentials::potential_pair(f, c0).second;
    Expr v_minus_next = potentials::potential_pair(f, c2).first;

    auto res = constancy(v_plus, v_minus_next, grid);
    SIVerdict v;
    v.is_two_step = res.constant;
    v.estimated_r2 = res.mean;
    v.max_residual = res.max_dev;
    v.catalog_r2 = r2;
    v.tolerance = constancy_tol(res.scale);
    if (cs.conditional()) v.conditional_required = cs.constraint_label;
    return v;
}

double reflective_residual(const AFamily& f, const ParamSet& c, const Grid& grid) {
    Expr v_plus = potentials::potential_pair(f, c).second;
    ParamSet refl = model::reflective_step(c).first;
    Expr v_minus = potentials::potential_pair(f, refl).first;
    double worst = 0.0;
    for (double zv : grid.z) {
        if (!v_plus.defined_at(zv) || !v_minus.defined_at(zv)) continue;
        worst = std::max(worst, std::fabs(v_plus.eval(zv) - v_minus.eval(zv)));
    }
    return worst;
}

OrdinaryProbe ordinary_si_probe(const CaseSpec& cs, const AFamily& f, const ParamSet& c0,
                                const Grid& grid) {
    OrdinaryProbe out;
    auto pots0 = potentials::build(f, c0);

    // candidate shifts: lattice spanned by the family's natural constants
    std::vector<double> base = model::natural_shift_constants(f);
    std::vector<double> deltas{0.0};
    for (double s : base)
        for (int j = -2; j <= 2; ++j)
            if (j != 0) deltas.push_back(j * s);

    auto try_route = [&](const Expr& vi0, bool via_i2) {
        for (double d1 : deltas) {
            // one-parameter rows move along their tie; two-parameter rows scan b0 too
            std::vector<double> b0s;
            double nb1 = c0.b1 + d1;
            if (cs.tied_b0) {
                b0s.push_back(cs.tied_b0(f, nb1));
            } else if (cs.b1_fixed_zero) {
                if (d1 != 0.0) continue;
                for (double d0 : deltas) b0s.push_back(c0.b0 + d0);
            } else {
                for (double d0 : deltas) b0s.push_back(c0.b0 + d0);
            }
            for (double nb0 : b0s) {
                ParamSet c1{nb1, nb0, c0.R};
                auto pots1 = potentials::build(f, c1);
                auto first = constancy(vi0, pots1.v_minus, grid);
                if (!first.constant) continue;
                if (via_i2 && !pots1.v_i2) continue;
                Expr vi_next = via_i2 ? *pots1.v_i2 : pots1.v_i1;
                auto second = constancy(pots0.v_plus, vi_next, grid);
                if (!second.constant) continue;
                // both constants must be the same shift R~1(c0)
                double tol = constancy_tol(std::max(first.scale, second.scale)) * 10;
                if (std::fabs(first.mean - second.mean) > tol) continue;
                out.found = true;
                out.c1 = c1;
                out.r1 = first.mean;
                out.via_i2 = via_i2;
                return;
            }
        }
    };

    try_route(pots0.v_i1, false);
    if (!out.found && pots0.v_i2) try_route(*pots0.v_i2, true);
    return out;
}

bool conditional_probe(const CaseSpec& cs, const AFamily& f, const ParamSet& c) {
    if (!cs.conditional()) throw std::logic_error("conditional_probe: case has no constraint");
    double required = cs.constrained_b0(f);
    return std::fabs(c.b0 - required) <= 1e-12 * (1.0 + std::fabs(required));
}

Label classify(const CaseSpec& cs, int samples, Rng& rng) {
    bool generic_two_step = true;  // two-step SI with b0 unconstrained?
    bool constrained_two_step = true;
    bool ordinary = true;

    for (int i = 0; i < samples; ++i) {
        GridSpec spec;
        spec.guard_q = true;

        // generic draw probes unconditional two-step SI
        auto generic = model::sample(cs, rng, model::SampleMode::generic);
        Grid grid = admissible_grid(generic.family, generic.params, spec);
        if (!two_step_residual(cs, generic.family, generic.params, grid).is_two_step)
            generic_two_step = false;

        // constrained draw probes the conditional branch and ordinary SI
        auto on = model::sample(cs, rng, model::SampleMode::on_constraint);
        Grid ongrid = admissible_grid(on.family, on.params, spec);
        if (!two_step_residual(cs, on.family, on.params, ongrid).is_two_step)
            constrained_two_step = false;
        if (!ordinary_si_probe(cs, on.family, on.params, ongrid).found) ordinary = false;
    }

    if (!constrained_two_step) return Label::not_si;
    if (ordinary) return Label::reducible;
    if (!generic_two_step) return Label::irreducible_conditional;
    return Label::irreducible;
}

}  // namespace siw::shapecheck
