#include "siw/potentials.hpp"

#include <cmath>
#include <stdexcept>

namespace siw::potentials {

using model::AFamily;
using model::ParamSet;

namespace {

Expr z() { return Expr::var(); }
Expr c(double v) { return Expr::constant(v); }
Expr q_of(const ParamSet& p) { return Expr::poly({p.b0, p.b1}); }
Expr sqrt2a(const Expr& a) { return Expr::pow((2.0 * a).normalized(), 0.5); }

}  // namespace

std::pair<Expr, Expr> potential_pair(const AFamily& fam, const ParamSet& p) {
    Expr a = model::a_expr(fam);
    Expr ap = a.diff();
    Expr app = ap.diff();
    Expr q = q_of(p);
    Expr common = a * app - 0.75 * (ap * ap) - q * q;
    Expr odd = 2.0 * (q * ap - (2.0 * p.b1) * a);  // sign flips between V+ and V-
    Expr vm = Expr::div(-(common + odd), (4.0 * a).normalized()) - p.R;
    Expr vp = Expr::div(-(common - odd), (4.0 * a).normalized()) - p.R;
    return {vm.normalized(), vp.normalized()};
}

std::pair<Expr, std::optional<Expr>> intermediate_potentials(const AFamily& fam,
                                                             const ParamSet& p) {
    Expr a = model::a_expr(fam);
    Expr ap = a.diff();
    Expr app = ap.diff();
    Expr q = q_of(p);
    Expr vi1 = (0.25 * app - Expr::div(ap * ap - 4.0 * (q * q), (16.0 * a).normalized()) - p.R)
                   .normalized();
    if (p.b1 == 0.0) return {vi1, std::nullopt};
    // tH^i2 = tH^i1 - b1 A'/Q + 2 b1^2 A/Q^2; same relation between the
    // potentials (the duplicated -R in the paper's display is dropped so the
    // gauged and physical pictures stay consistent)
    Expr vi2 = (vi1 - Expr::div((p.b1) * ap, q) + Expr::div((2.0 * p.b1 * p.b1) * a, (q * q).normalized()))
                   .normalized();
    return {vi1, vi2};
}

PotentialSet build(const AFamily& fam, const ParamSet& p) {
    auto [vm, vp] = potential_pair(fam, p);
    auto [vi1, vi2] = intermediate_potentials(fam, p);
    return PotentialSet{vm, vp, vi1, vi2};
}

Expr DiffOp::apply(const Expr& f) const {
    Expr acc = c(0.0);
    Expr der = f;
    for (size_t j = 0; j < coeff.size(); ++j) {
        if (j > 0) der = der.diff();
        if (!coeff[j].is_constant(0.0)) acc = acc + coeff[j] * der;
    }
    return acc.normalized();
}

GaugedSystem gauged_ops(const AFamily& fam, const ParamSet& p) {
    GaugedSystem g;
    g.a = model::a_expr(fam);
    g.q = q_of(p);
    Expr a = g.a, q = g.q;
    Expr ap = a.diff();
    Expr qp = c(p.b1);
    g.c22 = 0.5 * (p.b1 - 2 * p.R);
    g.c21 = 0.5 * (-p.b1 - 2 * p.R);

    g.h_minus = GaugedOperator{a, q, (0.5 * qp - p.R).normalized()};
    g.h_plus = GaugedOperator{a, q, (-1.5 * qp + Expr::div(q * ap, a) - p.R).normalized()};
    g.h_i1 = GaugedOperator{
        a, q,
        (0.5 * ap.diff() + Expr::div((2.0 * q - ap) * ap, (4.0 * a).normalized()) - 0.5 * p.b1 - p.R)
            .normalized()};

    Expr s = sqrt2a(a);
    Expr qa = Expr::div(q, a);
    g.p2_minus = DiffOp{{c(0.0), c(0.0), (2.0 * a).normalized()}};
    // (z')^2 (d/dz + Q/A)^2 expanded
    g.p2_plus = DiffOp{{((2.0 * a) * (qa.diff() + qa * qa)).normalized(), (4.0 * q).normalized(),
                        (2.0 * a).normalized()}};

    g.p22_minus = DiffOp{{c(0.0), s}};
    g.p21_minus = DiffOp{{(-1.0 * s * Expr::div(ap, (2.0 * a).normalized())).normalized(), s}};
    g.p22_plus =
        DiffOp{{(-1.0 * s * Expr::div(2.0 * q - ap, (2.0 * a).normalized())).normalized(),
                (-1.0 * s).normalized()}};
    g.p21_plus = DiffOp{{(-1.0 * s * qa).normalized(), (-1.0 * s).normalized()}};

    if (p.b1 != 0.0) {
        double z0 = p.b0 / p.b1;
        g.z0 = z0;
        g.c22_hat = 0.5 * (-p.b1 - 2 * p.R);
        g.c21_hat = 0.5 * (p.b1 - 2 * p.R);
        Expr inv = Expr::div(c(1.0), Expr::poly({z0, 1.0}));
        g.hp21_minus = DiffOp{
            {(s * (inv - Expr::div(ap, (2.0 * a).normalized()))).normalized(), s}};
        g.hp22_minus = DiffOp{{(-1.0 * s * inv).normalized(), s}};
        g.hp22_plus = DiffOp{
            {(-1.0 * s * (Expr::div(2.0 * q - ap, (2.0 * a).normalized()) + inv)).normalized(),
             (-1.0 * s).normalized()}};
        g.hp21_plus = DiffOp{{(-1.0 * s * (qa - inv)).normalized(), (-1.0 * s).normalized()}};
        g.h_i2 = GaugedOperator{
            a, q,
            (g.h_i1.c0 - Expr::div(p.b1 * ap, q) +
             Expr::div((2.0 * p.b1 * p.b1) * a, (q * q).normalized()))
                .normalized()};
    }
    return g;
}

Expr gauge_weight_prime(const AFamily& fam, const ParamSet& p) {
    Expr a = model::a_expr(fam);
    return Expr::div((a.diff() - 2.0 * q_of(p)).normalized(), (4.0 * a).normalized()).normalized();
}

Expr gauge_weight(const AFamily& fam, const ParamSet& p) {
    Expr a = model::a_expr(fam);
    Expr quarter_log_a = 0.25 * Expr::logabs(a);  // integral of A'/(4A)

    if (p.b1 == 0.0 && p.b0 == 0.0) return quarter_log_a.normalized();

    // remaining piece: -int Q/(2A) dz
    if (auto* poly = std::get_if<model::Poly>(&fam)) {
        if (poly->a4 == 0.0 && poly->a3 == 0.0) {
            double a2 = poly->a2, a1 = poly->a1, a0 = poly->a0;
            if (a2 == 0.0 && a1 == 0.0) {
                // -(b1 z^2/2 + b0 z)/(2 a0)
                return (quarter_log_a -
                        Expr::poly({0.0, p.b0 / (2 * a0), p.b1 / (4 * a0)}))
                    .normalized();
            }
            if (a2 == 0.0) {
                // Q/(2A) = b1/(2a1) + (b0 - b1 a0/a1)/(2(a1 z + a0))
                double k = (p.b0 - p.b1 * a0 / a1) / (2 * a1);
                return (quarter_log_a - Expr::poly({0.0, p.b1 / (2 * a1)}) -
                        k * Expr::logabs(Expr::poly({a0, a1})))
                    .normalized();
            }
            double disc = a1 * a1 - 4 * a2 * a0;
            if (disc > 0.0) {
                double r1 = (-a1 + std::sqrt(disc)) / (2 * a2);
                double r2 = (-a1 - std::sqrt(disc)) / (2 * a2);
                // Q/(2A) = k1/(z-r1) + k2/(z-r2)
                double k1 = (p.b1 * r1 + p.b0) / (2 * a2 * (r1 - r2));
                double k2 = (p.b1 * r2 + p.b0) / (2 * a2 * (r2 - r1));
                return (quarter_log_a - k1 * Expr::logabs(Expr::poly({-r1, 1.0})) -
                        k2 * Expr::logabs(Expr::poly({-r2, 1.0})))
                    .normalized();
            }
            if (disc == 0.0) {
                // double root: Q/(2A) = b1/(2a2(z-r)) + Q(r)/(2a2(z-r)^2)
                double r = -a1 / (2 * a2);
                double qr = p.b1 * r + p.b0;
                return (quarter_log_a - (p.b1 / (2 * a2)) * Expr::logabs(Expr::poly({-r, 1.0})) +
                        Expr::div(c(qr / (2 * a2)), Expr::poly({-r, 1.0})))
                    .normalized();
            }
            throw std::domain_error(
                "gauge_weight: quadratic A with complex roots has no antiderivative in this "
                "grammar; use gauge_weight_prime");
        }
    }
    if (auto* et = std::get_if<model::ExpTail>(&fam)) {
        // int dz/(a0 + c e^(nu z)) = z/a0 - ln|a0 + c e^(nu z)|/(a0 nu)   (a0 != 0)
        //                          = -e^(-nu z)/(c nu)                    (a0 == 0)
        if (p.b1 == 0.0) {
            if (et->a0 != 0.0) {
                return (quarter_log_a - (p.b0 / (2 * et->a0)) * z() +
                        (p.b0 / (2 * et->a0 * et->nu)) * Expr::logabs(a))
                    .normalized();
            }
            return (quarter_log_a +
                    (p.b0 / (2 * et->c * et->nu)) * Expr::exp((-et->nu) * z()))
                .normalized();
        }
    }
    throw std::domain_error(
        "gauge_weight: no elementary antiderivative for this family in this grammar; use "
        "gauge_weight_prime");
}

std::pair<Expr, Expr> superpotentials(const AFamily& fam, const ParamSet& p) {
    Expr a = model::a_expr(fam);
    Expr s = sqrt2a(a);
    Expr wz = gauge_weight_prime(fam, p);
    Expr w0 = (s * wz).normalized();
    Expr w1 = (s * (wz - Expr::div(a.diff(), (2.0 * a).normalized()))).normalized();
    return {w0, w1};
}

Expr v_minus_from_gauge(const AFamily& fam, const ParamSet& p) {
    // -1/2 Wxx + 1/2 Wx^2 + Q'/2 - R with Wx = z' W_z and z'^2 = 2A.  The
    // chain rule collapses every sqrt: Wx^2 = 2A Wz^2 and
    // Wxx = sqrt(2A) d/dz(sqrt(2A) Wz) = A' Wz + 2A Wz'.
    Expr a = model::a_expr(fam);
    Expr wz = gauge_weight_prime(fam, p);
    Expr wxx = (a.diff() * wz + (2.0 * a) * wz.diff()).normalized();
    Expr wx2 = ((2.0 * a) * (wz * wz)).normalized();
    return (-0.5 * wxx + 0.5 * wx2 + 0.5 * p.b1 - p.R).normalized();
}

}  // namespace siw::potentials
