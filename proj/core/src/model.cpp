#include "siw/model.hpp"

#include <cmath>
#include <stdexcept>

namespace siw::model {

namespace {

Expr z() { return Expr::var(); }
Expr c(double v) { return Expr::constant(v); }

// z + shift as a reusable subtree
Expr shifted(double s) { return s == 0.0 ? z() : Expr::add({c(s), z()}); }

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

bool near_int(double x, double tol = 1e-12) { return std::fabs(x - std::nearbyint(x)) <= tol; }

}  // namespace

// ---------------------------------------------------------------------------
// Families

Expr a_expr(const AFamily& f) {
    validate_family(f);
    if (auto* p = std::get_if<Poly>(&f)) {
        return Expr::poly({p->a0, p->a1, p->a2, p->a3, p->a4}).normalized();
    }
    if (auto* p = std::get_if<PowerTail>(&f)) {
        return (Expr::poly({0, p->a1, p->a2}) + p->c0 * Expr::pow(z(), p->mu)).normalized();
    }
    if (auto* p = std::get_if<PowerTailCentered>(&f)) {
        Expr w = shifted(p->a1 / (2 * p->a2));
        return (p->a2 * Expr::pow(w, 2) + p->c0 * Expr::pow(w, p->mu)).normalized();
    }
    if (auto* p = std::get_if<LogLinear>(&f)) {
        return (Expr::poly({0, p->c0, p->a2}) + p->d0 * (z() * Expr::logabs(z()))).normalized();
    }
    if (auto* p = std::get_if<LogQuad>(&f)) {
        return (Expr::poly({0, p->a1, p->c0}) + p->d1 * (Expr::pow(z(), 2) * Expr::logabs(z()))).normalized();
    }
    if (auto* p = std::get_if<LogQuadCentered>(&f)) {
        Expr w = shifted(p->a1 / (2 * p->a2));
        return (Expr::pow(w, 2) * (c(p->c0) + p->d1 * Expr::logabs(w))).normalized();
    }
    if (auto* p = std::get_if<ExpTail>(&f)) {
        return (c(p->a0) + p->c * Expr::exp(p->nu * z())).normalized();
    }
    const auto& t = std::get<OdeTail>(f);
    Expr quad = Expr::poly({t.a0, t.a1, t.a2});
    Expr arg = (c(t.p0) + t.p1 * z()).normalized();
    Expr tail = c(0.0);
    switch (t.kind) {
        case OdeTail::Kind::power: tail = t.c * Expr::pow(arg, t.mu); break;
        case OdeTail::Kind::log_linear: tail = t.c * (arg * Expr::logabs(arg)); break;
        case OdeTail::Kind::log_quadratic: tail = t.c * (Expr::pow(arg, 2) * Expr::logabs(arg)); break;
        case OdeTail::Kind::exponential: tail = t.c * Expr::exp(t.mu * z()); break;
    }
    return (quad + tail).normalized();
}

void validate_family(const AFamily& f) {
    if (auto* p = std::get_if<PowerTail>(&f)) {
        require(p->c0 != 0.0, "PowerTail: c0 must be nonzero");
        require(p->mu != 1.0 && p->mu != 2.0, "PowerTail: mu must avoid {1,2}");
    } else if (auto* p = std::get_if<PowerTailCentered>(&f)) {
        require(p->a2 != 0.0, "PowerTailCentered: a2 must be nonzero");
        require(p->c0 != 0.0, "PowerTailCentered: c0 must be nonzero");
        require(p->mu != 1.0 && p->mu != 2.0, "PowerTailCentered: mu must avoid {1,2}");
    } else if (auto* p = std::get_if<LogLinear>(&f)) {
        require(p->d0 != 0.0, "LogLinear: d0 must be nonzero");
    } else if (auto* p = std::get_if<LogQuad>(&f)) {
        require(p->d1 != 0.0, "LogQuad: d1 must be nonzero");
    } else if (auto* p = std::get_if<LogQuadCentered>(&f)) {
        require(p->a2 != 0.0, "LogQuadCentered: a2 must be nonzero");
        require(p->d1 != 0.0, "LogQuadCentered: d1 must be nonzero");
    } else if (auto* p = std::get_if<ExpTail>(&f)) {
        require(p->nu != 0.0, "ExpTail: nu must be nonzero");
        require(p->c != 0.0, "ExpTail: c must be nonzero");
    } else if (auto* p = std::get_if<OdeTail>(&f)) {
        require(p->c != 0.0, "OdeTail: c must be nonzero");
        if (p->kind != OdeTail::Kind::exponential)
            require(p->p1 != 0.0 || p->p0 != 0.0, "OdeTail: tail argument vanishes");
    }
}

std::string family_kind(const AFamily& f) {
    struct V {
        std::string operator()(const Poly&) { return "poly"; }
        std::string operator()(const PowerTail&) { return "power-tail"; }
        std::string operator()(const PowerTailCentered&) { return "power-tail-centered"; }
        std::string operator()(const LogLinear&) { return "log-linear"; }
        std::string operator()(const LogQuad&) { return "log-quadratic"; }
        std::string operator()(const LogQuadCentered&) { return "log-quadratic-centered"; }
        std::string operator()(const ExpTail&) { return "exp-tail"; }
        std::string operator()(const OdeTail&) { return "ode-tail"; }
    };
    return std::visit(V{}, f);
}

std::vector<double> natural_shift_constants(const AFamily& f) {
    std::vector<double> out;
    auto push = [&out](double v) {
        if (v != 0.0) out.push_back(v);
    };
    if (auto* p = std::get_if<Poly>(&f)) {
        push(p->a1), push(p->a2), push(p->a3), push(p->a4);
    } else if (auto* p = std::get_if<PowerTail>(&f)) {
        push(p->a2), push(p->a1), push((p->mu - 2) * p->a2), push((p->mu - 1) * p->a1);
    } else if (auto* p = std::get_if<PowerTailCentered>(&f)) {
        push(p->a2), push((p->mu - 2) * p->a2);
    } else if (auto* p = std::get_if<LogLinear>(&f)) {
        push(p->a2), push(p->c0), push(p->d0);
    } else if (auto* p = std::get_if<LogQuad>(&f)) {
        push(p->c0), push(p->a1), push(p->d1);
    } else if (auto* p = std::get_if<LogQuadCentered>(&f)) {
        push(p->d1), push(p->c0);
    } else if (auto* p = std::get_if<ExpTail>(&f)) {
        push(p->a0 * p->nu), push(p->nu);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::pair<ParamSet, double> reflective_step(const ParamSet& c0) {
    return {ParamSet{-c0.b1, -c0.b0, c0.R}, 0.0};
}

ConditionSystemReport si_condition_system(const Poly& a, const StepDeltas& d, double tol) {
    const bool deg3 = a.a4 == 0.0 && a.a3 != 0.0;
    const bool deg4 = a.a4 != 0.0;
    require(deg3 || deg4, "si_condition_system: polynomial degree must be 3 or 4");

    ConditionSystemReport rep;
    if (deg3) {
        rep.matrix = {{-(d.b1_minus + 2 * a.a2), 6 * a.a3},
                      {d.b0_minus + 4 * a.a1, d.b1_minus - 4 * a.a2},
                      {6 * a.a0, d.b0_minus - 2 * a.a1}};
        rep.constraint_residual = {
            6 * a.a3 * (d.b0_minus + 4 * a.a1) + (d.b1_minus + 2 * a.a2) * (d.b1_minus - 4 * a.a2),
            (d.b1_minus + 2 * a.a2) * (d.b0_minus - 2 * a.a1) + 36 * a.a3 * a.a0};
    } else {
        rep.matrix = {{a.a3, -4 * a.a4},
                      {d.b1_minus + 4 * a.a2, -6 * a.a3},
                      {d.b0_minus + 6 * a.a1, d.b1_minus - 4 * a.a2},
                      {8 * a.a0, d.b0_minus - 2 * a.a1}};
        rep.constraint_residual = {
            2 * a.a4 * (d.b1_minus + 4 * a.a2) - 3 * a.a3 * a.a3,
            a.a3 * (d.b1_minus - 4 * a.a2) + 4 * a.a4 * (d.b0_minus + 6 * a.a1),
            a.a3 * (d.b0_minus - 2 * a.a1) + 32 * a.a4 * a.a0};
    }

    double mscale = 1.0, rmax = 0.0;
    for (const auto& row : rep.matrix) {
        rep.residual.push_back(row[0] * d.b1_plus + row[1] * d.b0_plus);
        mscale = std::max({mscale, std::fabs(row[0]), std::fabs(row[1])});
        rmax = std::max(rmax, std::fabs(rep.residual.back()));
    }
    double bscale = std::max(std::fabs(d.b1_plus), std::fabs(d.b0_plus));
    rep.consistent = rmax <= tol * mscale * std::max(1.0, bscale);

    double cmax = 0.0, cscale = 1.0;
    for (double r : rep.constraint_residual) cmax = std::max(cmax, std::fabs(r));
    cscale = std::max(1.0, mscale * mscale);
    rep.nontrivial_ok = cmax <= tol * cscale;
    return rep;
}

AFamily solve_a_ode(const StepDeltas& d, double cint) {
    const double scale =
        std::max({1.0, std::fabs(d.b1_plus), std::fabs(d.b0_plus), std::fabs(d.b1_minus),
                  std::fabs(d.b0_minus), std::fabs(d.r_bar)});
    const double eps = 1e-13 * scale;
    const double b1p = std::fabs(d.b1_plus) <= eps ? 0.0 : d.b1_plus;
    const double b0p = std::fabs(d.b0_plus) <= eps ? 0.0 : d.b0_plus;
    require(b1p != 0.0 || b0p != 0.0,
            "solve_a_ode: b1+ = b0+ = 0 is the reflective branch, not an ODE solution");

    if (b1p == 0.0) {
        const double nu = 2 * d.r_bar / b0p;
        if (std::fabs(nu) <= 1e-13) {
            // Rbar = 0: pure quadratic
            return Poly{cint, d.b0_minus / 2, d.b1_minus / 4, 0, 0};
        }
        const double a1 = -d.b1_minus / (2 * nu);
        const double a0 = (-d.b1_minus - d.b0_minus * nu) / (2 * nu * nu);
        if (a1 == 0.0) return ExpTail{a0, cint, nu};
        OdeTail t;
        t.a1 = a1, t.a0 = a0, t.c = cint, t.mu = nu;
        t.kind = OdeTail::Kind::exponential;
        return t;
    }

    const double mu = 2 * d.r_bar / b1p;
    const double s = b0p / b1p;
    const bool proportional = std::fabs(d.b0_minus * b1p - d.b1_minus * b0p) <= eps * scale;

    if (near_int(mu - 1.0) && std::nearbyint(mu) == 1.0) {
        // A = a2 z^2 + a1 z + a0 + cbar (b1+ z + b0+) ln|b1+ z + b0+|
        const double a2 = d.b1_minus / 2;
        const double a1 = d.b1_minus * b0p / (2 * b1p) + cint * b1p;
        const double a0 = cint * b0p;
        const double cbar = (b1p * d.b0_minus - d.b1_minus * b0p) / (2 * b1p * b1p);
        if (cbar == 0.0) return Poly{a0, a1, a2, 0, 0};  // duplicates the quadratic case
        if (b0p == 0.0)
            return LogLinear{a2, a1 + cbar * b1p * std::log(std::fabs(b1p)), cbar * b1p};
        OdeTail t;
        t.a2 = a2, t.a1 = a1, t.a0 = a0, t.c = cbar, t.p1 = b1p, t.p0 = b0p;
        t.kind = OdeTail::Kind::log_linear;
        return t;
    }
    if (near_int(mu - 2.0) && std::nearbyint(mu) == 2.0) {
        const double a2 = cint * b1p * b1p;
        const double a1 = 2 * cint * b1p * b0p - (b1p * d.b0_minus - d.b1_minus * b0p) / (2 * b1p);
        const double a0 = cint * b0p * b0p - (b1p * d.b0_minus - d.b1_minus * b0p) * b0p / (2 * b1p * b1p);
        const double cbar = d.b1_minus / (2 * b1p * b1p);
        if (cbar == 0.0) return Poly{a0, a1, a2, 0, 0};
        if (b0p == 0.0)
            return LogQuad{a2 + cbar * b1p * b1p * std::log(std::fabs(b1p)), a1, cbar * b1p * b1p};
        if (proportional) {
            // quadratic part is a perfect square around -s: (z+s)^2 (c0 + d1 ln|z+s|)
            const double d1 = cbar * b1p * b1p;
            const double c0 = a2 + d1 * std::log(std::fabs(b1p));
            return LogQuadCentered{1.0, 2 * s, c0, d1};
        }
        OdeTail t;
        t.a2 = a2, t.a1 = a1, t.a0 = a0, t.c = cbar, t.p1 = b1p, t.p0 = b0p;
        t.kind = OdeTail::Kind::log_quadratic;
        return t;
    }

    // generic mu: quadratic + c (b1+ z + b0+)^mu, coefficients per the ODE
    const double a2 = d.b1_minus / (2 * (2 - mu));
    const double a1 = -mu * d.b1_minus * b0p / (2 * (1 - mu) * (2 - mu) * b1p) +
                      d.b0_minus / (2 * (1 - mu));
    const double a0 = -d.b1_minus * b0p * b0p / (2 * (1 - mu) * (2 - mu) * b1p * b1p) +
                      b0p * d.b0_minus / (2 * (1 - mu) * b1p);
    const bool tail_rescalable = b1p > 0.0 || near_int(mu);
    if (b0p == 0.0 && tail_rescalable)
        return PowerTail{a2, a1, cint * std::pow(b1p, mu), mu};
    if (proportional && a2 != 0.0 && tail_rescalable)
        return PowerTailCentered{a2, 2 * a2 * s, cint * std::pow(b1p, mu), mu};
    OdeTail t;
    t.a2 = a2, t.a1 = a1, t.a0 = a0, t.c = cint, t.p1 = b1p, t.p0 = b0p, t.mu = mu;
    t.kind = OdeTail::Kind::power;
    return t;
}

// ---------------------------------------------------------------------------
// Catalog rows

std::string to_string(Classification c) {
    switch (c) {
        case Classification::reducible: return "reducible";
        case Classification::irreducible: return "irreducible";
        case Classification::irreducible_conditional: return "irreducible-conditional";
    }
    return "?";
}

namespace {

double get(const Params& p, const char* name, double fallback) {
    auto it = p.find(name);
    return it == p.end() ? fallback : it->second;
}

const std::vector<CaseSpec>& build_catalog() {
    static const std::vector<CaseSpec> rows = [] {
        std::vector<CaseSpec> v;

        {
            CaseSpec cs;
            cs.id = "1-1";
            cs.family_label = "A = a0";
            cs.classification = Classification::reducible;
            cs.closed_z_available = true;
            cs.family_params = {{"a0", 0.5}};
            cs.default_params = {-2.0, 0.0, 0.0};
            cs.make_family = [](const Params& p) -> AFamily { return Poly{get(p, "a0", 0.5)}; };
            cs.step = [](const AFamily&, const ParamSet& c0) { return c0; };
            cs.shift_r2 = [](const AFamily&, const ParamSet& c0) { return -2 * c0.b1; };
            cs.step_label = "(b1, b0) -> (b1, b0)";
            cs.shift_label = "R~2 = -2 b1";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "1-2";
            cs.family_label = "A = a1 z + a0";
            cs.classification = Classification::reducible;
            cs.closed_z_available = true;
            cs.family_params = {{"a1", 1.0}, {"a0", 0.0}};
            cs.default_params = {-2.0, 0.5, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                Poly a{get(p, "a0", 0.0), get(p, "a1", 1.0)};
                require(a.a1 != 0.0, "case 1-2: a1 must be nonzero");
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<Poly>(f);
                return ParamSet{c0.b1, c0.b0 + 2 * a.a1, c0.R};
            };
            cs.shift_r2 = [](const AFamily&, const ParamSet& c0) { return -2 * c0.b1; };
            cs.step_label = "(b1, b0) -> (b1, b0 + 2 a1)";
            cs.shift_label = "R~2 = -2 b1";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "1-3";
            cs.family_label = "A = a2 z^2 + a1 z + a0";
            cs.classification = Classification::reducible;
            cs.closed_z_available = true;
            cs.family_params = {{"a2", 0.5}, {"a1", 0.0}, {"a0", 0.0}};
            cs.default_params = {-3.0, 1.0, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                Poly a{get(p, "a0", 0.0), get(p, "a1", 0.0), get(p, "a2", 0.5)};
                require(a.a2 != 0.0, "case 1-3: a2 must be nonzero");
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<Poly>(f);
                return ParamSet{c0.b1 + 4 * a.a2, c0.b0 + 2 * a.a1, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                return -2 * (c0.b1 + 2 * std::get<Poly>(f).a2);
            };
            cs.step_label = "(b1, b0) -> (b1 + 4 a2, b0 + 2 a1)";
            cs.shift_label = "R~2 = -2 (b1 + 2 a2)";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "1-4";
            cs.family_label = "A = a3 z^3 + a2 z^2 + a1 z";
            cs.classification = Classification::irreducible_conditional;
            cs.closed_z_available = true;  // a1 = 0 branch
            cs.family_params = {{"a3", 1.0}, {"a2", 0.5}, {"a1", 0.75}};
            cs.default_params = {-2.0, 1.5, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                Poly a{0.0, get(p, "a1", 0.75), get(p, "a2", 0.5), get(p, "a3", 1.0)};
                require(a.a3 != 0.0, "case 1-4: a3 must be nonzero");
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<Poly>(f);
                return ParamSet{c0.b1 - 2 * a.a2, -c0.b0, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                return c0.b1 - std::get<Poly>(f).a2;
            };
            cs.constraint_label = "b0 = 2 a1";
            cs.constrained_b0 = [](const AFamily& f) { return 2 * std::get<Poly>(f).a1; };
            cs.step_label = "(b1, b0) -> (b1 - 2 a2, -b0)";
            cs.shift_label = "R~2 = b1 - a2";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "1-5";
            cs.family_label = "A = a4 z^4 + a2 z^2 + a1 z";
            cs.classification = Classification::irreducible_conditional;
            cs.closed_z_available = true;  // a1 = 0 branch
            cs.family_params = {{"a4", 1.0}, {"a2", 0.5}, {"a1", 0.5}};
            cs.default_params = {-2.0, 1.5, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                Poly a{0.0, get(p, "a1", 0.5), get(p, "a2", 0.5), 0.0, get(p, "a4", 1.0)};
                require(a.a4 != 0.0, "case 1-5: a4 must be nonzero");
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<Poly>(f);
                return ParamSet{c0.b1 - 4 * a.a2, -c0.b0, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                return 2 * (c0.b1 - 2 * std::get<Poly>(f).a2);
            };
            cs.constraint_label = "b0 = 3 a1";
            cs.constrained_b0 = [](const AFamily& f) { return 3 * std::get<Poly>(f).a1; };
            cs.step_label = "(b1, b0) -> (b1 - 4 a2, -b0)";
            cs.shift_label = "R~2 = 2 (b1 - 2 a2)";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "2-1";
            cs.family_label = "A = a2 z^2 + a1 z + c0 z^mu";
            cs.classification = Classification::irreducible_conditional;
            cs.closed_z_available = true;  // a1 = 0 branch
            cs.family_params = {{"a2", 1.0}, {"a1", 0.5}, {"c0", 1.0}, {"mu", 2.5}};
            cs.default_params = {-2.0, 0.75, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                PowerTail a{get(p, "a2", 1.0), get(p, "a1", 0.5), get(p, "c0", 1.0), get(p, "mu", 2.5)};
                validate_family(a);
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<PowerTail>(f);
                return ParamSet{c0.b1 - 2 * (a.mu - 2) * a.a2, -c0.b0, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<PowerTail>(f);
                return (a.mu - 2) * (c0.b1 - (a.mu - 2) * a.a2);
            };
            cs.constraint_label = "b0 = (mu - 1) a1";
            cs.constrained_b0 = [](const AFamily& f) {
                const auto& a = std::get<PowerTail>(f);
                return (a.mu - 1) * a.a1;
            };
            cs.step_label = "(b1, b0) -> (b1 - 2 (mu-2) a2, -b0)";
            cs.shift_label = "R~2 = (mu-2) (b1 - (mu-2) a2)";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "2-1dep";
            cs.family_label = "A = a2 w^2 + c0 w^mu,  w = z + a1/(2 a2),  b0 = (a1/(2 a2)) b1";
            cs.classification = Classification::irreducible;  // mu != 4
            cs.closed_z_available = true;
            cs.family_params = {{"a2", 1.0}, {"a1", 1.0}, {"c0", 1.0}, {"mu", 2.5}};
            cs.default_params = {-2.0, -1.0, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                PowerTailCentered a{get(p, "a2", 1.0), get(p, "a1", 1.0), get(p, "c0", 1.0),
                                    get(p, "mu", 2.5)};
                validate_family(a);
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<PowerTailCentered>(f);
                double b1 = c0.b1 - 2 * (a.mu - 2) * a.a2;
                return ParamSet{b1, a.a1 / (2 * a.a2) * b1, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<PowerTailCentered>(f);
                return (a.mu - 2) * (c0.b1 - (a.mu - 2) * a.a2);
            };
            cs.tied_b0 = [](const AFamily& f, double b1) {
                const auto& a = std::get<PowerTailCentered>(f);
                return a.a1 / (2 * a.a2) * b1;
            };
            cs.step_label = "b1 -> b1 - 2 (mu-2) a2";
            cs.shift_label = "R~2 = (mu-2) (b1 - (mu-2) a2)";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "2-2";
            cs.family_label = "A = a2 z^2 + c0 z + d0 z ln|z|";
            cs.classification = Classification::irreducible_conditional;
            cs.closed_z_available = false;
            cs.family_params = {{"a2", 1.0}, {"c0", 1.0}, {"d0", 0.8}};
            cs.default_params = {-2.0, -0.8, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                LogLinear a{get(p, "a2", 1.0), get(p, "c0", 1.0), get(p, "d0", 0.8)};
                validate_family(a);
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<LogLinear>(f);
                return ParamSet{c0.b1 + 2 * a.a2, -c0.b0, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                return -c0.b1 - std::get<LogLinear>(f).a2;
            };
            cs.constraint_label = "b0 = -d0";
            cs.constrained_b0 = [](const AFamily& f) { return -std::get<LogLinear>(f).d0; };
            cs.step_label = "(b1, b0) -> (b1 + 2 a2, -b0)";
            cs.shift_label = "R~2 = -b1 - a2";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "2-3";
            cs.family_label = "A = c0 z^2 + a1 z + d1 z^2 ln|z|";
            cs.classification = Classification::irreducible_conditional;
            cs.closed_z_available = true;  // a1 = 0 branch
            cs.family_params = {{"c0", 1.0}, {"a1", 0.5}, {"d1", 0.8}};
            cs.default_params = {-2.0, 0.5, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                LogQuad a{get(p, "c0", 1.0), get(p, "a1", 0.5), get(p, "d1", 0.8)};
                validate_family(a);
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<LogQuad>(f);
                return ParamSet{c0.b1 + 2 * a.d1, -c0.b0, c0.R};
            };
            cs.shift_r2 = [](const AFamily&, const ParamSet&) { return 0.0; };
            cs.constraint_label = "b0 = a1";
            cs.constrained_b0 = [](const AFamily& f) { return std::get<LogQuad>(f).a1; };
            cs.step_label = "(b1, b0) -> (b1 + 2 d1, -b0)";
            cs.shift_label = "R~2 = 0";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "2-3dep";
            cs.family_label = "A = w^2 (c0 + d1 ln|w|),  w = z + a1/(2 a2),  b0 = (a1/(2 a2)) b1";
            cs.classification = Classification::irreducible;
            cs.closed_z_available = true;
            cs.family_params = {{"a2", 1.0}, {"a1", 1.0}, {"c0", 1.0}, {"d1", 0.8}};
            cs.default_params = {-2.0, -1.0, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                LogQuadCentered a{get(p, "a2", 1.0), get(p, "a1", 1.0), get(p, "c0", 1.0),
                                  get(p, "d1", 0.8)};
                validate_family(a);
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<LogQuadCentered>(f);
                double b1 = c0.b1 + 2 * a.d1;
                return ParamSet{b1, a.a1 / (2 * a.a2) * b1, c0.R};
            };
            cs.shift_r2 = [](const AFamily&, const ParamSet&) { return 0.0; };
            cs.tied_b0 = [](const AFamily& f, double b1) {
                const auto& a = std::get<LogQuadCentered>(f);
                return a.a1 / (2 * a.a2) * b1;
            };
            cs.step_label = "b1 -> b1 + 2 d1";
            cs.shift_label = "R~2 = 0";
            v.push_back(cs);
        }
        {
            CaseSpec cs;
            cs.id = "3";
            cs.family_label = "A = a0 + c e^(nu z),  b1 = 0";
            cs.classification = Classification::irreducible;
            cs.closed_z_available = true;
            cs.family_params = {{"a0", 0.5}, {"c", -1.0}, {"nu", 1.0}};
            cs.default_params = {0.0, 3.0, 0.0};
            cs.make_family = [](const Params& p) -> AFamily {
                ExpTail a{get(p, "a0", 0.5), get(p, "c", -1.0), get(p, "nu", 1.0)};
                validate_family(a);
                return a;
            };
            cs.step = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<ExpTail>(f);
                return ParamSet{0.0, c0.b0 - 2 * a.a0 * a.nu, c0.R};
            };
            cs.shift_r2 = [](const AFamily& f, const ParamSet& c0) {
                const auto& a = std::get<ExpTail>(f);
                return (c0.b0 - a.a0 * a.nu) * a.nu;
            };
            cs.b1_fixed_zero = true;
            cs.step_label = "b0 -> b0 - 2 a0 nu  (b1 = 0)";
            cs.shift_label = "R~2 = (b0 - a0 nu) nu";
            v.push_back(cs);
        }
        return v;
    }();
    return rows;
}

}  // namespace

const std::vector<CaseSpec>& catalog() { return build_catalog(); }

const CaseSpec* find_case(std::string_view id) {
    for (const auto& cs : catalog())
        if (cs.id == id) return &cs;
    return nullptr;
}

AFamily CaseSpec::default_family() const { return make_family(defaults_as_params()); }

Params CaseSpec::defaults_as_params() const {
    Params p;
    for (const auto& [name, value] : family_params) p[name] = value;
    return p;
}

// ---------------------------------------------------------------------------
// Random admissible draws

namespace {

double draw_coef(Rng& rng) { return rng.signed_uniform(0.45, 1.7); }

// resample x until |x - avoid| >= gap for every entry
double draw_away(Rng& rng, const std::vector<double>& avoid, double gap) {
    for (int i = 0; i < 200; ++i) {
        double x = draw_coef(rng);
        bool ok = true;
        for (double a : avoid)
            if (std::fabs(x - a) < gap) ok = false;
        if (ok) return x;
    }
    return draw_coef(rng);
}

}  // namespace

Draw sample(const CaseSpec& cs, Rng& rng, SampleMode mode, double off_min, double off_max) {
    Params p = cs.defaults_as_params();
    const std::string& id = cs.id;

    if (id == "1-1") {
        p["a0"] = draw_coef(rng);
    } else if (id == "1-2") {
        p["a1"] = draw_coef(rng);
        p["a0"] = rng.signed_uniform(0.0, 1.0);
    } else if (id == "1-3") {
        p["a2"] = draw_coef(rng);
        p["a1"] = rng.signed_uniform(0.0, 1.0);
        p["a0"] = rng.signed_uniform(0.0, 1.0);
    } else if (id == "1-4") {
        p["a3"] = draw_coef(rng);
        p["a2"] = draw_coef(rng);
        p["a1"] = rng.signed_uniform(0.2, 1.0);
    } else if (id == "1-5") {
        p["a4"] = draw_coef(rng);
        p["a2"] = draw_coef(rng);
        p["a1"] = rng.signed_uniform(0.2, 1.0);
    } else if (id == "2-1" || id == "2-1dep") {
        p["a2"] = draw_coef(rng);
        p["a1"] = id == "2-1" ? rng.signed_uniform(0.2, 1.0) : draw_coef(rng);
        p["c0"] = draw_coef(rng);
        p["mu"] = rng.uniform(2.25, 3.6);
    } else if (id == "2-2") {
        p["a2"] = draw_coef(rng);
        p["c0"] = draw_coef(rng);
        p["d0"] = draw_coef(rng);
    } else if (id == "2-3") {
        p["c0"] = draw_coef(rng);
        p["a1"] = rng.signed_uniform(0.2, 1.0);
        p["d1"] = draw_coef(rng);
    } else if (id == "2-3dep") {
        p["a2"] = draw_coef(rng);
        p["a1"] = draw_coef(rng);
        p["c0"] = draw_coef(rng);
        p["d1"] = draw_coef(rng);
    } else if (id == "3") {
        // keep a region with A > 0 so the physical picture exists
        do {
            p["a0"] = draw_coef(rng);
            p["c"] = draw_coef(rng);
        } while (p["a0"] < 0 && p["c"] < 0);
        p["nu"] = draw_coef(rng);
    }

    Draw d;
    d.family = cs.make_family(p);

    ParamSet ps;
    ps.R = 0.0;
    if (cs.b1_fixed_zero) {
        ps.b1 = 0.0;
    } else {
        // keep b1 away from values that collapse the conditional-residual
        // prefactor or make b1+ vanish
        std::vector<double> avoid{0.0};
        if (id == "1-4") avoid.push_back(p["a2"]);
        if (id == "1-5") avoid.push_back(2 * p["a2"]);
        if (id == "2-1" || id == "2-1dep") avoid.push_back((p["mu"] - 2) * p["a2"]);
        if (id == "2-2") avoid.push_back(-p["a2"]);
        if (id == "2-3") avoid.push_back(-p["d1"]);
        if (id == "2-3dep") avoid.push_back(-p["d1"]);
        ps.b1 = draw_away(rng, avoid, 0.3);
    }

    if (cs.tied_b0) {
        ps.b0 = cs.tied_b0(d.family, ps.b1);
    } else if (cs.conditional() && mode != SampleMode::generic) {
        double required = cs.constrained_b0(d.family);
        if (mode == SampleMode::off_constraint) {
            double off = rng.uniform(off_min, off_max);
            ps.b0 = required + ((rng.next_u64() & 1) ? off : -off);
        } else {
            ps.b0 = required;
        }
    } else {
        ps.b0 = rng.signed_uniform(0.0, 1.5);
    }
    d.params = ps;
    return d;
}

}  // namespace siw::model
