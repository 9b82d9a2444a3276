#include "siw/changevar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace siw::changevar {

using model::AFamily;
using model::CaseSpec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Expr x() { return Expr::var(); }
Expr c(double v) { return Expr::constant(v); }

Expr sinh_sq(double theta) {  // sinh(theta x)^2
    Expr e = Expr::exp(theta * x());
    Expr em = Expr::exp((-theta) * x());
    return Expr::pow(0.5 * (e - em), 2.0);
}

Expr cosh_sq(double theta) {
    Expr e = Expr::exp(theta * x());
    Expr em = Expr::exp((-theta) * x());
    return Expr::pow(0.5 * (e + em), 2.0);
}

// unified closed form for A = alpha w^2 + gamma w^mu, w = z + shift:
//   alpha > 0, gamma/alpha > 0 : w^(2-mu) = (gamma/alpha) sinh^2((mu-2) sqrt(alpha/2) x)
//   alpha > 0, gamma/alpha < 0 : w^(2-mu) = -(gamma/alpha) cosh^2((mu-2) sqrt(alpha/2) x)
//   alpha = 0, gamma > 0       : w = [((2-mu)/2) sqrt(2 gamma) x]^(2/(2-mu))
// (the paper prints tanh^2 in place of sinh^2 and sqrt(a3) in place of a3 in
// the cubic pure-power case; both fail z'^2 = 2A, these forms are the ones
// the quadrature gives and they agree with the quartic special case)
std::optional<ClosedForm> power_family_z(double alpha, double gamma, double mu, double shift) {
    if (gamma == 0.0) return std::nullopt;
    if (alpha == 0.0) {
        if (gamma < 0.0) return std::nullopt;
        Expr base = ((2.0 - mu) / 2.0 * std::sqrt(2.0 * gamma)) * x();
        Expr w = Expr::pow(Expr::pow(base, 2.0), 1.0 / (2.0 - mu));
        return ClosedForm{(w - shift).normalized(), 0.0, kInf};
    }
    if (alpha < 0.0) return std::nullopt;  // trigonometric branch, outside the grammar
    double theta = (mu - 2.0) * std::sqrt(alpha / 2.0);
    double ratio = gamma / alpha;
    Expr wpow = ratio > 0.0 ? (ratio * sinh_sq(theta)).normalized()
                            : ((-ratio) * cosh_sq(theta)).normalized();
    Expr w = Expr::pow(wpow, 1.0 / (2.0 - mu));
    return ClosedForm{(w - shift).normalized(), 0.0, kInf};
}

// A = w^2 (c0 + d1 ln|w|): ln w = (d1/2) x^2 - c0/d1, positive branch of w
ClosedForm log_family_z(double c0, double d1, double shift) {
    Expr w = Expr::exp(Expr::add({c(-c0 / d1), Expr::mul({c(d1 / 2), Expr::pow(x(), 2.0)})}));
    return ClosedForm{(w - shift).normalized(), 0.0, kInf};
}

}  // namespace

double ZMap::x_lo() const {
    if (auto* cf = std::get_if<ClosedForm>(&v_)) return cf->x_lo;
    return std::get<NumericTable>(v_).x.front();
}

double ZMap::x_hi() const {
    if (auto* cf = std::get_if<ClosedForm>(&v_)) return cf->x_hi;
    return std::get<NumericTable>(v_).x.back();
}

double ZMap::operator()(double xv) const {
    if (auto* cf = std::get_if<ClosedForm>(&v_)) {
        if (xv < cf->x_lo || xv > cf->x_hi)
            throw std::out_of_range("ZMap: x outside the valid interval");
        return cf->z_of_x.eval(xv);
    }
    const auto& t = std::get<NumericTable>(v_);
    if (xv < t.x.front() - 1e-12 || xv > t.x.back() + 1e-12)
        throw std::out_of_range("ZMap: x outside the tabulated interval");
    auto it = std::upper_bound(t.x.begin(), t.x.end(), xv);
    size_t i = it == t.x.begin() ? 0 : size_t(it - t.x.begin()) - 1;
    if (i >= t.x.size() - 1) i = t.x.size() - 2;
    double h = t.x[i + 1] - t.x[i];
    double s = (xv - t.x[i]) / h;
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
    double H3 = 10 * s3 - 15 * s4 + 6 * s5;
    double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    double H5 = 0.5 * s3 - s4 + 0.5 * s5;
    return H0 * t.z[i] + H1 * h * t.slope[i] + H2 * h * h * t.curv[i] + H3 * t.z[i + 1] +
           H4 * h * t.slope[i + 1] + H5 * h * h * t.curv[i + 1];
}

std::optional<ZMap> closed_z(const CaseSpec& cs, const AFamily& f) {
    const std::string& id = cs.id;

    if (id == "1-1") {
        double a0 = std::get<model::Poly>(f).a0;
        if (a0 <= 0.0) return std::nullopt;
        return ZMap(ClosedForm{(std::sqrt(2 * a0) * x()).normalized(), -kInf, kInf});
    }
    if (id == "1-2") {
        const auto& p = std::get<model::Poly>(f);
        // z = (a1/2) x^2 - a0/a1, monotone for x > 0
        Expr z = Expr::add({c(-p.a0 / p.a1), Expr::mul({c(p.a1 / 2), Expr::pow(x(), 2.0)})});
        return ZMap(ClosedForm{z.normalized(), 0.0, kInf});
    }
    if (id == "1-3") {
        const auto& p = std::get<model::Poly>(f);
        if (p.a2 <= 0.0) return std::nullopt;  // trigonometric branch
        double root = std::sqrt(2 * p.a2);
        double kappa = p.a0 / (2 * p.a2) - p.a1 * p.a1 / (8 * p.a2 * p.a2);
        Expr z = Expr::add({c(-p.a1 / (2 * p.a2)),
                            Expr::mul({c(0.5), Expr::exp(root * x())}),
                            Expr::mul({c(-kappa), Expr::exp((-root) * x())})});
        double lo = kappa >= 0.0 ? -kInf : std::log(-2 * kappa) / (2 * root);
        return ZMap(ClosedForm{z.normalized(), lo, kInf});
    }
    if (id == "1-4") {
        const auto& p = std::get<model::Poly>(f);
        if (p.a1 != 0.0) return std::nullopt;  // elliptic branch
        auto cf = power_family_z(p.a2, p.a3, 3.0, 0.0);
        if (!cf) return std::nullopt;
        return ZMap(*cf);
    }
    if (id == "1-5") {
        const auto& p = std::get<model::Poly>(f);
        if (p.a1 != 0.0) return std::nullopt;  // elliptic branch
        auto cf = power_family_z(p.a2, p.a4, 4.0, 0.0);
        if (!cf) return std::nullopt;
        return ZMap(*cf);
    }
    if (id == "2-1") {
        const auto& p = std::get<model::PowerTail>(f);
        if (p.a1 != 0.0) return std::nullopt;
        auto cf = power_family_z(p.a2, p.c0, p.mu, 0.0);
        if (!cf) return std::nullopt;
        return ZMap(*cf);
    }
    if (id == "2-1dep") {
        const auto& p = std::get<model::PowerTailCentered>(f);
        auto cf = power_family_z(p.a2, p.c0, p.mu, p.a1 / (2 * p.a2));
        if (!cf) return std::nullopt;
        return ZMap(*cf);
    }
    if (id == "2-3") {
        const auto& p = std::get<model::LogQuad>(f);
        if (p.a1 != 0.0) return std::nullopt;
        return ZMap(log_family_z(p.c0, p.d1, 0.0));
    }
    if (id == "2-3dep") {
        const auto& p = std::get<model::LogQuadCentered>(f);
        return ZMap(log_family_z(p.c0, p.d1, p.a1 / (2 * p.a2)));
    }
    if (id == "3") {
        const auto& p = std::get<model::ExpTail>(f);
        if (p.a0 == 0.0) {
            if (p.c <= 0.0) return std::nullopt;
            // c e^(nu z) = 2/(nu^2 x^2)
            Expr z = Expr::mul({c(1.0 / p.nu),
                                Expr::logabs(Expr::div(c(2.0 / (p.c * p.nu * p.nu)),
                                                       Expr::pow(x(), 2.0)))});
            return ZMap(ClosedForm{z.normalized(), 0.0, kInf});
        }
        if (p.a0 < 0.0) return std::nullopt;  // trigonometric branch
        double theta = std::sqrt(p.a0 / 2) * p.nu;
        // c a0 < 0: c e^(nu z) = -a0 sech^2(theta x); c a0 > 0: a0 csch^2(theta x)
        // (the paper's a0 (tanh - 1) display fails z'^2 = 2A; these are the two
        // real branches of the quadrature)
        Expr inner = p.c < 0.0 ? Expr::div(c(-p.a0 / p.c), cosh_sq(theta))
                               : Expr::div(c(p.a0 / p.c), sinh_sq(theta));
        Expr z = Expr::mul({c(1.0 / p.nu), Expr::logabs(inner)});
        return ZMap(ClosedForm{z.normalized(), 0.0, kInf});
    }
    return std::nullopt;  // 2-2 cannot be integrated analytically
}

namespace {

// Dormand-Prince RK5(4) tableau
const double A21 = 1.0 / 5;
const double A31 = 3.0 / 40, A32 = 9.0 / 40;
const double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
const double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
             A54 = -212.0 / 729;
const double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
             A65 = -5103.0 / 18656;
const double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784,
             B6 = 11.0 / 84;
const double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
             E6 = 22.0 / 525, E7 = -1.0 / 40;

}  // namespace

ZMap numeric_z(const AFamily& f, double x_lo, double x_hi, double z_init, int n,
               int direction) {
    if (!(x_hi > x_lo)) throw std::invalid_argument("numeric_z: empty interval");
    if (n < 2) throw std::invalid_argument("numeric_z: need at least two output points");
    if (direction != 1 && direction != -1)
        throw std::invalid_argument("numeric_z: direction must be +1 or -1");

    Expr a = model::a_expr(f);
    Expr ap = a.diff();
    auto rhs = [&a, direction](double zv) -> double {
        double v = 2 * a.eval(zv);
        if (v <= 0.0) throw singular_point_error("numeric_z: 2A(z) <= 0 (turning point)", zv);
        return direction * std::sqrt(v);
    };

    if (2 * a.eval(z_init) <= 0.0)
        throw std::invalid_argument("numeric_z: 2A(z_init) must be positive");

    NumericTable t;
    t.x.reserve(n);
    t.z.reserve(n);
    t.slope.reserve(n);
    t.curv.reserve(n);

    const double span = x_hi - x_lo;
    const double tol = 1e-13;
    double h = span / (64.0 * n);
    double xv = x_lo, zv = z_init;
    double k1 = rhs(zv);

    int out_i = 0;
    const double dx_out = span / (n - 1);
    auto out_x = [&](int i) { return x_lo + dx_out * i; };
    auto emit_until = [&](double x0, double z0, double s0, double x1, double z1, double s1) {
        // quintic Hermite dense output across one accepted step, using the
        // curvature z'' = A'(z) available at both step ends
        double hseg = x1 - x0;
        double c0 = ap.eval(z0), c1 = ap.eval(z1);
        while (out_i < n && out_x(out_i) <= x1 + 1e-12 * span) {
            double s = hseg > 0 ? (out_x(out_i) - x0) / hseg : 0.0;
            s = std::clamp(s, 0.0, 1.0);
            double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
            double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
            double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
            double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
            double H3 = 10 * s3 - 15 * s4 + 6 * s5;
            double H4 = -4 * s3 + 7 * s4 - 3 * s5;
            double H5 = 0.5 * s3 - s4 + 0.5 * s5;
            double zout = H0 * z0 + H1 * hseg * s0 + H2 * hseg * hseg * c0 + H3 * z1 +
                          H4 * hseg * s1 + H5 * hseg * hseg * c1;
            t.x.push_back(out_x(out_i));
            t.z.push_back(zout);
            t.slope.push_back(direction * std::sqrt(std::max(0.0, 2 * a.eval(zout))));
            t.curv.push_back(ap.eval(zout));
            ++out_i;
        }
    };

    int guard = 0;
    double two_a_scale = 2 * a.eval(z_init);
    while (xv < x_hi && (int)t.x.size() < n) {
        if (++guard > 2000000) throw std::runtime_error("numeric_z: step limit exceeded");
        // capping at the output spacing keeps the dense-output error at the
        // sampled nodes below the 1e-8 matching tolerance
        h = std::min({h, x_hi - xv, dx_out});
        double k2, k3, k4, k5, k6, k7, z5;
        try {
            k2 = rhs(zv + h * A21 * k1);
            k3 = rhs(zv + h * (A31 * k1 + A32 * k2));
            k4 = rhs(zv + h * (A41 * k1 + A42 * k2 + A43 * k3));
            k5 = rhs(zv + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            k6 = rhs(zv + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
            z5 = zv + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            k7 = rhs(z5);
        } catch (const singular_point_error&) {
            h *= 0.5;  // approached a turning point inside the step
            if (h < 1e-12 * span) break;
            continue;
        }
        double err = h * std::fabs(E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        double scale = tol * (1.0 + std::fabs(zv) + std::fabs(z5));
        if (err > scale) {
            // the error cannot be resolved near the sqrt turning point; stop there
            if (h <= 1e-12 * span) break;
            h *= std::clamp(0.9 * std::pow(scale / err, 0.2), 0.1, 1.0);
            continue;
        }
        // accepted; defect of the dense output at the step midpoint
        double zm = 0.5 * zv + 0.125 * h * k1 + 0.5 * z5 - 0.125 * h * k7;
        double dzm = 1.5 * (z5 - zv) / h - 0.25 * (k1 + k7);
        double twoa = 2 * a.eval(zm);
        if (twoa > 0.0) {
            double d = std::fabs(dzm * dzm - twoa) / (1.0 + std::fabs(twoa));
            t.max_defect = std::max(t.max_defect, d);
        }
        emit_until(xv, zv, k1, xv + h, z5, k7);
        xv += h;
        zv = z5;
        k1 = k7;
        double two_a = 2 * a.eval(zv);
        two_a_scale = std::max(two_a_scale, two_a);
        if (two_a < 1e-9 * (1.0 + two_a_scale)) break;  // turning point: hard boundary
        if (std::fabs(zv) > 1e12) break;                // finite-x blow-up
        if (err > 0.0) h *= std::clamp(0.9 * std::pow(scale / err, 0.2), 0.2, 5.0);
    }
    if (out_i == n - 1 && xv >= x_hi - 1e-9 * span) {
        // final output node missed by rounding at the right endpoint
        t.x.push_back(x_hi);
        t.z.push_back(zv);
        t.slope.push_back(direction * std::sqrt(std::max(0.0, 2 * a.eval(zv))));
        t.curv.push_back(ap.eval(zv));
        ++out_i;
    }
    if ((int)t.x.size() < n) t.truncated = true;
    if (t.x.size() < 2) throw std::runtime_error("numeric_z: immediate turning point");
    return ZMap(std::move(t));
}

double ZMap::slope_at(double xv) const {
    if (auto* cf = std::get_if<ClosedForm>(&v_)) return cf->z_of_x.diff().eval(xv);
    const auto& t = std::get<NumericTable>(v_);
    auto it = std::upper_bound(t.x.begin(), t.x.end(), xv);
    size_t i = it == t.x.begin() ? 0 : size_t(it - t.x.begin()) - 1;
    if (i >= t.x.size() - 1) i = t.x.size() - 2;
    double h = t.x[i + 1] - t.x[i];
    double s = (xv - t.x[i]) / h;
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    double D0 = (-30 * s2 + 60 * s3 - 30 * s4) / h;
    double D1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    double D2 = (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) * h;
    double D3 = (30 * s2 - 60 * s3 + 30 * s4) / h;
    double D4 = -12 * s2 + 28 * s3 - 15 * s4;
    double D5 = (1.5 * s2 - 4 * s3 + 2.5 * s4) * h;
    return D0 * t.z[i] + D1 * t.slope[i] + D2 * t.curv[i] + D3 * t.z[i + 1] +
           D4 * t.slope[i + 1] + D5 * t.curv[i + 1];
}

double defect(const ZMap& zm, const AFamily& f, double xv) {
    Expr a = model::a_expr(f);
    double zp = zm.slope_at(xv);
    double twoa = 2 * a.eval(zm(xv));
    return std::fabs(zp * zp - twoa) / (1.0 + std::fabs(twoa));
}

}  // namespace siw::changevar
