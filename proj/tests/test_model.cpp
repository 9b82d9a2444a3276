#include "doctest.h"

#include <cmath>
#include <set>

#include "siw/model.hpp"
#include "siw/rng.hpp"

using namespace siw;
using namespace siw::model;

namespace {

// defect of the two-step SI consistency ODE at one point
double ode_defect(const AFamily& fam, const StepDeltas& d, double zv) {
    Expr a = a_expr(fam);
    Expr ap = a.diff();
    double plus = d.b1_plus * zv + d.b0_plus;
    double minus = d.b1_minus * zv + d.b0_minus;
    return plus * minus - 2 * plus * ap.eval(zv) + 4 * d.r_bar * a.eval(zv);
}

double ode_scale(const AFamily& fam, const StepDeltas& d, double zv) {
    Expr a = a_expr(fam);
    double plus = d.b1_plus * zv + d.b0_plus;
    double minus = d.b1_minus * zv + d.b0_minus;
    return 1.0 + std::fabs(plus * minus) + std::fabs(2 * plus * a.diff().eval(zv)) +
           std::fabs(4 * d.r_bar * a.eval(zv));
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("a_expr on the spec families") {
    AFamily constant = Poly{0.5};
    CHECK(a_expr(constant).eval(3.0) == 0.5);

    AFamily pt = PowerTail{1.0, 0.0, 1.0, 3.0};  // z^2 + z^3
    for (double zv : {0.5, 1.0, 2.0})
        CHECK(a_expr(pt).eval(zv) == doctest::Approx(zv * zv + zv * zv * zv).epsilon(1e-14));

    AFamily et = ExpTail{1.0, 1.0, 2.0};  // 1 + e^(2z)
    for (double zv : {-1.0, 0.0, 0.7})
        CHECK(a_expr(et).eval(zv) == doctest::Approx(1.0 + std::exp(2 * zv)).epsilon(1e-14));

    CHECK_THROWS_AS(a_expr(AFamily{PowerTail{1, 0, 0, 3}}), std::invalid_argument);
    CHECK_THROWS_AS(a_expr(AFamily{PowerTail{1, 0, 1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(a_expr(AFamily{ExpTail{1, 1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(a_expr(AFamily{LogLinear{1, 1, 0}}), std::invalid_argument);
}

TEST_CASE("catalog shape") {
    const auto& rows = catalog();
    CHECK(rows.size() == 11);

    std::set<std::string> ids;
    for (const auto& r : rows) ids.insert(r.id);
    for (const char* want : {"1-1", "1-2", "1-3", "1-4", "1-5", "2-1", "2-1dep", "2-2", "2-3",
                             "2-3dep", "3"})
        CHECK(ids.count(want) == 1);

    CHECK(find_case("1-1")->classification == Classification::reducible);
    CHECK(find_case("3")->classification == Classification::irreducible);
    CHECK(find_case("2-1")->classification == Classification::irreducible_conditional);
    CHECK(find_case("2-1dep")->classification == Classification::irreducible);
    CHECK(find_case("2-3dep")->classification == Classification::irreducible);
    CHECK(find_case("nope") == nullptr);

    // conditional rows carry the paper's constraints
    const auto* c14 = find_case("1-4");
    REQUIRE(c14->conditional());
    CHECK(std::string(c14->constraint_label) == "b0 = 2 a1");
    AFamily f14 = c14->make_family({{"a1", 0.7}, {"a2", 0.3}, {"a3", 1.0}});
    CHECK(c14->constrained_b0(f14) == doctest::Approx(1.4));

    for (const char* id : {"1-4", "1-5", "2-1", "2-2", "2-3"}) CHECK(find_case(id)->conditional());
    for (const char* id : {"1-1", "1-2", "1-3", "2-1dep", "2-3dep", "3"})
        CHECK_FALSE(find_case(id)->conditional());
}

TEST_CASE("param_step per-case relations") {
    ParamSet c0{1.5, -0.25, 0.0};

    const auto* c11 = find_case("1-1");
    auto [c2a, r2a] = param_step(*c11, c11->default_family(), c0);
    CHECK(c2a.b1 == c0.b1);
    CHECK(c2a.b0 == c0.b0);
    CHECK(r2a == doctest::Approx(-2 * c0.b1));

    const auto* c13 = find_case("1-3");
    AFamily f13 = c13->make_family({{"a2", 0.4}, {"a1", 0.9}, {"a0", 0.2}});
    auto [c2b, r2b] = param_step(*c13, f13, c0);
    CHECK(c2b.b1 == doctest::Approx(c0.b1 + 4 * 0.4));
    CHECK(c2b.b0 == doctest::Approx(c0.b0 + 2 * 0.9));
    CHECK(r2b == doctest::Approx(-2 * (c0.b1 + 2 * 0.4)));

    const auto* c3 = find_case("3");
    AFamily f3 = c3->make_family({{"a0", 0.5}, {"c", -1.0}, {"nu", 2.0}});
    auto [c2c, r2c] = param_step(*c3, f3, ParamSet{0.0, 3.0, 0.0});
    CHECK(c2c.b1 == 0.0);
    CHECK(c2c.b0 == doctest::Approx(3.0 - 2 * 0.5 * 2.0));
    CHECK(r2c == doctest::Approx((3.0 - 0.5 * 2.0) * 2.0));
}

TEST_CASE("reflective step") {
    auto [c2, r2] = reflective_step(ParamSet{2.0, 3.0, 0.0});
    CHECK(c2.b1 == -2.0);
    CHECK(c2.b0 == -3.0);
    CHECK(r2 == 0.0);

    auto [z2, zr] = reflective_step(ParamSet{0.0, 0.0, 0.0});
    CHECK(z2.b1 == 0.0);
    CHECK(z2.b0 == 0.0);
    CHECK(zr == 0.0);

    auto [back, _] = reflective_step(c2);
    CHECK(back.b1 == 2.0);
    CHECK(back.b0 == 3.0);
}

TEST_CASE("si_condition_system") {
    // trivial solution b+ = 0 is always consistent (reflective branch)
    Poly cubic{0.3, -0.7, 1.1, 0.9, 0.0};
    StepDeltas trivial{};
    trivial.b1_minus = 0.4;
    trivial.b0_minus = -1.0;
    CHECK(si_condition_system(cubic, trivial).consistent);

    // deg 3: a0 = 0, b1- = -2 a2, b0+ = 0, b0- = -4 a1 is in the null space
    Poly special{0.0, 0.8, 1.1, 0.9, 0.0};
    StepDeltas d{};
    d.b1_plus = 1.7;  // arbitrary nontrivial b1+
    d.b0_plus = 0.0;
    d.b1_minus = -2 * special.a2;
    d.b0_minus = -4 * special.a1;
    auto rep = si_condition_system(special, d);
    CHECK(rep.consistent);

    // generic parameters violating the nontrivial-solution constraints
    Poly generic{0.5, 0.8, 1.1, 0.9, 0.0};
    StepDeltas g{};
    g.b1_plus = 1.0;
    g.b0_plus = 0.7;
    g.b1_minus = 0.3;
    g.b0_minus = 0.2;
    auto bad = si_condition_system(generic, g);
    CHECK_FALSE(bad.consistent);
    CHECK_FALSE(bad.nontrivial_ok);

    // quartic rows
    Poly quartic{0.0, 0.5, 1.0, 0.0, 2.0};
    StepDeltas q{};
    q.b1_plus = 1.0;
    q.b0_plus = 0.0;
    q.b1_minus = -4 * quartic.a2;
    q.b0_minus = -6 * quartic.a1;
    CHECK(si_condition_system(quartic, q).consistent);

    CHECK_THROWS_AS(si_condition_system(Poly{1, 1, 1, 0, 0}, d), std::invalid_argument);
}

TEST_CASE("solve_a_ode reduced families") {
    // b1+ = 2, b0+ = 0, mu = 3 (r_bar = 3), b1- = -2, b0- = 0 -> a2 = 1
    StepDeltas d{};
    d.b1_plus = 2.0;
    d.b0_plus = 0.0;
    d.b1_minus = -2.0;
    d.b0_minus = 0.0;
    d.r_bar = 3.0;
    AFamily f = solve_a_ode(d);
    auto* pt = std::get_if<PowerTail>(&f);
    REQUIRE(pt != nullptr);
    CHECK(pt->a2 == doctest::Approx(-2.0 / (2 * (2 - 3))));
    CHECK(pt->a2 == doctest::Approx(1.0));
    CHECK(pt->mu == doctest::Approx(3.0));
    CHECK(pt->c0 == doctest::Approx(std::pow(2.0, 3.0)));  // c (b1+)^mu with c = 1

    // b1+ = 0, nu = 0 reproduces a quadratic A(z)
    StepDeltas q{};
    q.b0_plus = 1.5;
    q.b1_minus = 2.0;
    q.b0_minus = -1.0;
    q.r_bar = 0.0;
    AFamily fq = solve_a_ode(q, 0.7);
    auto* poly = std::get_if<Poly>(&fq);
    REQUIRE(poly != nullptr);
    CHECK(poly->a2 == doctest::Approx(0.5));
    CHECK(poly->a1 == doctest::Approx(-0.5));
    CHECK(poly->a0 == doctest::Approx(0.7));

    // mu = 1 with b0+ = 0 lands on the log-linear family
    StepDeltas l{};
    l.b1_plus = 2.0;
    l.b0_plus = 0.0;
    l.b1_minus = 1.2;
    l.b0_minus = 0.8;
    l.r_bar = 1.0;
    CHECK(std::holds_alternative<LogLinear>(solve_a_ode(l)));

    // mu = 2 with b0+ = 0 lands on the log-quadratic family
    StepDeltas lq = l;
    lq.r_bar = 2.0;
    CHECK(std::holds_alternative<LogQuad>(solve_a_ode(lq)));

    // b1+ = 0, nu != 0, b1- = 0 lands on the exponential family
    StepDeltas e{};
    e.b0_plus = 2.0;
    e.b0_minus = -1.0;
    e.r_bar = 1.0;
    CHECK(std::holds_alternative<ExpTail>(solve_a_ode(e)));

    StepDeltas refl{};
    CHECK_THROWS_AS(solve_a_ode(refl), std::invalid_argument);
}

TEST_CASE("solve_a_ode output satisfies the consistency ODE") {
    Rng rng(31337);
    int families_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        StepDeltas d{};
        d.b1_plus = rng.signed_uniform(0.3, 2.0);
        d.b0_plus = rng.uniform() < 0.3 ? 0.0 : rng.signed_uniform(0.3, 2.0);
        d.b1_minus = rng.uniform() < 0.2 ? 0.0 : rng.signed_uniform(0.3, 2.0);
        d.b0_minus = rng.signed_uniform(0.3, 2.0);
        switch (trial % 4) {
            case 0: d.r_bar = rng.signed_uniform(0.3, 1.9) * d.b1_plus; break;  // generic mu
            case 1: d.r_bar = 0.5 * d.b1_plus; break;                           // mu = 1
            case 2: d.r_bar = d.b1_plus; break;                                 // mu = 2
            case 3:                                                             // case 3 branch
                d.b1_plus = 0.0;
                d.b0_plus = rng.signed_uniform(0.5, 2.0);
                d.r_bar = rng.uniform() < 0.3 ? 0.0 : rng.signed_uniform(0.3, 1.5);
                break;
        }
        AFamily f = solve_a_ode(d, rng.signed_uniform(0.4, 1.5));
        ++families_seen;

        // fractional-power tails are defined on one side of the root of the
        // tail argument only; sample from that side
        double shift = 0.0, dir = 0.0;
        if (auto* t = std::get_if<OdeTail>(&f)) {
            if (t->kind != OdeTail::Kind::exponential && t->p1 != 0.0) {
                shift = -t->p0 / t->p1;
                dir = t->p1 > 0 ? 1.0 : -1.0;
            }
        }
        Expr a = a_expr(f);
        int pts = 0;
        for (int k = 0; k < 800 && pts < 50; ++k) {
            double u = rng.uniform(0.05, 4.0);
            double zv = dir == 0.0 ? rng.signed_uniform(0.05, 3.0) : shift + dir * u;
            if (!a.defined_at(zv) || !a.diff().defined_at(zv)) continue;
            double defect = ode_defect(f, d, zv);
            CHECK(std::fabs(defect) <= 1e-10 * ode_scale(f, d, zv));
            ++pts;
        }
        CHECK(pts == 50);
    }
    CHECK(families_seen == 60);
}

TEST_CASE("solve_a_ode proportional deltas give centered families") {
    // b0^(k) = s b1^(k) for both endpoints -> centered power family
    double s = 0.8;
    ParamSet c0{1.0, s * 1.0, 0.0};
    ParamSet c2{2.5, s * 2.5, 0.0};
    double mu = 2.6;
    StepDeltas d = StepDeltas::between(c0, c2, 0.0);
    d.r_bar = 0.5 * mu * d.b1_plus;  // mu = 2 r_bar / b1+
    AFamily f = solve_a_ode(d);
    CHECK(std::holds_alternative<PowerTailCentered>(f));

    StepDeltas dq = d;
    dq.r_bar = dq.b1_plus;  // mu = 2
    AFamily fq = solve_a_ode(dq);
    CHECK(std::holds_alternative<LogQuadCentered>(fq));
}

TEST_CASE("sampled draws are admissible") {
    Rng rng(5);
    for (const auto& cs : catalog()) {
        for (int i = 0; i < 10; ++i) {
            Draw d = sample(cs, rng, SampleMode::on_constraint);
            CHECK_NOTHROW(validate_family(d.family));
            if (cs.b1_fixed_zero) CHECK(d.params.b1 == 0.0);
            if (cs.conditional())
                CHECK(d.params.b0 == doctest::Approx(cs.constrained_b0(d.family)));
            if (cs.tied_b0)
                CHECK(d.params.b0 == doctest::Approx(cs.tied_b0(d.family, d.params.b1)));

            Draw off = sample(cs, rng, SampleMode::off_constraint);
            if (cs.conditional()) {
                double gap = std::fabs(off.params.b0 - cs.constrained_b0(off.family));
                CHECK(gap >= 0.1);
            }
        }
    }
}

TEST_SUITE_END();
