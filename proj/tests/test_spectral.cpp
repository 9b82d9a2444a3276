#include "doctest.h"

#include <cmath>

#include "siw/changevar.hpp"
#include "siw/model.hpp"
#include "siw/potentials.hpp"
#include "siw/spectral.hpp"

using namespace siw;
using namespace siw::model;
using namespace siw::spectral;
namespace potentials = siw::potentials;

TEST_SUITE_BEGIN("spectral");

TEST_CASE("particle in a box") {
    auto h = discretize([](double) { return 0.0; }, 0.0, M_PI, 4096);
    auto s = eigenvalues(h, 3);
    CHECK(s.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(s.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(s.eigenvalues[2] == doctest::Approx(4.5).epsilon(1e-4));
    for (double c : s.convergence_estimate) CHECK(c < 1e-4);
}

TEST_CASE("harmonic oscillator") {
    auto h = discretize([](double x) { return 0.5 * x * x; }, -12.0, 12.0, 4096);
    auto s = eigenvalues(h, 3);
    CHECK(s.eigenvalues[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(s.eigenvalues[1] == doctest::Approx(1.5).epsilon(1e-4));
    CHECK(s.eigenvalues[2] == doctest::Approx(2.5).epsilon(1e-4));
}

TEST_CASE("shifted omega = 2 oscillator") {
    auto h = discretize([](double x) { return 2 * x * x - 2; }, -10.0, 10.0, 4096);
    auto s = eigenvalues(h, 3);
    CHECK(std::fabs(s.eigenvalues[0] - (-1.0)) < 1e-4);
    CHECK(std::fabs(s.eigenvalues[1] - 1.0) < 1e-4);
    CHECK(std::fabs(s.eigenvalues[2] - 3.0) < 1e-4);
}

TEST_CASE("Richardson estimates shrink under refinement") {
    for (int n : {512, 1024}) {
        auto coarse = eigenvalues(
            discretize([](double x) { return 0.5 * x * x; }, -12.0, 12.0, n), 4);
        auto fine = eigenvalues(
            discretize([](double x) { return 0.5 * x * x; }, -12.0, 12.0, 2 * n), 4);
        for (int k = 0; k < 4; ++k) {
            CHECK(fine.convergence_estimate[k] <= coarse.convergence_estimate[k] / 3.5);
        }
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(discretize([](double) { return 0.0; }, 0.0, 1.0, 32), std::invalid_argument);
    CHECK_THROWS_AS(discretize([](double) { return 1.0 / 0.0; }, 0.0, 1.0, 128),
                    std::invalid_argument);
    auto h = discretize([](double) { return 0.0; }, 0.0, 1.0, 128);
    CHECK_THROWS_AS(eigenvalues(h, 64), std::invalid_argument);
}

TEST_CASE("isospectral check for the harmonic pair") {
    const auto* cs = find_case("1-1");
    AFamily f = Poly{0.5};
    ParamSet c0{-2.0, 0.0, 0.0};
    auto zm = changevar::closed_z(*cs, f);
    REQUIRE(zm.has_value());
    auto rep = isospectral_check(*cs, f, c0, *zm, -10.0, 10.0, 8, 1024);
    CHECK(rep.pass);
    CHECK(rep.unmatched <= 2);
    // spec(H+) = {3, 5, 7, ...} here; the shifted lower spectrum matches it
    CHECK(rep.upper[0] == doctest::Approx(3.0).epsilon(2e-3));
    CHECK(rep.upper[1] == doctest::Approx(5.0).epsilon(2e-3));
}

TEST_CASE("reflective step gives identical spectra") {
    // V+(b) = V-(-b) pointwise, so the discretized spectra coincide
    AFamily f = Poly{0.5};
    ParamSet c{-2.0, 0.5, 0.0};
    Expr vp = potentials::potential_pair(f, c).second;
    ParamSet refl = reflective_step(c).first;
    Expr vm = potentials::potential_pair(f, refl).first;
    auto zm = changevar::closed_z(*find_case("1-1"), f);
    auto hp = discretize(potential_on_x(vp, *zm), -9.0, 9.0, 512);
    auto hm = discretize(potential_on_x(vm, *zm), -9.0, 9.0, 512);
    auto sp = eigenvalues(hp, 5);
    auto sm = eigenvalues(hm, 5);
    for (int k = 0; k < 5; ++k)
        CHECK(sp.eigenvalues[k] == doctest::Approx(sm.eigenvalues[k]).epsilon(1e-12));
}

TEST_CASE("Morse branch of the quadratic family") {
    // a2 = 1/2, a1 = a0 = 0, b1 = -3, b0 = 1: z = e^x / 2 and
    // V+ = 37/8 - 4 e^-x + 2 e^-2x, a Morse well with bound levels 3.5, 4.5
    const auto* cs = find_case("1-3");
    AFamily f = cs->make_family({{"a2", 0.5}, {"a1", 0.0}, {"a0", 0.0}});
    ParamSet c0{-3.0, 1.0, 0.0};
    auto zm = changevar::closed_z(*cs, f);
    REQUIRE(zm.has_value());

    Expr vp = potentials::potential_pair(f, c0).second;
    auto h = discretize(potential_on_x(vp, *zm), -4.0, 26.0, 4096);
    auto s = eigenvalues(h, 2);
    CHECK(s.eigenvalues[0] == doctest::Approx(3.5).epsilon(1e-3));
    CHECK(s.eigenvalues[1] == doctest::Approx(4.5).epsilon(1e-3));

    auto rep = isospectral_check(*cs, f, c0, *zm, -4.0, 26.0, 6, 2048);
    CHECK(rep.pass);
}

TEST_SUITE_END();
