#ifndef SIW_POTENTIALS_HPP
#define SIW_POTENTIALS_HPP

#include <optional>
#include <utility>
#include <vector>

#include "siw/expr.hpp"
#include "siw/model.hpp"

namespace siw::potentials {

// All expressions live in the gauged variable z; compose with a z(x) map for
// the physical picture.

struct PotentialSet {
    Expr v_minus, v_plus, v_i1;
    std::optional<Expr> v_i2;  // present iff b1 != 0
};

std::pair<Expr, Expr> potential_pair(const model::AFamily& a, const model::ParamSet& c);
std::pair<Expr, std::optional<Expr>> intermediate_potentials(const model::AFamily& a,
                                                             const model::ParamSet& c);
PotentialSet build(const model::AFamily& a, const model::ParamSet& c);

// Linear differential operator sum_j coeff[j] d^j/dz^j with Expr coefficients.
struct DiffOp {
    std::vector<Expr> coeff;
    Expr apply(const Expr& f) const;
};

// Hamiltonian-type gauged operator -c2 d^2/dz^2 - c1 d/dz + c0.
struct GaugedOperator {
    Expr c2, c1, c0;
    DiffOp op() const { return DiffOp{{c0, Expr::mul({Expr::constant(-1.0), c1}), Expr::mul({Expr::constant(-1.0), c2})}}; }
    Expr apply(const Expr& f) const { return op().apply(f); }
};

struct GaugedSystem {
    Expr a, q;                 // c2 = A(z), c1 = Q(z) for all Hamiltonian-type operators
    double c22, c21;           // 2 C22 = b1 - 2R, 2 C21 = -b1 - 2R
    GaugedOperator h_minus, h_plus, h_i1;
    DiffOp p2_minus, p2_plus;  // (z')^2 d^2,  (z')^2 (d + Q/A)^2
    DiffOp p21_minus, p22_minus, p22_plus, p21_plus;

    // one-parameter (hatted) factorization; present iff b1 != 0
    std::optional<double> z0;  // = b0/b1
    std::optional<double> c22_hat, c21_hat;
    std::optional<GaugedOperator> h_i2;
    std::optional<DiffOp> hp21_minus, hp22_minus, hp22_plus, hp21_plus;
};

// Throws std::invalid_argument when the hatted pieces are requested with
// b1 = 0 (they are simply absent from the returned system in that case).
GaugedSystem gauged_ops(const model::AFamily& a, const model::ParamSet& c);

// d W/dz = (A' - 2Q)/(4A); conjugating tH- by e^W and switching to x via
// z'^2 = 2A gives -1/2 d^2/dx^2 + V^-(x).
Expr gauge_weight_prime(const model::AFamily& a, const model::ParamSet& c);

// Antiderivative of gauge_weight_prime in closed form.  Supported for
// constant/linear/quadratic A (real roots), Q == 0, and the exponential
// family; throws std::domain_error for power/log tails, whose antiderivative
// is not elementary in this grammar (all identity checks only need W').
Expr gauge_weight(const model::AFamily& a, const model::ParamSet& c);

// W0 = z' W_z, W1 = z' (W_z - A'/(2A));  1/2 (W0^2 - W0'_x) + C22 = V-,
// 1/2 (W1^2 - W1'_x) + C21 = V^i1 with the x-derivative taken as sqrt(2A) d/dz.
std::pair<Expr, Expr> superpotentials(const model::AFamily& a, const model::ParamSet& c);

// V- recovered from the gauge route: -1/2 Wxx + 1/2 Wx^2 + Q'/2 - R with
// Wx = sqrt(2A) W_z, all as one Expr in z.  Independent derivation of the
// same object as potential_pair().first.
Expr v_minus_from_gauge(const model::AFamily& a, const model::ParamSet& c);

}  // namespace siw::potentials

#endif
