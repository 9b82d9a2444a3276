#ifndef SIW_MODEL_HPP
#define SIW_MODEL_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "siw/expr.hpp"
#include "siw/rng.hpp"

namespace siw::model {

// SUSY parameter triple of the gauged system, Q(z) = b1 z + b0.
// R is kept general but defaults to 0 everywhere (an irrelevant constant).
struct ParamSet {
    double b1 = 0.0;
    double b0 = 0.0;
    double R = 0.0;
};

// ---------------------------------------------------------------------------
// A(z) families

struct Poly {  // a4 z^4 + a3 z^3 + a2 z^2 + a1 z + a0
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0, a4 = 0;
};

struct PowerTail {  // a2 z^2 + a1 z + c0 z^mu,   mu not in {1,2}, c0 != 0
    double a2 = 0, a1 = 0, c0 = 1, mu = 3;
};

struct PowerTailCentered {  // a2 w^2 + c0 w^mu with w = z + a1/(2 a2)
    double a2 = 1, a1 = 0, c0 = 1, mu = 3;
};

struct LogLinear {  // a2 z^2 + c0 z + d0 z ln|z|,   d0 != 0
    double a2 = 0, c0 = 0, d0 = 1;
};

struct LogQuad {  // c0 z^2 + a1 z + d1 z^2 ln|z|,   d1 != 0
    double c0 = 0, a1 = 0, d1 = 1;
};

struct LogQuadCentered {  // w^2 (c0 + d1 ln|w|) with w = z + a1/(2 a2)
    double a2 = 1, a1 = 0, c0 = 0, d1 = 1;
};

struct ExpTail {  // a0 + c e^(nu z),   nu != 0, c != 0
    double a0 = 0, c = 1, nu = 1;
};

// Raw solution of the two-step SI consistency ODE for parameter deltas that
// do not land on one of the admissible reduced families above:
//   A = a2 z^2 + a1 z + a0 + c * tail(p1 z + p0)
struct OdeTail {
    enum class Kind { power, log_linear, log_quadratic, exponential };
    double a2 = 0, a1 = 0, a0 = 0;
    double c = 1;
    double p1 = 1, p0 = 0;
    double mu = 0;  // tail exponent, or nu for the exponential kind
    Kind kind = Kind::power;
};

using AFamily = std::variant<Poly, PowerTail, PowerTailCentered, LogLinear,
                             LogQuad, LogQuadCentered, ExpTail, OdeTail>;

// Exact Expr for A(z).  Throws std::invalid_argument when the family
// invariants are violated (zero tail coefficient, mu in {1,2}, ...).
Expr a_expr(const AFamily& f);
void validate_family(const AFamily& f);
std::string family_kind(const AFamily& f);

// Shift constants that characterize the family's translational SI maps;
// the ordinary-SI probe searches the lattice spanned by them.
std::vector<double> natural_shift_constants(const AFamily& f);

// ---------------------------------------------------------------------------
// Two-step deltas b_i^± = b_i^(2) ± b_i^(0) and the shifted constant
// R-bar = R~2 + b1^+ of the first-order A(z) ODE.
struct StepDeltas {
    double b1_plus = 0, b1_minus = 0, b0_plus = 0, b0_minus = 0;
    double r_bar = 0;

    static StepDeltas between(const ParamSet& c0, const ParamSet& c2, double shift_r2) {
        StepDeltas d;
        d.b1_plus = c2.b1 + c0.b1;
        d.b1_minus = c2.b1 - c0.b1;
        d.b0_plus = c2.b0 + c0.b0;
        d.b0_minus = c2.b0 - c0.b0;
        d.r_bar = shift_r2 + d.b1_plus;
        return d;
    }
};

// Universal reflective two-step SI map: (b1, b0) -> (-b1, -b0), shift 0.
std::pair<ParamSet, double> reflective_step(const ParamSet& c0);

// ---------------------------------------------------------------------------
// Linear condition system for two-step SI of a cubic/quartic polynomial A(z):
// the matrix in (b1^+, b0^+) plus the constraints a nontrivial solution needs.
struct ConditionSystemReport {
    std::vector<std::array<double, 2>> matrix;   // 3x2 (deg 3) or 4x2 (deg 4)
    std::vector<double> residual;                // matrix * (b1^+, b0^+)
    bool consistent = false;                     // b^+ in the null space
    std::vector<double> constraint_residual;     // nontrivial-solution relations
    bool nontrivial_ok = false;                  // all of them satisfied
};
ConditionSystemReport si_condition_system(const Poly& a, const StepDeltas& d,
                                          double tol = 1e-9);

// Closed-form general solution of the A(z) ODE
//   (b1^+ z + b0^+)(b1^- z + b0^-) - 2 (b1^+ z + b0^+) A'(z) + 4 Rbar A(z) = 0.
// Returns a reduced admissible family when the deltas land on one, otherwise
// an OdeTail carrier.  Precondition: not both b1^+ = 0 and b0^+ = 0.
AFamily solve_a_ode(const StepDeltas& d, double integration_constant = 1.0);

// ---------------------------------------------------------------------------
// Catalog

enum class Classification { reducible, irreducible, irreducible_conditional };
std::string to_string(Classification c);

using Params = std::map<std::string, double>;

struct CaseSpec {
    std::string id;            // paper labels: "1-1" ... "3", with "dep" branches
    std::string family_label;  // human-readable A(z)
    Classification classification;
    bool closed_z_available;   // some parameter branch has a closed z(x)

    std::vector<std::pair<std::string, double>> family_params;  // names + defaults
    ParamSet default_params;

    AFamily (*make_family)(const Params&);
    ParamSet (*step)(const AFamily&, const ParamSet&);          // c^(0) -> c^(2)
    double (*shift_r2)(const AFamily&, const ParamSet&);        // R~2(c^(0))

    // conditional rows only
    const char* constraint_label = nullptr;                     // e.g. "b0 = 2*a1"
    double (*constrained_b0)(const AFamily&) = nullptr;         // required b0 value

    // one-independent-parameter rows only
    double (*tied_b0)(const AFamily&, double b1) = nullptr;
    bool b1_fixed_zero = false;                                 // case 3

    std::string step_label, shift_label;

    bool conditional() const { return constrained_b0 != nullptr; }
    AFamily default_family() const;
    Params defaults_as_params() const;
};

const std::vector<CaseSpec>& catalog();
const CaseSpec* find_case(std::string_view id);  // nullptr when unknown

// param_step per spec: total map, no constraint check inside
inline std::pair<ParamSet, double> param_step(const CaseSpec& cs, const AFamily& f,
                                              const ParamSet& c0) {
    return {cs.step(f, c0), cs.shift_r2(f, c0)};
}

// ---------------------------------------------------------------------------
// Random admissible draws (used by the classify/verification probes)

struct Draw {
    AFamily family;
    ParamSet params;
};
enum class SampleMode { generic, on_constraint, off_constraint };
Draw sample(const CaseSpec& cs, Rng& rng, SampleMode mode,
            double off_offset_min = 0.1, double off_offset_max = 1.0);

}  // namespace siw::model

#endif
