#ifndef SIW_SHAPECHECK_HPP
#define SIW_SHAPECHECK_HPP

#include <optional>
#include <string>
#include <vector>

#include "siw/expr.hpp"
#include "siw/model.hpp"
#include "siw/potentials.hpp"
#include "siw/rng.hpp"

namespace siw::shapecheck {

struct Grid {
    std::vector<double> z;
};

struct GridSpec {
    int n = 64;
    bool require_positive_a = false;  // 2A > 0, needed for z' = sqrt(2A) factors
    bool guard_q = false;             // keep away from Q = 0 (V^i2, hatted pieces)
    std::vector<Expr> extra_guards;   // additional denominators to stay away from
};

// points where A (and the requested guards) are defined and bounded away from
// zero; scans log-spaced candidates around the family's natural center so the
// usable region of log/power families is found wherever it sits.
// Throws singular_point_error when no usable region exists.
Grid admissible_grid(const model::AFamily& f, const model::ParamSet& c, const GridSpec& spec);

// uniformly spaced points in a single moderate window; Gram-matrix probes need
// this, since sup-normalized bases become numerically collinear on grids that
// span many decades
Grid uniform_window_grid(const model::AFamily& f, const model::ParamSet& c, const GridSpec& spec);

enum class Label { reducible, irreducible, irreducible_conditional, not_si };
std::string to_string(Label l);
Label from_classification(model::Classification c);

// two-step residual r(z) = V+(z; c0) - V-(z; c2) over the grid
struct SIVerdict {
    bool is_two_step = false;
    double estimated_r2 = 0.0;     // mean of r
    double max_residual = 0.0;     // max |r - mean|
    double catalog_r2 = 0.0;       // the case's shift formula, for comparison
    double tolerance = 0.0;
    bool is_ordinary = false;
    std::optional<double> ordinary_r1;
    std::optional<std::string> conditional_required;
    Label classification = Label::not_si;
};

// constancy tolerance: 1e-9 relative on closed-form grids (1e-6 with numeric
// z-maps, which the caller passes explicitly)
double constancy_tol(double value_scale, bool numeric_zmap = false);

SIVerdict two_step_residual(const model::CaseSpec& cs, const model::AFamily& f,
                            const model::ParamSet& c0, const Grid& grid);

// reflective universality |V+(z; b) - V-(z; -b)|, max over the grid
double reflective_residual(const model::AFamily& f, const model::ParamSet& c, const Grid& grid);

struct OrdinaryProbe {
    bool found = false;
    model::ParamSet c1;
    double r1 = 0.0;           // constant in V^i(c0) = V-(c1) + R~1
    bool via_i2 = false;       // sequence runs through the second intermediate
};
OrdinaryProbe ordinary_si_probe(const model::CaseSpec& cs, const model::AFamily& f,
                                const model::ParamSet& c0, const Grid& grid);

// evaluates the case's conditional constraint; throws std::logic_error for
// cases without one
bool conditional_probe(const model::CaseSpec& cs, const model::AFamily& f,
                       const model::ParamSet& c);

// runs the probes on random admissible draws and derives the Table-1 label
Label classify(const model::CaseSpec& cs, int samples, Rng& rng);

}  // namespace siw::shapecheck

#endif
