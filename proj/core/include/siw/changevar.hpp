#ifndef SIW_CHANGEVAR_HPP
#define SIW_CHANGEVAR_HPP

#include <optional>
#include <variant>
#include <vector>

#include "siw/expr.hpp"
#include "siw/model.hpp"

namespace siw::changevar {

// z(x) in closed form; the expression's variable is x.  (x_lo, x_hi) is the
// maximal open interval on which the branch is valid and strictly monotone.
struct ClosedForm {
    Expr z_of_x;
    double x_lo, x_hi;
};

// z(x) tabulated from integrating z' = +-sqrt(2 A(z)); slopes z' and
// curvatures z'' = A'(z) are stored, lookup is quintic Hermite.
struct NumericTable {
    std::vector<double> x, z, slope, curv;
    int order = 5;
    bool truncated = false;   // hit a turning point (A -> 0) before x_hi
    double max_defect = 0.0;  // worst |z'^2 - 2A| / (1 + |2A|) seen by the integrator
};

class ZMap {
public:
    ZMap(ClosedForm cf) : v_(std::move(cf)) {}
    ZMap(NumericTable t) : v_(std::move(t)) {}

    double operator()(double x) const;  // throws std::out_of_range outside the domain
    double slope_at(double x) const;    // dz/dx (exact for closed forms)
    double x_lo() const;
    double x_hi() const;
    bool closed_form() const { return std::holds_alternative<ClosedForm>(v_); }
    const ClosedForm& closed() const { return std::get<ClosedForm>(v_); }
    const NumericTable& table() const { return std::get<NumericTable>(v_); }

private:
    std::variant<ClosedForm, NumericTable> v_;
};

// Closed-form z(x) for the case's parameter branch, when one exists.
// Absent when the paper's equation cannot be integrated in elementary terms
// for these parameters (and for branches needing trigonometric forms).
std::optional<ZMap> closed_z(const model::CaseSpec& cs, const model::AFamily& f);

// Adaptive Dormand-Prince integration of dz/dx = direction * sqrt(2 A(z))
// from z(x_lo) = z_init, sampled on n uniform points.  The positive branch is
// the convention; direction = -1 selects the decreasing branch.  If A reaches
// zero (or z escapes to infinity) the table is truncated there and marked.
ZMap numeric_z(const model::AFamily& f, double x_lo, double x_hi, double z_init, int n,
               int direction = +1);

// |z'(x)^2 - 2 A(z(x))| / (1 + |2A|), with z' exact for closed forms and the
// Hermite-interpolant derivative for tables
double defect(const ZMap& zm, const model::AFamily& f, double x);

}  // namespace siw::changevar

#endif
