#ifndef SIW_LADDER_HPP
#define SIW_LADDER_HPP

#include <stdexcept>
#include <vector>

#include "siw/model.hpp"
#include "siw/potentials.hpp"
#include "siw/shapecheck.hpp"

namespace siw::ladder {

class flag_degenerate_error : public std::runtime_error {
public:
    explicit flag_degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Termination { requested_length, constraint_broken, flag_degenerate };
std::string to_string(Termination t);

// [c^(0), c^(2), ..., c^(2n)] with the R~2 shift of each step
struct ParamChain {
    std::vector<model::ParamSet> params;
    std::vector<double> shifts;
    Termination termination = Termination::requested_length;
    int steps() const { return int(shifts.size()); }
};

// iterates param_step `steps` times; conditional cases stop early when the
// constraint fails at the start of a step
ParamChain chain(const model::CaseSpec& cs, const model::AFamily& f, const model::ParamSet& c0,
                 int steps);

// chain generated by the universal reflective map instead of the case map
ParamChain reflective_chain(const model::ParamSet& c0, int steps);

struct FlagBasis {
    std::vector<Expr> funcs;   // sup-normalized on the probe grid
    int blocks = 0;            // number of kernel blocks represented
    bool degenerate = false;   // a new block added no dimension
    double gram_det = 0.0;     // of the normalized Gram matrix
};

// V_2n = span{1, z} + tP2+(c0){1, z} + tP2+(c0) tP2+(c2){1, z} + ...,
// built symbolically; at most `blocks` blocks (limited by the chain length)
FlagBasis flag_basis(const model::AFamily& f, const ParamChain& ch, int blocks,
                     const shapecheck::Grid& probe);

struct LadderResult {
    std::vector<double> matrix_route;        // eigenvalues of tH-(c0) on the flag
    std::vector<double> accumulation_route;  // +-b1^(2k)/2 - R + sum of shifts
    double route_deviation = 0.0;
    double max_imag = 0.0;                   // spurious imaginary parts, should vanish
    double closure_residual = 0.0;           // least-squares defect of tH- V in V
    ParamChain chain;
    int blocks = 0;
};

LadderResult solvable_spectrum(const model::AFamily& f, const ParamChain& ch, int blocks,
                               const shapecheck::Grid& probe);

// convenience forms matching the catalog workflow
FlagBasis flag_basis(const model::CaseSpec& cs, const model::AFamily& f,
                     const model::ParamSet& c0, int blocks, const shapecheck::Grid& probe);
LadderResult solvable_spectrum(const model::CaseSpec& cs, const model::AFamily& f,
                               const model::ParamSet& c0, int blocks,
                               const shapecheck::Grid& probe);

}  // namespace siw::ladder

#endif
