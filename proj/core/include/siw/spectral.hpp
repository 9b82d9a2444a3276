#ifndef SIW_SPECTRAL_HPP
#define SIW_SPECTRAL_HPP

#include <functional>
#include <vector>

#include "siw/changevar.hpp"
#include "siw/model.hpp"

namespace siw::spectral {

// H = -1/2 d^2/dx^2 + V(x) on n interior points with Dirichlet walls;
// 3-point stencil, dx = (x_hi - x_lo)/(n + 1)
struct DiscretizedHamiltonian {
    double x_lo, x_hi, dx;
    int n;
    std::vector<double> diagonal;  // 1/dx^2 + V_i
    double offdiagonal;            // -1/(2 dx^2)
    std::function<double(double)> v;  // retained so the grid can be refined
};

DiscretizedHamiltonian discretize(const std::function<double(double)>& v, double x_lo,
                                  double x_hi, int n);

struct Spectrum {
    std::vector<double> eigenvalues;            // ascending, at the requested n
    std::vector<double> convergence_estimate;   // Richardson against the refined grid
};

// k lowest eigenvalues; refines to 2n+1 points internally for the estimates
Spectrum eigenvalues(const DiscretizedHamiltonian& h, int k);

struct IsospectralReport {
    std::vector<double> upper;          // spec(H+(c0))
    std::vector<double> lower_shifted;  // spec(H-(c2)) + R~2
    std::vector<std::pair<int, int>> matches;
    int unmatched = 0;
    double tol = 0.0;
    bool pass = false;
};

// compares spec(H+(c0)) against spec(H-(c2)) + R~2 on [x_lo, x_hi]; at most
// two unmatched low-lying levels are allowed (kernel modes of the
// second-order supercharge)
IsospectralReport isospectral_check(const model::CaseSpec& cs, const model::AFamily& f,
                                    const model::ParamSet& c0, const changevar::ZMap& zmap,
                                    double x_lo, double x_hi, int k, int n);

// x-space potential callable from a z-space expression and a z(x) map
std::function<double(double)> potential_on_x(const Expr& v_of_z, const changevar::ZMap& zmap);

}  // namespace siw::spectral

#endif
