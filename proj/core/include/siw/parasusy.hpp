#ifndef SIW_PARASUSY_HPP
#define SIW_PARASUSY_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "siw/changevar.hpp"
#include "siw/model.hpp"

namespace siw::parasusy {

using SpMat = Eigen::SparseMatrix<double>;

struct ParafermionRep {
    Eigen::Matrix3d psi_minus, psi_plus;
};

// psi- with ones on the first superdiagonal, psi+ its transpose; satisfies
// (psi)^2 != 0, (psi)^3 = 0, {psi-,psi+} + {(psi-)^2,(psi+)^2} = 2 I exactly
ParafermionRep parafermion_matrices();

// operator-valued 3x3 matrix on the graded space; empty blocks stay empty so
// structural zeros ((Q)^3) are exact
struct BlockOperator {
    int n = 0;
    std::array<std::array<std::optional<SpMat>, 3>, 3> block;

    BlockOperator() = default;
    explicit BlockOperator(int size) : n(size) {}

    BlockOperator operator*(const BlockOperator& other) const;
    BlockOperator operator+(const BlockOperator& other) const;
    BlockOperator operator-(const BlockOperator& other) const;
    BlockOperator scaled(double s) const;
    bool structurally_zero() const;
    // apply to a vector living in one grade
    std::array<Eigen::VectorXd, 3> apply(int grade, const Eigen::VectorXd& v) const;
};

struct ParaSystem {
    int n = 0;
    double dx = 0.0, x_lo = 0.0, x_hi = 0.0;
    double b1 = 0.0;
    double c22 = 0.0, c21 = 0.0;
    BlockOperator h_p, q_minus, q_plus;
    SpMat h_minus, h_i1, h_plus;          // diagonal blocks of H_P
    SpMat p22_minus, p22_plus, p21_minus, p21_plus;
};

// discretizes H-, H^i1, H+ and the first-order factors on n interior points
// of [x_lo, x_hi] (Dirichlet) and assembles the paraSUSY triple
ParaSystem build_para_system(const model::AFamily& f, const model::ParamSet& c0,
                             const changevar::ZMap& zmap, double x_lo, double x_hi, int n);

struct AlgebraReport {
    struct Entry {
        std::string name;
        double residual = 0.0;  // probe-restricted operator norm of the defect
        double scale = 0.0;     // same norm of the reference operator
        double relative = 0.0;
    };
    std::vector<Entry> entries;
    bool q_cubed_zero = false;
    double max_relative = 0.0;
    bool pass = false;
};

// residuals of the second-order paraSUSY relations and the generalized 2-fold
// superalgebra.  Norms are taken on a fixed family of smooth probe vectors
// with boundary rows dropped: raw spectral norms of commutator defects do not
// converge under grid refinement, the smooth-sector ones shrink as O(dx^2).
AlgebraReport verify_para_algebra(const ParaSystem& sys, double tol);

}  // namespace siw::parasusy

#endif
