#include "siw/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "siw/potentials.hpp"

namespace siw::spectral {

DiscretizedHamiltonian discretize(const std::function<double(double)>& v, double x_lo,
                                  double x_hi, int n) {
    if (n < 64) throw std::invalid_argument("discretize: need n >= 64");
    if (!(x_hi > x_lo)) throw std::invalid_argument("discretize: empty interval");
    DiscretizedHamiltonian h;
    h.x_lo = x_lo;
    h.x_hi = x_hi;
    h.n = n;
    h.dx = (x_hi - x_lo) / (n + 1);
    h.offdiagonal = -0.5 / (h.dx * h.dx);
    h.diagonal.resize(n);
    for (int i = 0; i < n; ++i) {
        double vi = v(x_lo + (i + 1) * h.dx);
        if (!std::isfinite(vi))
            throw std::invalid_argument("discretize: non-finite potential value");
        h.diagonal[i] = 1.0 / (h.dx * h.dx) + vi;
    }
    h.v = v;
    return h;
}

namespace {

std::vector<double> lowest_eigenvalues(const std::vector<double>& diag, double offdiag, int k) {
    int n = int(diag.size());
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), n);
    Eigen::VectorXd e = Eigen::VectorXd::Constant(n - 1, offdiag);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigenvalues: tridiagonal QL iteration failed");
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = solver.eigenvalues()[i];
    return out;
}

}  // namespace

Spectrum eigenvalues(const DiscretizedHamiltonian& h, int k) {
    if (k < 1 || k >= h.n / 4) throw std::invalid_argument("eigenvalues: need 1 <= k < n/4");

    Spectrum s;
    s.eigenvalues = lowest_eigenvalues(h.diagonal, h.offdiagonal, k);

    // refined grid with exactly halved spacing: n2 + 1 = 2 (n + 1)
    DiscretizedHamiltonian h2 = discretize(h.v, h.x_lo, h.x_hi, 2 * h.n + 1);
    auto fine = lowest_eigenvalues(h2.diagonal, h2.offdiagonal, k);
    s.convergence_estimate.resize(k);
    for (int i = 0; i < k; ++i)
        s.convergence_estimate[i] = std::fabs(s.eigenvalues[i] - fine[i]) / 3.0;
    return s;
}

std::function<double(double)> potential_on_x(const Expr& v_of_z, const changevar::ZMap& zmap) {
    return [v_of_z, zmap](double x) { return v_of_z.eval(zmap(x)); };
}

IsospectralReport isospectral_check(const model::CaseSpec& cs, const model::AFamily& f,
                                    const model::ParamSet& c0, const changevar::ZMap& zmap,
                                    double x_lo, double x_hi, int k, int n) {
    auto [c2, r2] = model::param_step(cs, f, c0);
    Expr v_plus = potentials::potential_pair(f, c0).second;
    Expr v_minus = potentials::potential_pair(f, c2).first;

    auto h_plus = discretize(potential_on_x(v_plus, zmap), x_lo, x_hi, n);
    auto h_minus = discretize(potential_on_x(v_minus, zmap), x_lo, x_hi, n);
    Spectrum up = eigenvalues(h_plus, k);
    Spectrum low = eigenvalues(h_minus, k + 2);

    IsospectralReport rep;
    rep.upper = up.eigenvalues;
    rep.lower_shifted = low.eigenvalues;
    for (auto& e : rep.lower_shifted) e += r2;

    double conv = 0.0;
    for (double c : up.convergence_estimate) conv = std::max(conv, c);
    for (double c : low.convergence_estimate) conv = std::max(conv, c);
    rep.tol = std::max(1e-3, 10.0 * conv);

    // two-pointer matching; skips count as unmatched levels
    size_t i = 0, j = 0;
    while (i < rep.upper.size() && j < rep.lower_shifted.size()) {
        if (std::fabs(rep.upper[i] - rep.lower_shifted[j]) <= rep.tol) {
            rep.matches.emplace_back(int(i), int(j));
            ++i, ++j;
        } else if (rep.upper[i] < rep.lower_shifted[j]) {
            ++rep.unmatched;
            ++i;
        } else {
            ++rep.unmatched;
            ++j;
        }
    }
    rep.unmatched += int(rep.upper.size() - i);  // trailing unmatched upper levels
    rep.pass = rep.unmatched <= 2;
    return rep;
}

}  // namespace siw::spectral
