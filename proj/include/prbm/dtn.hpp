#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prbm/geometry.hpp"

namespace prbm {

/// Boundary-to-boundary return probabilities of the lattice walk launched
/// from the inward neighbour of each Working element. Rows and columns follow
/// LatticeDomain::working_indices(). Mass absorbed on Source elements is
/// dropped, so rows are sub-stochastic whenever a Source exists.
struct SelfTransportMatrix {
    Eigen::MatrixXd Q;
    double mesh = 0.0;
    int dimension = 2;
    /// Projected surface weights w_j = a^{d-1} |n . e_j|.
    Eigen::VectorXd weight;
    /// Projected normal offsets h_j = a |n . e_j|.
    Eigen::VectorXd offset;
    std::vector<int> elements;

    Eigen::Index size() const { return Q.rows(); }
};

/// Exact Q by sparse Cholesky solves, one per distinct inward site. The
/// right-hand sides are split across `threads` workers (0: default count).
SelfTransportMatrix build_Q(const LatticeDomain& dom, int threads = 0);

/// Discrete Dirichlet-to-Neumann operator M = H^{-1}(I - Q), H = diag(h).
/// M is self-adjoint for the surface inner product <f, g> = sum w_j f_j g_j,
/// and equals (I - Q)/a on axis-aligned boundaries.
struct DtnOperator {
    Eigen::MatrixXd S;  ///< I - Q, symmetric positive semidefinite
    Eigen::VectorXd weight;
    Eigen::VectorXd offset;
    double mesh = 0.0;
    int dimension = 2;

    Eigen::MatrixXd matrix() const;  ///< M itself
    Eigen::Index size() const { return S.rows(); }
    /// a^{d-2}, the factor with W = a^{d-2} H.
    double weight_scale() const;
};

DtnOperator build_M(const SelfTransportMatrix& Qm);

/// T_Lambda = (I + Lambda M)^{-1} = (H + Lambda S)^{-1} H.
/// Throws SolveFailure if H + Lambda S cannot be factored reliably.
Eigen::MatrixXd spreading_operator(const DtnOperator& M, double Lambda);

/// Per-element distribution on the Working elements.
struct FluxVector {
    Eigen::VectorXd P;        ///< probabilities per element
    Eigen::VectorXd density;  ///< P_j / w_j, unit discrete integral when P sums to 1
    /// Unnormalized working-absorbed mass (1 - source return probability).
    double working_mass = 0.0;
};

/// Hitting distribution P_0 of walkers emitted from the inward neighbour of a
/// uniformly chosen Source element, renormalized over the Working-absorbed
/// mass. Throws InvalidParam when the domain has no Source.
FluxVector hitting_distribution(const LatticeDomain& dom);

/// P_Lambda = T^T P_0 (equal to T P_0 when all weights coincide). P_Lambda
/// carries the same normalization as P_0; its deficit is the return mass.
FluxVector absorption_distribution(const FluxVector& P0, const Eigen::MatrixXd& T, const DtnOperator& M);

/// Eigen-decomposition of M. V is orthonormal for the surface inner product
/// and mu ascends. F_alpha = <phi, V_alpha>^2 when phi is supplied.
struct DtnSpectrum {
    Eigen::VectorXd mu;
    Eigen::MatrixXd V;
    Eigen::VectorXd F;
    Eigen::VectorXd weight;
    double phi_norm_sq = 0.0;  ///< <phi, phi>

    /// Sum_alpha v_alpha v_alpha^T W / (1 + Lambda mu_alpha).
    Eigen::MatrixXd resolvent(double Lambda) const;
};

DtnSpectrum spectrum(const DtnOperator& M, const Eigen::VectorXd& phi0h = {});

struct ImpedancePoint {
    double Lambda = 0.0;
    double Z = 0.0;       ///< (Lambda/D) sum F/(1 + Lambda mu)
    double Z_cell = 0.0;  ///< C0 / total flux
    double Z_sp = 0.0;    ///< (1/Z - 1/Z_cell(0))^{-1}
    double Z_sp_difference = 0.0;  ///< Z_cell(Lambda) - Z_cell(0)
};

/// Total flux D C0 <1, M T_Lambda 1> through the working interface held at
/// C0 with the Source at zero, from a direct solve.
double total_flux(const DtnOperator& M, double Lambda, double D = 1.0, double C0 = 1.0);

/// Same total flux from a single sparse solve on the lattice: Working links
/// absorb at rate 1 - eps_j in the bulk generator, and the flux is read off
/// from the walk emitted at the Source (reciprocity). Agrees with
/// total_flux(build_M(build_Q(dom)), ...) without forming Q.
double lattice_total_flux(const LatticeDomain& dom, double Lambda, double D = 1.0, double C0 = 1.0);

/// Impedance over a Lambda grid. The spectral route (Z, Z_sp) and the flux
/// route (Z_cell, Z_sp_difference) must agree; a relative mismatch above
/// `identity_tol` raises SolveFailure.
std::vector<ImpedancePoint> impedance_curve(const DtnOperator& M, const DtnSpectrum& spec,
                                            const std::vector<double>& Lambda_grid, double D = 1.0,
                                            double identity_tol = 1e-6);

/// Writes `path` as row-major little-endian float64 and `path`.json with
/// {name, rows, cols, dtype, order}.
void dump_matrix(const std::string& path, const Eigen::MatrixXd& m, const std::string& name);

}  // namespace prbm
