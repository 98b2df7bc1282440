#include "prbm/dtn.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "prbm/error.hpp"
#include "prbm/parallel.hpp"

namespace prbm {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Factor = Eigen::SimplicialLDLT<SparseMatrix>;

// Generator of the bulk walk with every boundary link absorbing: the diagonal
// counts the non-wall directions, off-diagonals couple bulk neighbours. Wall
// directions drop out because a blocked step leaves the walker in place.
SparseMatrix bulk_laplacian(const LatticeDomain& dom, double Lambda = 0.0) {
    const int n = static_cast<int>(dom.bulk_count());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(n) * (dom.directions() + 1));
    for (int i = 0; i < n; ++i) {
        double degree = 0;
        for (int dir = 0; dir < dom.directions(); ++dir) {
            const int j = dom.neighbor(i, dir);
            if (j >= 0) {
                entries.emplace_back(i, j, -1.0);
                ++degree;
            } else if (const int b = dom.link(i, dir); b >= 0) {
                // a reflected step returns to i, so only the absorbed share counts
                const bool working = dom.boundary_sites()[b].tag == BoundaryTag::Working;
                const double h = dom.mesh() * dom.projected_cosine(b);
                degree += working && Lambda > 0 ? h / (Lambda + h) : 1.0;
            }
        }
        entries.emplace_back(i, i, degree);
    }
    SparseMatrix L(n, n);
    L.setFromTriplets(entries.begin(), entries.end());
    return L;
}

void factorize(const LatticeDomain& dom, Factor& solver, double Lambda = 0.0) {
    require(dom.boundary_count() > 0, ErrorKind::SingularSystem, "lattice has no absorbing boundary");
    solver.compute(bulk_laplacian(dom, Lambda));
    require(solver.info() == Eigen::Success, ErrorKind::SingularSystem, "bulk Laplacian factorization failed");
    const Eigen::VectorXd d = solver.vectorD();
    require(d.minCoeff() > 1e-12 * d.maxCoeff(), ErrorKind::SingularSystem,
            "bulk is not connected to the absorbing boundary");
}

}  // namespace

SelfTransportMatrix build_Q(const LatticeDomain& dom, int threads) {
    const auto& working = dom.working_indices();
    Factor solver;
    factorize(dom, solver);
    require(!working.empty(), ErrorKind::InvalidParam, "lattice has no Working elements");

    // distinct inward sites; several links may share one
    std::unordered_map<int, int> column_of;
    std::vector<int> sites;
    std::vector<int> col(working.size());
    for (std::size_t j = 0; j < working.size(); ++j) {
        const int s = dom.inward_index(working[j]);
        auto [it, fresh] = column_of.emplace(s, static_cast<int>(sites.size()));
        if (fresh) sites.push_back(s);
        col[j] = it->second;
    }
    const Eigen::Index K = static_cast<Eigen::Index>(sites.size());
    const Eigen::Index n = static_cast<Eigen::Index>(dom.bulk_count());
    Eigen::MatrixXd G(K, K);  // Green function restricted to the inward sites

    constexpr Eigen::Index block = 16;
    const std::int64_t n_blocks = (K + block - 1) / block;
    parallel_chunks(n_blocks, threads, [&](int, std::int64_t lo, std::int64_t hi) {
        Eigen::MatrixXd rhs(n, block);
        for (std::int64_t b = lo; b < hi; ++b) {
            const Eigen::Index c0 = b * block, width = std::min(block, K - c0);
            rhs.setZero();
            for (Eigen::Index c = 0; c < width; ++c) rhs(sites[c0 + c], c) = 1.0;
            const Eigen::MatrixXd x = solver.solve(rhs.leftCols(width));
            for (Eigen::Index c = 0; c < width; ++c)
                for (Eigen::Index r = 0; r < K; ++r) G(r, c0 + c) = x(sites[r], c);
        }
    });

    SelfTransportMatrix out;
    const Eigen::Index m = static_cast<Eigen::Index>(working.size());
    out.Q.resize(m, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < m; ++k) out.Q(j, k) = G(col[j], col[k]);
    out.mesh = dom.mesh();
    out.dimension = dom.dimension();
    out.elements = working;
    const auto w = surface_weights(dom);
    const auto h = normal_offsets(dom);
    out.weight.resize(m);
    out.offset.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        out.weight[j] = w[working[j]];
        out.offset[j] = h[working[j]];
    }
    return out;
}

Eigen::MatrixXd DtnOperator::matrix() const { return offset.cwiseInverse().asDiagonal() * S; }

double DtnOperator::weight_scale() const { return std::pow(mesh, dimension - 2); }

DtnOperator build_M(const SelfTransportMatrix& Qm) {
    DtnOperator M;
    M.S = Eigen::MatrixXd::Identity(Qm.size(), Qm.size()) - Qm.Q;
    M.weight = Qm.weight;
    M.offset = Qm.offset;
    M.mesh = Qm.mesh;
    M.dimension = Qm.dimension;
    return M;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> shifted_factor(const DtnOperator& M, double Lambda) {
    Eigen::MatrixXd A = Lambda * M.S;
    A.diagonal() += M.offset;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    require(llt.info() == Eigen::Success, ErrorKind::SolveFailure, "H + Lambda S is not positive definite");
    require(llt.rcond() > 1e-14, ErrorKind::SolveFailure, "H + Lambda S is too ill-conditioned");
    return llt;
}

}  // namespace

Eigen::MatrixXd spreading_operator(const DtnOperator& M, double Lambda) {
    require(Lambda >= 0 && std::isfinite(Lambda), ErrorKind::InvalidParam, "Lambda must be >= 0");
    const Eigen::Index n = M.size();
    if (Lambda == 0) return Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd H = M.offset.asDiagonal();
    return shifted_factor(M, Lambda).solve(H);
}

FluxVector hitting_distribution(const LatticeDomain& dom) {
    const auto& source = dom.source_indices();
    const auto& working = dom.working_indices();
    require(!source.empty(), ErrorKind::InvalidParam, "hitting distribution needs a Source");
    require(!working.empty(), ErrorKind::InvalidParam, "lattice has no Working elements");
    Factor solver;
    factorize(dom, solver);
    // by symmetry of the Green function, one solve with the summed emission
    // sites gives the hitting probability of every element
    Eigen::VectorXd emit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dom.bulk_count()));
    for (int s : source) emit[dom.inward_index(s)] += 1.0 / double(source.size());
    const Eigen::VectorXd x = solver.solve(emit);

    const auto w = surface_weights(dom);
    FluxVector out;
    const Eigen::Index m = static_cast<Eigen::Index>(working.size());
    out.P.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) out.P[j] = x[dom.inward_index(working[j])];
    out.working_mass = out.P.sum();
    require(out.working_mass > 0, ErrorKind::SingularSystem, "no walker reaches the Working interface");
    out.P /= out.working_mass;
    out.density.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) out.density[j] = out.P[j] / w[working[j]];
    return out;
}

FluxVector absorption_distribution(const FluxVector& P0, const Eigen::MatrixXd& T, const DtnOperator& M) {
    require(T.rows() == P0.P.size() && T.cols() == P0.P.size() && M.size() == P0.P.size(), ErrorKind::InvalidParam,
            "dimension mismatch between P0, T and M");
    FluxVector out;
    out.P = T.transpose() * P0.P;
    out.density = out.P.cwiseQuotient(M.weight);
    out.working_mass = P0.working_mass * out.P.sum();
    return out;
}

DtnSpectrum spectrum(const DtnOperator& M, const Eigen::VectorXd& phi0h) {
    const Eigen::VectorXd hinv = M.offset.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd K = hinv.asDiagonal() * M.S * hinv.asDiagonal();
    K = 0.5 * (K + K.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    require(eig.info() == Eigen::Success, ErrorKind::EigenFailure, "symmetric eigensolver did not converge");

    DtnSpectrum out;
    out.mu = eig.eigenvalues();
    out.V = hinv.asDiagonal() * eig.eigenvectors() / std::sqrt(M.weight_scale());
    out.weight = M.weight;
    if (phi0h.size() > 0) {
        require(phi0h.size() == M.size(), ErrorKind::InvalidParam, "flux vector has the wrong length");
        const Eigen::VectorXd c = out.V.transpose() * M.weight.cwiseProduct(phi0h);
        out.F = c.cwiseAbs2();
        out.phi_norm_sq = phi0h.cwiseAbs2().dot(M.weight);
    }
    return out;
}

Eigen::MatrixXd DtnSpectrum::resolvent(double Lambda) const {
    const Eigen::VectorXd g = (1.0 + Lambda * mu.array()).inverse().matrix();
    return V * g.asDiagonal() * V.transpose() * weight.asDiagonal();
}

double total_flux(const DtnOperator& M, double Lambda, double D, double C0) {
    require(Lambda >= 0 && std::isfinite(Lambda), ErrorKind::InvalidParam, "Lambda must be >= 0");
    const Eigen::VectorXd S1 = M.S.rowwise().sum();
    double inner;
    if (Lambda == 0) {
        inner = S1.sum();
    } else {
        // <1, M T 1> = a^{d-2} 1^T S (H + Lambda S)^{-1} H 1
        inner = S1.dot(shifted_factor(M, Lambda).solve(M.offset));
    }
    return D * C0 * M.weight_scale() * inner;
}

double lattice_total_flux(const LatticeDomain& dom, double Lambda, double D, double C0) {
    require(Lambda >= 0 && std::isfinite(Lambda), ErrorKind::InvalidParam, "Lambda must be >= 0");
    require(!dom.working_indices().empty(), ErrorKind::InvalidParam, "lattice has no Working elements");
    if (dom.source_indices().empty()) return 0.0;
    Factor solver;
    factorize(dom, solver, Lambda);
    Eigen::VectorXd emit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dom.bulk_count()));
    for (int s : dom.source_indices()) emit[dom.inward_index(s)] += 1.0;
    const Eigen::VectorXd y = solver.solve(emit);
    double absorbed = 0.0;
    for (int b : dom.working_indices()) {
        const double h = dom.mesh() * dom.projected_cosine(b);
        absorbed += (Lambda > 0 ? h / (Lambda + h) : 1.0) * y[dom.inward_index(b)];
    }
    return D * C0 * std::pow(dom.mesh(), dom.dimension() - 2) * absorbed;
}

std::vector<ImpedancePoint> impedance_curve(const DtnOperator& M, const DtnSpectrum& spec,
                                            const std::vector<double>& Lambda_grid, double D, double identity_tol) {
    require(D > 0, ErrorKind::InvalidParam, "D must be > 0");
    require(spec.F.size() == spec.mu.size() && spec.F.size() > 0, ErrorKind::MissingCellImpedance,
            "spectrum carries no flux weights");
    const double flux0 = total_flux(M, 0.0, D);
    require(flux0 > 0, ErrorKind::MissingCellImpedance, "cell impedance needs a Source");
    const double Zc0 = 1.0 / flux0;

    std::vector<ImpedancePoint> out;
    out.reserve(Lambda_grid.size());
    for (double L : Lambda_grid) {
        ImpedancePoint p;
        p.Lambda = L;
        p.Z = L / D * (spec.F.array() / (1.0 + L * spec.mu.array())).sum();
        p.Z_cell = 1.0 / total_flux(M, L, D);
        p.Z_sp_difference = p.Z_cell - Zc0;
        p.Z_sp = p.Z > 0 ? 1.0 / (1.0 / p.Z - 1.0 / Zc0) : 0.0;
        const double scale = std::max(std::abs(p.Z_sp_difference), std::numeric_limits<double>::min());
        require(std::abs(p.Z_sp - p.Z_sp_difference) <= identity_tol * scale, ErrorKind::SolveFailure,
                "spectral and flux impedance routes disagree at Lambda = " + std::to_string(L));
        out.push_back(p);
    }
    return out;
}

void dump_matrix(const std::string& path, const Eigen::MatrixXd& m, const std::string& name) {
    std::ofstream bin(path, std::ios::binary);
    require(bool(bin), ErrorKind::Io, "cannot open " + path);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    bin.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
    require(bool(bin), ErrorKind::Io, "write failed for " + path);
    nlohmann::json side{{"name", name},
                        {"rows", m.rows()},
                        {"cols", m.cols()},
                        {"dtype", "float64"},
                        {"order", "row-major"},
                        {"endianness", std::endian::native == std::endian::little ? "little" : "big"}};
    std::ofstream js(path + ".json");
    require(bool(js), ErrorKind::Io, "cannot open " + path + ".json");
    js << side.dump(2) << '\n';
}

}  // namespace prbm
