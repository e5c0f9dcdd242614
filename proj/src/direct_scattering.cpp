#include "qgs/direct_scattering.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

namespace qgs {

namespace {

// Relative sigma_min below which the vertex-condition system counts as
// singular, as opposed to merely ill-conditioned.
constexpr double kSingularRelTol = 1e-12;
// Relative sigma below which a homogeneous-system direction counts as
// kernel; well above factorization noise at desk scale.
constexpr double kKernelRelTol = 1e-8;

struct AssembledSystem {
    Matrix coefficients; // (n + 2p) x (n + 2p)
    Matrix incoming_rhs; // (n + 2p) x n, column i = incoming wave on ray i
};

// Rows: the vertex conditions A psi + B psi' = 0 over all vertices.
// Columns: first the n outgoing ray amplitudes (Jost +), then per edge
// the coefficients of the standard solutions theta and phi.
AssembledSystem assemble(const MetricGraph& graph,
                         const VertexConditions& conditions, Momentum k) {
    const int n = graph.ray_count();
    const int p = graph.edge_count();
    AssembledSystem sys;
    sys.coefficients = Matrix::Zero(n + 2 * p, n + 2 * p);
    sys.incoming_rhs = Matrix::Zero(n + 2 * p, n);

    std::vector<BoundaryData> jost_out(n), jost_in(n);
    for (int i = 0; i < n; ++i) {
        jost_out[i] = jost_boundary_data(graph.rays()[i].potential, k, JostSign::plus);
        jost_in[i] = jost_boundary_data(graph.rays()[i].potential, k, JostSign::minus);
    }

    int row0 = 0;
    for (int v = 0; v < graph.vertex_count(); ++v) {
        const auto ends = graph.incident_ends(v);
        const int d = static_cast<int>(ends.size());
        const Matrix& a = conditions[v].a;
        const Matrix& b = conditions[v].b;
        for (int slot = 0; slot < d; ++slot) {
            const IncidentEnd& end = ends[slot];
            switch (end.kind) {
            case IncidentEnd::Kind::ray: {
                const int r = end.index;
                sys.coefficients.block(row0, r, d, 1) +=
                    a.col(slot) * jost_out[r].value +
                    b.col(slot) * jost_out[r].derivative;
                sys.incoming_rhs.block(row0, r, d, 1) -=
                    a.col(slot) * jost_in[r].value +
                    b.col(slot) * jost_in[r].derivative;
                break;
            }
            case IncidentEnd::Kind::edge_start: {
                // theta(0) = 1, phi'(0) = 1; inward derivative is +psi'(0).
                const int c = n + 2 * end.index;
                sys.coefficients.block(row0, c, d, 1) += a.col(slot);
                sys.coefficients.block(row0, c + 1, d, 1) += b.col(slot);
                break;
            }
            case IncidentEnd::Kind::edge_end: {
                // Inward derivative at x = length is -psi'(length).
                const Edge& e = graph.edges()[end.index];
                const StandardSolutions std_sol =
                    standard_solutions_at(e.potential, k, e.length);
                const int c = n + 2 * end.index;
                sys.coefficients.block(row0, c, d, 1) +=
                    a.col(slot) * std_sol.theta - b.col(slot) * std_sol.theta_deriv;
                sys.coefficients.block(row0, c + 1, d, 1) +=
                    a.col(slot) * std_sol.phi - b.col(slot) * std_sol.phi_deriv;
                break;
            }
            }
        }
        row0 += d;
    }
    return sys;
}

} // namespace

double unitarity_defect(const Matrix& s) {
    return (s.adjoint() * s - Matrix::Identity(s.rows(), s.cols()))
        .cwiseAbs()
        .maxCoeff();
}

ScatteringMatrix scattering_direct(const MetricGraph& graph,
                                   const VertexConditions& conditions,
                                   Momentum k) {
    if (static_cast<int>(conditions.size()) != graph.vertex_count())
        throw Error("scattering_direct: one condition per vertex required");
    const int n = graph.ray_count();
    AssembledSystem sys = assemble(graph, conditions, k);

    Eigen::JacobiSVD<Matrix> svd(sys.coefficients);
    const auto& sv = svd.singularValues();
    const double sigma_max = sv(0);
    const double sigma_min = sv(sv.size() - 1);
    if (sigma_max == 0.0 || sigma_min < kSingularRelTol * sigma_max)
        throw DegenerateSystemError(
            "vertex-condition system degenerate at this k", sigma_min);

    Eigen::PartialPivLU<Matrix> lu(sys.coefficients);
    Matrix solution = lu.solve(sys.incoming_rhs);
    // Column i of the solution is the unknown vector for incoming ray i;
    // its first n entries are S_{i1}..S_{in}.
    Matrix s = solution.topRows(n).transpose();

    ScatteringMatrix out{k.k, std::move(s), 0.0};
    out.unitarity_residual = unitarity_defect(out.s);
    if (out.unitarity_residual > 1e-6)
        throw ConsistencyError(
            "scattering_direct produced a non-unitary matrix (residual " +
            std::to_string(out.unitarity_residual) + ")");
    return out;
}

InteriorKernel interior_kernel(const MetricGraph& graph,
                               const VertexConditions& conditions, Momentum k) {
    const int p = graph.edge_count();
    if (p == 0) return InteriorKernel{0, Matrix::Zero(0, 0)};
    AssembledSystem sys = assemble(graph, conditions, k);
    // Kill all ray data: solutions identically zero on every ray must
    // satisfy the full condition set with interior coefficients alone.
    Matrix interior = sys.coefficients.rightCols(2 * p);
    Eigen::JacobiSVD<Matrix> svd(interior, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double sigma_max = sv(0);
    int dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sigma_max == 0.0 || sv(i) < kKernelRelTol * sigma_max) ++dim;
    InteriorKernel out;
    out.dimension = dim;
    out.basis = svd.matrixV().rightCols(dim);
    return out;
}

} // namespace qgs
