#pragma once

#include <map>
#include <string>
#include <vector>

#include "qgs/edge_solutions.hpp"
#include "qgs/errors.hpp"
#include "qgs/hermitian_symplectic.hpp"

// Data model for non-compact metric graphs with piecewise-constant
// potentials and self-adjoint vertex conditions, plus the splitting of a
// graph into one single-vertex star per vertex.

namespace qgs {

// Finite edge: coordinate x runs from u (x = 0) to v (x = length).
struct Edge {
    int u = 0;
    int v = 0;
    double length = 0.0;
    PiecewisePotential potential;
};

// Semi-infinite ray: x in [0, inf) from its anchor vertex.
struct Ray {
    int vertex = 0;
    PiecewisePotential potential;
};

// One endpoint of an edge or the root of a ray, as seen from a vertex.
struct IncidentEnd {
    enum class Kind { ray, edge_start, edge_end };
    Kind kind;
    int index; // ray index or edge index
};

// Component ordering convention: rays come first (indices 0..n-1), then
// edges (n..n+p-1). Within a vertex, incident ends are ordered rays
// first, then edge ends by edge index; for a self-loop the x=0 end
// precedes the x=length end. Vertex condition rows and star rays follow
// this order.
class MetricGraph {
public:
    MetricGraph(int vertex_count, std::vector<Ray> rays,
                std::vector<Edge> edges);

    int vertex_count() const { return vertex_count_; }
    const std::vector<Ray>& rays() const { return rays_; }
    const std::vector<Edge>& edges() const { return edges_; }
    int ray_count() const { return static_cast<int>(rays_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    std::vector<IncidentEnd> incident_ends(int vertex) const;
    int degree(int vertex) const;
    bool connected() const;

private:
    int vertex_count_;
    std::vector<Ray> rays_;
    std::vector<Edge> edges_;
};

// Self-adjoint conditions A psi + B psi' = 0 at one vertex, with psi the
// stacked boundary values over incident_ends() and psi' the stacked
// inward derivatives (+psi'(0) at an x=0 end, -psi'(length) at the far
// end). Requires rank [A|B] = degree and A B^dagger hermitian.
struct VertexCondition {
    Matrix a;
    Matrix b;
};

using VertexConditions = std::vector<VertexCondition>;

struct Violation {
    std::string where;
    std::string what;
};

// Checks every type invariant; violations are data, not failures.
std::vector<Violation> validate(const MetricGraph& graph,
                                const VertexConditions& conditions);

// Continuity of the value plus vanishing sum of inward derivatives at
// each vertex; a degree-1 vertex degenerates to psi' = 0.
VertexConditions kirchhoff_conditions(const MetricGraph& graph);

// Dirichlet: psi = 0 on every incident end (decouples the vertex).
VertexCondition dirichlet_condition(int degree);

// Interop with the unitary parametrisation of self-adjoint conditions:
// A = U - I, B = i(U + I). U = I gives Neumann, U = -I Dirichlet.
VertexCondition vertex_condition_from_unitary(const Matrix& u);

// Joining instruction between two constituents of a composite system:
// rays ray_a of graph_a and ray_b of graph_b become one edge of the
// given total length.
struct GraphLink {
    int graph_a = 0;
    int ray_a = 0;
    int graph_b = 0;
    int ray_b = 0;
    double length = 0.0;
};

// One single-vertex star per vertex, re-linked along truncated rays.
// external_ray[s][r] is the original ray index represented by ray r of
// star s, or -1 when that ray is one half of a cut edge.
struct StarDecomposition {
    std::vector<MetricGraph> stars;
    std::vector<VertexConditions> conditions;
    std::vector<GraphLink> links;
    std::vector<std::vector<int>> external_ray;
};

// Cuts every edge at its midpoint (per-edge override via cut_overrides,
// keyed by edge index). The cut must not fall inside the support of the
// edge potential; throws DecompositionError otherwise.
StarDecomposition star_decomposition(
    const MetricGraph& graph, const VertexConditions& conditions,
    const std::map<int, double>& cut_overrides = {});

} // namespace qgs
