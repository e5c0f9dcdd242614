#include "qgs/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qgs {

namespace {

const cplx kI(0.0, 1.0);

std::string vertex_label(int v) {
    return "vertex " + std::to_string(v);
}

} // namespace

MetricGraph::MetricGraph(int vertex_count, std::vector<Ray> rays,
                         std::vector<Edge> edges)
    : vertex_count_(vertex_count), rays_(std::move(rays)),
      edges_(std::move(edges)) {
    if (vertex_count_ <= 0) throw Error("graph needs at least one vertex");
    auto in_range = [this](int v) { return v >= 0 && v < vertex_count_; };
    for (const auto& r : rays_)
        if (!in_range(r.vertex)) throw Error("ray anchored at unknown vertex");
    for (const auto& e : edges_)
        if (!in_range(e.u) || !in_range(e.v))
            throw Error("edge endpoint at unknown vertex");
}

std::vector<IncidentEnd> MetricGraph::incident_ends(int vertex) const {
    std::vector<IncidentEnd> ends;
    for (int i = 0; i < ray_count(); ++i)
        if (rays_[i].vertex == vertex)
            ends.push_back({IncidentEnd::Kind::ray, i});
    for (int e = 0; e < edge_count(); ++e) {
        if (edges_[e].u == vertex)
            ends.push_back({IncidentEnd::Kind::edge_start, e});
        if (edges_[e].v == vertex)
            ends.push_back({IncidentEnd::Kind::edge_end, e});
    }
    return ends;
}

int MetricGraph::degree(int vertex) const {
    return static_cast<int>(incident_ends(vertex).size());
}

bool MetricGraph::connected() const {
    std::vector<char> seen(vertex_count_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const auto& e : edges_) {
            if (e.u == v && !seen[e.v]) { seen[e.v] = 1; stack.push_back(e.v); }
            if (e.v == v && !seen[e.u]) { seen[e.u] = 1; stack.push_back(e.u); }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

std::vector<Violation> validate(const MetricGraph& graph,
                                const VertexConditions& conditions) {
    std::vector<Violation> out;
    if (graph.ray_count() < 1)
        out.push_back({"graph", "no rays: the graph must be non-compact"});
    if (!graph.connected())
        out.push_back({"graph", "not connected"});

    for (int e = 0; e < graph.edge_count(); ++e) {
        const Edge& edge = graph.edges()[e];
        const std::string where = "edge " + std::to_string(e);
        if (!(edge.length > 0.0) || !std::isfinite(edge.length))
            out.push_back({where, "nonpositive length"});
        else if (edge.potential.support_end() > edge.length + 1e-12)
            out.push_back({where, "potential support exceeds edge length"});
    }

    if (static_cast<int>(conditions.size()) != graph.vertex_count()) {
        out.push_back({"conditions", "one (A, B) pair per vertex required"});
        return out;
    }
    for (int v = 0; v < graph.vertex_count(); ++v) {
        const int d = graph.degree(v);
        const std::string where = vertex_label(v);
        if (d == 0) {
            out.push_back({where, "isolated vertex"});
            continue;
        }
        const Matrix& a = conditions[v].a;
        const Matrix& b = conditions[v].b;
        if (a.rows() != d || a.cols() != d || b.rows() != d || b.cols() != d) {
            out.push_back({where, "condition matrices must be degree x degree"});
            continue;
        }
        Matrix ab(d, 2 * d);
        ab << a, b;
        if (numerical_rank(ab) != d)
            out.push_back({where, "rank [A|B] is below the vertex degree"});
        Matrix h = a * b.adjoint();
        const double scale =
            std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
        if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale * scale)
            out.push_back({where, "A B^dagger is not hermitian"});
    }
    return out;
}

VertexConditions kirchhoff_conditions(const MetricGraph& graph) {
    VertexConditions out;
    out.reserve(graph.vertex_count());
    for (int v = 0; v < graph.vertex_count(); ++v) {
        const int d = graph.degree(v);
        Matrix a = Matrix::Zero(d, d);
        Matrix b = Matrix::Zero(d, d);
        for (int r = 0; r + 1 < d; ++r) {
            a(r, r) = 1.0;
            a(r, r + 1) = -1.0;
        }
        b.row(d - 1).setOnes(); // sum of inward derivatives vanishes
        out.push_back({std::move(a), std::move(b)});
    }
    return out;
}

VertexCondition dirichlet_condition(int degree) {
    return {Matrix::Identity(degree, degree), Matrix::Zero(degree, degree)};
}

VertexCondition vertex_condition_from_unitary(const Matrix& u) {
    if (!is_unitary(u))
        throw Error("vertex condition parameter must be unitary");
    const Matrix eye = Matrix::Identity(u.rows(), u.cols());
    return {u - eye, kI * (u + eye)};
}

StarDecomposition star_decomposition(
    const MetricGraph& graph, const VertexConditions& conditions,
    const std::map<int, double>& cut_overrides) {
    if (static_cast<int>(conditions.size()) != graph.vertex_count())
        throw Error("star_decomposition: one condition per vertex required");

    std::vector<double> cuts(graph.edge_count());
    for (int e = 0; e < graph.edge_count(); ++e) {
        const Edge& edge = graph.edges()[e];
        auto it = cut_overrides.find(e);
        const double c = (it != cut_overrides.end()) ? it->second
                                                     : 0.5 * edge.length;
        if (!(c > 0.0) || !(c < edge.length))
            throw DecompositionError("cut point outside edge " +
                                     std::to_string(e));
        if (!edge.potential.vanishes_around(c))
            throw DecompositionError(
                "potential support crosses the cut point of edge " +
                std::to_string(e));
        cuts[e] = c;
    }

    StarDecomposition sd;
    sd.stars.reserve(graph.vertex_count());
    // Star ray positions mirror incident_ends order, so each vertex
    // condition carries over verbatim.
    std::map<std::pair<int, int>, std::pair<int, int>> cut_slots;
    for (int v = 0; v < graph.vertex_count(); ++v) {
        std::vector<Ray> star_rays;
        std::vector<int> external;
        const auto ends = graph.incident_ends(v);
        for (int slot = 0; slot < static_cast<int>(ends.size()); ++slot) {
            const IncidentEnd& end = ends[slot];
            switch (end.kind) {
            case IncidentEnd::Kind::ray:
                star_rays.push_back({0, graph.rays()[end.index].potential});
                external.push_back(end.index);
                break;
            case IncidentEnd::Kind::edge_start: {
                const Edge& e = graph.edges()[end.index];
                star_rays.push_back({0, e.potential.clipped_below(cuts[end.index])});
                external.push_back(-1);
                cut_slots[{end.index, 0}] = {v, slot};
                break;
            }
            case IncidentEnd::Kind::edge_end: {
                const Edge& e = graph.edges()[end.index];
                star_rays.push_back(
                    {0, e.potential.reversed_above(cuts[end.index], e.length)});
                external.push_back(-1);
                cut_slots[{end.index, 1}] = {v, slot};
                break;
            }
            }
        }
        sd.stars.emplace_back(1, std::move(star_rays), std::vector<Edge>{});
        sd.conditions.push_back({conditions[v]});
        sd.external_ray.push_back(std::move(external));
    }
    for (int e = 0; e < graph.edge_count(); ++e) {
        const auto [ga, ra] = cut_slots.at({e, 0});
        const auto [gb, rb] = cut_slots.at({e, 1});
        sd.links.push_back({ga, ra, gb, rb, graph.edges()[e].length});
    }
    return sd;
}

} // namespace qgs
