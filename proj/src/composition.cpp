#include "qgs/composition.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace qgs {

namespace {

const cplx kI(0.0, 1.0);

// Relative sigma_min below which the link block counts as singular.
constexpr double kConditionATol = 1e-10;

Matrix permuted(const Matrix& s, const std::vector<int>& order) {
    const int m = static_cast<int>(order.size());
    Matrix out(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) out(r, c) = s(order[r], order[c]);
    return out;
}

// Linked rays first (in link order), free rays after (ascending).
std::vector<int> linked_first_order(int m, const std::vector<int>& linked) {
    std::vector<char> taken(m, 0);
    std::vector<int> order = linked;
    for (int r : linked) {
        if (r < 0 || r >= m) throw Error("link refers to an unknown ray");
        if (taken[r]) throw Error("ray linked twice");
        taken[r] = 1;
    }
    for (int r = 0; r < m; ++r)
        if (!taken[r]) order.push_back(r);
    return order;
}

} // namespace

std::vector<int> BlockLayout::linked_index_set() const {
    std::vector<int> out(2 * p);
    for (int i = 0; i < 2 * p; ++i) out[i] = i;
    return out;
}

std::vector<int> BlockLayout::matching_index_set() const {
    std::vector<int> out;
    for (int i = 0; i < m(); ++i) out.push_back(i);
    for (int i = 2 * p + m(); i < 2 * m(); ++i) out.push_back(i);
    return out;
}

Matrix assemble_block_S(const Matrix& s1, const Matrix& s2,
                        const BlockLayout& layout) {
    if (s1.rows() != layout.m1 || s1.cols() != layout.m1 ||
        s2.rows() != layout.m2 || s2.cols() != layout.m2)
        throw DimensionError("assemble_block_S: inputs do not match layout");
    if (layout.p < 0 || layout.p > layout.m1 || layout.p > layout.m2)
        throw DimensionError("assemble_block_S: invalid number of links");
    const int p = layout.p, n1 = layout.n1(), n2 = layout.n2();
    Matrix out = Matrix::Zero(layout.m(), layout.m());
    // Row/column groups: [p linked of 1 | p linked of 2 | n2 free | n1 free].
    out.block(0, 0, p, p) = s1.topLeftCorner(p, p);
    out.block(0, 2 * p + n2, p, n1) = s1.topRightCorner(p, n1);
    out.block(2 * p + n2, 0, n1, p) = s1.bottomLeftCorner(n1, p);
    out.block(2 * p + n2, 2 * p + n2, n1, n1) = s1.bottomRightCorner(n1, n1);
    out.block(p, p, p, p) = s2.topLeftCorner(p, p);
    out.block(p, 2 * p, p, n2) = s2.topRightCorner(p, n2);
    out.block(2 * p, p, n2, p) = s2.bottomLeftCorner(n2, p);
    out.block(2 * p, 2 * p, n2, n2) = s2.bottomRightCorner(n2, n2);
    return out;
}

Matrix assemble_T(const BlockLayout& layout, const std::vector<cplx>& zeta) {
    if (static_cast<int>(zeta.size()) != layout.p)
        throw DimensionError("assemble_T: one phase per link required");
    const int p = layout.p, m = layout.m();
    for (const cplx& z : zeta)
        if (std::abs(std::abs(z) - 1.0) > 1e-12)
            throw Error("assemble_T: link phases must have unit modulus");
    Matrix t = Matrix::Zero(m, m);
    for (int j = 0; j < p; ++j) {
        t(j, p + j) = zeta[j];
        t(p + j, j) = zeta[j];
    }
    for (int j = 2 * p; j < m; ++j) t(j, j) = 1.0;
    return t;
}

HBlocks h_blocks(const Matrix& s_m, const Matrix& t_m) {
    if (s_m.rows() != t_m.rows() || s_m.cols() != t_m.cols())
        throw DimensionError("h_blocks: size mismatch");
    const Matrix prod = s_m * t_m.adjoint();
    const Matrix eye = Matrix::Identity(prod.rows(), prod.cols());
    return HBlocks{0.5 * (prod + eye), 0.5 * kI * (prod - eye)};
}

LinkReduction reduce_linked(const Matrix& s_m, const std::vector<cplx>& zeta,
                            int p) {
    const int m = static_cast<int>(s_m.rows());
    const int n = m - 2 * p;
    if (n < 0) throw DimensionError("reduce_linked: too many links");
    if (static_cast<int>(zeta.size()) != p)
        throw DimensionError("reduce_linked: one phase per link required");
    Matrix t = Matrix::Zero(m, m);
    for (int j = 0; j < p; ++j) {
        t(j, p + j) = zeta[j];
        t(p + j, j) = zeta[j];
    }
    for (int j = 2 * p; j < m; ++j) t(j, j) = 1.0;

    HBlocks h = h_blocks(s_m, t);
    if (p == 0)
        return LinkReduction{h.a - kI * h.b, std::nullopt, std::nullopt};

    const Matrix b_link = h.b.topLeftCorner(2 * p, 2 * p);
    Eigen::JacobiSVD<Matrix> svd(b_link);
    const double sigma_max = svd.singularValues()(0);
    const double sigma_min = svd.singularValues()(2 * p - 1);
    if (sigma_max == 0.0 || sigma_min < kConditionATol * sigma_max)
        throw ConditionAError(
            "condition A: link block singular, possible embedded eigenvalue "
            "(sigma_min " + std::to_string(sigma_min) + ")",
            sigma_min);

    const Matrix rhs =
        h.a.topRightCorner(2 * p, n) - kI * h.b.topRightCorner(2 * p, n);
    Matrix s = h.a.bottomRightCorner(n, n) - kI * h.b.bottomRightCorner(n, n) -
               h.b.bottomLeftCorner(n, 2 * p) *
                   Eigen::PartialPivLU<Matrix>(b_link).solve(rhs);
    return LinkReduction{std::move(s), sigma_min, sigma_max};
}

ComposeResult compose(const Matrix& s1, const Matrix& s2,
                      const std::vector<LinkPair>& links, Momentum k) {
    const int m1 = static_cast<int>(s1.rows());
    const int m2 = static_cast<int>(s2.rows());
    if (!is_unitary(s1) || !is_unitary(s2))
        throw Error("compose: input scattering matrices must be unitary");
    const int p = static_cast<int>(links.size());
    if (p > m1 || p > m2)
        throw DimensionError("compose: more links than rays");

    std::vector<int> linked1, linked2;
    std::vector<cplx> zeta;
    for (const auto& link : links) {
        if (!(link.length > 0.0))
            throw Error("compose: link lengths must be positive");
        linked1.push_back(link.ray_a);
        linked2.push_back(link.ray_b);
        zeta.push_back(k.phase(link.length));
    }
    const std::vector<int> order1 = linked_first_order(m1, linked1);
    const std::vector<int> order2 = linked_first_order(m2, linked2);
    const Matrix s1p = permuted(s1, order1);
    const Matrix s2p = permuted(s2, order2);

    const BlockLayout layout{m1, m2, p};
    const Matrix s_m = assemble_block_S(s1p, s2p, layout);
    LinkReduction reduction = reduce_linked(s_m, zeta, p);

    // Closed-form route on the same permuted blocks.
    const int n1 = layout.n1(), n2 = layout.n2(), n = layout.n();
    Matrix closed(n, n);
    closed.setZero();
    closed.topLeftCorner(n2, n2) = s2p.bottomRightCorner(n2, n2);
    closed.bottomRightCorner(n1, n1) = s1p.bottomRightCorner(n1, n1);
    if (p > 0) {
        Matrix zd = Matrix::Zero(p, p);
        for (int j = 0; j < p; ++j) zd(j, j) = zeta[j];
        Matrix core(2 * p, 2 * p);
        core << zd, -s1p.topLeftCorner(p, p), -s2p.topLeftCorner(p, p), zd;
        Matrix right = Matrix::Zero(2 * p, n);
        right.topRightCorner(p, n1) = s1p.topRightCorner(p, n1);
        right.bottomLeftCorner(p, n2) = s2p.topRightCorner(p, n2);
        Matrix left = Matrix::Zero(n, 2 * p);
        left.topLeftCorner(n2, p) = s2p.bottomLeftCorner(n2, p);
        left.bottomRightCorner(n1, p) = s1p.bottomLeftCorner(n1, p);
        closed += left * Eigen::PartialPivLU<Matrix>(core).solve(right);
    }

    const double agreement =
        (n > 0) ? (reduction.s - closed).cwiseAbs().maxCoeff() : 0.0;
    double rel = 1.0;
    if (reduction.sigma_min && reduction.sigma_max && *reduction.sigma_max > 0)
        rel = *reduction.sigma_min / *reduction.sigma_max;
    if (agreement > std::max(1e-10, 1e-12 / rel))
        throw ConsistencyError(
            "compose: block reduction and closed form disagree by " +
            std::to_string(agreement));

    ComposeResult out;
    out.s = ScatteringMatrix{k.k, std::move(reduction.s), 0.0};
    out.s.unitarity_residual = (n > 0) ? unitarity_defect(out.s.s) : 0.0;
    if (out.s.unitarity_residual > std::max(1e-8, 1e-12 / rel))
        throw ConsistencyError("compose: result is not unitary (residual " +
                               std::to_string(out.s.unitarity_residual) + ")");
    out.sigma_min = reduction.sigma_min;
    out.sigma_max = reduction.sigma_max;
    out.route_agreement = agreement;
    for (int i = p; i < m2; ++i) out.ray_order.emplace_back(1, order2[i]);
    for (int i = p; i < m1; ++i) out.ray_order.emplace_back(0, order1[i]);
    return out;
}

MultiComposeResult compose_many(const std::vector<Matrix>& s_list,
                                const std::vector<GraphLink>& links,
                                Momentum k) {
    const int count = static_cast<int>(s_list.size());
    if (count == 0) throw Error("compose_many: empty constituent list");
    std::set<std::pair<int, int>> used;
    for (const auto& link : links) {
        if (link.graph_a < 0 || link.graph_a >= count || link.graph_b < 0 ||
            link.graph_b >= count)
            throw Error("compose_many: link refers to an unknown constituent");
        if (link.graph_a == link.graph_b)
            throw DecompositionError(
                "compose_many: link joins two rays of the same constituent; "
                "not reducible to pairwise composition");
        for (auto end : {std::make_pair(link.graph_a, link.ray_a),
                         std::make_pair(link.graph_b, link.ray_b)}) {
            if (end.second < 0 ||
                end.second >= static_cast<int>(s_list[end.first].rows()))
                throw Error("compose_many: link refers to an unknown ray");
            if (!used.insert(end).second)
                throw Error("compose_many: ray used by two links");
        }
    }

    Matrix agg = s_list[0];
    std::vector<std::pair<int, int>> agg_rays;
    for (int r = 0; r < static_cast<int>(agg.rows()); ++r)
        agg_rays.emplace_back(0, r);

    for (int g = 1; g < count; ++g) {
        // Gather every link between the aggregate {0..g-1} and g.
        std::vector<LinkPair> pairs;
        auto agg_position = [&agg_rays](int graph, int ray) {
            for (int i = 0; i < static_cast<int>(agg_rays.size()); ++i)
                if (agg_rays[i] == std::make_pair(graph, ray)) return i;
            throw Error("compose_many: linked ray already consumed");
        };
        for (const auto& link : links) {
            if (link.graph_b == g && link.graph_a < g)
                pairs.push_back(
                    {agg_position(link.graph_a, link.ray_a), link.ray_b,
                     link.length});
            else if (link.graph_a == g && link.graph_b < g)
                pairs.push_back(
                    {agg_position(link.graph_b, link.ray_b), link.ray_a,
                     link.length});
        }
        ComposeResult step = compose(agg, s_list[g], pairs, k);
        std::vector<std::pair<int, int>> next_rays;
        for (const auto& [side, idx] : step.ray_order)
            next_rays.push_back(side == 0 ? agg_rays[idx]
                                          : std::make_pair(g, idx));
        agg = std::move(step.s.s);
        agg_rays = std::move(next_rays);
    }

    MultiComposeResult out;
    out.s = ScatteringMatrix{k.k, std::move(agg), 0.0};
    out.s.unitarity_residual =
        out.s.s.size() > 0 ? unitarity_defect(out.s.s) : 0.0;
    out.ray_order = std::move(agg_rays);
    return out;
}

ScatteringMatrix scattering_composed(const MetricGraph& graph,
                                     const VertexConditions& conditions,
                                     Momentum k) {
    StarDecomposition sd = star_decomposition(graph, conditions);
    std::vector<Matrix> s_list;
    s_list.reserve(sd.stars.size());
    for (std::size_t i = 0; i < sd.stars.size(); ++i)
        s_list.push_back(scattering_direct(sd.stars[i], sd.conditions[i], k).s);
    MultiComposeResult mc = compose_many(s_list, sd.links, k);

    // Map composed rows back to the graph's own ray indices.
    const int n = graph.ray_count();
    if (static_cast<int>(mc.ray_order.size()) != n)
        throw ConsistencyError("scattering_composed: ray count mismatch");
    std::vector<int> position(n, -1);
    for (int i = 0; i < n; ++i) {
        const auto [star, star_ray] = mc.ray_order[i];
        const int original = sd.external_ray[star][star_ray];
        if (original < 0 || position[original] != -1)
            throw ConsistencyError("scattering_composed: bad ray bookkeeping");
        position[original] = i;
    }
    Matrix s(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) s(r, c) = mc.s.s(position[r], position[c]);
    ScatteringMatrix out{k.k, std::move(s), 0.0};
    out.unitarity_residual = unitarity_defect(out.s);
    return out;
}

LinkedAssembly assemble_linked(const std::vector<Matrix>& s_list,
                               const std::vector<GraphLink>& links,
                               Momentum k) {
    const int count = static_cast<int>(s_list.size());
    const int p = static_cast<int>(links.size());
    int total = 0;
    for (const auto& s : s_list) total += static_cast<int>(s.rows());
    if (2 * p > total) throw DimensionError("assemble_linked: too many links");

    // Global order: link j's first ray at j, second at p + j; free rays
    // after in (graph, ray) order.
    std::vector<std::pair<int, int>> order(2 * p);
    std::set<std::pair<int, int>> used;
    std::vector<cplx> zeta;
    for (int j = 0; j < p; ++j) {
        const GraphLink& link = links[j];
        order[j] = {link.graph_a, link.ray_a};
        order[p + j] = {link.graph_b, link.ray_b};
        for (auto end : {order[j], order[p + j]}) {
            if (end.first < 0 || end.first >= count || end.second < 0 ||
                end.second >= static_cast<int>(s_list[end.first].rows()))
                throw Error("assemble_linked: link out of range");
            if (!used.insert(end).second)
                throw Error("assemble_linked: ray used by two links");
        }
        zeta.push_back(k.phase(link.length));
    }
    LinkedAssembly out;
    for (int g = 0; g < count; ++g)
        for (int r = 0; r < static_cast<int>(s_list[g].rows()); ++r)
            if (!used.count({g, r})) {
                order.push_back({g, r});
                out.free_rays.emplace_back(g, r);
            }

    const int m = static_cast<int>(order.size());
    Matrix s_m = Matrix::Zero(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
            if (order[r].first == order[c].first)
                s_m(r, c) = s_list[order[r].first](order[r].second,
                                                   order[c].second);
    out.s_m = std::move(s_m);
    out.zeta = std::move(zeta);
    out.p = p;
    return out;
}

LinkBlockSigma link_block_sigma(const StarDecomposition& stars, Momentum k) {
    std::vector<Matrix> s_list;
    for (std::size_t i = 0; i < stars.stars.size(); ++i)
        s_list.push_back(
            scattering_direct(stars.stars[i], stars.conditions[i], k).s);
    LinkedAssembly assembly = assemble_linked(s_list, stars.links, k);
    if (assembly.p == 0)
        throw Error("link_block_sigma: the decomposition has no links");
    Matrix t = Matrix::Zero(assembly.s_m.rows(), assembly.s_m.cols());
    for (int j = 0; j < assembly.p; ++j) {
        t(j, assembly.p + j) = assembly.zeta[j];
        t(assembly.p + j, j) = assembly.zeta[j];
    }
    for (int j = 2 * assembly.p; j < t.rows(); ++j) t(j, j) = 1.0;
    HBlocks h = h_blocks(assembly.s_m, t);
    Eigen::JacobiSVD<Matrix> svd(
        h.b.topLeftCorner(2 * assembly.p, 2 * assembly.p));
    return LinkBlockSigma{svd.singularValues()(2 * assembly.p - 1),
                          svd.singularValues()(0)};
}

namespace {

// Golden-section minimisation of f over [a, b]; f need not be smooth at
// the minimum (sigma_min is V-shaped at a crossing).
template <typename F>
double golden_minimize(F&& f, double a, double b, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    int guard = 0;
    while (b - a > tol && ++guard < 300) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

std::vector<ScanHit> embedded_eigenvalue_scan(const MetricGraph& graph,
                                              const VertexConditions& conditions,
                                              std::span<const double> k_grid,
                                              const ScanConfig& config) {
    StarDecomposition sd = star_decomposition(graph, conditions);
    if (sd.links.empty()) return {}; // no compact part, nothing embedded

    auto sigma_at = [&sd](double k) -> LinkBlockSigma {
        return link_block_sigma(sd, Momentum(k));
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> sigma(k_grid.size(), nan);
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
        try {
            sigma[i] = sigma_at(k_grid[i]).sigma_min;
        } catch (const DegenerateSystemError&) {
            // A star itself is degenerate at this grid point; skip it.
        }
    }

    std::vector<ScanHit> hits;
    for (std::size_t i = 1; i + 1 < k_grid.size(); ++i) {
        if (std::isnan(sigma[i]) || std::isnan(sigma[i - 1]) ||
            std::isnan(sigma[i + 1]))
            continue;
        if (!(sigma[i] <= sigma[i - 1] && sigma[i] <= sigma[i + 1])) continue;
        const double k_star = golden_minimize(
            [&sigma_at](double k) { return sigma_at(k).sigma_min; },
            k_grid[i - 1], k_grid[i + 1], config.refine_dk);
        LinkBlockSigma refined = sigma_at(k_star);
        if (refined.sigma_max <= 0.0 ||
            refined.sigma_min / refined.sigma_max >= config.report_threshold)
            continue;
        if (!hits.empty() && std::abs(hits.back().k - k_star) < 1e-8) continue;
        const InteriorKernel kern = interior_kernel(graph, conditions,
                                                    Momentum(k_star));
        hits.push_back({k_star, refined.sigma_min, kern.dimension});
    }
    return hits;
}

} // namespace qgs
