#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qgs/direct_scattering.hpp"
#include "qgs/metric_graph.hpp"

// Composition of scattering matrices: two graphs (or a whole list)
// linked along truncated rays yield a composed scattering matrix through
// the block reduction of the joint transform, with the link block's
// singularity signalling embedded eigenvalues.

namespace qgs {

// Index bookkeeping for a two-graph link layout. Ray positions follow
// the convention: 0..p-1 the linked rays of the first graph, p..2p-1 the
// linked rays of the second, then the free rays of the second, then the
// free rays of the first.
struct BlockLayout {
    int m1 = 0; // rays of the first graph
    int m2 = 0; // rays of the second graph
    int p = 0;  // number of linked pairs

    int n1() const { return m1 - p; }
    int n2() const { return m2 - p; }
    int n() const { return n1() + n2(); }
    int m() const { return m1 + m2; }

    // Positions of the link subspace basis (0-based): {0, ..., 2p-1}.
    std::vector<int> linked_index_set() const;
    // Positions spanning the matching subspace: {0..m-1, 2p+m..2m-1}.
    std::vector<int> matching_index_set() const;
};

// Block arrangement of two unitaries whose first p rows/columns refer to
// the rays being linked. Equals the direct sum permuted into the layout
// order; unitary.
Matrix assemble_block_S(const Matrix& s1, const Matrix& s2,
                        const BlockLayout& layout);

// The "scattering matrix" of the link plane: swaps linked pairs with the
// phases zeta_j = e^{-i k a_j} and fixes the free rays. Unitary and
// symmetric.
Matrix assemble_T(const BlockLayout& layout, const std::vector<cplx>& zeta);

// A = 1/2 (S T^dagger + I), B = i/2 (S T^dagger - I); the expanded
// transform [[A, B], [-B, A]] factors as g(S) g(T)^dagger.
struct HBlocks {
    Matrix a;
    Matrix b;
};
HBlocks h_blocks(const Matrix& s_m, const Matrix& t_m);

// Core reduction: eliminate the 2p linked directions from the block
// transform of (s_m, T(zeta)) and return the scattering matrix of the
// composite on the m - 2p free rays. Refuses (ConditionAError) when the
// link block is singular relative to 1e-10.
struct LinkReduction {
    Matrix s;
    std::optional<double> sigma_min; // of the 2p x 2p link block
    std::optional<double> sigma_max;
};
LinkReduction reduce_linked(const Matrix& s_m, const std::vector<cplx>& zeta,
                            int p);

struct LinkPair {
    int ray_a = 0;
    int ray_b = 0;
    double length = 0.0;
};

struct ComposeResult {
    ScatteringMatrix s;
    // Output row r describes (which input graph: 0 or 1, original ray index).
    std::vector<std::pair<int, int>> ray_order;
    std::optional<double> sigma_min;
    std::optional<double> sigma_max;
    double route_agreement = 0.0; // block algebra vs closed form
};

// Composes the scattering matrices of two graphs joined along the given
// ray pairs. Evaluates both the block-algebra reduction and the closed
// form and cross-checks them; the result is unitary away from the
// singular locus of the link block.
ComposeResult compose(const Matrix& s1, const Matrix& s2,
                      const std::vector<LinkPair>& links, Momentum k);

struct MultiComposeResult {
    ScatteringMatrix s;
    std::vector<std::pair<int, int>> ray_order; // (graph index, ray index)
};

// Pairwise fold of compose() in list order, absorbing at each step every
// link between the aggregate and the next constituent. Links pairing two
// rays of the same constituent are not reducible this way and are
// rejected.
MultiComposeResult compose_many(const std::vector<Matrix>& s_list,
                                const std::vector<GraphLink>& links,
                                Momentum k);

// Star-decomposes the graph, solves each single-vertex star directly,
// folds the composition, and reorders rows/columns to the graph's own
// ray indexing.
ScatteringMatrix scattering_composed(const MetricGraph& graph,
                                     const VertexConditions& conditions,
                                     Momentum k);

// Joint assembly of all constituents with every link applied at once:
// the linked pairs occupy positions (j, p+j), free rays follow in
// (graph, ray) order. This is what the embedded-eigenvalue criterion
// evaluates.
struct LinkedAssembly {
    Matrix s_m;
    std::vector<cplx> zeta;
    int p = 0;
    std::vector<std::pair<int, int>> free_rays;
};
LinkedAssembly assemble_linked(const std::vector<Matrix>& s_list,
                               const std::vector<GraphLink>& links,
                               Momentum k);

// sigma_min and sigma_max of the link block of the one-star-per-vertex
// decomposition at momentum k.
struct LinkBlockSigma {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};
LinkBlockSigma link_block_sigma(const StarDecomposition& stars, Momentum k);

struct ScanHit {
    double k = 0.0;
    double sigma_min = 0.0; // of the link block at k
    int kernel_dim = 0;     // confirmed by the direct interior solve
};

struct ScanConfig {
    double report_threshold = 1e-4; // relative sigma_min that counts as a hit
    double refine_dk = 1e-10;       // golden-section interval target
};

// Scans sigma_min of the link block over the grid, refines each local
// minimum by golden section, keeps those below the threshold, and
// cross-checks every hit against the direct interior solve.
std::vector<ScanHit> embedded_eigenvalue_scan(const MetricGraph& graph,
                                              const VertexConditions& conditions,
                                              std::span<const double> k_grid,
                                              const ScanConfig& config = {});

} // namespace qgs
