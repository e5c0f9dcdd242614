#pragma once

#include "qgs/edge_solutions.hpp"
#include "qgs/metric_graph.hpp"

// Scattering matrices by direct solution of the vertex-condition linear
// system on the full graph, and detection of solutions supported on the
// compact part only (eigenvalues embedded in the continuous spectrum).

namespace qgs {

// Row i holds the outgoing amplitudes of the wave with unit incoming
// component on ray i. Unitary for real k != 0; symmetric whenever all
// condition matrices can be chosen real.
struct ScatteringMatrix {
    double k = 0.0;
    Matrix s;
    double unitarity_residual = 0.0; // max |S^dagger S - I|
};

double unitarity_defect(const Matrix& s);

// Solves, per incoming ray, for the n ray amplitudes and the 2p interior
// edge coefficients under all vertex conditions. One factorization of
// the shared coefficient matrix serves the n right-hand sides.
// Throws DegenerateSystemError when the system is singular at this k.
ScatteringMatrix scattering_direct(const MetricGraph& graph,
                                   const VertexConditions& conditions,
                                   Momentum k);

// Solutions that vanish identically on every ray. A nonzero dimension
// certifies a discrete eigenvalue at lambda = k^2 embedded in the
// continuous spectrum; `basis` holds (c_theta, c_phi) per edge columnwise.
struct InteriorKernel {
    int dimension = 0;
    Matrix basis; // 2p x dimension
};

InteriorKernel interior_kernel(const MetricGraph& graph,
                               const VertexConditions& conditions, Momentum k);

} // namespace qgs
