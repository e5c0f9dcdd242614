#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "qgs/errors.hpp"
#include "qgs/hermitian_symplectic.hpp"

// One-dimensional machinery for -psi'' + q psi = k^2 psi on intervals and
// rays: transfer matrices for piecewise-constant potentials, standard
// solutions, Jost boundary data, and the Wronskian form on ray data.

namespace qgs {

// Real nonzero momentum; the spectral parameter is lambda = k^2.
struct Momentum {
    double k;

    explicit Momentum(double k_value) : k(k_value) {
        if (k == 0.0 || !std::isfinite(k))
            throw Error("momentum must be real and nonzero");
    }
    double lambda() const { return k * k; }
    // Phase factor e^{-i k a} accumulated over a length a.
    cplx phase(double a) const { return std::exp(cplx(0.0, -k * a)); }
};

// Value and x-derivative of a solution at a point.
struct BoundaryData {
    cplx value;
    cplx derivative;
};

struct PotentialSegment {
    double width;
    double q;
};

// Piecewise-constant real potential on [0, support_end()), identically
// zero beyond. The finite-first-moment requirement is automatic.
class PiecewisePotential {
public:
    PiecewisePotential() = default; // q == 0
    explicit PiecewisePotential(std::vector<PotentialSegment> segments);

    const std::vector<PotentialSegment>& segments() const { return segments_; }
    double support_end() const { return support_end_; }
    bool is_zero() const;
    double value_at(double x) const;

    // True when q vanishes on an open neighbourhood of x (taking
    // everything beyond support_end() as zero).
    bool vanishes_around(double x) const;

    // Restriction to [0, cut], and the reversed restriction to [cut, end]
    // seen from the far endpoint. Both require vanishes_around(cut) or
    // cut >= support_end().
    PiecewisePotential clipped_below(double cut) const;
    PiecewisePotential reversed_above(double cut, double total_length) const;

private:
    std::vector<PotentialSegment> segments_;
    double support_end_ = 0.0;
};

// Maps (psi(x0), psi'(x0)) to (psi(x1), psi'(x1)) for solutions of
// -psi'' + q psi = k^2 psi. Determinant 1 (constancy of the Wronskian).
Eigen::Matrix2cd transfer_matrix(const PiecewisePotential& potential,
                                 Momentum k, double x0, double x1);

// Boundary data at x = a of the solutions with initial data (1,0) and
// (0,1) at x = 0; the columns of transfer_matrix(0 -> a).
struct StandardSolutions {
    cplx theta, theta_deriv;
    cplx phi, phi_deriv;
};
StandardSolutions standard_solutions_at(const PiecewisePotential& potential,
                                        Momentum k, double a);

enum class JostSign { plus, minus }; // asymptotics e^{+ikx} / e^{-ikx}

// Boundary data at x = 0 of the Jost solution on a ray, obtained by
// propagating the exact exponential data backward from the support end.
BoundaryData jost_boundary_data(const PiecewisePotential& ray_potential,
                                Momentum k, JostSign sign);

// sum_i [conj(phi_i) psi_i' - conj(phi_i') psi_i], divided by k when
// normalized. Independent of evaluation points for genuine solutions.
cplx asymptotic_form_eval(Momentum k, std::span<const BoundaryData> phi,
                          std::span<const BoundaryData> psi, bool normalized);

} // namespace qgs
