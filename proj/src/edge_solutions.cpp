#include "qgs/edge_solutions.hpp"

#include <algorithm>
#include <cmath>

namespace qgs {

namespace {

const cplx kI(0.0, 1.0);

// cos(sqrt(z)) and sin(sqrt(z))/sqrt(z) as entire functions of z,
// valid for either sign of z = (k^2 - q) * dx^2. The series branch
// avoids cancellation near z = 0 (|kappa * dx| < 1e-4).
void trig_pair(double z, double& c, double& s) {
    if (std::abs(z) < 1e-8) {
        c = 1.0 + z * (-0.5 + z * (1.0 / 24.0 - z / 720.0));
        s = 1.0 + z * (-1.0 / 6.0 + z * (1.0 / 120.0 - z / 5040.0));
    } else if (z > 0.0) {
        const double r = std::sqrt(z);
        c = std::cos(r);
        s = std::sin(r) / r;
    } else {
        const double r = std::sqrt(-z);
        c = std::cosh(r);
        s = std::sinh(r) / r;
    }
}

// Transfer matrix across a single constant-q stretch of width dx.
Eigen::Matrix2cd constant_step(double k2_minus_q, double dx) {
    double c, s;
    trig_pair(k2_minus_q * dx * dx, c, s);
    Eigen::Matrix2cd t;
    t << cplx(c), cplx(dx * s),
        cplx(-k2_minus_q * dx * s), cplx(c);
    return t;
}

} // namespace

PiecewisePotential::PiecewisePotential(std::vector<PotentialSegment> segments)
    : segments_(std::move(segments)) {
    for (const auto& seg : segments_) {
        if (!(seg.width > 0.0) || !std::isfinite(seg.width))
            throw Error("potential segment width must be positive");
        if (!std::isfinite(seg.q))
            throw Error("potential segment value must be finite");
        support_end_ += seg.width;
    }
}

bool PiecewisePotential::is_zero() const {
    return std::all_of(segments_.begin(), segments_.end(),
                       [](const PotentialSegment& s) { return s.q == 0.0; });
}

double PiecewisePotential::value_at(double x) const {
    double pos = 0.0;
    for (const auto& seg : segments_) {
        if (x < pos + seg.width) return x >= pos ? seg.q : 0.0;
        pos += seg.width;
    }
    return 0.0;
}

bool PiecewisePotential::vanishes_around(double x) const {
    bool nonzero_left = false, nonzero_right = false;
    double pos = 0.0;
    for (const auto& seg : segments_) {
        const double lo = pos, hi = pos + seg.width;
        if (seg.q != 0.0) {
            if (x > lo && x < hi) return false; // interior of support
            if (hi == x) nonzero_left = true;   // support touches from the left
            if (lo == x) nonzero_right = true;  // ... and from the right
        }
        pos = hi;
    }
    return !(nonzero_left && nonzero_right);
}

PiecewisePotential PiecewisePotential::clipped_below(double cut) const {
    std::vector<PotentialSegment> out;
    double pos = 0.0;
    for (const auto& seg : segments_) {
        if (pos >= cut) break;
        const double w = std::min(seg.width, cut - pos);
        out.push_back({w, seg.q});
        pos += seg.width;
    }
    // Trailing zero stretches carry no information.
    while (!out.empty() && out.back().q == 0.0) out.pop_back();
    return out.empty() ? PiecewisePotential() : PiecewisePotential(out);
}

PiecewisePotential PiecewisePotential::reversed_above(
    double cut, double total_length) const {
    // Walk [cut, total_length] and emit segments as seen from the far end.
    std::vector<PotentialSegment> out;
    double pos = 0.0;
    for (const auto& seg : segments_) {
        const double lo = std::max(pos, cut);
        const double hi = pos + seg.width;
        if (hi > lo) out.push_back({hi - lo, seg.q});
        pos += seg.width;
    }
    if (pos < total_length) out.push_back({total_length - pos, 0.0});
    std::reverse(out.begin(), out.end());
    while (!out.empty() && out.back().q == 0.0) out.pop_back();
    return out.empty() ? PiecewisePotential() : PiecewisePotential(out);
}

Eigen::Matrix2cd transfer_matrix(const PiecewisePotential& potential,
                                 Momentum k, double x0, double x1) {
    if (!(x0 >= 0.0) || !(x1 >= x0))
        throw Error("transfer_matrix requires 0 <= x0 <= x1");
    Eigen::Matrix2cd t = Eigen::Matrix2cd::Identity();
    double pos = 0.0;
    for (const auto& seg : potential.segments()) {
        const double lo = std::max(pos, x0);
        const double hi = std::min(pos + seg.width, x1);
        if (hi > lo) t = constant_step(k.lambda() - seg.q, hi - lo) * t;
        pos += seg.width;
    }
    if (x1 > std::max(x0, potential.support_end()))
        t = constant_step(k.lambda(), x1 - std::max(x0, potential.support_end())) * t;
    return t;
}

StandardSolutions standard_solutions_at(const PiecewisePotential& potential,
                                        Momentum k, double a) {
    const Eigen::Matrix2cd t = transfer_matrix(potential, k, 0.0, a);
    return StandardSolutions{t(0, 0), t(1, 0), t(0, 1), t(1, 1)};
}

BoundaryData jost_boundary_data(const PiecewisePotential& ray_potential,
                                Momentum k, JostSign sign) {
    const double s = ray_potential.support_end();
    const double sk = (sign == JostSign::plus) ? k.k : -k.k;
    const cplx at_support(std::exp(cplx(0.0, sk * s)));
    if (s == 0.0) return BoundaryData{at_support, kI * sk * at_support};
    const Eigen::Matrix2cd t = transfer_matrix(ray_potential, k, 0.0, s);
    // Backward propagation with the inverse; det t == 1.
    const cplx det = t(0, 0) * t(1, 1) - t(0, 1) * t(1, 0);
    Eigen::Vector2cd end(at_support, kI * sk * at_support);
    Eigen::Matrix2cd inv;
    inv << t(1, 1), -t(0, 1), -t(1, 0), t(0, 0);
    Eigen::Vector2cd start = (inv * end) / det;
    return BoundaryData{start(0), start(1)};
}

cplx asymptotic_form_eval(Momentum k, std::span<const BoundaryData> phi,
                          std::span<const BoundaryData> psi, bool normalized) {
    if (phi.size() != psi.size())
        throw DimensionError("asymptotic_form_eval: ray counts differ");
    cplx acc = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i)
        acc += std::conj(phi[i].value) * psi[i].derivative -
               std::conj(phi[i].derivative) * psi[i].value;
    return normalized ? acc / k.k : acc;
}

} // namespace qgs
