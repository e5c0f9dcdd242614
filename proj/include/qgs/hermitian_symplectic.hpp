#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qgs/errors.hpp"

// Finite-dimensional hermitian symplectic linear algebra: anti-hermitian
// nondegenerate forms on C^{2m}, isotropic and Lagrange subspaces,
// orthogonal complements, quotients, and the correspondence between
// Lagrange planes and unitary matrices.

namespace qgs {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Relative singular-value cutoff for rank decisions.
inline constexpr double kRankRelTol = 1e-10;
// Absolute entrywise tolerance for isotropy tests on unit-norm bases.
inline constexpr double kIsotropyTol = 1e-9;
// Entrywise tolerance for "is this matrix unitary" checks.
inline constexpr double kUnitaryTol = 1e-8;

// Anti-hermitian nondegenerate form <phi,psi> = phi^dagger J psi on C^{2m}.
class HermitianForm {
public:
    // Canonical form with J = [[0, I_m], [-I_m, 0]].
    static HermitianForm canonical(int half_dim);

    // Validates J^dagger = -J, even dimension, nonsingularity.
    explicit HermitianForm(Matrix j);

    int dimension() const { return static_cast<int>(j_.rows()); }
    int half_dim() const { return dimension() / 2; }
    const Matrix& matrix() const { return j_; }

    cplx eval(const Vector& phi, const Vector& psi) const;

private:
    Matrix j_;
};

// Subspace of C^{ambient} stored as an explicit basis matrix of full
// column rank. The zero subspace is representable (dim() == 0) and is
// what dimension-collapsing operations return.
class Subspace {
public:
    explicit Subspace(Matrix basis);
    static Subspace zero(int ambient_dim);

    int ambient_dim() const { return static_cast<int>(basis_.rows()); }
    int dim() const { return static_cast<int>(basis_.cols()); }
    bool empty() const { return dim() == 0; }
    const Matrix& basis() const { return basis_; }

    // Span equality, decided by rank of the horizontal concatenation.
    bool spans_same(const Subspace& other) const;

    Subspace orthonormalized() const;

private:
    Matrix basis_;
};

int numerical_rank(const Matrix& m, double rel_tol = kRankRelTol);

// Orthonormal basis of the kernel of m (columns). May have zero columns.
Matrix kernel_basis(const Matrix& m, double rel_tol = kRankRelTol);

// Intersection of two column spans in the same ambient space.
Subspace intersect(const Subspace& a, const Subspace& b);

bool is_isotropic(const HermitianForm& form, const Subspace& w,
                  double tol = kIsotropyTol);

// Isotropic of maximal dimension (= half the ambient dimension).
bool is_lagrange(const HermitianForm& form, const Subspace& w,
                 double tol = kIsotropyTol);

// N^perp = { v : <n, v> = 0 for all n in N }; dimension 2m - dim N.
Subspace orthogonal_complement(const HermitianForm& form, const Subspace& n);

// Quotient of N^perp by an isotropic N. `projector` maps a vector of
// N^perp to its coset coordinates in C^{2(m-q)}; it annihilates exactly N,
// and the reduced form evaluates the original form on cosets.
struct Quotient {
    HermitianForm reduced_form;
    Matrix projector; // 2(m-q) x 2m
};
Quotient quotient_space(const HermitianForm& form, const Subspace& n);

// Image of L \cap N^perp in the quotient; a Lagrange plane of dimension
// m - q there whenever L is Lagrange and N isotropic.
Subspace project_lagrange(const HermitianForm& form, const Subspace& l,
                          const Subspace& n);

bool is_unitary(const Matrix& s, double tol = kUnitaryTol);

// The basis change taking the canonical basis to the one whose first m
// elements span the Lagrange plane parameterised by the unitary S:
//   g = 1/2 [[S+I, i(S-I)], [-i(S-I), S+I]].
// g is unitary and preserves the canonical form: g J g^dagger = J.
struct CanonicalBasisChange {
    Matrix unitary; // S, m x m
    Matrix g;       // 2m x 2m

    static CanonicalBasisChange from_unitary(Matrix s);
};

// Span of the first m rows of g, expressed in canonical coordinates.
Subspace lagrange_from_unitary(const Matrix& s);

// Inverse direction: recovers the unique unitary S whose plane is L.
// Requires the m x m block multiplying the "minus" directions to be
// invertible; a degenerate L is reported, never silently patched.
Matrix unitary_from_lagrange(const Subspace& l);

} // namespace qgs
