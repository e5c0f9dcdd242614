#include "qgs/hermitian_symplectic.hpp"

#include <Eigen/SVD>

namespace qgs {

namespace {

const cplx kI(0.0, 1.0);

Eigen::JacobiSVD<Matrix> svd_of(const Matrix& m, unsigned options = 0) {
    return Eigen::JacobiSVD<Matrix>(m, options);
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
    if (sv.size() == 0) return 0;
    const double cutoff = rel_tol * sv(0);
    if (sv(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++r;
    return r;
}

} // namespace

HermitianForm HermitianForm::canonical(int half_dim) {
    if (half_dim <= 0) throw DimensionError("canonical form needs m >= 1");
    Matrix j = Matrix::Zero(2 * half_dim, 2 * half_dim);
    j.topRightCorner(half_dim, half_dim) = Matrix::Identity(half_dim, half_dim);
    j.bottomLeftCorner(half_dim, half_dim) =
        -Matrix::Identity(half_dim, half_dim);
    return HermitianForm(std::move(j));
}

HermitianForm::HermitianForm(Matrix j) : j_(std::move(j)) {
    if (j_.rows() != j_.cols() || j_.rows() % 2 != 0)
        throw DimensionError("form matrix must be square of even dimension");
    if (j_.rows() == 0) return; // trivial quotient space
    const double scale = std::max(1.0, j_.cwiseAbs().maxCoeff());
    if (((j_.adjoint() + j_).cwiseAbs().maxCoeff()) > 1e-12 * scale)
        throw Error("form matrix is not anti-hermitian");
    if (numerical_rank(j_) != j_.rows())
        throw Error("form matrix is singular");
}

cplx HermitianForm::eval(const Vector& phi, const Vector& psi) const {
    if (phi.size() != dimension() || psi.size() != dimension())
        throw DimensionError("form_eval: vector does not match form dimension");
    return phi.dot(j_ * psi); // Eigen's dot conjugates the left argument
}

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
    if (basis_.rows() == 0)
        throw DimensionError("subspace needs a positive ambient dimension");
    if (basis_.cols() > basis_.rows())
        throw DimensionError("subspace basis has more columns than ambient dimension");
    if (basis_.cols() > 0 &&
        numerical_rank(basis_) != static_cast<int>(basis_.cols()))
        throw Error("subspace basis is not of full column rank");
}

Subspace Subspace::zero(int ambient_dim) {
    Subspace s;
    s.basis_ = Matrix::Zero(ambient_dim, 0);
    return s;
}

bool Subspace::spans_same(const Subspace& other) const {
    if (ambient_dim() != other.ambient_dim()) return false;
    if (dim() != other.dim()) return false;
    if (empty()) return true;
    Matrix joined(ambient_dim(), dim() + other.dim());
    joined << basis_, other.basis_;
    return numerical_rank(joined) == dim();
}

Subspace Subspace::orthonormalized() const {
    if (empty()) return *this;
    auto svd = svd_of(basis_, Eigen::ComputeThinU);
    const int r = rank_from_singular_values(svd.singularValues(), kRankRelTol);
    Subspace s;
    s.basis_ = svd.matrixU().leftCols(r);
    return s;
}

int numerical_rank(const Matrix& m, double rel_tol) {
    if (m.size() == 0) return 0;
    auto svd = svd_of(m);
    return rank_from_singular_values(svd.singularValues(), rel_tol);
}

Matrix kernel_basis(const Matrix& m, double rel_tol) {
    auto svd = svd_of(m, Eigen::ComputeFullV);
    const int r = rank_from_singular_values(svd.singularValues(), rel_tol);
    return svd.matrixV().rightCols(m.cols() - r);
}

Subspace intersect(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim())
        throw DimensionError("intersect: ambient dimensions differ");
    if (a.empty() || b.empty()) return Subspace::zero(a.ambient_dim());
    Matrix joined(a.ambient_dim(), a.dim() + b.dim());
    joined << a.basis(), -b.basis();
    Matrix k = kernel_basis(joined);
    if (k.cols() == 0) return Subspace::zero(a.ambient_dim());
    // Each kernel vector (x; y) satisfies A x = B y, a point of the
    // intersection; the map x -> A x is injective on the kernel.
    Matrix raw = a.basis() * k.topRows(a.dim());
    auto svd = svd_of(raw, Eigen::ComputeThinU);
    const int r = rank_from_singular_values(svd.singularValues(), kRankRelTol);
    if (r == 0) return Subspace::zero(a.ambient_dim());
    return Subspace(svd.matrixU().leftCols(r));
}

bool is_isotropic(const HermitianForm& form, const Subspace& w, double tol) {
    if (w.ambient_dim() != form.dimension())
        throw DimensionError("is_isotropic: subspace does not match form");
    if (w.empty()) return true;
    Matrix unit = w.basis();
    for (Eigen::Index c = 0; c < unit.cols(); ++c) unit.col(c).normalize();
    Matrix gram = unit.adjoint() * form.matrix() * unit;
    return gram.cwiseAbs().maxCoeff() <= tol;
}

bool is_lagrange(const HermitianForm& form, const Subspace& w, double tol) {
    return w.dim() == form.half_dim() && is_isotropic(form, w, tol);
}

Subspace orthogonal_complement(const HermitianForm& form, const Subspace& n) {
    if (n.ambient_dim() != form.dimension())
        throw DimensionError("orthogonal_complement: subspace does not match form");
    if (n.empty()) {
        return Subspace(Matrix::Identity(form.dimension(), form.dimension()));
    }
    Matrix k = kernel_basis(n.basis().adjoint() * form.matrix());
    if (k.cols() == 0) return Subspace::zero(form.dimension());
    return Subspace(std::move(k));
}

Quotient quotient_space(const HermitianForm& form, const Subspace& n) {
    if (n.ambient_dim() != form.dimension())
        throw DimensionError("quotient_space: subspace does not match form");
    const int dim = form.dimension();
    if (n.empty()) {
        return Quotient{form, Matrix::Identity(dim, dim)};
    }
    if (!is_isotropic(form, n))
        throw Error("quotient_space: subspace is not isotropic");

    const int q = n.dim();
    Subspace perp = orthogonal_complement(form, n);
    // N is isotropic, hence contained in N^perp; express it in the
    // orthonormal basis K of N^perp and complete to a basis of N^perp.
    const Matrix& k = perp.basis();
    Matrix coords = k.adjoint() * n.basis(); // (2m-q) x q
    auto svd = svd_of(coords, Eigen::ComputeFullU);
    Matrix complement = k * svd.matrixU().rightCols(perp.dim() - q);

    Matrix mixed(dim, perp.dim());
    mixed << n.basis(), complement;
    Matrix pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(mixed)
                      .pseudoInverse();
    Matrix projector = pinv.bottomRows(complement.cols());

    Matrix reduced = complement.adjoint() * form.matrix() * complement;
    // Clean up the anti-hermitian structure lost to roundoff.
    reduced = 0.5 * (reduced - reduced.adjoint().eval());
    return Quotient{HermitianForm(std::move(reduced)), std::move(projector)};
}

Subspace project_lagrange(const HermitianForm& form, const Subspace& l,
                          const Subspace& n) {
    if (n.empty()) return l;
    Subspace meet = intersect(l, orthogonal_complement(form, n));
    Quotient quot = quotient_space(form, n);
    if (meet.empty())
        return Subspace::zero(static_cast<int>(quot.projector.rows()));
    Matrix image = quot.projector * meet.basis();
    // The part of L meeting N itself collapses to zero here, so the image
    // can have lower rank than the intersection upstairs.
    auto svd = svd_of(image, Eigen::ComputeThinU);
    const int r = rank_from_singular_values(svd.singularValues(), kRankRelTol);
    if (r == 0) return Subspace::zero(static_cast<int>(quot.projector.rows()));
    return Subspace(svd.matrixU().leftCols(r));
}

bool is_unitary(const Matrix& s, double tol) {
    if (s.rows() != s.cols()) return false;
    Matrix defect = s.adjoint() * s - Matrix::Identity(s.rows(), s.cols());
    return defect.cwiseAbs().maxCoeff() <= tol;
}

CanonicalBasisChange CanonicalBasisChange::from_unitary(Matrix s) {
    if (!is_unitary(s))
        throw Error("basis change requires a unitary matrix");
    const int m = static_cast<int>(s.rows());
    const Matrix eye = Matrix::Identity(m, m);
    Matrix g(2 * m, 2 * m);
    g.topLeftCorner(m, m) = 0.5 * (s + eye);
    g.topRightCorner(m, m) = 0.5 * kI * (s - eye);
    g.bottomLeftCorner(m, m) = -0.5 * kI * (s - eye);
    g.bottomRightCorner(m, m) = 0.5 * (s + eye);
    return CanonicalBasisChange{std::move(s), std::move(g)};
}

Subspace lagrange_from_unitary(const Matrix& s) {
    CanonicalBasisChange change = CanonicalBasisChange::from_unitary(s);
    const int m = static_cast<int>(s.rows());
    // Row i of g holds the canonical coordinates of the i-th new basis
    // element; the first m of those span the plane.
    return Subspace(change.g.topRows(m).transpose());
}

Matrix unitary_from_lagrange(const Subspace& l) {
    if (l.ambient_dim() % 2 != 0)
        throw DimensionError("unitary_from_lagrange: odd ambient dimension");
    const int m = l.ambient_dim() / 2;
    if (l.dim() != m)
        throw DimensionError("unitary_from_lagrange: subspace is not half-dimensional");
    // Split canonical coordinates (x; y) and pass to the basis of
    // exponential-type solutions e+/- = pi -/+ i q: the plane must be
    // expressible as rows 1/2 (sum_j S_ij e+_j + e-_i).
    Matrix x = l.basis().topRows(m);
    Matrix y = l.basis().bottomRows(m);
    Matrix c_plus = 0.5 * (x - kI * y);
    Matrix c_minus = 0.5 * (x + kI * y);
    if (numerical_rank(c_minus) != m)
        throw Error("unitary_from_lagrange: plane has no distinguished basis "
                    "(minus-direction block is singular)");
    Matrix s = Eigen::PartialPivLU<Matrix>(c_minus.transpose())
                   .solve(c_plus.transpose());
    if (!is_unitary(s))
        throw ConsistencyError(
            "unitary_from_lagrange: recovered matrix is not unitary; "
            "input plane is not Lagrange");
    return s;
}

} // namespace qgs
