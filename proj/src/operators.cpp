// operators.cpp: Dense kernels and Jacobi eigensolver

#include "jumpsigma/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "jumpsigma/errors.hpp"

namespace jumpsigma {

Operator::Operator(std::size_t dim) : dim_(dim), entries_(dim * dim) {
    if (dim == 0) throw ValidationError("operator dimension must be positive");
}

Operator::Operator(std::size_t dim, std::vector<cplx> entries)
    : dim_(dim), entries_(std::move(entries)) {
    if (dim == 0) throw ValidationError("operator dimension must be positive");
    if (entries_.size() != dim * dim) {
        std::ostringstream msg;
        msg << "operator of dimension " << dim << " needs " << dim * dim
            << " entries, got " << entries_.size();
        throw ValidationError(msg.str());
    }
}

Operator::Operator(std::initializer_list<std::initializer_list<cplx>> rows)
    : Operator(rows.size()) {
    std::size_t r = 0;
    for (const auto& row : rows) {
        if (row.size() != dim_) throw ValidationError("operator rows must form a square matrix");
        std::copy(row.begin(), row.end(), entries_.begin() + static_cast<std::ptrdiff_t>(r * dim_));
        ++r;
    }
}

Operator Operator::identity(std::size_t dim) {
    Operator m(dim);
    for (std::size_t k = 0; k < dim; ++k) m(k, k) = 1.0;
    return m;
}

Operator Operator::diagonal(std::span<const double> values) {
    Operator m(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) m(k, k) = values[k];
    return m;
}

Operator Operator::diagonal(std::initializer_list<double> values) {
    return diagonal(std::span<const double>(values.begin(), values.size()));
}

Operator Operator::outer(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw ValidationError("outer product of vectors with different dimensions");
    Operator m(a.dim());
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t c = 0; c < b.dim(); ++c) m(r, c) = a[r] * std::conj(b[c]);
    return m;
}

Operator Operator::projector(const StateVector& psi) { return outer(psi, psi); }

Operator Operator::adjoint() const {
    Operator m(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) m(c, r) = std::conj((*this)(r, c));
    return m;
}

cplx Operator::trace() const {
    cplx t = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) t += (*this)(k, k);
    return t;
}

double Operator::max_abs() const {
    double m = 0.0;
    for (const auto& z : entries_) m = std::max(m, std::abs(z));
    return m;
}

bool Operator::is_hermitian(double tol) const {
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = r; c < dim_; ++c)
            if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
    return true;
}

bool Operator::is_positive_semidefinite(double tol) const {
    if (!is_hermitian(kHermitianTol)) return false;
    return hermitian_eigen(*this).values.front() >= -tol;
}

namespace {
void require_same_dim(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) {
        std::ostringstream msg;
        msg << "dimension mismatch: " << a.dim() << " vs " << b.dim();
        throw ValidationError(msg.str());
    }
}
} // namespace

Operator& Operator::operator+=(const Operator& o) {
    require_same_dim(*this, o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
    return *this;
}

Operator& Operator::operator-=(const Operator& o) {
    require_same_dim(*this, o);
    for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
    return *this;
}

Operator& Operator::operator*=(cplx s) {
    for (auto& z : entries_) z *= s;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
    require_same_dim(a, b);
    const std::size_t d = a.dim();
    Operator m(d);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t k = 0; k < d; ++k) {
            const cplx ark = a(r, k);
            if (ark == cplx{}) continue;
            for (std::size_t c = 0; c < d; ++c) m(r, c) += ark * b(k, c);
        }
    return m;
}

StateVector operator*(const Operator& a, const StateVector& v) {
    if (a.dim() != v.dim()) throw ValidationError("operator/vector dimension mismatch");
    StateVector out(v.dim());
    for (std::size_t r = 0; r < a.dim(); ++r) {
        cplx acc = 0.0;
        for (std::size_t c = 0; c < a.dim(); ++c) acc += a(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }
Operator anticommutator(const Operator& a, const Operator& b) { return a * b + b * a; }

cplx trace_of_product(const Operator& a, const Operator& b) {
    require_same_dim(a, b);
    cplx t = 0.0;
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t k = 0; k < a.dim(); ++k) t += a(r, k) * b(k, r);
    return t;
}

Operator hermitian_part(const Operator& a) { return (a + a.adjoint()) * 0.5; }

StateVector StateVector::basis(std::size_t dim, std::size_t k) {
    if (k >= dim) throw ValidationError("basis index out of range");
    StateVector v(dim);
    v[k] = 1.0;
    return v;
}

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

double StateVector::norm() const { return std::sqrt(norm_squared()); }

StateVector StateVector::normalized() const {
    const double n = norm();
    if (n == 0.0) throw ValidationError("cannot normalize a zero vector");
    StateVector out(*this);
    for (auto& a : out.amps_) a /= n;
    return out;
}

cplx inner(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) throw ValidationError("inner product of vectors with different dimensions");
    cplx s = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) s += std::conj(a[k]) * b[k];
    return s;
}

DensityMatrix::DensityMatrix(Operator op) : DensityMatrix(std::move(op), kPsdTol) {}

DensityMatrix::DensityMatrix(Operator op, double psd_tol) : op_(std::move(op)) {
    if (op_.dim() == 0) throw InvalidStateError("density matrix has no entries");
    if (!op_.is_hermitian(kHermitianTol)) throw InvalidStateError("density matrix is not Hermitian");
    const cplx tr = op_.trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream msg;
        msg << "density matrix trace is " << tr.real() << ", expected 1";
        throw InvalidStateError(msg.str());
    }
    const double lo = hermitian_eigen(op_).values.front();
    if (lo < -psd_tol) {
        std::ostringstream msg;
        msg << "density matrix has negative eigenvalue " << lo;
        throw InvalidStateError(msg.str());
    }
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    return DensityMatrix(Operator::identity(dim) * (1.0 / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
    return DensityMatrix(Operator::projector(psi.normalized()));
}

EigenDecomposition hermitian_eigen(const Operator& m) {
    if (!m.is_hermitian(kHermitianTol)) throw ValidationError("hermitian_eigen: input is not Hermitian");
    const std::size_t d = m.dim();
    Operator a = hermitian_part(m);
    Operator v = Operator::identity(d);

    double scale = 0.0;
    for (const auto& z : a.entries()) scale += std::norm(z);
    scale = std::sqrt(scale);

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                if (r != c) s += std::norm(a(r, c));
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps && off_norm() > 1e-15 * scale; ++sweep) {
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const cplx apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                // Phase on q makes the pivot real, then a real Jacobi rotation
                // zeroes it. Combined 2x2 block of the unitary:
                //   [ c            s          ]
                //   [ -s e^{-i phi}  c e^{-i phi} ]
                const cplx phase = std::conj(apq) / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cplx upp = c, upq = s, uqp = -s * phase, uqq = c * phase;

                for (std::size_t k = 0; k < d; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * upp + akq * uqp;
                    a(k, q) = akp * upq + akq * uqq;
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * upp + vkq * uqp;
                    v(k, q) = vkp * upq + vkq * uqq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out{std::vector<double>(d), Operator(d)};
    for (std::size_t k = 0; k < d; ++k) {
        out.values[k] = a(order[k], order[k]).real();
        for (std::size_t r = 0; r < d; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double lam : hermitian_eigen(rho.op()).values) {
        if (lam < -kPsdTol) {
            std::ostringstream msg;
            msg << "von_neumann_entropy: eigenvalue " << lam << " below tolerance";
            throw InvalidStateError(msg.str());
        }
        if (lam > 0.0) s -= lam * std::log(lam);
    }
    return s;
}

Operator matrix_log_on_support(const DensityMatrix& rho, double floor) {
    if (!(floor > 0.0)) throw ValidationError("matrix_log_on_support: floor must be positive");
    const auto eig = hermitian_eigen(rho.op());
    return apply_spectral(eig, [floor](double lam) { return std::log(std::max(lam, floor)); });
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw ValidationError("trace_distance: dimension mismatch");
    const auto eig = hermitian_eigen(hermitian_part(a.op() - b.op()));
    double s = 0.0;
    for (double lam : eig.values) s += std::abs(lam);
    return 0.5 * s;
}

} // namespace jumpsigma
