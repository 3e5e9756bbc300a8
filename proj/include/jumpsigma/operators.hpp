// operators.hpp: Small dense complex matrices, state vectors and entropy kernels

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace jumpsigma {

using cplx = std::complex<double>;

inline constexpr double kHermitianTol = 1e-9;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kLogFloor = 1e-12;

class StateVector;

/// Dense row-major d x d complex matrix. Intended for d up to ~8.
class Operator {
public:
    Operator() = default;
    explicit Operator(std::size_t dim);
    Operator(std::size_t dim, std::vector<cplx> entries);
    Operator(std::initializer_list<std::initializer_list<cplx>> rows);

    static Operator identity(std::size_t dim);
    static Operator zeros(std::size_t dim) { return Operator(dim); }
    static Operator diagonal(std::span<const double> values);
    static Operator diagonal(std::initializer_list<double> values);
    /// |a><b|
    static Operator outer(const StateVector& a, const StateVector& b);
    /// |psi><psi|
    static Operator projector(const StateVector& psi);

    std::size_t dim() const { return dim_; }
    std::span<const cplx> entries() const { return entries_; }
    std::span<cplx> entries() { return entries_; }

    cplx& operator()(std::size_t r, std::size_t c) { return entries_[r * dim_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return entries_[r * dim_ + c]; }

    Operator adjoint() const;
    cplx trace() const;
    /// Largest absolute entry.
    double max_abs() const;

    bool is_hermitian(double tol = kHermitianTol) const;
    bool is_positive_semidefinite(double tol = kPsdTol) const;

    Operator& operator+=(const Operator& o);
    Operator& operator-=(const Operator& o);
    Operator& operator*=(cplx s);

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(Operator a, cplx s) { return a *= s; }
    friend Operator operator*(cplx s, Operator a) { return a *= s; }
    friend Operator operator*(const Operator& a, const Operator& b);
    friend StateVector operator*(const Operator& a, const StateVector& v);

    friend bool operator==(const Operator&, const Operator&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<cplx> entries_;
};

Operator commutator(const Operator& a, const Operator& b);
Operator anticommutator(const Operator& a, const Operator& b);
/// tr{a b} without forming the product.
cplx trace_of_product(const Operator& a, const Operator& b);
/// (a + a^dagger) / 2
Operator hermitian_part(const Operator& a);

/// Complex amplitude vector. Normalization is the caller's business except
/// where a function documents otherwise.
class StateVector {
public:
    StateVector() = default;
    explicit StateVector(std::size_t dim) : amps_(dim) {}
    explicit StateVector(std::vector<cplx> amps) : amps_(std::move(amps)) {}
    StateVector(std::initializer_list<cplx> amps) : amps_(amps) {}

    /// Unit vector e_k.
    static StateVector basis(std::size_t dim, std::size_t k);

    std::size_t dim() const { return amps_.size(); }
    std::span<const cplx> amplitudes() const { return amps_; }
    std::span<cplx> amplitudes() { return amps_; }
    cplx& operator[](std::size_t k) { return amps_[k]; }
    const cplx& operator[](std::size_t k) const { return amps_[k]; }

    double norm_squared() const;
    double norm() const;
    /// Returns a unit-norm copy; throws ValidationError on a zero vector.
    StateVector normalized() const;

    friend bool operator==(const StateVector&, const StateVector&) = default;

private:
    std::vector<cplx> amps_;
};

/// <a|b>
cplx inner(const StateVector& a, const StateVector& b);

/// Hermitian, unit-trace, positive semidefinite operator. Construction
/// validates at the module tolerances and throws InvalidStateError otherwise.
class DensityMatrix {
public:
    explicit DensityMatrix(Operator op);
    /// Same checks with a caller-chosen lower bound on eigenvalues.
    DensityMatrix(Operator op, double psd_tol);

    static DensityMatrix maximally_mixed(std::size_t dim);
    static DensityMatrix pure(const StateVector& psi);

    std::size_t dim() const { return op_.dim(); }
    const Operator& op() const { return op_; }
    operator const Operator&() const { return op_; }
    cplx operator()(std::size_t r, std::size_t c) const { return op_(r, c); }

private:
    Operator op_;
};

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Operator vectors;            // eigenvectors as columns
};

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
/// Throws ValidationError if m is not Hermitian within kHermitianTol.
EigenDecomposition hermitian_eigen(const Operator& m);

/// V diag(f(lambda)) V^dagger
template <class F>
Operator apply_spectral(const EigenDecomposition& eig, F&& f) {
    const std::size_t d = eig.vectors.dim();
    Operator out(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double fk = f(eig.values[k]);
        for (std::size_t r = 0; r < d; ++r) {
            const cplx vr = eig.vectors(r, k) * fk;
            for (std::size_t c = 0; c < d; ++c)
                out(r, c) += vr * std::conj(eig.vectors(c, k));
        }
    }
    return out;
}

/// -sum lambda ln lambda in nats, with 0 ln 0 = 0.
/// Throws InvalidStateError if an eigenvalue is below -kPsdTol.
double von_neumann_entropy(const DensityMatrix& rho);

/// V diag(ln max(lambda, floor)) V^dagger. The floor only touches (near-)null
/// eigenvalues; traced against an operator X the error it introduces is at
/// most d * floor * |ln floor| * ||X||.
Operator matrix_log_on_support(const DensityMatrix& rho, double floor = kLogFloor);

/// Half the trace norm of a - b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

} // namespace jumpsigma
