#pragma once

// Dense complex linear algebra for small spin Hilbert spaces.
//
// Two-qubit basis ordering is {|uu>, |ud>, |du>, |dd>}: the left factor of a
// tensor product is the most significant index bit, and "up" is bit value 0.

#include <kondoent/error.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace kondoent::qmat {

using complex = std::complex<double>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw Error(Errc::dimension_mismatch, "entry count " + std::to_string(data_.size()) +
                                                      " does not match " + std::to_string(rows_) + "x" +
                                                      std::to_string(cols_));
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix outer(std::span<const complex> ket, std::span<const complex> bra) {
        ComplexMatrix m(ket.size(), bra.size());
        for (std::size_t i = 0; i < ket.size(); ++i)
            for (std::size_t j = 0; j < bra.size(); ++j) m(i, j) = ket[i] * std::conj(bra[j]);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const complex> entries() const noexcept { return data_; }
    std::span<complex> entries() noexcept { return data_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
        return out;
    }

    ComplexMatrix conj() const {
        ComplexMatrix out = *this;
        for (auto& z : out.data_) z = std::conj(z);
        return out;
    }

    complex trace() const {
        complex t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ComplexMatrix& operator*=(complex s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, complex s) { return a *= s; }
    friend ComplexMatrix operator*(complex s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_)
            throw Error(Errc::dimension_mismatch, "matrix product of incompatible shapes");
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const complex aik = a(i, k);
                if (aik == complex{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    void check_same_shape(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw Error(Errc::dimension_mismatch, "shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(Errc::dimension_mismatch, "shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i)
        m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
    return m;
}

// max |M - M^dagger|
inline double hermiticity_defect(const ComplexMatrix& m) {
    if (!m.square()) return INFINITY;
    double d = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = r; c < m.cols(); ++c) d = std::max(d, std::abs(m(r, c) - std::conj(m(c, r))));
    return d;
}

enum class Pauli { id = 0, x = 1, y = 2, z = 3 };

inline constexpr Pauli pauli_all[] = {Pauli::id, Pauli::x, Pauli::y, Pauli::z};

inline ComplexMatrix pauli(Pauli p) {
    using namespace std::complex_literals;
    switch (p) {
    case Pauli::id: return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, 1.0});
    case Pauli::x: return ComplexMatrix(2, 2, {0.0, 1.0, 1.0, 0.0});
    case Pauli::y: return ComplexMatrix(2, 2, {0.0, -1i, 1i, 0.0});
    case Pauli::z: return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, -1.0});
    }
    return {};
}

// out[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l]
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t rb = b.rows(), cb = b.cols();
    ComplexMatrix out(a.rows() * rb, a.cols() * cb);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const complex aij = a(i, j);
            for (std::size_t k = 0; k < rb; ++k)
                for (std::size_t l = 0; l < cb; ++l) out(i * rb + k, j * cb + l) = aij * b(k, l);
        }
    return out;
}

struct Spectrum {
    std::vector<double> eigenvalues; // ascending
    ComplexMatrix eigenvectors;      // column k pairs with eigenvalues[k]
};

namespace detail {

inline void check_hermitian(const ComplexMatrix& m) {
    if (!m.square()) throw Error(Errc::not_hermitian, "matrix is not square");
    const double defect = hermiticity_defect(m);
    if (defect > 1e-12 * std::max(1.0, m.max_abs()))
        throw Error(Errc::not_hermitian, "max|M - M^dagger| = " + std::to_string(defect));
}

template <class Scalar>
Spectrum self_adjoint_eig(const ComplexMatrix& m) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const auto n = static_cast<Eigen::Index>(m.rows());
    Mat a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) {
            const complex h = 0.5 * (m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +
                                     std::conj(m(static_cast<std::size_t>(c), static_cast<std::size_t>(r))));
            if constexpr (std::is_same_v<Scalar, double>) a(r, c) = h.real();
            else a(r, c) = h;
        }
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw Error(Errc::not_converged, "dense eigensolver did not converge");

    Spectrum out;
    out.eigenvalues.resize(m.rows());
    out.eigenvectors = ComplexMatrix(m.rows(), m.rows());
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        for (Eigen::Index r = 0; r < n; ++r)
            out.eigenvectors(static_cast<std::size_t>(r), static_cast<std::size_t>(k)) = es.eigenvectors()(r, k);
    }
    return out;
}

} // namespace detail

// Eigendecomposition of a Hermitian matrix (Householder tridiagonalization
// and implicit QR). Matrices with no imaginary part take the real path.
inline Spectrum hermitian_eig(const ComplexMatrix& m) {
    detail::check_hermitian(m);
    if (m.rows() == 0) return Spectrum{{}, ComplexMatrix(0, 0)};
    const bool real =
        std::all_of(m.entries().begin(), m.entries().end(), [](const complex& z) { return z.imag() == 0.0; });
    return real ? detail::self_adjoint_eig<double>(m) : detail::self_adjoint_eig<complex>(m);
}

// Values in [-floor, 0) are round-off and become 0; anything below -floor is
// a genuinely invalid state.
inline constexpr double psd_floor = 1e-10;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t qubit_count(std::size_t dim) {
    std::size_t q = 0;
    while ((std::size_t{1} << q) < dim) ++q;
    return q;
}

// Hermitian, unit-trace, positive semidefinite matrix over 2^n dimensions.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
        if (!m_.square() || !is_power_of_two(m_.rows()))
            throw Error(Errc::dimension_mismatch, "density matrix dimension must be a power of two");
        const double defect = hermiticity_defect(m_);
        if (defect > 1e-12) throw Error(Errc::not_hermitian, "max|M - M^dagger| = " + std::to_string(defect));
        const double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > 1e-12) throw Error(Errc::out_of_range, "trace = " + std::to_string(tr));
        spectrum_ = hermitian_eig(m_);
        if (spectrum_.eigenvalues.front() < -psd_floor)
            throw Error(Errc::negative_eigenvalue,
                        "minimum eigenvalue " + std::to_string(spectrum_.eigenvalues.front()));
    }

    static DensityMatrix pure(std::span<const complex> psi) {
        double nrm = 0.0;
        for (const auto& z : psi) nrm += std::norm(z);
        std::vector<complex> v(psi.begin(), psi.end());
        for (auto& z : v) z /= std::sqrt(nrm);
        return DensityMatrix(ComplexMatrix::outer(v, v));
    }

    std::size_t dim() const noexcept { return m_.rows(); }
    std::size_t qubits() const noexcept { return qubit_count(m_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return m_; }
    const complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

    // Eigenvalues with the round-off floor applied.
    std::vector<double> clamped_eigenvalues() const {
        auto w = spectrum_.eigenvalues;
        for (auto& x : w)
            if (x < 0.0) x = 0.0;
        return w;
    }
    const Spectrum& spectrum() const noexcept { return spectrum_; }

private:
    ComplexMatrix m_;
    Spectrum spectrum_;
};

enum class Subsystem { A, B };

// Reduces a 2^n density matrix onto the qubits listed in `keep` (indices
// counted from the most significant factor). Output ordering follows `keep`.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> keep) {
    if (!rho.square() || !is_power_of_two(rho.rows()))
        throw Error(Errc::dimension_mismatch, "partial trace needs a 2^n square matrix");
    const std::size_t n = qubit_count(rho.rows());
    std::vector<bool> kept(n, false);
    for (std::size_t q : keep) {
        if (q >= n || kept[q]) throw Error(Errc::dimension_mismatch, "invalid kept qubit index");
        kept[q] = true;
    }
    std::vector<std::size_t> traced;
    for (std::size_t q = 0; q < n; ++q)
        if (!kept[q]) traced.push_back(q);

    auto bit_of = [n](std::size_t q) { return std::size_t{1} << (n - 1 - q); };
    auto compose = [&](std::size_t kept_idx, std::size_t traced_idx) {
        std::size_t full = 0;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (kept_idx & (std::size_t{1} << (keep.size() - 1 - i))) full |= bit_of(keep[i]);
        for (std::size_t i = 0; i < traced.size(); ++i)
            if (traced_idx & (std::size_t{1} << (traced.size() - 1 - i))) full |= bit_of(traced[i]);
        return full;
    };

    const std::size_t dk = std::size_t{1} << keep.size();
    const std::size_t dt = std::size_t{1} << traced.size();
    ComplexMatrix out(dk, dk);
    for (std::size_t a = 0; a < dk; ++a)
        for (std::size_t b = 0; b < dk; ++b) {
            complex s = 0.0;
            for (std::size_t t = 0; t < dt; ++t) s += rho(compose(a, t), compose(b, t));
            out(a, b) = s;
        }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem keep) {
    if (rho.dim() != 4) throw Error(Errc::dimension_mismatch, "two-qubit partial trace needs a 4x4 state");
    const std::size_t q = keep == Subsystem::A ? 0 : 1;
    return DensityMatrix(partial_trace(rho.matrix(), std::span<const std::size_t>(&q, 1)));
}

// Transposes the indices of one tensor factor of a two-qubit operator.
inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, Subsystem subsystem) {
    if (rho.rows() != 4 || rho.cols() != 4)
        throw Error(Errc::dimension_mismatch, "partial transpose needs a 4x4 matrix");
    ComplexMatrix out(4, 4);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t j = 0; j < 2; ++j)
                for (std::size_t l = 0; l < 2; ++l) {
                    const complex v = rho(2 * i + k, 2 * j + l);
                    if (subsystem == Subsystem::A) out(2 * j + k, 2 * i + l) = v;
                    else out(2 * i + l, 2 * j + k) = v;
                }
    return out;
}

inline ComplexMatrix partial_transpose(const DensityMatrix& rho, Subsystem subsystem) {
    return partial_transpose(rho.matrix(), subsystem);
}

// -sum lambda log2 lambda with 0 log 0 = 0; result in bits.
inline double vn_entropy(const DensityMatrix& rho) {
    double s = 0.0;
    for (double x : rho.clamped_eigenvalues())
        if (x > 0.0) s -= x * std::log2(x);
    return s;
}

} // namespace kondoent::qmat
