#pragma once

// General two-qubit entanglement measures. They make no symmetry assumption
// about the state, so they double as independent checks of the closed forms
// in werner.hpp.

#include <kondoent/error.hpp>
#include <kondoent/qmat.hpp>
#include <kondoent/werner.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

namespace kondoent::measures {

using qmat::ComplexMatrix;
using qmat::DensityMatrix;
using qmat::Pauli;

// r[a][b] = Tr(sigma_a (x) sigma_b rho), indices in {0, x, y, z}.
struct PauliCoefficients {
    std::array<std::array<double, 4>, 4> r{};

    double operator()(Pauli a, Pauli b) const { return r[static_cast<int>(a)][static_cast<int>(b)]; }
};

inline PauliCoefficients pauli_coefficients(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw Error(Errc::dimension_mismatch, "Pauli expansion needs a 4x4 state");
    PauliCoefficients out;
    for (Pauli a : qmat::pauli_all)
        for (Pauli b : qmat::pauli_all) {
            const ComplexMatrix op = qmat::kron(qmat::pauli(a), qmat::pauli(b));
            qmat::complex tr = 0.0;
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t k = 0; k < 4; ++k) tr += op(i, k) * rho(k, i);
            if (std::abs(tr.imag()) > 1e-10)
                throw Error(Errc::not_hermitian, "Pauli coefficient has imaginary part " + std::to_string(tr.imag()));
            out.r[static_cast<int>(a)][static_cast<int>(b)] = tr.real();
        }
    return out;
}

// rho = (1/4) sum r_ab sigma_a (x) sigma_b
inline ComplexMatrix reconstruct(const PauliCoefficients& c) {
    ComplexMatrix m(4, 4);
    for (Pauli a : qmat::pauli_all)
        for (Pauli b : qmat::pauli_all) m += qmat::kron(qmat::pauli(a), qmat::pauli(b)) * (0.25 * c(a, b));
    return m;
}

// <S_A . S_B> = (r_xx + r_yy + r_zz) / 4 as a raw number; may sit a round-off
// distance outside the physical interval.
inline double spin_correlation_value(const DensityMatrix& rho) {
    const auto c = pauli_coefficients(rho);
    return (c(Pauli::x, Pauli::x) + c(Pauli::y, Pauli::y) + c(Pauli::z, Pauli::z)) / 4.0;
}

inline werner::SpinCorrelation spin_correlation(const DensityMatrix& rho) {
    return werner::SpinCorrelation::clamped(spin_correlation_value(rho));
}

// Distance from the rotation-invariant form: the largest coefficient that
// must vanish, or the largest spread of the diagonal r_aa around their mean.
inline double werner_residual(const DensityMatrix& rho) {
    const auto c = pauli_coefficients(rho);
    double res = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if (a != b) res = std::max(res, std::abs(c.r[a][b]));
    const double mean = (c.r[1][1] + c.r[2][2] + c.r[3][3]) / 3.0;
    for (int a = 1; a < 4; ++a) res = std::max(res, std::abs(c.r[a][a] - mean));
    return res;
}

// Wootters concurrence, C = max(0, l1 - l2 - l3 - l4) where l_i are the
// descending square roots of the eigenvalues of rho (sy (x) sy) rho* (sy (x) sy).
//
// The l_i are the singular values of sqrt(rho) sqrt(rho~), read off as the
// nonnegative eigenvalues of the Hermitian dilation [[0, A], [A^dag, 0]].
// Square-rooting eigenvalues of A A^dag directly would amplify round-off in
// the zero singular values of pure states to ~1e-8.
inline double concurrence_wootters(const DensityMatrix& rho) {
    if (rho.dim() != 4) throw Error(Errc::dimension_mismatch, "concurrence needs a 4x4 state");
    const ComplexMatrix yy = qmat::kron(qmat::pauli(Pauli::y), qmat::pauli(Pauli::y));

    const auto& spec = rho.spectrum();
    const auto lambda = rho.clamped_eigenvalues();
    ComplexMatrix sqrt_rho(4, 4);
    for (std::size_t k = 0; k < 4; ++k) {
        const double s = std::sqrt(lambda[k]);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                sqrt_rho(i, j) += s * spec.eigenvectors(i, k) * std::conj(spec.eigenvectors(j, k));
    }
    const ComplexMatrix sqrt_flipped = yy * sqrt_rho.conj() * yy;
    const ComplexMatrix a = sqrt_rho * sqrt_flipped;

    ComplexMatrix dilation(8, 8);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            dilation(i, j + 4) = a(i, j);
            dilation(j + 4, i) = std::conj(a(i, j));
        }
    auto w = qmat::hermitian_eig(dilation).eigenvalues;
    std::array<double, 4> l{};
    for (std::size_t k = 0; k < 4; ++k) l[k] = std::max(0.0, w[7 - k]);
    return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

// N = ||rho^{T_B}||_1 - 1, which reduces to twice the magnitude of the
// negative part of the partial-transpose spectrum.
inline double negativity_general(const DensityMatrix& rho) {
    const ComplexMatrix pt = qmat::partial_transpose(rho, qmat::Subsystem::B);
    double neg = 0.0;
    for (double x : qmat::hermitian_eig(pt).eigenvalues)
        if (x < 0.0) neg -= x;
    return std::clamp(2.0 * neg, 0.0, 1.0);
}

} // namespace kondoent::measures
