#pragma once

// Test-only reference computations. Each avoids the code path it is used to
// check: dense_correlation, for one, reuses the basis and Hamiltonian but skips
// Lanczos, the reduced density matrix and the Pauli expansion.

#include <kondoent/kondo_sim.hpp>
#include <kondoent/qmat.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using kondoent::qmat::complex;
using kondoent::qmat::ComplexMatrix;

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    // below ~1e-15 relative the difference is round-off and refinement cannot help
    const double floor = 1e-15 * (std::abs(left) + std::abs(right));
    if (depth <= 0 || std::abs(diff) <= 15.0 * std::max(tol, floor)) return left + right + diff / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature with Richardson correction.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline double sinc(double y) { return y == 0.0 ? 1.0 : std::sin(y) / y; }

// int_x^inf sin(y)/y dy: quadrature over half periods [x + k pi, x + (k+1) pi]
// gives an alternating series; repeated averaging of its partial sums
// accelerates the tail.
inline double sine_tail(double x) {
    constexpr int pieces = 60;
    std::vector<double> partial;
    double s = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double a = x + k * std::numbers::pi;
        s += integrate(sinc, a, a + std::numbers::pi, 1e-15);
        partial.push_back(s);
    }
    for (int level = 0; level < 30; ++level) {
        std::vector<double> next;
        for (std::size_t i = 0; i + 1 < partial.size(); ++i) next.push_back(0.5 * (partial[i] + partial[i + 1]));
        partial = std::move(next);
    }
    return partial.back();
}

// Root of tan x = x in (a, b) by bisection on sin x - x cos x.
inline double tan_root(double a, double b) {
    auto g = [](double x) { return std::sin(x) - x * std::cos(x); };
    double ga = g(a);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm < 0) == (ga < 0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

inline ComplexMatrix random_hermitian(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double re = N(rng);
            a(i, j) = complex(re, N(rng));
        }
    return (a + a.adjoint()) * 0.5;
}

// Gram-Schmidt on a complex Gaussian matrix.
inline ComplexMatrix random_unitary(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    ComplexMatrix u(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<complex> v(n);
        for (auto& z : v) {
            const double re = N(rng);
            z = complex(re, N(rng));
        }
        for (std::size_t k = 0; k < c; ++k) {
            complex ov = 0.0;
            for (std::size_t r = 0; r < n; ++r) ov += std::conj(u(r, k)) * v[r];
            for (std::size_t r = 0; r < n; ++r) v[r] -= ov * u(r, k);
        }
        double nrm = 0.0;
        for (const auto& z : v) nrm += std::norm(z);
        nrm = std::sqrt(nrm);
        for (std::size_t r = 0; r < n; ++r) u(r, c) = v[r] / nrm;
    }
    return u;
}

inline std::vector<complex> random_state(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<complex> v(n);
    double nrm = 0.0;
    for (auto& z : v) {
        const double re = N(rng);
        z = complex(re, N(rng));
        nrm += std::norm(z);
    }
    for (auto& z : v) z /= std::sqrt(nrm);
    return v;
}

// (I + r . sigma) / 2 with |r| <= 1.
inline ComplexMatrix random_qubit_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double x, y, z;
    do {
        x = U(rng);
        y = U(rng);
        z = U(rng);
    } while (x * x + y * y + z * z > 1.0);
    return ComplexMatrix(2, 2, {complex(0.5 * (1 + z), 0), complex(0.5 * x, -0.5 * y), complex(0.5 * x, 0.5 * y),
                                complex(0.5 * (1 - z), 0)});
}

inline ComplexMatrix bell(int which) {
    // 0: Psi-, 1: Psi+, 2: Phi+, 3: Phi-
    const double h = 1.0 / std::sqrt(2.0);
    std::vector<complex> v(4, 0.0);
    switch (which) {
    case 0: v[1] = h; v[2] = -h; break;
    case 1: v[1] = h; v[2] = h; break;
    case 2: v[0] = h; v[3] = h; break;
    default: v[0] = h; v[3] = -h; break;
    }
    return ComplexMatrix::outer(v, v);
}

// Exhaustive count over every bit pattern of orbitals plus impurity bits.
inline std::size_t brute_force_sector_size(int sites, int electrons, int twice_sz) {
    std::size_t count = 0;
    const std::uint32_t total = std::uint32_t{1} << (2 * sites + 2);
    for (std::uint32_t s = 0; s < total; ++s) {
        const std::uint32_t fermions = s & ((std::uint32_t{1} << (2 * sites)) - 1);
        if (std::popcount(fermions) != electrons) continue;
        int sz = 0;
        for (int o = 0; o < 2 * sites; ++o)
            if (fermions >> o & 1u) sz += (o % 2 == 0) ? 1 : -1;
        sz += (s >> (2 * sites) & 1u) ? -1 : 1;
        sz += (s >> (2 * sites + 1) & 1u) ? -1 : 1;
        if (sz == twice_sz) ++count;
    }
    return count;
}

// Lowest free-fermion energy on an open chain with the given spin counts.
inline double tight_binding_energy(int sites, int n_up, int n_dn, double t) {
    std::vector<double> eps;
    for (int k = 1; k <= sites; ++k) eps.push_back(-2.0 * t * std::cos(k * std::numbers::pi / (sites + 1)));
    std::sort(eps.begin(), eps.end());
    double e = 0.0;
    for (int k = 0; k < n_up; ++k) e += eps[static_cast<std::size_t>(k)];
    for (int k = 0; k < n_dn; ++k) e += eps[static_cast<std::size_t>(k)];
    return e;
}

// <psi| S_A . S_B |psi> evaluated by acting with the operator on basis states.
inline double spin_spin_expectation(const std::vector<complex>& psi, const kondoent::sim::SectorBasis& b) {
    const int ba = 2 * b.sites, bb = 2 * b.sites + 1;
    complex acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto s = b.states[i];
        const bool da = s >> ba & 1u, db = s >> bb & 1u;
        acc += std::norm(psi[i]) * ((da ? -0.5 : 0.5) * (db ? -0.5 : 0.5));
        if (da != db) {
            const auto t = s ^ (1u << ba) ^ (1u << bb);
            const auto it = std::lower_bound(b.states.begin(), b.states.end(), t);
            const auto j = static_cast<std::size_t>(it - b.states.begin());
            acc += 0.5 * std::conj(psi[j]) * psi[i];
        }
    }
    return acc.real();
}

// f_s of the lowest dense eigenvector, no Lanczos and no reduced density matrix.
inline double dense_correlation(const kondoent::sim::ChainModel& m) {
    const auto b = kondoent::sim::build_basis(m, m.default_twice_sz());
    const auto h = kondoent::sim::build_hamiltonian(m, b).to_dense();
    const auto spec = kondoent::qmat::hermitian_eig(h);
    std::vector<complex> psi(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) psi[i] = spec.eigenvectors(i, 0);
    return spin_spin_expectation(psi, b);
}

} // namespace oracle
