#pragma once

// RKKY range functions, indirect coupling I(R) and the single-impurity Kondo
// temperature. Unit-agnostic: energies in any consistent unit, k_F * R is
// dimensionless.
//
// Sign convention: the Kondo coupling enters as the dimensionless
// antiferromagnetic strength g = |J| rho_F > 0. I(R) > 0 is antiferromagnetic.

#include <kondoent/error.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace kondoent::rkky {

// Sine integral Si(x) = int_0^x sin(t)/t dt.
inline double sine_integral(double x) {
    if (x < 0.0) return -sine_integral(-x);
    if (x == 0.0) return 0.0;
    if (x < 6.0) {
        // sum_n (-1)^n x^(2n+1) / ((2n+1) (2n+1)!)
        double term = x; // x^(2n+1) / (2n+1)!
        double sum = x;
        const double x2 = x * x;
        for (int n = 1; n < 30; ++n) {
            term *= -x2 / ((2.0 * n) * (2.0 * n + 1.0));
            const double add = term / (2.0 * n + 1.0);
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum)) break;
        }
        return sum;
    }
    // Si(x) = pi/2 - f(x) cos x - g(x) sin x, with the auxiliary pair (f, g)
    // taken from the continued fraction of E1(ix) (modified Lentz).
    using cd = std::complex<double>;
    constexpr double tiny = 1e-300;
    cd b(1.0, x);
    cd c(1.0 / tiny, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    for (int i = 2; i < 1000; ++i) {
        const double a = -static_cast<double>((i - 1) * (i - 1));
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16) break;
    }
    h *= cd(std::cos(x), -std::sin(x));
    return std::numbers::pi / 2.0 + h.imag();
}

// F_3(x) = (sin x - x cos x) / x^4, three-dimensional range function.
inline double f3(double x) {
    if (!(x > 0.0)) throw Error(Errc::domain_error, "F3 needs x > 0, got " + std::to_string(x));
    if (x < 0.1) {
        const double x3 = x * x * x;
        return 1.0 / (3.0 * x) - x / 30.0 + x3 / 840.0;
    }
    return (std::sin(x) - x * std::cos(x)) / (x * x * x * x);
}

// F_1(x) = -(1/4) int_x^inf sin(y)/y dy = -(1/4) (pi/2 - Si(x)), one dimension.
inline double f1(double x) {
    if (!(x >= 0.0)) throw Error(Errc::domain_error, "F1 needs x >= 0, got " + std::to_string(x));
    return -0.25 * (std::numbers::pi / 2.0 - sine_integral(x));
}

// T_K = D sqrt(g) exp(-1/g)
inline double kondo_temperature(double bandwidth, double g) {
    if (!(g > 0.0)) throw Error(Errc::domain_error, "Kondo temperature needs g > 0, got " + std::to_string(g));
    return bandwidth * std::sqrt(g) * std::exp(-1.0 / g);
}

enum class SignClass { afm, fm, zero };

inline const char* sign_class_name(SignClass s) {
    switch (s) {
    case SignClass::afm: return "AFM";
    case SignClass::fm: return "FM";
    case SignClass::zero: return "zero";
    }
    return "?";
}

struct RkkyParams {
    double j = 0.0;                // exchange coupling
    double fermi_energy = 1.0;     // eps_F
    double fermi_wavevector = 1.0; // k_F
    double dos_fermi = 1.0;        // rho_F
    double bandwidth = 1.0;        // D
    int dimension = 3;             // 1 or 3
    double distance = 1.0;         // R

    double kondo_strength() const noexcept { return std::abs(j) * dos_fermi; }
    double range_argument() const noexcept { return 2.0 * fermi_wavevector * distance; }

    void validate() const {
        if (dimension != 1 && dimension != 3)
            throw Error(Errc::domain_error, "dimension must be 1 or 3, got " + std::to_string(dimension));
        if (!(fermi_wavevector > 0.0)) throw Error(Errc::domain_error, "k_F must be positive");
        if (!(distance > 0.0)) throw Error(Errc::domain_error, "R must be positive");
        if (!(bandwidth > 0.0)) throw Error(Errc::domain_error, "bandwidth must be positive");
        if (!(fermi_energy > 0.0)) throw Error(Errc::domain_error, "Fermi energy must be positive");
        const double g = kondo_strength();
        if (!(g > 0.0 && g < 1.0))
            throw Error(Errc::domain_error, "|J| rho_F must lie in (0, 1), got " + std::to_string(g));
    }
};

struct CouplingResult {
    double range_argument = 0.0; // x = 2 k_F R
    double range_function = 0.0; // F_dim(x)
    double coupling_I = 0.0;
    SignClass sign_class = SignClass::zero;
    double kondo_temperature = 0.0;
    double ratio = 0.0; // I / T_K
};

// I(R) = 4 pi J^2 eps_F F_dim(2 k_F R)
inline CouplingResult coupling(const RkkyParams& p) {
    p.validate();
    CouplingResult r;
    r.range_argument = p.range_argument();
    r.range_function = p.dimension == 3 ? f3(r.range_argument) : f1(r.range_argument);
    r.coupling_I = 4.0 * std::numbers::pi * p.j * p.j * p.fermi_energy * r.range_function;
    r.sign_class = r.coupling_I > 0.0 ? SignClass::afm : (r.coupling_I < 0.0 ? SignClass::fm : SignClass::zero);
    r.kondo_temperature = kondo_temperature(p.bandwidth, p.kondo_strength());
    r.ratio = r.coupling_I / r.kondo_temperature;
    return r;
}

} // namespace kondoent::rkky
