#pragma once

// Exact diagonalization of the two-impurity Kondo model on a finite open
// chain:
//
//   H = -t sum_{i,s} (c+_{i s} c_{i+1 s} + h.c.)
//       + jA S_A . s(x_A) + jB S_B . s(x_B) + I S_A . S_B
//
// with s(x) the on-site conduction spin density. A positive Kondo coupling is
// antiferromagnetic.
//
// Basis encoding (bit 0 least significant):
//   bits 0 .. 2L-1  fermion orbitals, orbital 2i = site i up, 2i+1 = site i down
//   bit  2L         impurity A (1 = down)
//   bit  2L+1       impurity B (1 = down)
// Fermionic signs count occupied orbitals below the one acted on.

#include <kondoent/error.hpp>
#include <kondoent/measures.hpp>
#include <kondoent/qmat.hpp>
#include <kondoent/werner.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace kondoent::sim {

using qmat::complex;

inline constexpr int max_sites = 10;

struct ChainModel {
    int sites = 2;
    double hopping = 1.0;
    double kondo_coupling = 0.0;
    // Impurity B coupling when it differs from impurity A.
    std::optional<double> kondo_coupling_b;
    double rkky_direct = 0.0;
    int site_a = 0;
    int site_b = 1;
    int n_up = 1;
    int n_dn = 1;

    int electrons() const noexcept { return n_up + n_dn; }
    int default_twice_sz() const noexcept { return n_up - n_dn; }
    double coupling_a() const noexcept { return kondo_coupling; }
    double coupling_b() const noexcept { return kondo_coupling_b.value_or(kondo_coupling); }
    bool reflection_symmetric() const noexcept { return site_a + site_b == sites - 1; }

    // Mirror image (x_A, x_B) -> (L-1-x_B, L-1-x_A).
    ChainModel reflected() const {
        ChainModel m = *this;
        m.site_a = sites - 1 - site_b;
        m.site_b = sites - 1 - site_a;
        if (kondo_coupling_b) {
            m.kondo_coupling = *kondo_coupling_b;
            m.kondo_coupling_b = kondo_coupling;
        }
        return m;
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(Errc::invalid_model, msg); };
        if (sites < 1 || sites > max_sites) fail("sites must lie in [1, " + std::to_string(max_sites) + "]");
        if (!(hopping > 0.0)) fail("hopping must be positive");
        if (!(kondo_coupling >= 0.0) || !(coupling_b() >= 0.0)) fail("Kondo coupling must be >= 0");
        if (!std::isfinite(rkky_direct)) fail("direct impurity coupling must be finite");
        if (site_a < 0 || site_b < site_a || site_b >= sites)
            fail("impurity sites must satisfy 0 <= xa <= xb < sites");
        if (n_up < 0 || n_up > sites || n_dn < 0 || n_dn > sites)
            fail("electron counts must lie in [0, sites] per spin");
    }
};

// Plain-text `key = value` model description. Recognized keys: sites,
// hopping, jk, jkb, idirect, xa, xb, nup, ndn. `#` starts a comment.
inline ChainModel parse_model(std::istream& in, ChainModel m = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        auto as_double = [&] {
            std::size_t pos = 0;
            double d = 0.0;
            try {
                d = std::stod(val, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos == 0 || pos != val.size())
                throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": bad number '" + val + "'");
            return d;
        };
        auto as_int = [&] {
            const double d = as_double();
            if (d != std::floor(d))
                throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": '" + key + "' needs an integer");
            return static_cast<int>(d);
        };

        if (key == "sites") m.sites = as_int();
        else if (key == "hopping") m.hopping = as_double();
        else if (key == "jk") m.kondo_coupling = as_double();
        else if (key == "jkb") m.kondo_coupling_b = as_double();
        else if (key == "idirect") m.rkky_direct = as_double();
        else if (key == "xa") m.site_a = as_int();
        else if (key == "xb") m.site_b = as_int();
        else if (key == "nup") m.n_up = as_int();
        else if (key == "ndn") m.n_dn = as_int();
        else throw Error(Errc::parse_error, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return m;
}

using State = std::uint32_t;

struct SectorBasis {
    int sites = 0;
    int electrons = 0;
    int twice_sz = 0;
    std::vector<State> states; // ascending

    std::size_t size() const noexcept { return states.size(); }

    std::optional<std::size_t> index_of(State s) const {
        auto it = std::lower_bound(states.begin(), states.end(), s);
        if (it == states.end() || *it != s) return std::nullopt;
        return static_cast<std::size_t>(it - states.begin());
    }

    State fermion_mask() const noexcept { return (State{1} << (2 * sites)) - 1; }
    int impurity_bit(int which) const noexcept { return 2 * sites + which; }
};

// Twice the S^z of the conduction electrons in a fermion pattern.
inline int electron_twice_sz(State pattern, int sites) {
    int sz = 0;
    for (int i = 0; i < sites; ++i) {
        sz += static_cast<int>((pattern >> (2 * i)) & 1u);
        sz -= static_cast<int>((pattern >> (2 * i + 1)) & 1u);
    }
    return sz;
}

// All states with the model's electron number and the given total 2 S^z,
// impurities included.
inline SectorBasis build_basis(const ChainModel& m, int twice_sz) {
    m.validate();
    SectorBasis b;
    b.sites = m.sites;
    b.electrons = m.electrons();
    b.twice_sz = twice_sz;

    const int orbitals = 2 * m.sites;
    const int ne = m.electrons();
    const State limit = State{1} << orbitals;
    auto add_pattern = [&](State pattern) {
        const int esz = electron_twice_sz(pattern, m.sites);
        for (State imp = 0; imp < 4; ++imp) {
            const int isz = ((imp & 1u) ? -1 : 1) + ((imp & 2u) ? -1 : 1);
            if (esz + isz == twice_sz) b.states.push_back(pattern | (imp << orbitals));
        }
    };
    if (ne == 0) {
        add_pattern(0);
    } else {
        // Gosper's hack: next larger integer with the same popcount.
        State p = (State{1} << ne) - 1;
        while (p < limit) {
            add_pattern(p);
            const State c = p & (~p + 1);
            const State r = p + c;
            p = (((r ^ p) >> 2) / c) | r;
        }
    }
    std::sort(b.states.begin(), b.states.end());
    if (b.states.empty())
        throw Error(Errc::empty_sector, "no states with " + std::to_string(ne) + " electrons and 2Sz = " +
                                            std::to_string(twice_sz));
    return b;
}

// Hermitian matrix in compressed-row form.
struct SparseHamiltonian {
    std::size_t dim = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<complex> values;

    std::size_t nonzeros() const noexcept { return values.size(); }

    bool is_real() const {
        return std::all_of(values.begin(), values.end(), [](const complex& z) { return z.imag() == 0.0; });
    }

    std::optional<complex> at(std::size_t r, std::size_t c) const {
        const auto b = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
        const auto e = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
        auto it = std::lower_bound(b, e, c);
        if (it == e || *it != c) return std::nullopt;
        return values[static_cast<std::size_t>(it - cols.begin())];
    }

    // Exact structural check: every (r, c, v) has its (c, r, conj v) partner.
    bool hermitian() const {
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                const auto partner = at(cols[k], r);
                if (!partner || *partner != std::conj(values[k])) return false;
            }
        return true;
    }

    template <class T>
    void multiply(std::span<const T> x, std::span<T> y) const {
        for (std::size_t r = 0; r < dim; ++r) {
            T acc{};
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
                if constexpr (std::is_same_v<T, double>) acc += values[k].real() * x[cols[k]];
                else acc += values[k] * x[cols[k]];
            }
            y[r] = acc;
        }
    }

    qmat::ComplexMatrix to_dense() const {
        qmat::ComplexMatrix m(dim, dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) m(r, cols[k]) = values[k];
        return m;
    }
};

namespace detail {

inline int parity_below(State s, int orbital) {
    return std::popcount(s & ((State{1} << orbital) - 1)) & 1;
}

// c+_to c_from applied to s. Returns false if the result vanishes.
inline bool hop(State s, int to, int from, State& out, double& sign) {
    const State fbit = State{1} << from, tbit = State{1} << to;
    if (!(s & fbit)) return false;
    int p = parity_below(s, from);
    s ^= fbit;
    if (s & tbit) return false;
    p += parity_below(s, to);
    s ^= tbit;
    out = s;
    sign = (p & 1) ? -1.0 : 1.0;
    return true;
}

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

} // namespace detail

inline SparseHamiltonian build_hamiltonian(const ChainModel& m, const SectorBasis& b) {
    m.validate();
    if (b.sites != m.sites || b.electrons != m.electrons())
        throw Error(Errc::dimension_mismatch, "basis was built for a different model");

    const int L = m.sites;
    const int bit_a = b.impurity_bit(0), bit_b = b.impurity_bit(1);
    std::vector<detail::Triplet> trip;

    for (std::size_t col = 0; col < b.size(); ++col) {
        const State s = b.states[col];
        auto emit = [&](State target, double amp) {
            const auto row = b.index_of(target);
            if (!row) throw Error(Errc::invalid_model, "Hamiltonian left the symmetry sector");
            trip.push_back({*row, col, amp});
        };

        for (int i = 0; i + 1 < L; ++i)
            for (int spin = 0; spin < 2; ++spin) {
                const int o1 = 2 * i + spin, o2 = 2 * (i + 1) + spin;
                State t;
                double sign;
                if (detail::hop(s, o1, o2, t, sign)) emit(t, -m.hopping * sign);
                if (detail::hop(s, o2, o1, t, sign)) emit(t, -m.hopping * sign);
            }

        double diag = 0.0;
        const int site[2] = {m.site_a, m.site_b};
        const double jk[2] = {m.coupling_a(), m.coupling_b()};
        const int bits[2] = {bit_a, bit_b};
        for (int p = 0; p < 2; ++p) {
            if (jk[p] == 0.0) continue;
            const int up = 2 * site[p], dn = up + 1;
            const bool imp_down = (s >> bits[p]) & 1u;
            const double simp = imp_down ? -0.5 : 0.5;
            const double sel = 0.5 * (static_cast<double>((s >> up) & 1u) - static_cast<double>((s >> dn) & 1u));
            diag += jk[p] * simp * sel;

            State t;
            double sign;
            // S+ s-: impurity down -> up, electron up -> down
            if (imp_down && detail::hop(s, dn, up, t, sign)) emit(t ^ (State{1} << bits[p]), 0.5 * jk[p] * sign);
            // S- s+: impurity up -> down, electron down -> up
            if (!imp_down && detail::hop(s, up, dn, t, sign)) emit(t ^ (State{1} << bits[p]), 0.5 * jk[p] * sign);
        }

        if (m.rkky_direct != 0.0) {
            const bool da = (s >> bit_a) & 1u, db = (s >> bit_b) & 1u;
            diag += m.rkky_direct * (da ? -0.5 : 0.5) * (db ? -0.5 : 0.5);
            if (da != db) emit(s ^ (State{1} << bit_a) ^ (State{1} << bit_b), 0.5 * m.rkky_direct);
        }

        if (diag != 0.0) emit(s, diag);
    }

    std::stable_sort(trip.begin(), trip.end(), [](const detail::Triplet& x, const detail::Triplet& y) {
        return x.row != y.row ? x.row < y.row : x.col < y.col;
    });

    SparseHamiltonian h;
    h.dim = b.size();
    h.row_ptr.assign(h.dim + 1, 0);
    for (std::size_t k = 0; k < trip.size();) {
        std::size_t e = k;
        double sum = 0.0;
        while (e < trip.size() && trip[e].row == trip[k].row && trip[e].col == trip[k].col) sum += trip[e++].value;
        if (sum != 0.0) {
            h.cols.push_back(trip[k].col);
            h.values.emplace_back(sum, 0.0);
            ++h.row_ptr[trip[k].row + 1];
        }
        k = e;
    }
    for (std::size_t r = 0; r < h.dim; ++r) h.row_ptr[r + 1] += h.row_ptr[r];
    if (!h.hermitian()) throw Error(Errc::not_hermitian, "assembled Hamiltonian is not Hermitian");
    return h;
}

enum class Solver { automatic, lanczos, dense };

inline const char* solver_name(Solver s) {
    switch (s) {
    case Solver::automatic: return "auto";
    case Solver::lanczos: return "lanczos";
    case Solver::dense: return "dense";
    }
    return "?";
}

struct GroundStateOptions {
    Solver solver = Solver::automatic;
    std::size_t dense_limit = 512; // automatic picks dense at or below this dimension
    std::size_t max_iterations = 800;
    double ritz_tol = 1e-11;
    double degeneracy_tol = 1e-9;
    bool check_degeneracy = true;
    std::uint64_t seed = 0x5eed'2006'0001ULL;
};

struct GroundStateResult {
    double energy = 0.0;
    std::vector<complex> amplitudes;
    bool converged = false;
    std::size_t iterations = 0;
    double residual_norm = 0.0;
    // E1 - E0 within the sector; +inf when the sector has a single state.
    double gap = std::numeric_limits<double>::infinity();
    bool degenerate = false;
    Solver solver = Solver::automatic;
};

namespace detail {

// Number of eigenvalues of the symmetric tridiagonal (a, b) below x.
inline std::size_t sturm_count(std::span<const double> a, std::span<const double> b, double x) {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double off = i == 0 ? 0.0 : b[i - 1] * b[i - 1];
        q = a[i] - x - (i == 0 ? 0.0 : off / q);
        if (q == 0.0) q = -std::numeric_limits<double>::min();
        if (q < 0.0) ++count;
    }
    return count;
}

inline double lowest_tridiagonal_eigenvalue(std::span<const double> a, std::span<const double> b) {
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = (i > 0 ? std::abs(b[i - 1]) : 0.0) + (i + 1 < a.size() ? std::abs(b[i]) : 0.0);
        lo = std::min(lo, a[i] - r);
        hi = std::max(hi, a[i] + r);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(a, b, mid) >= 1) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// Eigenvector of the tridiagonal for eigenvalue `theta` by inverse iteration
// with partial pivoting.
inline std::vector<double> tridiagonal_eigenvector(std::span<const double> a, std::span<const double> b,
                                                   double theta) {
    const std::size_t n = a.size();
    std::vector<double> y(n, 1.0);
    if (n == 1) return y;
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    for (double x : b) scale = std::max(scale, std::abs(x));
    const double tiny = std::max(scale, 1.0) * 1e-300 + std::numeric_limits<double>::min();
    const double eps_pivot = std::numeric_limits<double>::epsilon() * std::max(scale, 1.0);

    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> d(n), du(n - 1), dl(n - 1), du2(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - theta;
        for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = b[i];
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                if (d[i] == 0.0) d[i] = eps_pivot;
                const double f = dl[i] / d[i];
                d[i + 1] -= f * du[i];
                y[i + 1] -= f * y[i];
            } else {
                const double f = d[i] / dl[i];
                d[i] = dl[i];
                const double tmp = d[i + 1];
                d[i + 1] = du[i] - f * tmp;
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du2[i];
                }
                du[i] = tmp;
                const double yi = y[i];
                y[i] = y[i + 1];
                y[i + 1] = yi - f * y[i + 1];
            }
        }
        if (std::abs(d[n - 1]) < tiny) d[n - 1] = eps_pivot;
        y[n - 1] /= d[n - 1];
        y[n - 2] = (y[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
        for (std::size_t k = n - 2; k-- > 0;) y[k] = (y[k] - du[k] * y[k + 1] - du2[k] * y[k + 2]) / d[k];

        double nrm = 0.0;
        for (double x : y) nrm += x * x;
        nrm = std::sqrt(nrm);
        for (double& x : y) x /= nrm;
    }
    return y;
}

template <class T>
double dot_real(std::span<const T> x, std::span<const T> y) {
    if constexpr (std::is_same_v<T, double>) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    } else {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (std::conj(x[i]) * y[i]).real();
        return s;
    }
}

template <class T>
T dot(std::span<const T> x, std::span<const T> y) {
    if constexpr (std::is_same_v<T, double>) return dot_real(x, y);
    else {
        T s{};
        for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
        return s;
    }
}

template <class T>
double norm(std::span<const T> x) {
    return std::sqrt(dot_real(x, x));
}

template <class T>
void orthogonalize(std::vector<T>& w, const std::vector<std::vector<T>>& against) {
    for (const auto& q : against) {
        const T c = dot<T>(q, w);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * q[i];
    }
}

struct LanczosOutcome {
    double energy = 0.0;
    std::vector<complex> vector;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Lowest eigenpair of H restricted to the complement of `deflate`, with full
// reorthogonalization and a fixed-seed start vector.
template <class T>
LanczosOutcome lanczos(const SparseHamiltonian& h, const GroundStateOptions& opts,
                       const std::vector<std::vector<T>>& deflate) {
    const std::size_t n = h.dim;
    std::mt19937_64 rng(opts.seed + deflate.size());
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    std::vector<T> v(n);
    for (auto& x : v) {
        if constexpr (std::is_same_v<T, double>) x = uni(rng);
        else {
            const double re = uni(rng);
            x = T(re, uni(rng));
        }
    }
    orthogonalize(v, deflate);
    orthogonalize(v, deflate);
    {
        const double nv = norm<T>(v);
        for (auto& x : v) x /= nv;
    }

    std::vector<std::vector<T>> basis;
    std::vector<double> alpha, beta;
    std::vector<T> w(n);
    double theta_prev = std::numeric_limits<double>::infinity();
    const std::size_t max_it = std::min(opts.max_iterations, n - deflate.size());

    LanczosOutcome out;
    auto assemble = [&](double theta) {
        const auto y = tridiagonal_eigenvector(alpha, std::span<const double>(beta).first(alpha.size() - 1), theta);
        std::vector<T> psi(n, T{});
        for (std::size_t k = 0; k < basis.size(); ++k)
            for (std::size_t i = 0; i < n; ++i) psi[i] += y[k] * basis[k][i];
        orthogonalize(psi, deflate);
        const double np = norm<T>(psi);
        for (auto& x : psi) x /= np;
        std::vector<T> hpsi(n);
        h.multiply<T>(psi, hpsi);
        const double e = dot_real<T>(psi, hpsi);
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) r2 += std::norm(hpsi[i] - e * psi[i]);
        out.energy = e;
        out.residual = std::sqrt(r2);
        out.vector.assign(psi.begin(), psi.end());
        return out.residual <= 1e-8 * std::max(1.0, std::abs(e));
    };

    for (std::size_t j = 0; j < max_it; ++j) {
        basis.push_back(v);
        h.multiply<T>(basis.back(), w);
        const double a = dot_real<T>(basis.back(), w);
        alpha.push_back(a);
        for (std::size_t i = 0; i < n; ++i) w[i] -= a * basis.back()[i];
        if (j > 0)
            for (std::size_t i = 0; i < n; ++i) w[i] -= beta[j - 1] * basis[j - 1][i];
        for (int pass = 0; pass < 2; ++pass) {
            orthogonalize(w, deflate);
            orthogonalize(w, basis);
        }
        const double bnext = norm<T>(w);
        beta.push_back(bnext);
        out.iterations = j + 1;

        const double theta =
            lowest_tridiagonal_eigenvalue(alpha, std::span<const double>(beta).first(alpha.size() - 1));
        const double scale = std::max(1.0, std::abs(theta));
        const bool exhausted = bnext <= 1e-13 * scale || j + 1 == max_it;

        if (exhausted || std::abs(theta - theta_prev) < opts.ritz_tol) {
            const auto y =
                tridiagonal_eigenvector(alpha, std::span<const double>(beta).first(alpha.size() - 1), theta);
            const double estimate = std::abs(bnext * y.back());
            if (exhausted || estimate <= 1e-9 * scale) {
                if (assemble(theta)) {
                    out.converged = true;
                    return out;
                }
                if (exhausted) return out;
            }
        }
        theta_prev = theta;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / bnext;
    }
    return out;
}

template <class T>
GroundStateResult lanczos_ground(const SparseHamiltonian& h, const GroundStateOptions& opts) {
    GroundStateResult res;
    res.solver = Solver::lanczos;
    auto first = lanczos<T>(h, opts, {});
    res.energy = first.energy;
    res.amplitudes = first.vector;
    res.iterations = first.iterations;
    res.residual_norm = first.residual;
    res.converged = first.converged;
    if (!res.converged || !opts.check_degeneracy || h.dim < 2) return res;

    std::vector<std::vector<T>> deflate(1);
    for (const auto& z : first.vector) {
        if constexpr (std::is_same_v<T, double>) deflate[0].push_back(z.real());
        else deflate[0].push_back(z);
    }
    auto second = lanczos<T>(h, opts, deflate);
    res.iterations += second.iterations;
    res.gap = second.energy - first.energy;
    res.degenerate = res.gap < opts.degeneracy_tol;
    return res;
}

inline GroundStateResult dense_ground(const SparseHamiltonian& h) {
    const auto spec = qmat::hermitian_eig(h.to_dense());
    GroundStateResult res;
    res.solver = Solver::dense;
    res.energy = spec.eigenvalues[0];
    res.amplitudes.resize(h.dim);
    for (std::size_t i = 0; i < h.dim; ++i) res.amplitudes[i] = spec.eigenvectors(i, 0);
    if (h.dim > 1) res.gap = spec.eigenvalues[1] - spec.eigenvalues[0];
    std::vector<complex> hpsi(h.dim);
    h.multiply<complex>(res.amplitudes, hpsi);
    double r2 = 0.0;
    for (std::size_t i = 0; i < h.dim; ++i) r2 += std::norm(hpsi[i] - res.energy * res.amplitudes[i]);
    res.residual_norm = std::sqrt(r2);
    res.converged = res.residual_norm <= 1e-8 * std::max(1.0, std::abs(res.energy));
    return res;
}

} // namespace detail

inline GroundStateResult ground_state(const SparseHamiltonian& h, const GroundStateOptions& opts = {}) {
    if (h.dim == 0) throw Error(Errc::dimension_mismatch, "empty Hamiltonian");
    const bool dense =
        opts.solver == Solver::dense || (opts.solver == Solver::automatic && h.dim <= opts.dense_limit);
    GroundStateResult res;
    if (dense) res = detail::dense_ground(h);
    else if (h.is_real()) res = detail::lanczos_ground<double>(h, opts);
    else res = detail::lanczos_ground<complex>(h, opts);
    if (!res.converged)
        throw Error(Errc::not_converged, "ground state not converged after " + std::to_string(res.iterations) +
                                             " iterations, residual " + std::to_string(res.residual_norm));
    if (dense) res.degenerate = res.gap < opts.degeneracy_tol;
    return res;
}

inline double sector_ground_energy(const ChainModel& m, int twice_sz, GroundStateOptions opts = {}) {
    opts.check_degeneracy = false;
    const auto b = build_basis(m, twice_sz);
    return ground_state(build_hamiltonian(m, b), opts).energy;
}

// Lowest |2 S^z| compatible with the total number of spins (electrons plus
// two impurities).
inline int minimal_twice_sz(const ChainModel& m) { return (m.electrons() + 2) % 2; }

// True when the ground state has no partner one unit of S^z higher, i.e. it
// is a spin singlet (a doublet for odd spin counts).
inline bool singlet_check(const ChainModel& m, const GroundStateOptions& opts = {}) {
    const int sz0 = minimal_twice_sz(m);
    const double e0 = sector_ground_energy(m, sz0, opts);
    double e1 = 0.0;
    try {
        e1 = sector_ground_energy(m, sz0 + 2, opts);
    } catch (const Error& e) {
        if (e.code() == Errc::empty_sector) return true;
        throw;
    }
    return e0 < e1 - 1e-9;
}

// rho_AB[(a,b),(a',b')] = sum_c psi(a,b,c) psi*(a',b',c) with index 2a + b,
// a = 1 meaning impurity A down.
inline qmat::DensityMatrix impurity_rdm(const GroundStateResult& g, const SectorBasis& b) {
    if (g.degenerate)
        throw Error(Errc::degenerate_ground, "ground state is degenerate (gap " + std::to_string(g.gap) + ")");
    if (g.amplitudes.size() != b.size()) throw Error(Errc::dimension_mismatch, "state does not match basis");

    const State fmask = b.fermion_mask();
    const int shift = 2 * b.sites;
    qmat::ComplexMatrix rho(4, 4);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const State s = b.states[i];
        const State pattern = s & fmask;
        const std::size_t row = ((s >> shift) & 1u) * 2 + ((s >> (shift + 1)) & 1u);
        for (State imp = 0; imp < 4; ++imp) {
            const auto j = b.index_of(pattern | (imp << shift));
            if (!j) continue;
            const std::size_t col = (imp & 1u) * 2 + ((imp >> 1) & 1u);
            rho(row, col) += g.amplitudes[i] * std::conj(g.amplitudes[*j]);
        }
    }
    double tr = rho.trace().real();
    qmat::ComplexMatrix herm(4, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) herm(r, c) = 0.5 * (rho(r, c) + std::conj(rho(c, r))) / tr;
    return qmat::DensityMatrix(std::move(herm));
}

enum class SweepParam { kondo_coupling, rkky_direct, separation };

inline const char* sweep_param_name(SweepParam p) {
    switch (p) {
    case SweepParam::kondo_coupling: return "jk";
    case SweepParam::rkky_direct: return "idirect";
    case SweepParam::separation: return "separation";
    }
    return "?";
}

// Separation d places the impurities at ((L-1-d)/2, (L-1+d)/2); L-1-d must be
// even to keep the pair mirror symmetric.
inline ChainModel with_param(ChainModel m, SweepParam p, double value) {
    switch (p) {
    case SweepParam::kondo_coupling: m.kondo_coupling = value; break;
    case SweepParam::rkky_direct: m.rkky_direct = value; break;
    case SweepParam::separation: {
        const int d = static_cast<int>(std::lround(value));
        if (static_cast<double>(d) != value || d < 0 || d > m.sites - 1 || (m.sites - 1 - d) % 2 != 0)
            throw Error(Errc::invalid_model, "separation " + std::to_string(value) +
                                                 " cannot be placed symmetrically on " + std::to_string(m.sites) +
                                                 " sites");
        m.site_a = (m.sites - 1 - d) / 2;
        m.site_b = m.site_a + d;
        break;
    }
    }
    return m;
}

enum class PointStatus { ok, multiplet, skipped };

inline const char* point_status_name(PointStatus s) {
    switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::multiplet: return "multiplet";
    case PointStatus::skipped: return "skipped";
    }
    return "?";
}

struct PointResult {
    double value = 0.0;
    PointStatus status = PointStatus::skipped;
    std::string message;
    double energy = 0.0;
    double correlation = 0.0;
    double werner_residual = 0.0;
    double concurrence_direct = 0.0;
    double negativity_direct = 0.0;
    bool singlet = false;
    std::size_t dimension = 0;
    Solver solver = Solver::automatic;
    werner::EntanglementReport report;
};

// Ground-state analysis of one model. `multiplet` marks a ground state that
// belongs to a degenerate spin multiplet; its f_s is shared by the whole
// multiplet and the report describes the multiplet-averaged Werner state.
inline PointResult analyze(const ChainModel& m, const GroundStateOptions& opts = {}) {
    PointResult p;
    const int sz = m.default_twice_sz();
    const auto basis = build_basis(m, sz);
    const auto h = build_hamiltonian(m, basis);
    const auto g = ground_state(h, opts);
    const auto rho = impurity_rdm(g, basis);
    p.dimension = basis.size();
    p.solver = g.solver;
    p.energy = g.energy;
    p.correlation = measures::spin_correlation(rho).value();
    p.werner_residual = measures::werner_residual(rho);
    p.concurrence_direct = measures::concurrence_wootters(rho);
    p.negativity_direct = measures::negativity_general(rho);

    // A state with |S^z| above the minimum already belongs to a multiplet.
    if (std::abs(sz) == minimal_twice_sz(m)) {
        try {
            p.singlet = g.energy < sector_ground_energy(m, std::abs(sz) + 2, opts) - 1e-9;
        } catch (const Error& e) {
            if (e.code() != Errc::empty_sector) throw;
            p.singlet = true;
        }
    }
    p.status = p.singlet ? PointStatus::ok : PointStatus::multiplet;
    p.report = werner::classify(werner::from_correlation(werner::SpinCorrelation(p.correlation)));
    return p;
}

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Points are independent; results come back in grid order whatever the
// scheduling. Failures are recorded per point.
inline std::vector<PointResult> sweep(const ChainModel& base, SweepParam param, std::span<const double> grid,
                                      const GroundStateOptions& opts = {}, unsigned threads = 0) {
    std::vector<PointResult> out(grid.size());
    auto run = [&](std::size_t i) {
        try {
            out[i] = analyze(with_param(base, param, grid[i]), opts);
        } catch (const Error& e) {
            out[i] = PointResult{};
            out[i].status = PointStatus::skipped;
            out[i].message = e.what();
        }
        out[i].value = grid[i];
    };

    const unsigned nt = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1)));
    if (nt <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) run(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < grid.size(); i = next++) run(i);
        });
    pool.clear();
    return out;
}

struct CrossingOptions {
    double target = -0.25;
    double tol = 1e-6;          // bisection stops once the bracket is narrower than this
    std::size_t pregrid = 9;    // coarse points for the monotonicity check
    double value_tol = 1e-13;   // early exit once |f_s - target| falls below this
};

struct CrossingResult {
    double value = 0.0;
    double correlation = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::size_t evaluations = 0;
};

// Finite-size parameter value at which the impurity correlation crosses
// `target` (default -1/4). The bracket may be given in either order.
inline CrossingResult find_crossing(const ChainModel& base, SweepParam param, double lo, double hi,
                                    const CrossingOptions& copts = {}, const GroundStateOptions& opts = {}) {
    if (!(lo != hi)) throw Error(Errc::no_bracket, "empty bracket");
    if (lo > hi) std::swap(lo, hi);
    if (param == SweepParam::separation) throw Error(Errc::invalid_model, "crossing search needs a continuous parameter");

    CrossingResult res;
    auto fs = [&](double x) {
        ++res.evaluations;
        return analyze(with_param(base, param, x), opts).correlation - copts.target;
    };

    const std::size_t n = std::max<std::size_t>(copts.pregrid, 2);
    std::vector<double> xs(n), ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
        ys[k] = fs(xs[k]);
    }
    bool up = false, down = false;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double d = ys[k + 1] - ys[k];
        if (d > 1e-12) up = true;
        if (d < -1e-12) down = true;
    }
    if (up && down) {
        std::ostringstream msg;
        msg << "f_s is not monotone on the pre-grid:";
        for (std::size_t k = 0; k < n; ++k) msg << " (" << xs[k] << ", " << ys[k] + copts.target << ")";
        throw Error(Errc::non_monotone, msg.str());
    }
    if (ys.front() * ys.back() > 0.0) {
        std::ostringstream msg;
        msg << "f_s - target has the same sign at both ends: f_s(" << lo << ") = " << ys.front() + copts.target
            << ", f_s(" << hi << ") = " << ys.back() + copts.target;
        throw Error(Errc::no_bracket, msg.str());
    }

    std::size_t k = 0;
    while (k + 2 < n && ys[k] * ys[k + 1] > 0.0) ++k;
    double a = xs[k], b = xs[k + 1], fa = ys[k];
    double fb = ys[k + 1];
    if (fa == 0.0) b = a;
    else if (fb == 0.0) a = b;
    while (b - a >= copts.tol) {
        const double mid = 0.5 * (a + b);
        const double fm = fs(mid);
        if (std::abs(fm) < copts.value_tol) {
            a = b = mid;
            break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    res.bracket_lo = a;
    res.bracket_hi = b;
    res.value = 0.5 * (a + b);
    res.correlation = fs(res.value) + copts.target;
    return res;
}

} // namespace kondoent::sim
