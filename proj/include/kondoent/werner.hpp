#pragma once

// Closed-form algebra of rotation-invariant two-spin states (Werner states).
//
// A Werner state is fixed by one number. Two equivalent parameterizations are
// accepted: the spin-spin correlation f_s = <S_A . S_B> in [-3/4, 1/4] and
// the singlet fidelity p_s = <Psi-|rho|Psi-> = 1/4 - f_s in [0, 1]. The
// fidelity is the canonical internal parameter.

#include <kondoent/error.hpp>
#include <kondoent/qmat.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace kondoent::werner {

class SpinCorrelation {
public:
    static constexpr double min = -0.75;
    static constexpr double max = 0.25;

    explicit SpinCorrelation(double fs) : fs_(fs) {
        if (!(fs >= min && fs <= max))
            throw Error(Errc::out_of_range, "spin correlation " + std::to_string(fs) + " outside [-3/4, 1/4]");
    }

    // For values computed from a state: snaps round-off within `slack` of the
    // physical interval onto it.
    static SpinCorrelation clamped(double fs, double slack = 1e-9) {
        if (fs < min && fs >= min - slack) fs = min;
        if (fs > max && fs <= max + slack) fs = max;
        return SpinCorrelation(fs);
    }

    double value() const noexcept { return fs_; }
    // Common Pauli-basis diagonal coefficient r_xx = r_yy = r_zz.
    double pauli_coefficient() const noexcept { return 4.0 * fs_ / 3.0; }

private:
    double fs_;
};

class WernerState {
public:
    explicit WernerState(double ps) : ps_(ps), fs_(0.25 - ps) {
        if (!(ps >= 0.0 && ps <= 1.0))
            throw Error(Errc::out_of_range, "singlet fidelity " + std::to_string(ps) + " outside [0, 1]");
    }

    // Built from a correlation, the state keeps f_s exactly: 1/4 - f_s can round
    // onto 1/2 for the last few doubles below f_s = -1/4.
    explicit WernerState(SpinCorrelation f) : ps_(0.25 - f.value()), fs_(f.value()), from_fs_(true) {}

    double singlet_fidelity() const noexcept { return ps_; }
    double correlation() const noexcept { return fs_; }
    bool built_from_correlation() const noexcept { return from_fs_; }
    // Weight of each of the three triplet Bell states.
    double triplet_weight() const noexcept { return (1.0 - ps_) / 3.0; }
    double prob_singlet() const noexcept { return ps_; }
    double prob_triplet() const noexcept { return 1.0 - ps_; }

    // p_s >= 1/2, evaluated in the constructing parameter.
    bool at_or_above_half() const noexcept { return from_fs_ ? fs_ <= -0.25 : ps_ >= 0.5; }

private:
    double ps_;
    double fs_;
    bool from_fs_ = false;
};

inline WernerState from_correlation(SpinCorrelation f) { return WernerState(f); }
inline WernerState from_fidelity(double ps) { return WernerState(ps); }

// Singlet |Psi-> = (|ud> - |du>)/sqrt2 in the {uu, ud, du, dd} basis.
inline qmat::ComplexMatrix singlet_projector() {
    qmat::ComplexMatrix p(4, 4);
    p(1, 1) = 0.5;
    p(2, 2) = 0.5;
    p(1, 2) = -0.5;
    p(2, 1) = -0.5;
    return p;
}

// (4p_s - 1)/3 |Psi-><Psi-| + (1 - p_s)/3 I
inline qmat::DensityMatrix density_matrix(const WernerState& w) {
    const double ps = w.singlet_fidelity();
    qmat::ComplexMatrix m = singlet_projector() * ((4.0 * ps - 1.0) / 3.0);
    m += qmat::ComplexMatrix::identity(4) * ((1.0 - ps) / 3.0);
    return qmat::DensityMatrix(std::move(m));
}

// max(2 p_s - 1, 0) = max(-2 f_s - 1/2, 0). Either form is exact near the
// threshold (doubling is exact, the subtraction is exact by Sterbenz), so
// C > 0 holds for every representable parameter past the boundary.
inline double concurrence_closed(const WernerState& w) {
    const double c = w.built_from_correlation() ? -2.0 * w.correlation() - 0.5 : 2.0 * w.singlet_fidelity() - 1.0;
    return std::max(c, 0.0);
}

// Equal to the concurrence for every Werner state.
inline double negativity_closed(const WernerState& w) { return concurrence_closed(w); }

inline double pair_entropy(const WernerState& w) {
    const double ps = w.singlet_fidelity();
    const double pt = (1.0 - ps) / 3.0;
    double e = 0.0;
    if (ps > 0.0) e -= ps * std::log2(ps);
    if (pt > 0.0) e -= (1.0 - ps) * std::log2(pt);
    return e;
}

// Each impurity marginal is I/2 for any rotation-invariant state.
inline constexpr double single_entropy() { return 1.0; }

inline SpinCorrelation critical_correlation() { return SpinCorrelation(-0.25); }

inline constexpr double entanglement_threshold_ps = 0.5;
inline constexpr double teleportation_threshold_ps = 0.5;
inline const double chsh_threshold_ps = (1.0 + 3.0 / std::numbers::sqrt2) / 4.0;

struct EntanglementReport {
    double correlation = 0.0;
    double singlet_fidelity = 0.0;
    double concurrence = 0.0;
    double negativity = 0.0;
    double pair_entropy = 0.0;
    double single_entropy = 1.0;
    double prob_singlet = 0.0;
    double prob_triplet = 0.0;
    bool entangled = false;
    // Inclusive at p_s = 1/2 even though the state is separable there.
    bool teleportation_useful = false;
    bool chsh_violating = false;
};

inline EntanglementReport classify(const WernerState& w) {
    const double ps = w.singlet_fidelity();
    EntanglementReport r;
    r.correlation = w.correlation();
    r.singlet_fidelity = ps;
    r.concurrence = concurrence_closed(w);
    r.negativity = negativity_closed(w);
    r.pair_entropy = pair_entropy(w);
    r.single_entropy = single_entropy();
    r.prob_singlet = w.prob_singlet();
    r.prob_triplet = w.prob_triplet();
    r.entangled = r.concurrence > 0.0;
    r.teleportation_useful = w.at_or_above_half();
    r.chsh_violating = ps > chsh_threshold_ps;
    return r;
}

} // namespace kondoent::werner
