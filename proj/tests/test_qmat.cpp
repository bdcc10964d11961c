#include <kondoent/qmat.hpp>
#include <kondoent/werner.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace kondoent;
using namespace kondoent::qmat;
using namespace std::complex_literals;

namespace {

double reconstruction_residual(const ComplexMatrix& m, const Spectrum& s) {
    const std::size_t n = m.rows();
    ComplexMatrix lam(n, n);
    for (std::size_t i = 0; i < n; ++i) lam(i, i) = s.eigenvalues[i];
    return max_abs_diff(m, s.eigenvectors * lam * s.eigenvectors.adjoint());
}

double orthonormality_defect(const Spectrum& s) {
    const std::size_t n = s.eigenvectors.cols();
    return max_abs_diff(s.eigenvectors.adjoint() * s.eigenvectors, ComplexMatrix::identity(n));
}

} // namespace

TEST(Kron, IdentityTimesIdentity) {
    EXPECT_EQ(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)), ComplexMatrix::identity(4));
}

TEST(Kron, ZZIsDiagonal) {
    const auto zz = kron(pauli(Pauli::z), pauli(Pauli::z));
    const double expected[4] = {1, -1, -1, 1};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(zz(i, j), i == j ? complex(expected[i]) : complex(0.0));
}

TEST(Kron, XYCornerEntries) {
    const auto xy = kron(pauli(Pauli::x), pauli(Pauli::y));
    EXPECT_EQ(xy(0, 3), -1i);
    EXPECT_EQ(xy(3, 0), 1i);
}

TEST(Kron, RectangularLayout) {
    const ComplexMatrix a(1, 2, {1.0, 2.0});
    const ComplexMatrix b(2, 1, {3.0, 4.0});
    const auto k = kron(a, b);
    ASSERT_EQ(k.rows(), 2u);
    ASSERT_EQ(k.cols(), 2u);
    EXPECT_EQ(k(0, 0), 3.0);
    EXPECT_EQ(k(1, 0), 4.0);
    EXPECT_EQ(k(0, 1), 6.0);
    EXPECT_EQ(k(1, 1), 8.0);
}

TEST(ComplexMatrix, EntryCountMustMatchShape) {
    EXPECT_THROW(ComplexMatrix(2, 2, {1.0, 2.0, 3.0}), Error);
}

TEST(HermitianEig, PauliSpectra) {
    for (Pauli p : {Pauli::x, Pauli::y, Pauli::z}) {
        const auto s = hermitian_eig(pauli(p));
        EXPECT_NEAR(s.eigenvalues[0], -1.0, 1e-14);
        EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-14);
        EXPECT_LE(reconstruction_residual(pauli(p), s), 1e-12);
    }
}

TEST(HermitianEig, PureSingletProjector) {
    const auto rho = werner::density_matrix(werner::WernerState(1.0));
    const auto w = rho.spectrum().eigenvalues;
    EXPECT_NEAR(w[0], 0.0, 1e-14);
    EXPECT_NEAR(w[1], 0.0, 1e-14);
    EXPECT_NEAR(w[2], 0.0, 1e-14);
    EXPECT_NEAR(w[3], 1.0, 1e-14);
}

TEST(HermitianEig, RejectsNonHermitian) {
    const ComplexMatrix m(2, 2, {0.0, 1.0, 0.0, 0.0});
    try {
        hermitian_eig(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::not_hermitian);
    }
}

TEST(HermitianEig, DegenerateComplexSpectrum) {
    // U diag(1, 1, 1, -2) U^dagger with a complex U: exercises eigenvector
    // extraction from a repeated eigenvalue of the real embedding.
    std::mt19937_64 rng(11);
    const auto u = oracle::random_unitary(4, rng);
    ComplexMatrix d(4, 4);
    d(0, 0) = 1.0;
    d(1, 1) = 1.0;
    d(2, 2) = 1.0;
    d(3, 3) = -2.0;
    const auto m = u * d * u.adjoint();
    const auto herm = (m + m.adjoint()) * 0.5;
    const auto s = hermitian_eig(herm);
    EXPECT_NEAR(s.eigenvalues[0], -2.0, 1e-12);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(s.eigenvalues[k], 1.0, 1e-12);
    EXPECT_LE(reconstruction_residual(herm, s), 1e-10);
    EXPECT_LE(orthonormality_defect(s), 1e-10);
}

TEST(HermitianEig, RandomHermitianProperty) {
    std::mt19937_64 rng(20240601);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 8;
        const auto m = oracle::random_hermitian(n, rng);
        const auto s = hermitian_eig(m);
        ASSERT_EQ(s.eigenvalues.size(), n);
        EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
        EXPECT_LE(reconstruction_residual(m, s), 1e-10) << "trial " << trial;
        EXPECT_LE(orthonormality_defect(s), 1e-10) << "trial " << trial;
    }
}

TEST(HermitianEig, RealSymmetricPathMatchesEmbedding) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    ComplexMatrix m(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i; j < 6; ++j) m(i, j) = m(j, i) = N(rng);
    const auto real_path = hermitian_eig(m);
    // A unitary diagonal phase makes the matrix complex without changing its spectrum.
    ComplexMatrix phase(6, 6);
    for (std::size_t i = 0; i < 6; ++i) phase(i, i) = std::polar(1.0, 0.3 * static_cast<double>(i));
    const auto cplx = phase * m * phase.adjoint();
    const auto embedded = hermitian_eig((cplx + cplx.adjoint()) * 0.5);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(real_path.eigenvalues[k], embedded.eigenvalues[k], 1e-12);
}

TEST(PartialTrace, SingletMarginalIsMaximallyMixed) {
    const auto r = partial_trace(DensityMatrix(oracle::bell(0)), Subsystem::A);
    EXPECT_LE(max_abs_diff(r.matrix(), ComplexMatrix::identity(2) * 0.5), 1e-15);
}

TEST(PartialTrace, WernerMarginal) {
    const auto r = partial_trace(werner::density_matrix(werner::WernerState(0.7)), Subsystem::A);
    EXPECT_LE(max_abs_diff(r.matrix(), ComplexMatrix::identity(2) * 0.5), 1e-15);
}

TEST(PartialTrace, ProductStateProperty) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const auto ra = oracle::random_qubit_state(rng);
        const auto rb = oracle::random_qubit_state(rng);
        const DensityMatrix prod(kron(ra, rb));
        EXPECT_LE(max_abs_diff(partial_trace(prod, Subsystem::A).matrix(), ra), 1e-12);
        EXPECT_LE(max_abs_diff(partial_trace(prod, Subsystem::B).matrix(), rb), 1e-12);
    }
}

TEST(PartialTrace, ThreeQubitFactor) {
    std::mt19937_64 rng(3);
    const auto a = oracle::random_qubit_state(rng), b = oracle::random_qubit_state(rng),
               c = oracle::random_qubit_state(rng);
    const auto abc = kron(kron(a, b), c);
    const std::size_t keep_b[] = {1};
    EXPECT_LE(max_abs_diff(partial_trace(abc, keep_b), b), 1e-12);
    const std::size_t keep_ca[] = {2, 0};
    EXPECT_LE(max_abs_diff(partial_trace(abc, keep_ca), kron(c, a)), 1e-12);
}

TEST(PartialTrace, RejectsWrongDimension) {
    const DensityMatrix q(ComplexMatrix::identity(2) * 0.5);
    try {
        partial_trace(q, Subsystem::A);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::dimension_mismatch);
    }
}

TEST(PartialTranspose, ProductStateStaysPositive) {
    std::mt19937_64 rng(8);
    const DensityMatrix prod(kron(oracle::random_qubit_state(rng), oracle::random_qubit_state(rng)));
    const auto w = hermitian_eig(partial_transpose(prod, Subsystem::B)).eigenvalues;
    EXPECT_GE(w.front(), -1e-10);
}

TEST(PartialTranspose, SingletMinimumEigenvalue) {
    const auto w = hermitian_eig(partial_transpose(DensityMatrix(oracle::bell(0)), Subsystem::B)).eigenvalues;
    EXPECT_NEAR(w[0], -0.5, 1e-14);
    for (int k = 1; k < 4; ++k) EXPECT_NEAR(w[k], 0.5, 1e-14);
}

TEST(PartialTranspose, WernerHalfIsPptBoundary) {
    const auto rho = werner::density_matrix(werner::WernerState(0.5));
    const auto w = hermitian_eig(partial_transpose(rho, Subsystem::A)).eigenvalues;
    EXPECT_NEAR(w[0], 0.0, 1e-14);
}

TEST(PartialTranspose, InvolutionIsExact) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = oracle::random_hermitian(4, rng);
        for (Subsystem s : {Subsystem::A, Subsystem::B}) EXPECT_EQ(partial_transpose(partial_transpose(m, s), s), m);
    }
}

TEST(PartialTranspose, OutputIsHermitian) {
    std::mt19937_64 rng(71);
    const auto psi = oracle::random_state(4, rng);
    const DensityMatrix rho = DensityMatrix::pure(psi);
    EXPECT_LE(hermiticity_defect(partial_transpose(rho, Subsystem::A)), 1e-15);
}

TEST(VnEntropy, Endpoints) {
    std::mt19937_64 rng(4);
    EXPECT_NEAR(vn_entropy(DensityMatrix::pure(oracle::random_state(4, rng))), 0.0, 1e-12);
    EXPECT_NEAR(vn_entropy(DensityMatrix(ComplexMatrix::identity(4) * 0.25)), 2.0, 1e-14);
    EXPECT_NEAR(vn_entropy(werner::density_matrix(werner::WernerState(0.25))), 2.0, 1e-14);
}

TEST(VnEntropy, UnitaryInvariance) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 50; ++trial) {
        // random mixed state: U diag(p) U^dagger
        std::uniform_real_distribution<double> U(0.0, 1.0);
        ComplexMatrix d(4, 4);
        double tot = 0.0;
        for (std::size_t i = 0; i < 4; ++i) tot += (d(i, i) = U(rng)).real();
        d *= 1.0 / tot;
        const auto u1 = oracle::random_unitary(4, rng);
        const auto u2 = oracle::random_unitary(4, rng);
        auto m1 = u1 * d * u1.adjoint();
        auto m2 = u2 * m1 * u2.adjoint();
        m1 = (m1 + m1.adjoint()) * 0.5;
        m2 = (m2 + m2.adjoint()) * 0.5;
        EXPECT_NEAR(vn_entropy(DensityMatrix(m1)), vn_entropy(DensityMatrix(m2)), 1e-9);
    }
}

TEST(DensityMatrix, Validation) {
    EXPECT_THROW(DensityMatrix(ComplexMatrix::identity(3) * (1.0 / 3.0)), Error);
    EXPECT_THROW(DensityMatrix(ComplexMatrix::identity(2)), Error);
    const ComplexMatrix neg(2, 2, {1.5, 0.0, 0.0, -0.5});
    try {
        DensityMatrix bad(neg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::negative_eigenvalue);
    }
    // Round-off below zero is tolerated and clamped.
    const ComplexMatrix tiny(2, 2, {1.0 + 5e-11, 0.0, 0.0, -5e-11});
    const DensityMatrix ok(tiny);
    EXPECT_EQ(ok.clamped_eigenvalues()[0], 0.0);
}
