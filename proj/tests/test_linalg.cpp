#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "ebtk/linalg.hpp"
#include "test_util.hpp"

using namespace ebtk;
using Catch::Approx;

namespace {

CMat pauli_x() {
    CMat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMat bell_state() {  // |Φ+><Φ+| on 2⊗2
    CVec phi = CVec::Zero(4);
    phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
    return phi * phi.adjoint();
}

}  // namespace

TEST_CASE("eig_hermitian: identity and diagonal cases") {
    auto e = eig_hermitian(identity(3));
    for (int i = 0; i < 3; ++i) CHECK(e.eigenvalues(i) == Approx(1.0));

    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    auto e2 = eig_hermitian(d);
    CHECK(e2.eigenvalues(0) == Approx(-1.0));
    CHECK(e2.eigenvalues(1) == Approx(2.0));
}

TEST_CASE("eig_hermitian: Pauli-X closed form") {
    auto e = eig_hermitian(pauli_x());
    CHECK(e.eigenvalues(0) == Approx(-1.0));
    CHECK(e.eigenvalues(1) == Approx(1.0));
    // eigenvectors are (|0> ∓ |1>)/√2 up to phase
    const double s = 1.0 / std::sqrt(2.0);
    for (int col = 0; col < 2; ++col) {
        CVec v = e.eigenvectors.col(col);
        const double sign = (col == 0) ? -1.0 : 1.0;
        CVec ref(2);
        ref << s, sign * s;
        Complex phase = ref.dot(v);
        CHECK((v - phase * ref).norm() < 1e-12);
    }
}

TEST_CASE("eig_hermitian: reconstruction on random inputs") {
    auto g = testutil::rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        Index d = 2 + static_cast<Index>(trial % 5);
        CMat m = testutil::rand_hermitian(g, d);
        auto e = eig_hermitian(m);
        CMat rec = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.adjoint();
        CHECK((rec - m).norm() <= tol.recon * m.norm());
        CHECK((e.eigenvectors.adjoint() * e.eigenvectors - identity(d)).norm() < 1e-10);
        CHECK(std::is_sorted(e.eigenvalues.data(), e.eigenvalues.data() + d));
    }
}

TEST_CASE("eig_hermitian: rejects non-Hermitian input") {
    CMat m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS(eig_hermitian(m), NonHermitianInput);
}

TEST_CASE("kron: identity and diagonal cases") {
    CHECK((kron(identity(2), identity(2)) - identity(4)).norm() == 0.0);

    CMat a = CMat::Zero(2, 2), b = CMat::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    CMat k = kron(a, b);
    CMat expect = CMat::Zero(4, 4);
    expect(1, 1) = 1.0;
    CHECK((k - expect).norm() == 0.0);
}

TEST_CASE("kron: elementwise definition oracle") {
    auto g = testutil::rng(5);
    CMat a = testutil::rand_cmat(g, 2, 3);
    CMat b = testutil::rand_cmat(g, 3, 2);
    CMat k = kron(a, b);
    REQUIRE(k.rows() == 6);
    REQUIRE(k.cols() == 6);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 3; ++j)
            for (Index p = 0; p < 3; ++p)
                for (Index q = 0; q < 2; ++q)
                    CHECK(k(i * 3 + p, j * 2 + q) == a(i, j) * b(p, q));
}

TEST_CASE("kron: trace multiplicativity") {
    auto g = testutil::rng(6);
    for (int t = 0; t < 5; ++t) {
        CMat a = testutil::rand_cmat(g, 3, 3);
        CMat b = testutil::rand_cmat(g, 2, 2);
        CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) < 1e-12);
    }
}

TEST_CASE("partial_trace: product case") {
    auto g = testutil::rng(7);
    CMat sigma = testutil::rand_hermitian(g, 2);
    CMat tau = testutil::rand_hermitian(g, 3);
    CMat m = kron(sigma, tau);
    CMat lhs = partial_trace(m, TensorShape{2, 3}, {0});
    CHECK((lhs - sigma * tau.trace()).norm() < 1e-12);
    CMat rhs = partial_trace(m, TensorShape{2, 3}, {1});
    CHECK((rhs - tau * sigma.trace()).norm() < 1e-12);
}

TEST_CASE("partial_trace: maximally entangled state via direct summation oracle") {
    CMat rho = bell_state();
    // oracle: out(i,j) = sum_k rho[(i,k),(j,k)]
    CMat expect = CMat::Zero(2, 2);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            for (Index k = 0; k < 2; ++k) expect(i, j) += rho(i * 2 + k, j * 2 + k);
    CHECK((expect - 0.5 * identity(2)).norm() < 1e-15);

    CMat got = partial_trace(rho, TensorShape{2, 2}, {0});
    CHECK((got - expect).norm() == 0.0);
}

TEST_CASE("partial_trace: trace over everything and trace preservation") {
    auto g = testutil::rng(8);
    CMat m = testutil::rand_hermitian(g, 6);
    CMat all = partial_trace(m, TensorShape{2, 3}, {});
    REQUIRE(all.rows() == 1);
    CHECK(std::abs(all(0, 0) - m.trace()) < 1e-12);

    CMat keep = partial_trace(m, TensorShape{2, 3}, {1});
    CHECK(std::abs(keep.trace() - m.trace()) < 1e-12);
}

TEST_CASE("partial_trace: rejects bad shapes") {
    CMat m = identity(6);
    CHECK_THROWS_AS(partial_trace(m, TensorShape{2, 2}, {0}), BadShape);
    CHECK_THROWS_AS(partial_trace(m, TensorShape{2, 3}, {2}), BadShape);
}

TEST_CASE("embed_with_identity is the adjoint of partial_trace") {
    auto g = testutil::rng(9);
    TensorShape shape{2, 3, 2};
    CMat x = testutil::rand_hermitian(g, 12);
    CMat y = testutil::rand_hermitian(g, 4);
    std::vector<std::size_t> keep{0, 2};
    Complex lhs = hs_inner(y, partial_trace(x, shape, keep));
    Complex rhs = hs_inner(embed_with_identity(y, shape, keep), x);
    CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("partial_transpose: product case stays PSD") {
    auto g = testutil::rng(10);
    CMat sigma = testutil::rand_density(g, 2);
    CMat tau = testutil::rand_density(g, 3);
    CMat m = kron(sigma, tau);
    CMat pt = partial_transpose(m, TensorShape{2, 3}, 1);
    CHECK((pt - kron(sigma, tau.transpose())).norm() < 1e-15);
    CHECK(min_eigenvalue(pt) > -tol.psd);
}

TEST_CASE("partial_transpose: Bell state spectrum oracle") {
    CMat rho = bell_state();
    // independent oracle: build the PT by explicit block swap of 2x2 blocks
    CMat pt_oracle(4, 4);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            pt_oracle.block(j * 2, i * 2, 2, 2) = rho.block(i * 2, j * 2, 2, 2);
    CMat pt = partial_transpose(rho, TensorShape{2, 2}, 0);
    CHECK((pt - pt_oracle).norm() == 0.0);

    auto e = eig_hermitian(pt);
    CHECK(e.eigenvalues(0) == Approx(-0.5));
    CHECK(e.eigenvalues(1) == Approx(0.5));
    CHECK(e.eigenvalues(2) == Approx(0.5));
    CHECK(e.eigenvalues(3) == Approx(0.5));
}

TEST_CASE("partial_transpose: exact involution, identity fixed point") {
    auto g = testutil::rng(12);
    CMat m = testutil::rand_hermitian(g, 12);
    TensorShape shape{2, 3, 2};
    for (std::size_t f = 0; f < 3; ++f) {
        CMat twice = partial_transpose(partial_transpose(m, shape, f), shape, f);
        CHECK((twice - m).norm() == 0.0);
    }
    CMat q = 0.25 * identity(4);
    CHECK((partial_transpose(q, TensorShape{2, 2}, 0) - q).norm() == 0.0);
}

TEST_CASE("permute_factors: identity and swap") {
    auto g = testutil::rng(13);
    CMat a = testutil::rand_hermitian(g, 2);
    CMat b = testutil::rand_hermitian(g, 3);
    CMat m = kron(a, b);
    CHECK((permute_factors(m, TensorShape{2, 3}, {0, 1}) - m).norm() == 0.0);
    CHECK((permute_factors(m, TensorShape{2, 3}, {1, 0}) - kron(b, a)).norm() == 0.0);
}

TEST_CASE("permute_factors: 3-cycle against kron recomposition oracle") {
    auto g = testutil::rng(14);
    CMat a = testutil::rand_cmat(g, 2, 2), b = testutil::rand_cmat(g, 2, 2),
         c = testutil::rand_cmat(g, 2, 2);
    CMat m = kron(kron(a, b), c);
    // sigma = (1,2,0): result factor p is input factor sigma[p] → B⊗C⊗A
    CMat got = permute_factors(m, TensorShape{2, 2, 2}, {1, 2, 0});
    CMat expect = kron(kron(b, c), a);
    CHECK((got - expect).norm() < 1e-13);
}

TEST_CASE("permute_factors: inverse composition and spectrum preservation") {
    auto g = testutil::rng(15);
    CMat m = testutil::rand_hermitian(g, 8);
    TensorShape shape{2, 2, 2};
    std::vector<std::size_t> sigma{2, 0, 1}, inv{1, 2, 0};
    CMat round = permute_factors(permute_factors(m, shape, sigma), shape, inv);
    CHECK((round - m).norm() == 0.0);

    auto e1 = eig_hermitian(m);
    auto e2 = eig_hermitian(permute_factors(m, shape, sigma));
    CHECK((e1.eigenvalues - e2.eigenvalues).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("permute_factors: rejects non-permutations") {
    CMat m = identity(4);
    CHECK_THROWS_AS(permute_factors(m, TensorShape{2, 2}, {0, 0}), BadPermutation);
    CHECK_THROWS_AS(permute_factors(m, TensorShape{2, 2}, {0}), BadPermutation);
}

TEST_CASE("partial trace and partial transpose commute on disjoint factors") {
    auto g = testutil::rng(16);
    TensorShape shape{2, 2, 3};
    CMat m = testutil::rand_hermitian(g, 12);
    // transpose factor 1, trace out factor 0 (keep 1 and 2)
    CMat a = partial_trace(partial_transpose(m, shape, 1), shape, {1, 2});
    CMat b = partial_transpose(partial_trace(m, shape, {1, 2}), TensorShape{2, 3}, 0);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("hermitian real parametrization is an isometry") {
    auto g = testutil::rng(17);
    for (Index d : {2, 3, 5}) {
        CMat a = testutil::rand_hermitian(g, d);
        CMat b = testutil::rand_hermitian(g, d);
        RVec va = herm_to_rvec(a), vb = herm_to_rvec(b);
        CHECK(std::abs(va.dot(vb) - hs_inner(a, b).real()) < 1e-12);
        CHECK((rvec_to_herm(va, d) - a).norm() < 1e-14);
    }
}
