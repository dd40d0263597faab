#include <catch2/catch_amalgamated.hpp>

#include "ebtk/feasibility.hpp"
#include "test_util.hpp"

using namespace ebtk;
using Catch::Approx;

namespace {

FeasibilityProblem random_problem(std::mt19937_64& g, Index dim, int m) {
    FeasibilityProblem p;
    p.dim = dim;
    p.rhs.resize(m);
    for (int i = 0; i < m; ++i) {
        p.lhs.push_back(testutil::rand_hermitian(g, dim));
        p.rhs(i) = testutil::gaussian(g);
    }
    return p;
}

// normal-equations least-squares oracle for the affine projection
CMat ls_projection_oracle(const CMat& x, const FeasibilityProblem& p) {
    const Index n = herm_param_size(p.dim);
    const Index m = static_cast<Index>(p.lhs.size());
    Eigen::MatrixXd a(m, n);
    for (Index i = 0; i < m; ++i) a.row(i) = herm_to_rvec(p.lhs[static_cast<std::size_t>(i)]);
    RVec vx = herm_to_rvec(x);
    RVec z = (a * a.transpose()).ldlt().solve(p.rhs - a * vx);
    return rvec_to_herm(vx + a.transpose() * z, p.dim);
}

}  // namespace

TEST_CASE("project_affine: feasible points are fixed") {
    auto g = testutil::rng(31);
    FeasibilityProblem p = random_problem(g, 3, 4);
    CMat w = testutil::rand_hermitian(g, 3);
    for (int i = 0; i < 4; ++i)
        p.rhs(i) = hs_inner(p.lhs[static_cast<std::size_t>(i)], w).real();
    CHECK((project_affine(w, p) - w).norm() < 1e-11);
}

TEST_CASE("project_affine: trace constraint from zero gives I/dim") {
    FeasibilityProblem p;
    p.dim = 4;
    p.lhs.push_back(identity(4));
    p.rhs = RVec::Ones(1);
    CMat got = project_affine(CMat::Zero(4, 4), p);
    CHECK((got - 0.25 * identity(4)).norm() < 1e-13);
}

TEST_CASE("project_affine: matches the least-squares oracle") {
    auto g = testutil::rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        FeasibilityProblem p = random_problem(g, 4, 5);
        CMat x = testutil::rand_hermitian(g, 4);
        CMat got = project_affine(x, p);
        CMat expect = ls_projection_oracle(x, p);
        CHECK((got - expect).norm() < 1e-10);
        for (int i = 0; i < 5; ++i)
            CHECK(std::abs(hs_inner(p.lhs[static_cast<std::size_t>(i)], got).real() -
                           p.rhs(i)) < 1e-11);
    }
}

TEST_CASE("project_affine: dependent rows are dropped or rejected") {
    auto g = testutil::rng(33);
    FeasibilityProblem p;
    p.dim = 3;
    CMat a = testutil::rand_hermitian(g, 3);
    p.lhs = {a, CMat(2.0 * a)};
    p.rhs.resize(2);
    p.rhs << 1.0, 2.0;  // consistent duplicate
    CMat x = testutil::rand_hermitian(g, 3);
    CHECK(std::abs(hs_inner(a, project_affine(x, p)).real() - 1.0) < 1e-11);

    p.rhs << 1.0, 2.5;  // conflicting duplicate
    CHECK_THROWS_AS(project_affine(x, p), InconsistentConstraints);
}

TEST_CASE("project_psd: fixed points and diagonal clipping") {
    auto g = testutil::rng(34);
    CMat psd = testutil::rand_density(g, 4);
    CHECK((project_psd(psd) - psd).norm() < 1e-12);

    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    CMat clipped = project_psd(d);
    CHECK(clipped(0, 0).real() == Approx(2.0));
    CHECK(std::abs(clipped(1, 1)) < 1e-14);
}

TEST_CASE("project_psd: Frobenius-nearest against a sampling oracle") {
    auto g = testutil::rng(35);
    CMat x = testutil::rand_hermitian(g, 4);
    CMat px = project_psd(x);
    CHECK(min_eigenvalue(px) >= -1e-12);
    const double dref = (x - px).norm();
    for (int i = 0; i < 100; ++i) {
        CMat y = 4.0 * testutil::rand_density(g, 4);  // arbitrary PSD sample
        CHECK(dref <= (x - y).norm() + 1e-12);
    }
}

TEST_CASE("solve: trace-one feasible, trace-negative infeasible") {
    SolverConfig cfg;
    FeasibilityProblem p;
    p.dim = 3;
    p.lhs.push_back(identity(3));
    p.rhs = RVec::Ones(1);
    auto out = solve(p, cfg);
    REQUIRE(out.verdict == Verdict::Feasible);
    REQUIRE(out.witness.has_value());
    CHECK(check_witness(p, *out.witness, cfg.eps_feas).ok);

    p.rhs(0) = -1.0;
    auto bad = solve(p, cfg);
    CHECK(bad.verdict == Verdict::LikelyInfeasible);
    CHECK_FALSE(bad.witness.has_value());
}

TEST_CASE("solve: planted witnesses are recovered and verified") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto g = testutil::rng(400 + seed);
        const Index dim = 4 + static_cast<Index>(seed % 3);
        FeasibilityProblem p;
        p.dim = dim;
        CMat planted = testutil::rand_density(g, dim);
        const int m = 6;
        p.rhs.resize(m);
        for (int i = 0; i < m; ++i) {
            p.lhs.push_back(testutil::rand_hermitian(g, dim));
            p.rhs(i) = hs_inner(p.lhs[static_cast<std::size_t>(i)], planted).real();
        }
        SolverConfig cfg;
        auto out = solve(p, cfg);
        REQUIRE(out.verdict == Verdict::Feasible);
        auto chk = check_witness(p, *out.witness, cfg.eps_feas);
        CHECK(chk.ok);
    }
}

TEST_CASE("solve: deterministic for fixed config and initial point") {
    auto g = testutil::rng(36);
    FeasibilityProblem p = random_problem(g, 3, 2);
    CMat planted = testutil::rand_density(g, 3);
    for (int i = 0; i < 2; ++i)
        p.rhs(i) = hs_inner(p.lhs[static_cast<std::size_t>(i)], planted).real();
    SolverConfig cfg;
    auto a = solve(p, cfg);
    auto b = solve(p, cfg);
    CHECK(a.iterations == b.iterations);
    CHECK(a.residual == b.residual);
    REQUIRE(a.witness.has_value());
    REQUIRE(b.witness.has_value());
    CHECK((*a.witness - *b.witness).norm() == 0.0);
}

TEST_CASE("solve: Fejér monotonicity towards a known feasible point") {
    auto g = testutil::rng(37);
    const Index dim = 4;
    FeasibilityProblem p;
    p.dim = dim;
    CMat planted = testutil::rand_density(g, dim);
    p.rhs.resize(4);
    for (int i = 0; i < 4; ++i) {
        p.lhs.push_back(testutil::rand_hermitian(g, dim));
        p.rhs(i) = hs_inner(p.lhs[static_cast<std::size_t>(i)], planted).real();
    }
    DenseAffineProjector aff(p);
    SolverConfig cfg;
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    auto obs = [&](long, const CMat& x) {
        const double d = (x - planted).norm();
        if (d > prev + 1e-9) monotone = false;
        prev = d;
    };
    auto out = dykstra_solve(aff, cfg, nullptr, obs);
    CHECK(out.verdict == Verdict::Feasible);
    CHECK(monotone);
}

TEST_CASE("structured and dense affine projectors agree") {
    auto g = testutil::rng(38);
    TensorShape shape{2, 2, 2};
    CMat sigma = testutil::rand_density(g, 2), tau = testutil::rand_density(g, 2),
         rho = testutil::rand_density(g, 2);
    CMat full = kron(kron(sigma, tau), rho);
    std::vector<PartialTraceConstraint> cons{
        {{0, 1}, partial_trace(full, shape, {0, 1})},
        {{0, 2}, partial_trace(full, shape, {0, 2})}};
    MarginalAffineProjector sp(shape, cons);
    DenseAffineProjector dp(sp.as_problem());

    for (int t = 0; t < 5; ++t) {
        CMat x = testutil::rand_hermitian(g, 8);
        CMat a = sp.project(x);
        CMat b = dp.project(x);
        CHECK((a - b).norm() < 1e-9);
        for (const auto& c : cons)
            CHECK((partial_trace(a, shape, c.keep) - c.target).norm() < 1e-10);
    }

    SolverConfig cfg;
    auto so = dykstra_solve(sp, cfg);
    auto d0 = dykstra_solve(dp, cfg);
    CHECK(so.verdict == Verdict::Feasible);
    CHECK(d0.verdict == Verdict::Feasible);
    CHECK(check_witness(shape, cons, *so.witness, cfg.eps_feas).ok);
}
