#include <catch2/catch_amalgamated.hpp>

#include "eigenfiber/eigensolve.hpp"
#include "eigenfiber/kernel.hpp"
#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace eigenfiber;
using Catch::Approx;

namespace {

Kernel k2_laplacian(double m0 = 1.0, double m1 = 1.0) {
    auto sp = make_space({"x", "y"}, {m0, m1});
    return laplacian_from_graph(GraphSpec(sp, {{0, 1, 1.0}}));
}

Kernel p3_laplacian() {
    auto sp = make_uniform_space(3);
    return laplacian_from_graph(GraphSpec(sp, {{0, 1, 1.0}, {1, 2, 1.0}}));
}

}  // namespace

TEST_CASE("formal application evaluates the kernel sum") {
    auto sp = make_space({"x", "y"}, {1.0, 2.0});
    Kernel k = Kernel::from_entries(sp, {{0, 1, cplx(1, 0)}}, true);
    VertexFunction w(sp, {cplx(0, 0), cplx(1, 0)});
    CHECK(apply_formal(k, w, 0).real() == Approx(2.0));  // a(x,y) w(y) m(y) = 1*1*2
    CHECK(std::abs(apply_formal(k, w, 1)) == 0.0);

    CHECK(apply_formal_all(k, VertexFunction::zero(sp)).max_abs() == 0.0);
}

TEST_CASE("graph Laplacian kernel matches the closed form") {
    Kernel k2 = k2_laplacian();
    CHECK(k2.at(0, 0).real() == Approx(1.0));
    CHECK(k2.at(0, 1).real() == Approx(-1.0));
    CHECK(k2.at(1, 0).real() == Approx(-1.0));
    CHECK(k2.at(1, 1).real() == Approx(1.0));

    Kernel p3 = p3_laplacian();
    const double expected[3][3] = {{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(p3.at(i, j).real() == Approx(expected[i][j]).margin(1e-15));

    // constants are harmonic at any measure and weights
    RngStream rng(11, "kernel/harmonic");
    for (int rep = 0; rep < 10; ++rep) {
        auto sp = corpus::random_space(rng, rng.uniform_int(3, 15));
        Kernel lap = laplacian_from_graph(corpus::random_graph(rng, sp));
        VertexFunction ones(sp, std::vector<cplx>(static_cast<std::size_t>(sp->size()), cplx(1, 0)));
        CHECK(apply_formal_all(lap, ones).max_abs() < 1e-11);
    }
}

TEST_CASE("graph validation") {
    auto sp = make_uniform_space(3);
    CHECK_THROWS_AS(GraphSpec(sp, {{0, 0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(GraphSpec(sp, {{0, 1, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(GraphSpec(sp, {{0, 1, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(GraphSpec(sp, {{0, 1, 1.0}, {1, 0, 2.0}}), std::invalid_argument);
}

TEST_CASE("eigen residual of exact and non-eigenfunctions") {
    Kernel k2 = k2_laplacian();
    auto sp = k2.space();
    CHECK(eigen_residual(k2, VertexFunction(sp, {cplx(1, 0), cplx(1, 0)}), 0.0) == Approx(0.0).margin(1e-15));
    CHECK(eigen_residual(k2, VertexFunction(sp, {cplx(1, 0), cplx(-1, 0)}), 2.0) == Approx(0.0).margin(1e-15));
    CHECK(eigen_residual(k2, VertexFunction(sp, {cplx(1, 0), cplx(0, 0)}), 0.0) == Approx(1.0));
}

TEST_CASE("the two eigenfunction notions coincide") {
    Kernel k2 = k2_laplacian();
    auto sp = k2.space();
    CHECK(cc_eigen_residual(k2, VertexFunction(sp, {cplx(1, 0), cplx(1, 0)}), 0.0) ==
          Approx(0.0).margin(1e-15));
    CHECK(cc_eigen_residual(k2, VertexFunction(sp, {cplx(1, 0), cplx(-1, 0)}), 2.0) ==
          Approx(0.0).margin(1e-15));

    // randomized equivalence: the two residual routes agree, and vanish
    // together, over >= 100 cases
    RngStream rng(11, "kernel/residual-routes");
    for (int rep = 0; rep < 120; ++rep) {
        auto sp10 = corpus::random_space(rng, 10);
        Kernel k = corpus::random_hermitian_kernel(rng, sp10);
        auto phi = corpus::random_function(rng, sp10);
        const double lam = rng.uniform(-3.0, 3.0);
        const double a = eigen_residual(k, phi, lam);
        const double b = cc_eigen_residual(k, phi, lam);
        const double scale = residual_scale(phi, lam);
        CHECK(std::abs(a - b) <= 1e-12 * scale);
        CHECK((a <= 1e-9 * scale) == (b <= 1e-9 * scale));
    }
}

TEST_CASE("formal operator is symmetric for the m inner product") {
    RngStream rng(11, "kernel/symmetric");
    for (int rep = 0; rep < 30; ++rep) {
        auto sp = corpus::random_space(rng, rng.uniform_int(2, 12));
        Kernel k = corpus::random_hermitian_kernel(rng, sp);
        auto w = corpus::random_function(rng, sp);
        auto v = corpus::random_function(rng, sp);
        const cplx lhs = inner_product(apply_formal_all(k, w), v);
        const cplx rhs = inner_product(w, apply_formal_all(k, v));
        CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("assembled matrix symmetrizes the kernel") {
    // m == 1: B equals the kernel entrywise
    auto sp = make_uniform_space(4);
    RngStream rng(11, "kernel/assemble");
    Kernel k = corpus::random_hermitian_kernel(rng, sp, 0.7);
    HermitianMatrix b = assemble_matrix(k);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(b.at(i, j) - k.at(i, j)) < 1e-15);

    // K2 with m = (4, 1): B is symmetric with the hand-computed entries
    Kernel k2 = k2_laplacian(4.0, 1.0);
    HermitianMatrix b2 = assemble_matrix(k2);
    CHECK(b2.at(0, 0).real() == Approx(0.25));
    CHECK(b2.at(0, 1).real() == Approx(-0.5));
    CHECK(b2.at(1, 0).real() == Approx(-0.5));
    CHECK(b2.at(1, 1).real() == Approx(1.0));
    CHECK(b2.hermitian_defect() == 0.0);

    // diagonal kernel a(x,x) = c / m(x)^2 assembles to diag(c / m(x))
    auto spm = make_space({"a", "b", "c"}, {2.0, 0.5, 3.0});
    const double c = 1.7;
    std::vector<KernelEntry> entries;
    for (int i = 0; i < 3; ++i)
        entries.push_back({i, i, cplx(c / (spm->measure(i) * spm->measure(i)), 0.0)});
    Kernel diag = Kernel::from_entries(spm, entries, true);
    HermitianMatrix bd = assemble_matrix(diag);
    for (int i = 0; i < 3; ++i) CHECK(bd.at(i, i).real() == Approx(c / spm->measure(i)));
}

TEST_CASE("graph Laplacians are positive semidefinite") {
    RngStream rng(11, "kernel/psd");
    for (int rep = 0; rep < 15; ++rep) {
        auto sp = corpus::random_space(rng, rng.uniform_int(2, 20));
        Kernel lap = laplacian_from_graph(corpus::random_graph(rng, sp));
        const Eigen::VectorXd evals = oracles::eigenvalue_oracle(lap);
        CHECK(evals.minCoeff() > -1e-10 * std::max(1.0, evals.maxCoeff()));
    }
}

TEST_CASE("kernel construction enforces Hermitian symmetry") {
    auto sp = make_uniform_space(2);
    // completion fills the mirror entry
    Kernel k = Kernel::from_entries(sp, {{0, 1, cplx(1, 2)}}, true);
    CHECK(k.at(1, 0) == std::conj(cplx(1, 2)));
    // explicit violation rejected
    CHECK_THROWS_AS(Kernel::from_entries(sp, {{0, 1, cplx(1, 2)}, {1, 0, cplx(1, 2)}}, true),
                    std::invalid_argument);
    // conflicting duplicates rejected
    CHECK_THROWS_AS(Kernel::from_entries(sp, {{0, 1, cplx(1, 0)}, {0, 1, cplx(2, 0)}}, true),
                    std::invalid_argument);
    // consistent duplicates tolerated
    CHECK_NOTHROW(Kernel::from_entries(sp, {{0, 1, cplx(1, 0)}, {0, 1, cplx(1, 0)}}, true));
}
