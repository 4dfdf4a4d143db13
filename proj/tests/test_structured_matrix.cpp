#include <catch2/catch.hpp>

#include <random>

#include "frilift/structured_matrix.hpp"
#include "support/reference.hpp"

using namespace frilift;

namespace {

CxVector from_reals(std::initializer_list<double> vals) {
    CxVector v(Index(vals.size()));
    Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("lift builds Hankel and wrap-around matrices", "[structured]") {
    const CxVector x = from_reals({1, 2, 3, 4});
    const StructuredLift std_lift(LiftKind::StandardHankel, 4, 2);
    const CxMatrix H = lift(x, std_lift);
    REQUIRE(H.rows() == 3);
    REQUIRE(H.cols() == 2);
    CHECK(H(0, 0) == cx(1.0));
    CHECK(H(0, 1) == cx(2.0));
    CHECK(H(1, 0) == cx(2.0));
    CHECK(H(1, 1) == cx(3.0));
    CHECK(H(2, 0) == cx(3.0));
    CHECK(H(2, 1) == cx(4.0));

    const CxVector u = from_reals({1, 2, 3});
    const StructuredLift wrap(LiftKind::WrapAroundHankel, 3, 2);
    const CxMatrix W = lift(u, wrap);
    REQUIRE(W.rows() == 3);
    REQUIRE(W.cols() == 2);
    CHECK(W(2, 0) == cx(3.0));
    CHECK(W(2, 1) == cx(1.0));  // periodic extension

    CHECK_THROWS_AS(lift(from_reals({1, 2}), std_lift), std::invalid_argument);
}

TEST_CASE("lift of a single exponential has numerical rank one", "[structured]") {
    const Index n = 8;
    CxVector x(n);
    for (Index k = 0; k < n; ++k) x[k] = unit_phase(0.25 * double(k));
    const CxMatrix H = lift(x, StructuredLift(LiftKind::StandardHankel, n, 4));
    Eigen::JacobiSVD<CxMatrix> svd(H);
    CHECK(svd.singularValues()[1] / svd.singularValues()[0] < 1e-12);
}

TEST_CASE("adjoint sums anti-diagonals", "[structured]") {
    CxMatrix M(3, 2);
    M << 1, 3, 5, 7, 9, 11;
    const StructuredLift L(LiftKind::StandardHankel, 4, 2);
    const CxVector v = adjoint(M, L);
    CHECK(v[0] == cx(1.0));
    CHECK(v[1] == cx(8.0));
    CHECK(v[2] == cx(16.0));
    CHECK(v[3] == cx(11.0));

    CxMatrix bad(2, 2);
    CHECK_THROWS_AS(adjoint(bad, L), std::invalid_argument);
}

TEST_CASE("adjoint of a lifted unit vector counts multiplicity", "[structured]") {
    for (const auto kind : {LiftKind::StandardHankel, LiftKind::WrapAroundHankel}) {
        const StructuredLift L(kind, 7, 3);
        for (Index k = 0; k < L.n; ++k) {
            CxVector e = CxVector::Zero(L.n);
            e[k] = 1.0;
            const CxVector v = adjoint(lift(e, L), L);
            for (Index i = 0; i < L.n; ++i) {
                const double expect = (i == k) ? double(multiplicity(k, L)) : 0.0;
                CHECK(std::abs(v[i] - cx(expect)) < 1e-14);
            }
        }
    }
}

TEST_CASE("adjoint identity holds for random pairs", "[structured]") {
    std::mt19937_64 rng(7);
    for (const auto kind : {LiftKind::StandardHankel, LiftKind::WrapAroundHankel}) {
        const StructuredLift L(kind, 17, 6);
        for (int rep = 0; rep < 200; ++rep) {
            const CxVector x = testing::random_unit_vector(L.n, rng);
            CxMatrix M(L.rows(), L.cols());
            for (Index j = 0; j < M.cols(); ++j) {
                M.col(j) = testing::random_unit_vector(L.rows(), rng);
            }
            const cx lhs = (lift(x, L).conjugate().cwiseProduct(M)).sum();
            const cx rhs = x.dot(adjoint(M, L));  // Eigen dot conjugates the left side
            CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * M.norm());
        }
    }
}

TEST_CASE("pseudo_inverse averages anti-diagonals and left-inverts lift", "[structured]") {
    CxMatrix M(3, 2);
    M << 1, 3, 5, 7, 9, 11;
    const StructuredLift L(LiftKind::StandardHankel, 4, 2);
    const CxVector v = pseudo_inverse(M, L);
    CHECK(v[0] == cx(1.0));
    CHECK(v[1] == cx(4.0));
    CHECK(v[2] == cx(8.0));
    CHECK(v[3] == cx(11.0));

    std::mt19937_64 rng(11);
    for (const auto kind : {LiftKind::StandardHankel, LiftKind::WrapAroundHankel}) {
        for (const auto [n, d] : {std::pair<Index, Index>{9, 4}, {6, 6}, {12, 1}}) {
            const StructuredLift lift_(kind, n, d);
            const CxVector x = testing::random_unit_vector(n, rng);
            const CxVector back = pseudo_inverse(lift(x, lift_), lift_);
            CHECK((back - x).norm() < 1e-14);
        }
    }
}

TEST_CASE("multiplicity matches the brute-force cell count", "[structured]") {
    for (const auto kind : {LiftKind::StandardHankel, LiftKind::WrapAroundHankel}) {
        for (Index n : {1, 2, 5, 8, 13}) {
            for (Index d = 1; d <= n; ++d) {
                const StructuredLift L(kind, n, d);
                for (Index k = 0; k < n; ++k) {
                    CHECK(multiplicity(k, L) == testing::count_cells(k, L));
                }
            }
        }
    }
    const StructuredLift paper(LiftKind::StandardHankel, 100, 51);
    CHECK(multiplicity(0, paper) == 1);
    CHECK(multiplicity(50, paper) == 50);
    const StructuredLift wrap(LiftKind::WrapAroundHankel, 100, 51);
    for (Index k = 0; k < 100; k += 17) CHECK(multiplicity(k, wrap) == 51);
    CHECK_THROWS_AS(multiplicity(100, paper), std::invalid_argument);
}

TEST_CASE("basis elements are orthonormal with equal entries", "[structured]") {
    const StructuredLift L(LiftKind::StandardHankel, 9, 4);
    const CxMatrix A0 = basis_element(0, L);
    CHECK(A0(0, 0) == cx(1.0));
    CHECK(A0.norm() == Approx(1.0));

    for (Index k = 0; k < L.n; ++k) {
        const CxMatrix A = basis_element(k, L);
        CHECK(A.norm() == Approx(1.0).margin(1e-13));
        Eigen::JacobiSVD<CxMatrix> svd(A);
        CHECK(svd.singularValues()[0] <=
              1.0 / std::sqrt(double(multiplicity(k, L))) + 1e-13);
        for (Index kp = k + 1; kp < L.n; ++kp) {
            const CxMatrix B = basis_element(kp, L);
            CHECK(std::abs((A.conjugate().cwiseProduct(B)).sum()) < 1e-15);
        }
    }
}

TEST_CASE("wrap-around lift equals standard lift of the extended vector", "[structured]") {
    std::mt19937_64 rng(3);
    const Index n = 10, d = 4;
    const CxVector u = testing::random_unit_vector(n, rng);
    CxVector ext(n + d - 1);
    ext.head(n) = u;
    ext.tail(d - 1) = u.head(d - 1);
    const CxMatrix W = lift(u, StructuredLift(LiftKind::WrapAroundHankel, n, d));
    const CxMatrix H = lift(ext, StructuredLift(LiftKind::StandardHankel, n + d - 1, d));
    CHECK((W - H).norm() == 0.0);
}

TEST_CASE("project keeps or drops the distinct sampled support", "[structured]") {
    const CxVector x = from_reals({1, 2, 3, 4});
    SampleSet all;
    all.n = 4;
    all.indices = {0, 1, 2, 3};
    all.values = CxVector::Zero(4);
    CHECK((project(x, all, ProjectMode::KeepSampled) - x).norm() == 0.0);
    CHECK(project(x, all, ProjectMode::KeepComplement).norm() == 0.0);

    SampleSet none;
    none.n = 4;
    none.values = CxVector::Zero(0);
    CHECK(project(x, none, ProjectMode::KeepSampled).norm() == 0.0);

    SampleSet multi;
    multi.n = 4;
    multi.indices = {0, 2, 2};
    multi.values = CxVector::Zero(3);
    const CxVector kept = project(x, multi, ProjectMode::KeepSampled);
    CHECK(kept[0] == cx(1.0));
    CHECK(kept[1] == cx(0.0));
    CHECK(kept[2] == cx(3.0));
    CHECK(kept[3] == cx(0.0));
    const CxVector rest = project(x, multi, ProjectMode::KeepComplement);
    CHECK((kept + rest - x).norm() == 0.0);
}

TEST_CASE("lift rejects invalid descriptors", "[structured]") {
    CHECK_THROWS_AS(StructuredLift(LiftKind::StandardHankel, 4, 5), std::invalid_argument);
    CHECK_THROWS_AS(StructuredLift(LiftKind::StandardHankel, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(basis_element(-1, StructuredLift(LiftKind::StandardHankel, 4, 2)),
                    std::invalid_argument);
}
