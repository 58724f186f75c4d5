#include <catch2/catch_amalgamated.hpp>

#include "lmepurify/circuit_sim.hpp"
#include "lmepurify/lme_core.hpp"
#include "lmepurify/spec.hpp"
#include "lmepurify/state.hpp"

using namespace lmepurify;
using Catch::Matchers::ContainsSubstring;

namespace {

// diagonal sign operator for an arbitrary collection of qubit subsets
DenseOperator sign_diagonal(int n, const std::vector<std::vector<int>> &sets) {
    const Eigen::VectorXd s = phase_signs_sets(n, sets);
    DenseOperator d = DenseOperator::Zero(dim_of(n), dim_of(n));
    for (int x = 0; x < dim_of(n); ++x) d(x, x) = s(x);
    return d;
}

double max_abs_diff(const Mat &a, const Mat &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("index and display conventions", "[lme_core]") {
    SECTION("correctness") {
        // leftmost display character is qubit 1, the lowest bit
        CHECK(display_to_index("100") == 1);
        CHECK(display_to_index("010") == 2);
        CHECK(display_to_index("110") == 3);
        CHECK(display_to_index("001") == 4);
        for (MultiIndex k = 0; k < 16; ++k)
            CHECK(display_to_index(index_to_display(k, 4)) == k);
        CHECK(qubit_mask({1, 4}) == 0b1001u);
        CHECK(popcount32(0b1011u) == 3);
    }
    SECTION("validation") {
        CHECK_THROWS_AS(display_to_index("01x"), SpecError);
    }
}

TEST_CASE("spec construction and validation", "[lme_core]") {
    SECTION("correctness") {
        const LmesSpec spec = make_spec(3, {{1, 2, 3}}, {{1}, {2}, {3}});
        CHECK(spec.regular());
        CHECK(spec.color_index("B") == 1);
        CHECK(spec.complement_qubits(0) == std::vector<int>{2, 3});
        CHECK(spec.neighbors(1) == std::vector<int>{2, 3});

        // colorings are optional; specs without one are valid but not regular
        const LmesSpec plain = make_spec(4, {{1, 2, 3}, {2, 3, 4}});
        CHECK_FALSE(plain.regular());
    }
    SECTION("validation") {
        CHECK_THROWS_WITH(make_spec(3, {{1, 2, 9}}), ContainsSubstring("9"));
        CHECK_THROWS_AS(make_spec(3, {{2}}), SpecError);
        CHECK_THROWS_AS(make_spec(3, {{1, 2, 2}}), SpecError);
        CHECK_THROWS_AS(make_spec(3, {{1, 2, 3}}, {{1, 1}, {2}, {3}}), SpecError);
        CHECK_THROWS_AS(make_spec(3, {{1, 2, 3}}, {{1}, {2}}), SpecError);  // misses 3
        CHECK_THROWS_AS(make_spec(9, {{1, 2}}), SpecError);  // beyond dense cap
    }
}

TEST_CASE("phase-locked state construction", "[lme_core]") {
    SECTION("correctness") {
        // U_{123}|+++>: uniform magnitudes, sign flipped exactly on |111>
        const LmesSpec spec = make_spec(3, {{1, 2, 3}});
        const StateVector psi = build_state(spec);
        const double a = 1.0 / std::sqrt(8.0);
        for (int x = 0; x < 8; ++x) {
            CHECK(std::abs(std::abs(psi(x)) - a) < 1e-15);
            const double expected = (x == 7) ? -a : a;
            CHECK(std::abs(psi(x).real() - expected) < 1e-15);
            CHECK(psi(x).imag() == 0.0);
        }

        // two overlapping gates compose their sign patterns multiplicatively
        const LmesSpec two = make_spec(3, {{1, 2}, {2, 3}});
        const StateVector chi = build_state(two);
        const int flip12 = static_cast<int>(display_to_index("110"));
        const int flip_both = static_cast<int>(display_to_index("111"));
        CHECK(chi(flip12).real() < 0.0);
        CHECK(chi(flip_both).real() > 0.0);  // two flips cancel
    }
}

TEST_CASE("basis family is orthonormal and spanned by sign flips", "[lme_core]") {
    const LmesSpec spec = make_spec(4, {{1, 2, 3}, {2, 3, 4}}, {{1, 4}, {2}, {3}});
    SECTION("correctness") {
        const Eigen::MatrixXd b = lme_basis_matrix(spec);
        CHECK(max_abs_diff((b.transpose() * b).cast<cplx>(),
                           Mat(Mat::Identity(16, 16))) < 1e-12);
        // member k differs from the reference by signs on bits of k
        const StateVector ref = build_state(spec);
        const StateVector v5 = lme_basis_vector(spec, 5);
        for (int x = 0; x < 16; ++x) {
            const double sign = (popcount32(static_cast<MultiIndex>(x) & 5u) & 1) ? -1.0 : 1.0;
            CHECK(std::abs(v5(x) - sign * ref(x)) < 1e-15);
        }
    }
}

TEST_CASE("stabilizers fix the basis with sign read off the index", "[lme_core]") {
    SECTION("correctness") {
        for (const auto &gates : {std::vector<std::vector<int>>{{1, 2, 3}},
                                  std::vector<std::vector<int>>{{1, 2, 3}, {2, 3, 4}}}) {
            int nq = 0;
            for (const auto &g : gates)
                for (int q : g) nq = std::max(nq, q);
            const LmesSpec spec = make_spec(nq, gates);
            for (int i = 1; i <= nq; ++i) {
                const DenseOperator s = stabilizer_operator(spec, i);
                CHECK(max_abs_diff(s * s, Mat(Mat::Identity(s.rows(), s.cols()))) <
                      1e-12);
                for (MultiIndex k = 0; k < static_cast<MultiIndex>(dim_of(nq)); ++k) {
                    const StateVector v = lme_basis_vector(spec, k);
                    const double sign = (k >> (i - 1)) & 1 ? -1.0 : 1.0;
                    CHECK((s * v - sign * v).cwiseAbs().maxCoeff() < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("stabilizer products split into flips times sign diagonals", "[lme_core]") {
    // six-qubit chain of order-3 gates; the coloring pairs qubits {1,4}
    const LmesSpec spec = make_spec(6, {{1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {4, 5, 6}},
                                    {{1, 4}, {2, 5}, {3, 6}});
    const DenseOperator s1 = stabilizer_operator(spec, 1);
    const DenseOperator s4 = stabilizer_operator(spec, 4);
    const DenseOperator x1 = op_on(6, 1, pauli_x());
    const DenseOperator x4 = op_on(6, 4, pauli_x());
    SECTION("correctness") {
        CHECK(max_abs_diff(s1, x1 * sign_diagonal(6, {{2, 3}})) < 1e-12);
        CHECK(max_abs_diff(s4, x4 * sign_diagonal(6, {{2, 3}, {3, 5}, {5, 6}})) < 1e-12);
        CHECK(max_abs_diff(s1 * s4, x1 * x4 * sign_diagonal(6, {{3, 5}, {5, 6}})) <
              1e-12);
    }
}

TEST_CASE("coefficient transform round trips", "[lme_core]") {
    const LmesSpec spec = make_spec(3, {{1, 2, 3}}, {{1}, {2}, {3}});
    Rng rng(2024);
    SECTION("correctness") {
        const DensityMatrix rho = rng.random_density(8);
        const LmeCoeffMatrix lam = to_lme_coeffs(rho, spec);
        CHECK(max_abs_diff(from_lme_coeffs(lam, spec), rho) < 1e-12);
        CHECK(std::abs(lam.trace().real() - 1.0) < 1e-12);
        CHECK(is_hermitian(lam, 1e-12));

        // the reference state itself has a single unit coefficient
        const StateVector psi = build_state(spec);
        const LmeCoeffMatrix pure = to_lme_coeffs(psi * psi.adjoint(), spec);
        CHECK(std::abs(fidelity(pure) - 1.0) < 1e-14);
        CHECK(pure.cwiseAbs().sum() - 1.0 < 1e-12);
    }
    SECTION("validation") {
        CHECK_THROWS_AS(to_lme_coeffs(DensityMatrix::Zero(4, 4), spec), DimensionError);
    }
}
