#include <catch2/catch_amalgamated.hpp>

#include "lmepurify/circuit_sim.hpp"
#include "lmepurify/lme_core.hpp"
#include "lmepurify/noise.hpp"
#include "lmepurify/oracle_check.hpp"
#include "lmepurify/purify.hpp"

using namespace lmepurify;
using Catch::Matchers::ContainsSubstring;

namespace {

LmesSpec spec3() { return make_spec(3, {{1, 2, 3}}, {{1}, {2}, {3}}); }

Vec basis_amp(int dim, int idx) {
    Vec v = Vec::Zero(dim);
    v(idx) = 1.0;
    return v;
}

}  // namespace

TEST_CASE("wire registry and elementary gates", "[circuit_sim]") {
    SECTION("correctness") {
        WireState st = WireState::single(basis_amp(4, 0), {{1, 1}, {1, 2}});
        CHECK(st.registry_bijective());
        CHECK(st.wire_of(1, 2) == 1);

        st.x(0);  // |00> -> |01> on wire 0 (low bit)
        CHECK(std::abs(st.amps(1) - cplx(1, 0)) < 1e-15);
        st.cnot(0, 1);  // control low bit set -> flip high bit
        CHECK(std::abs(st.amps(3) - cplx(1, 0)) < 1e-15);
        st.z(1);
        CHECK(std::abs(st.amps(3) - cplx(-1, 0)) < 1e-15);
        st.h(0);
        CHECK(std::abs(st.amps(2) - cplx(-1 / std::sqrt(2.0), 0)) < 1e-15);
        CHECK(std::abs(st.amps(3) - cplx(1 / std::sqrt(2.0), 0)) < 1e-15);

        // move_wire permutes amplitudes consistently with the labels
        WireState mv = WireState::single(basis_amp(4, 1), {{1, 1}, {1, 2}});
        mv.move_wire(0, 1);
        CHECK(mv.wire_of(1, 1) == 1);
        CHECK(std::abs(mv.amps(2) - cplx(1, 0)) < 1e-15);

        CHECK(WireState::drop_bit_index(0b1101, 1) == 0b111);
    }
    SECTION("validation") {
        WireState st = WireState::single(basis_amp(4, 0), {{1, 1}, {1, 2}});
        CHECK_THROWS_AS(st.wire_of(1, 3), SpecError);
        CHECK_THROWS_AS(st.cnot(0, 0), SpecError);
        CHECK_THROWS_AS(st.attach(basis_amp(4, 0), {{0, 1}}), DimensionError);
    }
}

TEST_CASE("pair merge keeps agreeing branches", "[circuit_sim]") {
    SECTION("correctness") {
        // two independent plus states merge into a single plus state with
        // probability (|00 amp|^2 + |11 amp|^2) = 1/2
        Vec plus(2);
        plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
        WireState st;
        st.amps = kron2v(plus, plus);
        st.labels = {{1, 1}, {2, 1}};
        const double p = st.ghz_merge(0, 1);
        CHECK(std::abs(p - 0.5) < 1e-12);
        CHECK(st.wire_count() == 1);
        CHECK(std::abs(st.amps(0) - st.amps(1)) < 1e-12);  // still unbiased
        // no renormalization: the kept branch carries its own probability
        CHECK(std::abs(st.amps.squaredNorm() - p) < 1e-12);

        // merging the halves of a Bell pair keeps everything: outcome |0>^|1>
        // branches carry the full weight
        Vec bell = Vec::Zero(4);
        bell(0) = bell(3) = 1 / std::sqrt(2.0);
        WireState bs;
        bs.amps = bell;
        bs.labels = {{1, 1}, {1, 2}};
        const double pb = bs.ghz_merge(0, 1);
        CHECK(std::abs(pb - 1.0) < 1e-12);

        // sqrt2 weighting doubles the kept weight afterwards (used by the
        // exact state-combination identities); the reported probability is
        // still the physical branch probability
        WireState ws;
        ws.amps = kron2v(plus, plus);
        ws.labels = {{1, 1}, {2, 1}};
        const double pw = ws.ghz_merge(0, 1, MergeMode::reduced, true);
        CHECK(std::abs(pw - 0.5) < 1e-12);
        CHECK(std::abs(ws.amps.squaredNorm() - 1.0) < 1e-12);
    }
    SECTION("validation") {
        // orthogonal computational inputs leave nothing to keep
        WireState st;
        st.amps = basis_amp(4, 1);  // |01>
        st.labels = {{1, 1}, {2, 1}};
        const double p = st.ghz_merge(0, 1);
        CHECK(p == 0.0);
    }
}

TEST_CASE("entangled-basis merge equals the reduced merge", "[circuit_sim]") {
    Rng rng(7);
    SECTION("correctness") {
        for (int rep = 0; rep < 10; ++rep) {
            const Vec in = rng.random_state(8);
            WireState a;
            a.amps = in;
            a.labels = {{1, 1}, {1, 2}, {1, 3}};
            WireState b = a;
            const double pa = a.ghz_merge(0, 2, MergeMode::reduced);
            const double pb = b.ghz_merge(0, 2, MergeMode::ghz_basis);
            CHECK(std::abs(pa - pb) < 1e-10);
            CHECK((a.amps - b.amps).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(a.labels == b.labels);
        }
    }
}

TEST_CASE("two-copy subprotocol on basis pairs", "[circuit_sim]") {
    const LmesSpec spec = spec3();
    SECTION("correctness") {
        const MultiIndex amask = qubit_mask(spec.color(0));
        for (MultiIndex k = 0; k < 8; ++k)
            for (MultiIndex l = 0; l < 8; ++l) {
                const BasisPairRun run =
                    run_subprotocol_on_basis_pair(spec, 0, k, l);
                const bool survive = (k & amask) == (l & amask);
                CHECK(run.kept == survive);
                if (!survive) {
                    CHECK(run.probability < 1e-20);
                    continue;
                }
                // survivor lands on the member whose non-purified sector index
                // is the XOR of the inputs', at squared norm 2^-m
                const MultiIndex tgt = (k & amask) | ((k ^ l) & ~amask & 7u);
                CHECK(std::abs(run.probability - 0.25) < 1e-12);
                const StateVector expect = lme_basis_vector(spec, tgt);
                CHECK((run.output - expect).cwiseAbs().maxCoeff() < 1e-10);
            }
    }
}

TEST_CASE("two-copy density map reproduces the recurrence", "[circuit_sim]") {
    const LmesSpec spec = spec3();
    SECTION("correctness") {
        const OracleReport rep = verify_recurrence_oracle(spec, 5, 4242);
        INFO("basis failures " << rep.basis_failures << ", density failures "
                               << rep.density_failures);
        CHECK(rep.ok());
        CHECK(rep.basis_runs == 3 * 64);
        CHECK(rep.density_checks == 15);
        CHECK(rep.max_basis_dev < 1e-10);
        CHECK(rep.max_density_dev < 1e-10);

        // spot check: white noise f = 0.8, color A; physical probability is
        // the parity probability scaled by 2^-m
        const DensityMatrix rho = from_lme_coeffs(white_noise(spec, 0.8), spec);
        auto [out, prob] = induced_density_map(spec, 0, rho);
        const LmeCoeffMatrix lam = to_lme_coeffs(out, spec);
        CHECK(std::abs(fidelity(lam) - 787.0 / 977.0) < 1e-10);
        CHECK(std::abs(prob - (977.0 / 1225.0) / 4.0) < 1e-12);
    }
    SECTION("validation") {
        const LmesSpec big = make_spec(
            5, {{1, 2, 3}, {2, 3, 4}, {3, 4, 5}}, {{1, 4}, {2, 5}, {3}});
        CHECK_THROWS_AS(
            induced_density_map(big, 0, DensityMatrix::Identity(32, 32) / 32.0),
            DimensionError);
    }
}

TEST_CASE("stabilizer action through entangled resources", "[circuit_sim]") {
    const LmesSpec spec = make_spec(4, {{1, 2, 3}, {2, 3, 4}}, {{1, 4}, {2}, {3}});
    Rng rng(31);
    SECTION("correctness") {
        for (int i : {1, 2, 4}) {
            const DenseOperator s = stabilizer_operator(spec, i);
            const DensityMatrix rho = rng.random_density(16);
            const DensityMatrix expect = s * rho * s.adjoint();
            for (StabilizerRoute route :
                 {StabilizerRoute::merge_resource, StabilizerRoute::prepared_ancilla}) {
                const DensityMatrix got =
                    apply_stabilizer_via_resource(rho, spec, i, route);
                CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);
            }
            const DensityMatrix mix = stabilizer_mix_via_resource(rho, spec, i);
            const DensityMatrix expect_mix = 0.5 * (rho + expect);
            CHECK((mix - expect_mix).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SECTION("validation") {
        const DensityMatrix rho = rng.random_density(16);
        CHECK_THROWS_AS(
            apply_stabilizer_via_resource(rho, spec, 9, StabilizerRoute::merge_resource),
            SpecError);
        // an untouched qubit has no neighbors, so no resource exists for it
        const LmesSpec loose = make_spec(3, {{1, 2}});
        const DensityMatrix small = rng.random_density(8);
        CHECK_THROWS_WITH(apply_stabilizer_via_resource(
                              small, loose, 3, StabilizerRoute::prepared_ancilla),
                          ContainsSubstring("no neighbors"));
    }
}

TEST_CASE("postselection bookkeeping", "[circuit_sim]") {
    SECTION("correctness") {
        Vec plus(2);
        plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
        WireState st = WireState::single(plus, {{1, 1}});
        const double p = st.postselect_x_plus(0);
        CHECK(std::abs(p - 1.0) < 1e-12);
        CHECK(st.wire_count() == 0);
    }
    SECTION("validation") {
        WireState st = WireState::single(basis_amp(2, 0), {{1, 1}});
        CHECK_THROWS_AS(st.postselect_z(0, 1), PostselectError);
    }
}
