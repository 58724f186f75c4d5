#pragma once
// Independent referee for the coefficient-level recurrence: exhaustively
// simulate the physical two-copy circuit on basis pairs and on random mixed
// states, and compare against the closed-form map and its success
// probability relation.

#include <cstdint>
#include <string>
#include <vector>

#include "circuit_sim.hpp"
#include "lme_core.hpp"
#include "purify.hpp"
#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

struct OracleReport {
    int basis_runs = 0;
    int basis_failures = 0;
    int density_checks = 0;
    int density_failures = 0;
    double max_basis_dev = 0.0;
    double max_density_dev = 0.0;
    std::vector<std::string> failures;

    bool ok() const { return basis_failures == 0 && density_failures == 0; }
};

// Exhaustive basis-pair check: a pair (k, l) survives iff the purified
// color's sub-indices agree; the survivor is the basis state with XORed
// remaining indices, at amplitude 2^(-m/2) for m merged qubits.
inline void verify_basis_pairs(const LmesSpec &spec, OracleReport &rep) {
    const int n = spec.n;
    const int d = dim_of(n);
    for (size_t c = 0; c < spec.colors.size(); ++c) {
        const MultiIndex amask = qubit_mask(spec.color(static_cast<int>(c)));
        const int m = n - static_cast<int>(spec.color(static_cast<int>(c)).size());
        const double expect_norm = std::pow(2.0, -0.5 * m);
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                const auto run = run_subprotocol_on_basis_pair(
                    spec, static_cast<int>(c), static_cast<MultiIndex>(k),
                    static_cast<MultiIndex>(l));
                ++rep.basis_runs;
                const bool should_keep =
                    (static_cast<MultiIndex>(k) & amask) ==
                    (static_cast<MultiIndex>(l) & amask);
                if (!should_keep) {
                    if (run.probability >= 1e-20) {
                        ++rep.basis_failures;
                        rep.failures.push_back("pair survived that should vanish");
                    }
                    continue;
                }
                const MultiIndex tgt =
                    (static_cast<MultiIndex>(k) & amask) |
                    ((static_cast<MultiIndex>(k) ^ static_cast<MultiIndex>(l)) & ~amask &
                     static_cast<MultiIndex>(d - 1));
                const double nrm = std::sqrt(run.probability);
                const Vec expect = lme_basis_vector(spec, tgt);
                const double dev_norm = std::abs(nrm - expect_norm);
                const double dev_vec =
                    run.kept ? (run.output - expect).cwiseAbs().maxCoeff() : 1.0;
                rep.max_basis_dev = std::max({rep.max_basis_dev, dev_norm, dev_vec});
                if (dev_norm > 1e-12 || dev_vec > 1e-10) {
                    ++rep.basis_failures;
                    rep.failures.push_back("surviving pair has wrong output or weight");
                }
            }
    }
}

// Random mixed states: physical two-copy simulation must reproduce the
// coefficient map to 1e-10 and the probability relation
// full = parity * 2^(-m) to 1e-12.
inline void verify_density_maps(const LmesSpec &spec, int samples, uint64_t seed,
                                OracleReport &rep) {
    const int n = spec.n;
    const int d = dim_of(n);
    Rng rng(seed);
    for (int trial = 0; trial < samples; ++trial) {
        const DensityMatrix rho = rng.random_density(d);
        const LmeCoeffMatrix lam = to_lme_coeffs(rho, spec);
        for (size_t c = 0; c < spec.colors.size(); ++c) {
            const int m = n - static_cast<int>(spec.color(static_cast<int>(c)).size());
            const PurifyOutcome coeff = purify_color(lam, spec, static_cast<int>(c));
            const auto [rho_phys, full_prob] =
                induced_density_map(spec, static_cast<int>(c), rho);
            const LmeCoeffMatrix lam_phys = to_lme_coeffs(rho_phys, spec);
            const double dev_map = (lam_phys - coeff.output).cwiseAbs().maxCoeff();
            const double dev_prob =
                std::abs(full_prob - coeff.parity_success_prob * std::pow(2.0, -m));
            rep.max_density_dev = std::max({rep.max_density_dev, dev_map, dev_prob});
            ++rep.density_checks;
            if (dev_map > 1e-10 || dev_prob > 1e-12) {
                ++rep.density_failures;
                rep.failures.push_back("coefficient map disagrees with circuit on a random state");
            }
        }
    }
}

inline OracleReport verify_recurrence_oracle(const LmesSpec &spec, int density_samples = 20,
                                             uint64_t seed = 12345) {
    OracleReport rep;
    verify_basis_pairs(spec, rep);
    verify_density_maps(spec, density_samples, seed, rep);
    return rep;
}

}  // namespace lmepurify
