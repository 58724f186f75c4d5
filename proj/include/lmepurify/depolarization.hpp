#pragma once
// Depolarization of noisy states onto the phase-locked basis diagonal, the
// induced basis-diagonal channel family driven by a stochastic matrix, and
// the Choi-state partial-transpose certificate showing those channels stay
// entangling across every bipartition.

#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "circuit_sim.hpp"
#include "lme_core.hpp"
#include "purify.hpp"
#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

// Project a coefficient matrix onto its diagonal: the result of averaging
// over all sign-flip symmetries of the basis.
inline LmeCoeffMatrix twirl(const LmeCoeffMatrix &lam) {
    LmeCoeffMatrix out = LmeCoeffMatrix::Zero(lam.rows(), lam.cols());
    out.diagonal() = lam.diagonal();
    return out;
}

// The same projection realized physically: compose the balanced mixtures
// rho -> (rho + S_i rho S_i)/2 over every qubit's basis stabilizer.
inline DensityMatrix twirl_via_stabilizers(const DensityMatrix &rho, const LmesSpec &spec) {
    DensityMatrix out = rho;
    for (int i = 1; i <= spec.n; ++i) {
        const DenseOperator s = stabilizer_operator(spec, i);
        out = 0.5 * (out + s * out * s.adjoint());
    }
    return out;
}

struct StochasticMatrix {
    Eigen::MatrixXd p;

    void validate() const {
        if (p.rows() != p.cols() || p.rows() == 0)
            throw SpecError("stochastic matrix must be square and nonempty");
        for (int r = 0; r < p.rows(); ++r) {
            double sum = 0.0;
            for (int c = 0; c < p.cols(); ++c) {
                if (p(r, c) < -1e-12)
                    throw SpecError("stochastic matrix has a negative entry");
                sum += p(r, c);
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw SpecError("stochastic matrix row does not sum to one");
        }
    }
};

// A linear map described by its action on basis dyads |k><l|, expressed in
// coefficient space: dyad_image(k, l) is the coefficient matrix of the image.
struct LinearMapOnStates {
    int n = 0;
    std::function<LmeCoeffMatrix(MultiIndex, MultiIndex)> dyad_image;
};

inline LinearMapOnStates identity_map(int n) {
    const int d = dim_of(n);
    return {n, [d](MultiIndex k, MultiIndex l) {
                LmeCoeffMatrix e = LmeCoeffMatrix::Zero(d, d);
                e(static_cast<int>(k), static_cast<int>(l)) = 1.0;
                return e;
            }};
}

// the twirl as a map on dyads: diagonal dyads survive, coherences vanish
inline LinearMapOnStates twirl_map(int n) {
    const int d = dim_of(n);
    return {n, [d](MultiIndex k, MultiIndex l) {
                LmeCoeffMatrix e = LmeCoeffMatrix::Zero(d, d);
                if (k == l) e(static_cast<int>(k), static_cast<int>(k)) = 1.0;
                return e;
            }};
}

// Basis-diagonal channel driven by a stochastic matrix: the reference basis
// state is fixed, every other diagonal is scattered by its row of P, and all
// coherences are removed. Satisfies Phi = Phi o twirl by construction.
inline LinearMapOnStates phi_map(int n, const StochasticMatrix &pm) {
    pm.validate();
    const int d = dim_of(n);
    if (pm.p.rows() != d)
        throw DimensionError("stochastic matrix size must match the basis size");
    const Eigen::MatrixXd p = pm.p;
    return {n, [d, p](MultiIndex k, MultiIndex l) {
                LmeCoeffMatrix e = LmeCoeffMatrix::Zero(d, d);
                if (k != l) return e;
                if (k == 0) {
                    e(0, 0) = 1.0;
                    return e;
                }
                for (int m = 0; m < d; ++m) e(m, m) = p(static_cast<int>(k), m);
                return e;
            }};
}

// Choi state of a map: (1/2^n) sum_{k,l} map(|psi_k><psi_l|) (x) |psi_k><psi_l|,
// built in the phase-locked basis (real vectors). Map output occupies the low
// bits, the reference copy the high bits.
inline DensityMatrix cj_state(const LinearMapOnStates &map, const LmesSpec &spec) {
    if (spec.n != map.n) throw DimensionError("map and spec qubit counts differ");
    if (spec.n > 3)
        throw DimensionError("dense Choi-state construction is limited to n <= 3");
    const int d = dim_of(spec.n);
    const Eigen::MatrixXd b = lme_basis_matrix(spec);
    DensityMatrix cj = DensityMatrix::Zero(d * d, d * d);
    for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
            const LmeCoeffMatrix img = map.dyad_image(static_cast<MultiIndex>(k),
                                                      static_cast<MultiIndex>(l));
            const Mat low = b * img * b.transpose();
            const Mat high = (b.col(k) * b.col(l).transpose()).cast<cplx>();
            cj += kron2(high, low);
        }
    cj /= static_cast<double>(d);
    return cj;
}

// Trace norm of the partial transpose of a 2n-qubit state with respect to one
// party, where party p holds bits p-1 (map side) and n+p-1 (reference side).
// A value above 1 certifies entanglement across that party's bipartition.
inline double pt_trace_norm(const DensityMatrix &rho, int n, int party) {
    const int total = 2 * n;
    const int dd = dim_of(total);
    if (rho.rows() != dd || rho.cols() != dd)
        throw DimensionError("state dimension does not match 2n qubits");
    if (party < 1 || party > n) throw SpecError("party index out of range");
    const int b1 = party - 1, b2 = n + party - 1;
    const int m1 = 1 << b1, m2 = 1 << b2;
    DensityMatrix pt(dd, dd);
    for (int r = 0; r < dd; ++r)
        for (int c = 0; c < dd; ++c) {
            const int rp = (r & ~(m1 | m2)) | (c & m1) | (c & m2);
            const int cp = (c & ~(m1 | m2)) | (r & m1) | (r & m2);
            pt(rp, cp) = rho(r, c);
        }
    return trace_norm_hermitian(pt);
}

inline StochasticMatrix random_stochastic(int d, Rng &rng) {
    StochasticMatrix pm;
    pm.p.resize(d, d);
    for (int r = 0; r < d; ++r) {
        double sum = 0.0;
        for (int c = 0; c < d; ++c) {
            pm.p(r, c) = rng.uniform_pos();
            sum += pm.p(r, c);
        }
        pm.p.row(r) /= sum;
    }
    return pm;
}

// certificate value for one channel: partial-transpose trace norm of its
// Choi state with respect to party 1
inline double phi_pt_norm(const LmesSpec &spec, const StochasticMatrix &pm) {
    return pt_trace_norm(cj_state(phi_map(spec.n, pm), spec), spec.n, 1);
}

struct PhiBatch {
    std::vector<double> norms;
    double min_norm = 0.0;
};

inline PhiBatch sample_phi_batch(const LmesSpec &spec, int count, uint64_t seed) {
    Rng rng(seed);
    PhiBatch batch;
    batch.norms.reserve(static_cast<size_t>(count));
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
        const StochasticMatrix pm = random_stochastic(dim_of(spec.n), rng);
        const double v = phi_pt_norm(spec, pm);
        batch.norms.push_back(v);
        mn = std::min(mn, v);
    }
    batch.min_norm = batch.norms.empty() ? 0.0 : mn;
    return batch;
}

struct PhiSearchResult {
    double min_norm = 0.0;
    Eigen::MatrixXd p;
};

// Adversarial search for the least-entangling channel in the family: random
// restarts plus multiplicative coordinate descent on the row entries.
inline PhiSearchResult phi_search_min(const LmesSpec &spec, uint64_t seed,
                                      int budget = 10000) {
    Rng rng(seed);
    const int d = dim_of(spec.n);
    PhiSearchResult best;
    best.min_norm = std::numeric_limits<double>::infinity();
    int evals = 0;
    while (evals < budget) {
        StochasticMatrix pm = random_stochastic(d, rng);
        double cur = phi_pt_norm(spec, pm);
        ++evals;
        double delta = 0.5;
        while (delta > 1e-3 && evals < budget) {
            bool improved = false;
            for (int r = 0; r < d && evals < budget; ++r)
                for (int c = 0; c < d && evals < budget; ++c)
                    for (double factor : {1.0 + delta, 1.0 / (1.0 + delta)}) {
                        if (evals >= budget) break;
                        StochasticMatrix trial = pm;
                        trial.p(r, c) *= factor;
                        trial.p.row(r) /= trial.p.row(r).sum();
                        const double v = phi_pt_norm(spec, trial);
                        ++evals;
                        if (v < cur - 1e-12) {
                            cur = v;
                            pm = trial;
                            improved = true;
                        }
                    }
            if (!improved) delta *= 0.5;
        }
        if (cur < best.min_norm) {
            best.min_norm = cur;
            best.p = pm.p;
        }
    }
    return best;
}

// Fixed three-qubit coefficient family: reference weight f on the diagonal,
// the rest uniform, plus a hand-picked Hermitian pattern of coherences that
// keeps the matrix positive on a window of f and shifts the purification
// threshold relative to its twirled (diagonal-only) version.
inline LmeCoeffMatrix counterexample_state(double f) {
    const int d = 8;
    LmeCoeffMatrix lam = LmeCoeffMatrix::Zero(d, d);
    lam(0, 0) = f;
    for (int i = 1; i < d; ++i) lam(i, i) = (1.0 - f) / 7.0;
    const struct {
        const char *row, *col;
        double val;
    } entries[] = {
        {"000", "011", +0.02}, {"001", "010", -0.02}, {"000", "101", +0.02},
        {"001", "100", -0.02}, {"000", "110", +0.02}, {"010", "100", -0.02},
    };
    for (const auto &e : entries) {
        const int r = static_cast<int>(display_to_index(e.row));
        const int c = static_cast<int>(display_to_index(e.col));
        lam(r, c) += e.val;
        lam(c, r) += e.val;
    }
    return lam;
}

// window of f on which the counterexample family is a valid state
inline std::pair<double, double> counterexample_psd_range(double tol = 1e-4) {
    const auto min_eig = [](double f) {
        return min_eigenvalue(counterexample_state(f));
    };
    auto bisect = [&](double lo, double hi, bool rising) {
        while (hi - lo > tol) {
            const double mid = 0.5 * (lo + hi);
            const bool ok = min_eig(mid) >= -1e-12;
            if (ok == rising)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    };
    // valid on a middle window: find where validity turns on, then off
    const double lo_edge = bisect(0.0, 0.3, true);
    const double hi_edge = bisect(0.3, 1.0, false);
    return {lo_edge, hi_edge};
}

struct SpoilComparison {
    ThresholdReport raw;
    ThresholdReport twirled;
};

// Thresholds of the counterexample family with and without the twirl,
// demonstrating that discarding coherences is not always free.
inline SpoilComparison spoil_comparison(const LmesSpec &spec,
                                        const ScheduleSpec &schedule,
                                        double tol = 1e-5) {
    if (spec.n != 3) throw DimensionError("counterexample family is three-qubit");
    SpoilComparison cmp;
    cmp.raw = find_threshold([](double f) { return counterexample_state(f); }, spec,
                             schedule, 0.6, 0.72, tol);
    cmp.twirled = find_threshold([](double f) { return twirl(counterexample_state(f)); },
                                 spec, schedule, 0.6, 0.72, tol);
    return cmp;
}

}  // namespace lmepurify
