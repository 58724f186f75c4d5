#pragma once
// The color-wise two-copy purification recurrence as a coefficient-level map,
// multi-color schedules with convergence/stall detection, and bisection-based
// threshold location.
//
// Diagonal inputs close under the map:
//   new_lam[kA,kB] = sum_l lam[kA,l] * lam[kA, l^kB]          (kB, l over the
// non-purified sector). General Hermitian coefficient matrices evolve by the
// same XOR self-convolution applied to both row and column sector indices;
// that convolution is evaluated through an unnormalized Walsh-Hadamard
// transform (convolution theorem over the XOR group), with a quadruple-sum
// reference implementation kept for cross-checking.

#include <cmath>
#include <functional>
#include <utility>

#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

struct PurifyOutcome {
    LmeCoeffMatrix output;       // renormalized
    double parity_success_prob;  // trace of the unnormalized image
};

namespace detail {

inline void require_purifiable(const LmesSpec &spec, int color_idx) {
    spec.validate();
    if (!spec.regular())
        throw SpecError("purification requires a regular spec (order of every "
                        "gate equal to the number of colors)");
    spec.color(color_idx);  // range check
}

// in-place butterfly (a,b) -> (a+b, a-b) over the given bit of row or column
// indices of a square matrix
inline void butterfly_rows(Mat &m, int bit) {
    const int d = static_cast<int>(m.rows());
    const int step = 1 << bit;
    for (int base = 0; base < d; base += 2 * step)
        for (int r = base; r < base + step; ++r) {
            const Eigen::RowVectorXcd a = m.row(r);
            const Eigen::RowVectorXcd b = m.row(r + step);
            m.row(r) = a + b;
            m.row(r + step) = a - b;
        }
}

inline void butterfly_cols(Mat &m, int bit) {
    const int d = static_cast<int>(m.cols());
    const int step = 1 << bit;
    for (int base = 0; base < d; base += 2 * step)
        for (int c = base; c < base + step; ++c) {
            const Vec a = m.col(c);
            const Vec b = m.col(c + step);
            m.col(c) = a + b;
            m.col(c + step) = a - b;
        }
}

inline void walsh_over_sector(Mat &m, const std::vector<int> &sector_qubits) {
    for (int q : sector_qubits) {
        butterfly_rows(m, q - 1);
        butterfly_cols(m, q - 1);
    }
}

}  // namespace detail

// diagonal fast path; input is the diagonal of a coefficient matrix
inline std::pair<Eigen::VectorXd, double> purify_color_diagonal(
    const Eigen::VectorXd &lam, const LmesSpec &spec, int color_idx) {
    detail::require_purifiable(spec, color_idx);
    const int d = dim_of(spec.n);
    if (lam.size() != d) throw DimensionError("diagonal length does not match spec");
    const MultiIndex ma = qubit_mask(spec.color(color_idx));
    const MultiIndex mb = static_cast<MultiIndex>(d - 1) & ~ma;
    Eigen::VectorXd out(d);
    for (int k = 0; k < d; ++k) {
        const MultiIndex base = static_cast<MultiIndex>(k) & ma;
        const MultiIndex kb = static_cast<MultiIndex>(k) & mb;
        double acc = 0.0;
        // enumerate subsets l of the non-purified sector mask
        MultiIndex l = mb;
        while (true) {
            acc += lam(static_cast<int>(base | l)) * lam(static_cast<int>(base | (l ^ kb)));
            if (l == 0) break;
            l = (l - 1) & mb;
        }
        out(k) = acc;
    }
    const double tr = out.sum();
    if (!(tr > 0.0))
        throw PostselectError("purification step has zero success probability");
    out /= tr;
    return {out, tr};
}

// Walsh-transform evaluation of the general map (main path)
inline PurifyOutcome purify_color_fwht(const LmeCoeffMatrix &lam, const LmesSpec &spec,
                                       int color_idx) {
    detail::require_purifiable(spec, color_idx);
    const int d = dim_of(spec.n);
    if (lam.rows() != d || lam.cols() != d)
        throw DimensionError("coefficient matrix dimension does not match spec");
    const std::vector<int> sector = spec.complement_qubits(color_idx);
    Mat t = lam;
    detail::walsh_over_sector(t, sector);
    t = t.cwiseProduct(t);  // elementwise square, no conjugation
    detail::walsh_over_sector(t, sector);
    t /= std::pow(4.0, static_cast<double>(sector.size()));
    const double tr = t.trace().real();
    if (!(tr > 0.0))
        throw PostselectError("purification step has zero success probability");
    t /= tr;
    return {std::move(t), tr};
}

// quadruple-sum reference implementation (small n; used by cross-check tests)
inline PurifyOutcome purify_color_naive(const LmeCoeffMatrix &lam, const LmesSpec &spec,
                                        int color_idx) {
    detail::require_purifiable(spec, color_idx);
    const int d = dim_of(spec.n);
    if (spec.n > 4) throw DimensionError("reference map is limited to n <= 4");
    const MultiIndex ma = qubit_mask(spec.color(color_idx));
    const MultiIndex mb = static_cast<MultiIndex>(d - 1) & ~ma;
    const std::vector<int> sector = spec.complement_qubits(color_idx);
    std::vector<MultiIndex> subs(1u << sector.size());
    for (size_t s = 0; s < subs.size(); ++s)
        subs[s] = unpack_sub_index(static_cast<MultiIndex>(s), sector);
    Mat out = Mat::Zero(d, d);
    for (int k = 0; k < d; ++k)
        for (int kp = 0; kp < d; ++kp) {
            const MultiIndex ka = static_cast<MultiIndex>(k) & ma;
            const MultiIndex kb = static_cast<MultiIndex>(k) & mb;
            const MultiIndex kpa = static_cast<MultiIndex>(kp) & ma;
            const MultiIndex kpb = static_cast<MultiIndex>(kp) & mb;
            cplx acc(0, 0);
            for (MultiIndex l : subs)
                for (MultiIndex lp : subs)
                    acc += lam(static_cast<int>(ka | l), static_cast<int>(kpa | lp)) *
                           lam(static_cast<int>(ka | (l ^ kb)), static_cast<int>(kpa | (lp ^ kpb)));
            out(k, kp) = acc;
        }
    const double tr = out.trace().real();
    if (!(tr > 0.0))
        throw PostselectError("purification step has zero success probability");
    out /= tr;
    return {std::move(out), tr};
}

// dispatch: exactly diagonal inputs take the closed diagonal map (keeps the
// diagonal-closure property exact), everything else the Walsh path
inline PurifyOutcome purify_color(const LmeCoeffMatrix &lam, const LmesSpec &spec,
                                  int color_idx) {
    Mat off = lam;
    off.diagonal().setZero();
    if (max_abs(off) < 1e-15) {
        auto [diag, tr] = purify_color_diagonal(lam.diagonal().real(), spec, color_idx);
        return {diag.cast<cplx>().asDiagonal(), tr};
    }
    return purify_color_fwht(lam, spec, color_idx);
}

struct ScheduleSpec {
    std::vector<int> sequence;  // color indices; one full pass per traversal
    int max_rounds = 300;
    double convergence_eps = 1e-6;
    int divergence_window = 30;

    void validate(const LmesSpec &spec) const {
        if (sequence.empty()) throw SpecError("schedule sequence is empty");
        if (max_rounds < 1) throw SpecError("max_rounds must be >= 1");
        if (!(convergence_eps > 0)) throw SpecError("convergence_eps must be positive");
        if (divergence_window < 1) throw SpecError("divergence window must be >= 1");
        for (int c : sequence) spec.color(c);
    }

    // "ABC-CAB-BCA" or "ABCCABBCA" -> color indices
    static ScheduleSpec parse(const std::string &s) {
        ScheduleSpec out;
        for (char ch : s) {
            if (ch == '-' || ch == ' ') continue;
            if (ch < 'A' || ch > 'Z')
                throw SpecError("schedule letters must be A..Z, got '" + std::string(1, ch) + "'");
            out.sequence.push_back(ch - 'A');
        }
        if (out.sequence.empty()) throw SpecError("schedule sequence is empty");
        return out;
    }

    std::string sequence_string() const {
        std::string s;
        for (int c : sequence) s += LmesSpec::color_name(c);
        return s;
    }

    // three colors: ABC-CAB-BCA repeated; two colors: AB; one color: A
    static ScheduleSpec default_for(const LmesSpec &spec) {
        const size_t k = spec.colors.size();
        if (k == 3) return parse("ABC-CAB-BCA");
        if (k == 2) return parse("AB");
        if (k == 1) return parse("A");
        ScheduleSpec out;
        for (size_t c = 0; c < k; ++c) out.sequence.push_back(static_cast<int>(c));
        return out;
    }
};

struct TraceRow {
    int round;  // 1-based full-pass index
    int color;
    double fidelity;
    double parity_success_prob;
};

struct ScheduleResult {
    bool converged = false;
    int rounds_used = 0;
    double final_fidelity = 0.0;
    std::vector<TraceRow> trace;
    LmeCoeffMatrix final_lambda;
};

// Repeat the full color sequence up to max_rounds times. Converged when the
// fidelity reaches 1 - eps at a pass boundary; failed once the fidelity has
// not increased across divergence_window consecutive passes.
inline ScheduleResult run_schedule(const LmeCoeffMatrix &lam0, const LmesSpec &spec,
                                   const ScheduleSpec &schedule) {
    schedule.validate(spec);
    ScheduleResult res;
    Mat lam = lam0;
    double prev = lam(0, 0).real();
    int stall = 0;
    for (int pass = 0; pass < schedule.max_rounds; ++pass) {
        for (int color : schedule.sequence) {
            PurifyOutcome step = purify_color(lam, spec, color);
            lam = std::move(step.output);
            res.trace.push_back(
                {pass + 1, color, lam(0, 0).real(), step.parity_success_prob});
        }
        const double f = lam(0, 0).real();
        res.rounds_used = pass + 1;
        if (f >= 1.0 - schedule.convergence_eps) {
            res.converged = true;
            break;
        }
        if (f <= prev) {
            if (++stall >= schedule.divergence_window) break;
        } else {
            stall = 0;
        }
        prev = f;
    }
    res.final_fidelity = lam(0, 0).real();
    res.final_lambda = std::move(lam);
    return res;
}

struct ThresholdReport {
    double critical = 0.0;  // midpoint of the final bracket
    double lo = 0.0, hi = 0.0;
    double tol = 0.0;
    ScheduleResult probe_lo;  // failing endpoint
    ScheduleResult probe_hi;  // converging endpoint
};

// Bisect the smallest parameter at which the schedule converges. The family
// is assumed monotone across the bracket; the bracket must straddle the
// transition (fail at lo, converge at hi).
inline ThresholdReport find_threshold(const std::function<LmeCoeffMatrix(double)> &family,
                                      const LmesSpec &spec, const ScheduleSpec &schedule,
                                      double lo, double hi, double tol = 5e-4) {
    if (!(tol > 0)) throw SpecError("bisection tolerance must be positive");
    if (!(lo < hi)) throw SpecError("bracket must satisfy lo < hi");
    const auto converged = [&](double x) {
        return run_schedule(family(x), spec, schedule).converged;
    };
    const bool clo = converged(lo), chi = converged(hi);
    if (clo || !chi)
        throw BracketError("bracket does not straddle the transition (lo " +
                           std::string(clo ? "converged" : "failed") + ", hi " +
                           std::string(chi ? "converged" : "failed") + ")");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (converged(mid))
            hi = mid;
        else
            lo = mid;
    }
    ThresholdReport rep;
    rep.lo = lo;
    rep.hi = hi;
    rep.tol = tol;
    rep.critical = 0.5 * (lo + hi);
    rep.probe_lo = run_schedule(family(lo), spec, schedule);
    rep.probe_hi = run_schedule(family(hi), spec, schedule);
    return rep;
}

}  // namespace lmepurify
