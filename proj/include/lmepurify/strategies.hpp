#pragma once
// Indirect purification strategies: cutting a phase-locked state down to
// graph or bipartite pieces with Z measurements, purifying the pieces, and
// reassembling the target with the Q/P connection measurements; plus the
// decomposition route that splits a non-regular gate set into regular parts.

#include <algorithm>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "circuit_sim.hpp"
#include "lme_core.hpp"
#include "noise.hpp"
#include "purify.hpp"
#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

struct CutStep {
    int copy = 1;     // register the measurement acts on (1 for single-state cuts)
    int qubit = 0;    // 1-based qubit to measure in the Z basis
    int outcome = 0;  // +1 keeps the |1> branch, -1 keeps the |0> branch
};

struct CutPlan {
    std::vector<CutStep> steps;

    void validate(int n) const {
        for (const auto &s : steps) {
            if (s.qubit < 1 || s.qubit > n) throw SpecError("cut qubit out of range");
            if (s.outcome != 1 && s.outcome != -1)
                throw SpecError("cut outcome must be +1 or -1");
        }
        for (size_t i = 0; i < steps.size(); ++i)
            for (size_t j = i + 1; j < steps.size(); ++j)
                if (steps[i].copy == steps[j].copy && steps[i].qubit == steps[j].qubit)
                    throw SpecError("cut plan measures a qubit twice");
    }
};

struct CutResidual {
    std::vector<int> survivors;             // original labels, ascending
    std::vector<std::vector<int>> sets;     // phase sets on 1..|survivors| labels
    double sign = 1.0;                      // global sign from fully measured gates
    StateVector target;                     // expected pure residual on survivors
};

// Expected residual of cutting a pure phase-locked state: gates touched by a
// |0> outcome drop, |1> outcomes strip their qubit from the gate (an emptied
// gate leaves only a global sign), and the rest relabel onto the survivors.
inline CutResidual cut_residual(const LmesSpec &spec, const CutPlan &plan) {
    spec.validate();
    plan.validate(spec.n);
    std::map<int, int> outcome;  // qubit -> +1/-1
    for (const auto &s : plan.steps) {
        if (s.copy != 1) throw SpecError("residual prediction applies to one register");
        outcome[s.qubit] = s.outcome;
    }
    CutResidual r;
    for (int q = 1; q <= spec.n; ++q)
        if (!outcome.count(q)) r.survivors.push_back(q);
    std::map<int, int> local;  // original label -> 1-based survivor position
    for (size_t i = 0; i < r.survivors.size(); ++i)
        local[r.survivors[i]] = static_cast<int>(i) + 1;
    for (const auto &g : spec.gates) {
        bool dropped = false;
        std::vector<int> reduced;
        for (int q : g) {
            const auto it = outcome.find(q);
            if (it == outcome.end())
                reduced.push_back(local[q]);
            else if (it->second == -1)
                dropped = true;  // |0> branch: the gate acts trivially
        }
        if (dropped) continue;
        if (reduced.empty())
            r.sign = -r.sign;  // all qubits measured to |1>: global phase flip
        else
            r.sets.push_back(std::move(reduced));
    }
    const int ns = static_cast<int>(r.survivors.size());
    const Eigen::VectorXd signs = phase_signs_sets(ns, r.sets);
    const double a = r.sign / std::sqrt(static_cast<double>(dim_of(ns)));
    r.target.resize(dim_of(ns));
    for (int x = 0; x < dim_of(ns); ++x) r.target(x) = a * signs(x);
    return r;
}

// Z-measure the planned qubits, keep the prescribed branches, renormalize,
// and drop the measured wires. Returns the reduced state and the branch
// probability.
inline std::pair<DensityMatrix, double> z_measure_cut(const DensityMatrix &rho, int n,
                                                      const CutPlan &plan) {
    plan.validate(n);
    const int d = dim_of(n);
    if (rho.rows() != d || rho.cols() != d)
        throw DimensionError("density matrix dimension does not match qubit count");
    std::vector<int> bits;
    int want = 0, mask = 0;
    for (const auto &s : plan.steps) {
        if (s.copy != 1) throw SpecError("single-register cut requires copy 1 steps");
        const int b = s.qubit - 1;
        bits.push_back(b);
        mask |= 1 << b;
        if (s.outcome == 1) want |= 1 << b;
    }
    std::sort(bits.rbegin(), bits.rend());
    const int ds = dim_of(n - static_cast<int>(bits.size()));
    DensityMatrix out = DensityMatrix::Zero(ds, ds);
    for (int r = 0; r < d; ++r) {
        if ((r & mask) != want) continue;
        int rr = r;
        for (int b : bits) rr = WireState::drop_bit_index(rr, b);
        for (int c = 0; c < d; ++c) {
            if ((c & mask) != want) continue;
            int cc = c;
            for (int b : bits) cc = WireState::drop_bit_index(cc, b);
            out(rr, cc) = rho(r, c);
        }
    }
    const double p = out.trace().real();
    if (!(p > 1e-15)) throw PostselectError("cut branch has zero probability");
    out /= p;
    return {std::move(out), p};
}

inline std::pair<StateVector, double> z_measure_cut(const StateVector &psi, int n,
                                                    const CutPlan &plan) {
    plan.validate(n);
    const int d = dim_of(n);
    if (psi.size() != d)
        throw DimensionError("state dimension does not match qubit count");
    std::vector<int> bits;
    int want = 0, mask = 0;
    for (const auto &s : plan.steps) {
        if (s.copy != 1) throw SpecError("single-register cut requires copy 1 steps");
        const int b = s.qubit - 1;
        bits.push_back(b);
        mask |= 1 << b;
        if (s.outcome == 1) want |= 1 << b;
    }
    std::sort(bits.rbegin(), bits.rend());
    Vec out = Vec::Zero(dim_of(n - static_cast<int>(bits.size())));
    for (int i = 0; i < d; ++i) {
        if ((i & mask) != want) continue;
        int ii = i;
        for (int b : bits) ii = WireState::drop_bit_index(ii, b);
        out(ii) = psi(i);
    }
    const double p = out.squaredNorm() / psi.squaredNorm();
    if (!(p > 1e-15)) throw PostselectError("cut branch has zero probability");
    out /= out.norm();
    return {std::move(out), p};
}

// Connection measurement Q on two wires of one register: Hadamard both, then
// project the pair onto the two-outcome family that leaves one fresh qubit
// carrying the product of the originals' phase patterns. The fresh qubit
// takes w1's slot and label; w2 is consumed. Requires w1 < w2.
inline void q_connect_wires(WireState &st, int w1, int w2) {
    if (!(0 <= w1 && w1 < w2 && w2 < st.wire_count()))
        throw SpecError("q_connect requires two distinct wires with w1 < w2");
    st.h(w1);
    st.h(w2);
    const int d = static_cast<int>(st.amps.size());
    Vec out = Vec::Zero(d / 2);
    const double s2 = std::sqrt(2.0);
    for (int i = 0; i < d; ++i) {
        const int a = (i >> w1) & 1, b = (i >> w2) & 1;
        const int base = WireState::drop_bit_index(i, w2) & ~(1 << w1);
        for (int c = 0; c <= 1; ++c) {
            const double sign = (c & a & b) ? -1.0 : 1.0;
            out(base | (c << w1)) += s2 * 0.5 * sign * st.amps(i);
        }
    }
    std::vector<WireLabel> labs = st.labels;
    labs.erase(labs.begin() + w2);
    st.amps = std::move(out);
    st.labels = std::move(labs);
    if (!(st.amps.squaredNorm() > 1e-15))
        throw PostselectError("connection measurement projected onto zero norm");
}

// Merge two pure states through one Q measurement across (qubitA, qubitB).
// Output register: A's qubits with the merged qubit in qubitA's slot, then
// B's remaining qubits.
inline StateVector q_connect(const StateVector &state_a, int na, int qubit_a,
                             const StateVector &state_b, int nb, int qubit_b) {
    if (qubit_a < 1 || qubit_a > na || qubit_b < 1 || qubit_b > nb)
        throw SpecError("connection qubit out of range");
    std::vector<WireLabel> labs;
    for (int q = 1; q <= na; ++q) labs.push_back({1, q});
    WireState st = WireState::single(state_a, labs);
    std::vector<WireLabel> labs_b;
    for (int q = 1; q <= nb; ++q) labs_b.push_back({2, q});
    st.attach(state_b, labs_b);
    q_connect_wires(st, st.wire_of(1, qubit_a), st.wire_of(2, qubit_b));
    return st.amps;
}

// Merge two pure states through sqrt(2)-weighted P measurements across each
// (qubitA, qubitB) pair. Output register: A's qubits in order (shared qubits
// keep A's slots), then B's unshared qubits in order.
inline StateVector p_connect(const StateVector &state_a, int na,
                             const StateVector &state_b, int nb,
                             const std::vector<std::pair<int, int>> &shared) {
    std::vector<WireLabel> labs;
    for (int q = 1; q <= na; ++q) labs.push_back({1, q});
    WireState st = WireState::single(state_a, labs);
    std::vector<WireLabel> labs_b;
    for (int q = 1; q <= nb; ++q) labs_b.push_back({2, q});
    st.attach(state_b, labs_b);
    for (const auto &[qa, qb] : shared) {
        if (qa < 1 || qa > na || qb < 1 || qb > nb)
            throw SpecError("shared qubit out of range");
        st.ghz_merge(st.wire_of(1, qa), st.wire_of(2, qb), MergeMode::reduced,
                     /*sqrt2_weight=*/true);
    }
    if (!(st.amps.squaredNorm() > 1e-15))
        throw PostselectError("merge projected onto zero norm");
    return st.amps;
}

// --- classic bipartite recurrence benchmark ------------------------------

// One round of the standard two-pair recurrence on isotropic states of
// fidelity F, re-twirled to isotropic form after each round.
inline double bipartite_recurrence_step(double f) {
    const double w = (1.0 - f) / 3.0;
    return (f * f + w * w) / (f * f + 2.0 * f * w + 5.0 * w * w);
}

inline bool bipartite_recurrence_converges(double f0, double eps = 1e-6,
                                           int max_rounds = 300, int window = 30) {
    double f = f0, prev = f0;
    int stall = 0;
    for (int r = 0; r < max_rounds; ++r) {
        f = bipartite_recurrence_step(f);
        if (f >= 1.0 - eps) return true;
        if (f <= prev) {
            if (++stall >= window) return false;
        } else {
            stall = 0;
        }
        prev = f;
    }
    return false;
}

inline ThresholdReport bipartite_benchmark_threshold(double tol = 5e-4) {
    double lo = 0.4, hi = 0.8;
    if (bipartite_recurrence_converges(lo) || !bipartite_recurrence_converges(hi))
        throw BracketError("bipartite benchmark bracket does not straddle the transition");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (bipartite_recurrence_converges(mid) ? hi : lo) = mid;
    }
    ThresholdReport rep;
    rep.lo = lo;
    rep.hi = hi;
    rep.tol = tol;
    rep.critical = 0.5 * (lo + hi);
    return rep;
}

enum class IndirectStrategy { graph, bipartite };

// Threshold of the bottleneck sub-state purification for the indirect
// routes: the cut preserves the white-noise weight exactly, so the cut
// piece's own threshold governs the strategy.
inline ThresholdReport indirect_threshold(IndirectStrategy strategy, double tol = 5e-4) {
    if (strategy == IndirectStrategy::bipartite) return bipartite_benchmark_threshold(tol);
    const LmesSpec path = make_spec(3, {{1, 2}, {2, 3}}, {{1, 3}, {2}});
    const ScheduleSpec schedule = ScheduleSpec::default_for(path);
    const auto family = [&path](double f) {
        return LmeCoeffMatrix(white_noise_diagonal(path.n, f).asDiagonal());
    };
    return find_threshold(family, path, schedule, 0.25, 0.6, tol);
}

// --- composition of non-regular gate sets --------------------------------

struct CompositionPart {
    std::vector<int> qubits;   // original labels, ascending; local label = position
    LmesSpec part;             // regular spec on 1..|qubits|
};

struct CompositionPlan {
    std::vector<CompositionPart> parts;  // gate sets partition the original gates
    std::vector<int> free_qubits;        // qubits outside every part, kept as |+>
};

namespace detail {

// Greedy coloring of a gate subset: qubits of one color must have equal
// order (gate count) and never share a gate, and a regular subset of order-k
// gates needs exactly k colors with each gate touching each color once.
struct PartColoring {
    bool ok = false;
    std::vector<std::vector<int>> classes;  // original qubit labels
};

inline PartColoring greedy_classes(const std::vector<std::vector<int>> &gates) {
    PartColoring out;
    std::vector<int> qubits;
    for (const auto &g : gates)
        for (int q : g)
            if (std::find(qubits.begin(), qubits.end(), q) == qubits.end())
                qubits.push_back(q);
    std::sort(qubits.begin(), qubits.end());
    std::map<int, int> order;
    for (const auto &g : gates)
        for (int q : g) ++order[q];
    const size_t k = gates.front().size();
    for (const auto &g : gates)
        if (g.size() != k) return out;
    auto adjacent = [&](int a, int b) {
        for (const auto &g : gates)
            if (std::find(g.begin(), g.end(), a) != g.end() &&
                std::find(g.begin(), g.end(), b) != g.end())
                return true;
        return false;
    };
    std::vector<std::vector<int>> classes;
    for (int q : qubits) {
        bool placed = false;
        for (auto &cls : classes) {
            bool fits = order[cls.front()] == order[q];
            for (int other : cls)
                if (adjacent(other, q)) fits = false;
            if (fits) {
                cls.push_back(q);
                placed = true;
                break;
            }
        }
        if (!placed) classes.push_back({q});
    }
    if (classes.size() != k) return out;
    for (const auto &g : gates)
        for (const auto &cls : classes) {
            int hits = 0;
            for (int q : g)
                if (std::find(cls.begin(), cls.end(), q) != cls.end()) ++hits;
            if (hits != 1) return out;
        }
    out.ok = true;
    out.classes = std::move(classes);
    return out;
}

inline bool part_is_regular(const std::vector<std::vector<int>> &gates) {
    return greedy_classes(gates).ok;
}

inline CompositionPart make_part(const std::vector<std::vector<int>> &gates) {
    CompositionPart part;
    for (const auto &g : gates)
        for (int q : g)
            if (std::find(part.qubits.begin(), part.qubits.end(), q) ==
                part.qubits.end())
                part.qubits.push_back(q);
    std::sort(part.qubits.begin(), part.qubits.end());
    auto to_local = [&part](int q) {
        const auto it = std::find(part.qubits.begin(), part.qubits.end(), q);
        return static_cast<int>(it - part.qubits.begin()) + 1;
    };
    std::vector<std::vector<int>> local;
    for (const auto &g : gates) {
        std::vector<int> lg;
        for (int q : g) lg.push_back(to_local(q));
        local.push_back(std::move(lg));
    }
    const PartColoring pc = greedy_classes(gates);
    std::vector<std::vector<int>> local_colors;
    if (pc.ok)
        for (const auto &cls : pc.classes) {
            std::vector<int> lc;
            for (int q : cls) lc.push_back(to_local(q));
            local_colors.push_back(std::move(lc));
        }
    part.part = make_spec(static_cast<int>(part.qubits.size()), local, local_colors);
    return part;
}

}  // namespace detail

// Split a gate set into regular parts: gates are grouped by order, then
// greedily packed into subsets that stay regular; a gate that fits no open
// subset starts a new one. The parts partition the gates, so sqrt(2)-weighted
// merges over the shared qubits reassemble the full phase pattern exactly.
inline CompositionPlan compose_nonregular(const LmesSpec &spec) {
    spec.validate();
    CompositionPlan plan;
    if (spec.regular()) {
        CompositionPart part = detail::make_part(spec.gates);
        // carry the validated coloring over, restricted to the covered qubits
        std::vector<std::vector<int>> local_colors;
        for (const auto &cls : spec.colors) {
            std::vector<int> lc;
            for (int q : cls) {
                const auto it = std::find(part.qubits.begin(), part.qubits.end(), q);
                if (it != part.qubits.end())
                    lc.push_back(static_cast<int>(it - part.qubits.begin()) + 1);
            }
            if (!lc.empty()) local_colors.push_back(std::move(lc));
        }
        part.part = make_spec(part.part.n, part.part.gates, local_colors);
        plan.parts.push_back(std::move(part));
    } else {
        // group gates by order, preserving input order inside a group
        std::map<size_t, std::vector<std::vector<int>>> by_order;
        for (const auto &g : spec.gates) by_order[g.size()].push_back(g);
        std::vector<std::vector<std::vector<int>>> buckets;  // gate groups
        for (auto &[k, gates] : by_order) {
            for (const auto &g : gates) {
                bool placed = false;
                for (auto &b : buckets) {
                    if (b.front().size() != k) continue;
                    std::vector<std::vector<int>> trial = b;
                    trial.push_back(g);
                    if (detail::part_is_regular(trial)) {
                        b = std::move(trial);
                        placed = true;
                        break;
                    }
                }
                if (!placed) buckets.push_back({g});
            }
        }
        for (const auto &b : buckets) {
            if (!detail::part_is_regular(b))
                throw SpecError(
                    "gates could not be grouped into regular subsets; "
                    "refine the decomposition by hand");
            plan.parts.push_back(detail::make_part(b));
        }
    }
    std::vector<bool> covered(static_cast<size_t>(spec.n) + 1, false);
    for (const auto &p : plan.parts)
        for (int q : p.qubits) covered[static_cast<size_t>(q)] = true;
    for (int q = 1; q <= spec.n; ++q)
        if (!covered[static_cast<size_t>(q)]) plan.free_qubits.push_back(q);
    return plan;
}

// Execute a composition plan on pure (purified) part states: p-connect the
// parts over their shared original qubits, then append |+> on free qubits.
// Reconstructs the target of the original spec exactly.
inline StateVector execute_composition(const LmesSpec &spec, const CompositionPlan &plan) {
    if (plan.parts.empty()) throw SpecError("composition plan has no parts");
    // accumulate into a register labeled by original qubit numbers
    std::vector<WireLabel> labs;
    for (int q : plan.parts.front().qubits) labs.push_back({1, q});
    WireState st = WireState::single(build_state(plan.parts.front().part), labs);
    for (size_t pi = 1; pi < plan.parts.size(); ++pi) {
        const auto &part = plan.parts[pi];
        std::vector<WireLabel> part_labs;
        std::vector<int> fresh, shared_orig;
        for (int q : part.qubits) {
            bool have = false;
            for (const auto &l : st.labels)
                if (l == WireLabel{1, q}) have = true;
            if (have)
                shared_orig.push_back(q);
            else
                fresh.push_back(q);
            part_labs.push_back({2, q});
        }
        st.attach(build_state(part.part), part_labs);
        for (int q : shared_orig)
            st.ghz_merge(st.wire_of(1, q), st.wire_of(2, q), MergeMode::reduced,
                         /*sqrt2_weight=*/true);
        for (int q : fresh) {
            const int w = st.wire_of(2, q);
            st.labels[static_cast<size_t>(w)] = {1, q};
        }
    }
    for (int q : plan.free_qubits) {
        Vec plus(2);
        plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
        st.attach(plus, {{1, q}});
    }
    // sort wires ascending by original qubit number
    for (int target = 0; target < st.wire_count(); ++target) {
        int best = target;
        for (int w = target + 1; w < st.wire_count(); ++w)
            if (st.labels[static_cast<size_t>(w)].logical <
                st.labels[static_cast<size_t>(best)].logical)
                best = w;
        if (best != target) st.move_wire(best, target);
    }
    if (st.wire_count() != spec.n)
        throw SpecError("composition plan does not cover the spec's qubits");
    return st.amps;
}

}  // namespace lmepurify
