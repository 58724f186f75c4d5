#pragma once
// Brute-force state-vector simulation of the physical two-copy subprotocol:
// CNOTs between the copies, merge measurements on neighbor wires (in reduced
// projector form or as the literal three-qubit entangled-basis measurement
// with correction), and X-basis postselection. Used as the independent
// referee for the coefficient-level recurrence, and for implementing
// stabilizer operators through an auxiliary entangled resource.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "lme_core.hpp"
#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

struct WireLabel {
    int copy;     // 1/2 = system copies, 0 = ancilla
    int logical;  // qubit number within the copy (or ancilla id)
    bool operator==(const WireLabel &o) const {
        return copy == o.copy && logical == o.logical;
    }
};

enum class MergeMode { reduced, ghz_basis };

// A register of wires with amplitudes over 2^W basis states (wire w = bit w)
// and a registry mapping (copy, logical) -> wire. Operations that consume
// wires keep the registry in sync; merges leave the surviving amplitude on
// the first argument's wire.
struct WireState {
    Vec amps;
    std::vector<WireLabel> labels;

    int wire_count() const { return static_cast<int>(labels.size()); }

    static WireState single(const Vec &a, std::vector<WireLabel> labs) {
        WireState s;
        s.amps = a;
        s.labels = std::move(labs);
        if (s.amps.size() != (Eigen::Index{1} << s.labels.size()))
            throw DimensionError("amplitude length does not match wire count");
        return s;
    }

    static WireState two_copies(const Vec &copy1, const Vec &copy2, int n) {
        std::vector<WireLabel> labs;
        for (int q = 1; q <= n; ++q) labs.push_back({1, q});
        for (int q = 1; q <= n; ++q) labs.push_back({2, q});
        WireState s;
        s.amps = kron2v(copy2, copy1);  // copy 2 on the high bits
        s.labels = std::move(labs);
        return s;
    }

    // append a factor on the high bits
    void attach(const Vec &a, const std::vector<WireLabel> &labs) {
        if (a.size() != (Eigen::Index{1} << labs.size()))
            throw DimensionError("attached amplitude length does not match labels");
        amps = kron2v(a, amps);
        labels.insert(labels.end(), labs.begin(), labs.end());
    }

    int wire_of(int copy, int logical) const {
        int found = -1;
        for (int w = 0; w < wire_count(); ++w)
            if (labels[static_cast<size_t>(w)] == WireLabel{copy, logical}) {
                if (found >= 0) throw SpecError("wire registry is not bijective");
                found = w;
            }
        if (found < 0) throw SpecError("no wire registered for the requested qubit");
        return found;
    }

    bool registry_bijective() const {
        for (size_t i = 0; i < labels.size(); ++i)
            for (size_t j = i + 1; j < labels.size(); ++j)
                if (labels[i] == labels[j]) return false;
        return amps.size() == (Eigen::Index{1} << labels.size());
    }

    static int drop_bit_index(int i, int b) {
        const int low = i & ((1 << b) - 1);
        return low | ((i >> (b + 1)) << b);
    }

    void cnot(int control, int target) {
        check_wire(control);
        check_wire(target);
        if (control == target) throw SpecError("cnot control and target collide");
        const int d = static_cast<int>(amps.size());
        Vec out(d);
        for (int i = 0; i < d; ++i)
            out(i) = amps(((i >> control) & 1) ? (i ^ (1 << target)) : i);
        amps = std::move(out);
    }

    void h(int w) {
        check_wire(w);
        const int d = static_cast<int>(amps.size());
        const int bit = 1 << w;
        const double s = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < d; ++i)
            if (!(i & bit)) {
                const cplx a = amps(i), b = amps(i | bit);
                amps(i) = s * (a + b);
                amps(i | bit) = s * (a - b);
            }
    }

    void x(int w) {
        check_wire(w);
        const int d = static_cast<int>(amps.size());
        const int bit = 1 << w;
        for (int i = 0; i < d; ++i)
            if (!(i & bit)) std::swap(amps(i), amps(i | bit));
    }

    void z(int w) {
        check_wire(w);
        const int d = static_cast<int>(amps.size());
        const int bit = 1 << w;
        for (int i = 0; i < d; ++i)
            if (i & bit) amps(i) = -amps(i);
    }

    // Merge two wires: keep the bit-equal branch, leave the result on w1,
    // drop w2. Returns the branch probability (before the optional sqrt(2)
    // reweighting used by exact state-combination identities). ghz_basis mode
    // runs the literal three-qubit entangled-basis measurement with a fresh
    // two-qubit ancilla and per-outcome correction, checking internally that
    // all four kept outcomes coincide.
    double ghz_merge(int w1, int w2, MergeMode mode = MergeMode::reduced,
                     bool sqrt2_weight = false) {
        if (mode == MergeMode::reduced) return merge_reduced(w1, w2, sqrt2_weight);
        return merge_ghz_basis(w1, w2, sqrt2_weight);
    }

    double postselect_z(int w, int bit, bool require_nonzero = true) {
        check_wire(w);
        const int d = static_cast<int>(amps.size());
        const double pin = amps.squaredNorm();
        Vec out = Vec::Zero(d / 2);
        for (int i = 0; i < d; ++i)
            if (((i >> w) & 1) == bit) out(drop_bit_index(i, w)) = amps(i);
        const double p = pin > 0 ? out.squaredNorm() / pin : 0.0;
        if (require_nonzero && !(p > 0))
            throw PostselectError("postselected branch has zero probability");
        amps = std::move(out);
        labels.erase(labels.begin() + w);
        return p;
    }

    // project onto the +1 X-basis outcome and remove the wire
    double postselect_x_plus(int w, bool require_nonzero = true) {
        h(w);
        return postselect_z(w, 0, require_nonzero);
    }

    // move a wire to a new position, keeping the relative order of the rest
    void move_wire(int src, int dst) {
        check_wire(src);
        check_wire(dst);
        if (src == dst) return;
        const int wn = wire_count();
        std::vector<int> order;  // order[new position] = old wire
        for (int w = 0; w < wn; ++w)
            if (w != src) order.push_back(w);
        order.insert(order.begin() + dst, src);
        const int d = static_cast<int>(amps.size());
        Vec out(d);
        for (int j = 0; j < d; ++j) {
            int i = 0;
            for (int w = 0; w < wn; ++w)
                if ((j >> w) & 1) i |= 1 << order[static_cast<size_t>(w)];
            out(j) = amps(i);
        }
        amps = std::move(out);
        std::vector<WireLabel> labs;
        for (int w = 0; w < wn; ++w) labs.push_back(labels[static_cast<size_t>(order[static_cast<size_t>(w)])]);
        labels = std::move(labs);
    }

private:
    void check_wire(int w) const {
        if (w < 0 || w >= wire_count()) throw SpecError("wire index out of range");
    }

    double merge_reduced(int w1, int w2, bool sqrt2_weight) {
        check_wire(w1);
        check_wire(w2);
        if (w1 == w2) throw SpecError("merge wires collide");
        const int d = static_cast<int>(amps.size());
        const double pin = amps.squaredNorm();
        Vec out = Vec::Zero(d / 2);
        for (int i = 0; i < d; ++i)
            if (((i >> w1) & 1) == ((i >> w2) & 1)) out(drop_bit_index(i, w2)) = amps(i);
        const double p = pin > 0 ? out.squaredNorm() / pin : 0.0;
        if (sqrt2_weight) out *= std::sqrt(2.0);
        amps = std::move(out);
        labels.erase(labels.begin() + w2);
        return p;
    }

    double merge_ghz_basis(int w1, int w2, bool sqrt2_weight) {
        check_wire(w1);
        check_wire(w2);
        if (w1 == w2) throw SpecError("merge wires collide");
        const double pin = amps.squaredNorm();
        // fresh ancilla pair (|00>+|11>)/sqrt(2): wires anc (low) and keep (high)
        WireState work = *this;
        Vec bell(4);
        bell << 1.0 / std::sqrt(2.0), 0, 0, 1.0 / std::sqrt(2.0);
        work.attach(bell, {{0, -1}, {0, -2}});
        const int anc = work.wire_of(0, -1), keep = work.wire_of(0, -2);
        const int dw = static_cast<int>(work.amps.size());

        Vec first;
        double total = 0.0;
        for (int xi = 0; xi <= 1; ++xi)
            for (int zj = 0; zj <= 1; ++zj) {
                // kept outcome state (1 x 1 x X^xi Z^zj) applied to the
                // three-qubit branch basis (|000> + |111>)/sqrt(2)
                cplx g[2][2][2] = {};
                const double s = 1.0 / std::sqrt(2.0);
                g[0][0][xi] = s;                       // from |000>
                g[1][1][1 - xi] = zj ? -s : s;         // from |111>
                Vec proj = Vec::Zero(dw / 8);
                for (int i = 0; i < dw; ++i) {
                    const int b1 = (i >> w1) & 1, b2 = (i >> w2) & 1, b3 = (i >> anc) & 1;
                    const cplx coeff = std::conj(g[b1][b2][b3]);
                    if (coeff == cplx(0, 0)) continue;
                    int j = i;
                    for (int b : sorted_desc(w1, w2, anc)) j = drop_bit_index(j, b);
                    proj(j) += coeff * work.amps(i);
                }
                // correction Z^zj X^xi (the outcome label's transpose) on the
                // surviving ancilla wire: X first, then Z
                int kp = keep;
                for (int b : sorted_desc(w1, w2, anc))
                    if (b < kp) --kp;
                WireState branch;
                branch.amps = std::move(proj);
                branch.labels = erase_three(work.labels, w1, w2, anc);
                if (xi) branch.x(kp);
                if (zj) branch.z(kp);
                total += branch.amps.squaredNorm();
                if (first.size() == 0) {
                    first = branch.amps;
                } else if ((branch.amps - first).cwiseAbs().maxCoeff() > 1e-10) {
                    throw PostselectError(
                        "entangled-basis merge branches disagree after correction");
                }
            }
        const double p = pin > 0 ? total / pin : 0.0;

        // each corrected branch equals half the merged state; restore the
        // reduced-form amplitude and wire layout (result on w1's slot)
        Vec merged = 2.0 * first;
        if (sqrt2_weight) merged *= std::sqrt(2.0);
        WireState result;
        result.amps = std::move(merged);
        // layout after contraction: original wires minus {w1, w2}, ancilla last
        std::vector<WireLabel> contracted;
        for (int w = 0; w < wire_count(); ++w)
            if (w != w1 && w != w2) contracted.push_back(labels[static_cast<size_t>(w)]);
        contracted.push_back(labels[static_cast<size_t>(w1)]);  // merged wire takes w1's label
        result.labels = contracted;
        int target = w1;
        if (w2 < w1) --target;
        result.move_wire(result.wire_count() - 1, target);
        *this = std::move(result);
        return p;
    }

    static std::vector<int> sorted_desc(int a, int b, int c) {
        std::vector<int> v{a, b, c};
        std::sort(v.rbegin(), v.rend());
        return v;
    }

    static std::vector<WireLabel> erase_three(const std::vector<WireLabel> &labs, int a,
                                              int b, int c) {
        std::vector<WireLabel> out;
        for (int w = 0; w < static_cast<int>(labs.size()); ++w)
            if (w != a && w != b && w != c) out.push_back(labs[static_cast<size_t>(w)]);
        return out;
    }
};

// sign table over arbitrary nonempty qubit subsets (local helper that, unlike
// a full spec, also admits order-1 factors arising from reduced gates)
inline Eigen::VectorXd phase_signs_sets(int m, const std::vector<std::vector<int>> &sets) {
    const int d = dim_of(m);
    Eigen::VectorXd s = Eigen::VectorXd::Ones(d);
    for (const auto &g : sets) {
        const MultiIndex mask = qubit_mask(g);
        for (int x = 0; x < d; ++x)
            if ((static_cast<MultiIndex>(x) & mask) == mask) s(x) = -s(x);
    }
    return s;
}

namespace detail {

struct NeighborResource {
    std::vector<int> neighbors;              // sorted
    std::vector<std::vector<int>> local_gates;  // gate remainders on 1..m labels
};

inline NeighborResource neighbor_resource(const LmesSpec &spec, int i) {
    NeighborResource r;
    r.neighbors = spec.neighbors(i);
    for (const auto &g : spec.gates) {
        if (std::find(g.begin(), g.end(), i) == g.end()) continue;
        std::vector<int> local;
        for (int q : g)
            if (q != i) {
                const auto it =
                    std::find(r.neighbors.begin(), r.neighbors.end(), q);
                local.push_back(static_cast<int>(it - r.neighbors.begin()) + 1);
            }
        r.local_gates.push_back(std::move(local));
    }
    return r;
}

inline void require_regular_for_run(const LmesSpec &spec, int color_idx) {
    spec.validate();
    if (!spec.regular())
        throw SpecError("two-copy subprotocol requires a regular spec");
    spec.color(color_idx);
    if (2 * spec.n > 2 * max_qubits)
        throw DimensionError("two-copy run exceeds the dense wire cap");
}

}  // namespace detail

// One run of the color subprotocol on a pure two-copy product input:
// CNOT (copy-2 control, copy-1 target) on the purified color, merge both
// copies' wires on every other qubit, X-basis postselect the copy-2 color
// wires. Returns the unnormalized surviving copy-1 amplitudes (wire order =
// qubit order) and their squared norm.
inline std::pair<Vec, double> subprotocol_operator_run(const LmesSpec &spec, int color_idx,
                                                       const Vec &vec1, const Vec &vec2,
                                                       MergeMode mode = MergeMode::reduced) {
    detail::require_regular_for_run(spec, color_idx);
    const int n = spec.n;
    WireState st = WireState::two_copies(vec1, vec2, n);
    for (int q : spec.color(color_idx)) st.cnot(st.wire_of(2, q), st.wire_of(1, q));
    for (int q : spec.complement_qubits(color_idx))
        st.ghz_merge(st.wire_of(1, q), st.wire_of(2, q), mode);
    for (int q : spec.color(color_idx))
        st.postselect_x_plus(st.wire_of(2, q), /*require_nonzero=*/false);
    return {st.amps, st.amps.squaredNorm()};
}

struct BasisPairRun {
    bool kept = false;
    StateVector output;  // normalized when kept, zero otherwise
    double probability = 0.0;
};

// Basis-pair behavior of the subprotocol: the pair survives iff the purified
// color's sub-indices agree, and the survivor is the basis state whose
// non-purified sector index is the XOR of the inputs'.
inline BasisPairRun run_subprotocol_on_basis_pair(const LmesSpec &spec, int color_idx,
                                                  MultiIndex k, MultiIndex l) {
    const Vec vk = lme_basis_vector(spec, k);
    const Vec vl = lme_basis_vector(spec, l);
    auto [out, norm2] = subprotocol_operator_run(spec, color_idx, vk, vl);
    BasisPairRun res;
    res.probability = norm2;
    res.kept = norm2 > 1e-20;
    res.output = res.kept ? Vec(out / std::sqrt(norm2)) : Vec(Vec::Zero(out.size()));
    return res;
}

// Linearity extension of the pure-pair runs to density matrices: the physical
// postselected map on rho (x) rho. Returns the renormalized output and the
// complete success probability (merge and postselection factors included).
inline std::pair<DensityMatrix, double> induced_density_map(const LmesSpec &spec,
                                                            int color_idx,
                                                            const DensityMatrix &rho) {
    if (spec.n > 4)
        throw DimensionError("two-copy density simulation is limited to n <= 4");
    const int d = dim_of(spec.n);
    if (rho.rows() != d || rho.cols() != d)
        throw DimensionError("density matrix dimension does not match spec");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const Eigen::VectorXd w = es.eigenvalues();
    const Mat v = es.eigenvectors();
    Mat acc = Mat::Zero(d, d);
    double total = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double weight = w(i) * w(j);
            if (weight < 1e-16) continue;
            auto [out, norm2] = subprotocol_operator_run(spec, color_idx, v.col(i), v.col(j));
            acc += weight * (out * out.adjoint());
            total += weight * norm2;
        }
    const double tr = acc.trace().real();
    if (!(tr > 0.0)) throw PostselectError("all two-copy branches were discarded");
    acc /= tr;
    return {std::move(acc), total};
}

enum class StabilizerRoute {
    merge_resource,     // attach the stabilizer's phase pattern on |+> wires, merge
    prepared_ancilla,   // controlled phase pattern + CNOT + ancilla postselection
};

// Implement S_i rho S_i via an auxiliary entangled resource. Both routes act
// by local operations plus merges on the neighbor wires of qubit i and
// reproduce the conjugated state on their kept branch.
inline DensityMatrix apply_stabilizer_via_resource(const DensityMatrix &rho,
                                                   const LmesSpec &spec, int i,
                                                   StabilizerRoute route) {
    spec.validate();
    if (i < 1 || i > spec.n) throw SpecError("stabilizer qubit out of range");
    const int n = spec.n;
    const int d = dim_of(n);
    if (rho.rows() != d || rho.cols() != d)
        throw DimensionError("density matrix dimension does not match spec");
    const detail::NeighborResource res = detail::neighbor_resource(spec, i);
    const int m = static_cast<int>(res.neighbors.size());
    if (m == 0) throw SpecError("qubit has no neighbors; stabilizer is plain X");

    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const Eigen::VectorXd w = es.eigenvalues();
    const Mat v = es.eigenvectors();
    Mat acc = Mat::Zero(d, d);

    const Eigen::VectorXd local_signs = phase_signs_sets(m, res.local_gates);
    for (int t = 0; t < d; ++t) {
        if (w(t) < 1e-14) continue;
        std::vector<WireLabel> syslabs;
        for (int q = 1; q <= n; ++q) syslabs.push_back({1, q});
        WireState st = WireState::single(v.col(t), syslabs);
        if (route == StabilizerRoute::merge_resource) {
            // resource = phase pattern applied to |+> wires, one per neighbor
            Vec phi(dim_of(m));
            const double a = 1.0 / std::sqrt(static_cast<double>(dim_of(m)));
            for (int xx = 0; xx < dim_of(m); ++xx) phi(xx) = a * local_signs(xx);
            std::vector<WireLabel> labs;
            for (int j = 1; j <= m; ++j) labs.push_back({0, j});
            st.attach(phi, labs);
            for (int j = 1; j <= m; ++j)
                st.ghz_merge(st.wire_of(1, res.neighbors[static_cast<size_t>(j - 1)]),
                             st.wire_of(0, j));
            st.x(st.wire_of(1, i));
        } else {
            // resource = (|0><0| x 1 + |1><1| x phase pattern) |+>^(m+1) with a
            // control ancilla; merge neighbors, CNOT onto qubit i, keep the
            // ancilla's |1> branch
            Vec psi(dim_of(m + 1));
            const double a = 1.0 / std::sqrt(static_cast<double>(dim_of(m + 1)));
            for (int idx = 0; idx < dim_of(m + 1); ++idx) {
                const int b = idx & 1;
                const int xx = idx >> 1;
                psi(idx) = a * (b ? local_signs(xx) : 1.0);
            }
            std::vector<WireLabel> labs{{0, 0}};
            for (int j = 1; j <= m; ++j) labs.push_back({0, j});
            st.attach(psi, labs);
            for (int j = 1; j <= m; ++j)
                st.ghz_merge(st.wire_of(1, res.neighbors[static_cast<size_t>(j - 1)]),
                             st.wire_of(0, j));
            st.cnot(st.wire_of(0, 0), st.wire_of(1, i));
            st.postselect_z(st.wire_of(0, 0), 1, /*require_nonzero=*/false);
        }
        acc += w(t) * (st.amps * st.amps.adjoint());
    }
    const double tr = acc.trace().real();
    if (!(tr > 0.0)) throw PostselectError("stabilizer resource branch has zero weight");
    return acc / tr;
}

// Keep both ancilla branches of the prepared-ancilla route instead of
// postselecting: the ancilla trace-out realizes (rho + S_i rho S_i)/2.
inline DensityMatrix stabilizer_mix_via_resource(const DensityMatrix &rho,
                                                 const LmesSpec &spec, int i) {
    spec.validate();
    const int n = spec.n;
    const int d = dim_of(n);
    const detail::NeighborResource res = detail::neighbor_resource(spec, i);
    const int m = static_cast<int>(res.neighbors.size());
    if (m == 0) throw SpecError("qubit has no neighbors; stabilizer is plain X");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    const Eigen::VectorXd w = es.eigenvalues();
    const Mat v = es.eigenvectors();
    const Eigen::VectorXd local_signs = phase_signs_sets(m, res.local_gates);
    Mat acc = Mat::Zero(d, d);
    for (int t = 0; t < d; ++t) {
        if (w(t) < 1e-14) continue;
        std::vector<WireLabel> syslabs;
        for (int q = 1; q <= n; ++q) syslabs.push_back({1, q});
        WireState st = WireState::single(v.col(t), syslabs);
        Vec psi(dim_of(m + 1));
        const double a = 1.0 / std::sqrt(static_cast<double>(dim_of(m + 1)));
        for (int idx = 0; idx < dim_of(m + 1); ++idx)
            psi(idx) = a * ((idx & 1) ? local_signs(idx >> 1) : 1.0);
        std::vector<WireLabel> labs{{0, 0}};
        for (int j = 1; j <= m; ++j) labs.push_back({0, j});
        st.attach(psi, labs);
        for (int j = 1; j <= m; ++j)
            st.ghz_merge(st.wire_of(1, res.neighbors[static_cast<size_t>(j - 1)]),
                         st.wire_of(0, j));
        st.cnot(st.wire_of(0, 0), st.wire_of(1, i));
        for (int branch = 0; branch <= 1; ++branch) {
            WireState b = st;
            b.postselect_z(b.wire_of(0, 0), branch, /*require_nonzero=*/false);
            acc += w(t) * (b.amps * b.amps.adjoint());
        }
    }
    const double tr = acc.trace().real();
    if (!(tr > 0.0)) throw PostselectError("stabilizer resource branch has zero weight");
    return acc / tr;
}

}  // namespace lmepurify
