#pragma once
// Problem-description types for pi-phase locally maximally entangleable (LME)
// states: a qubit count, a set of multi-qubit pi-phase gates (hyperedges), and
// a coloring of the qubits.
//
// Conventions used throughout the library:
//   * qubits are 1-based; qubit q owns bit q-1 of a multi-index (little-endian)
//   * a multi-index displays as the string "k1 k2 ... kn" (qubit 1 leftmost)

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmepurify {

using MultiIndex = std::uint32_t;

// error taxonomy (the CLI maps these onto distinct exit codes)
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PostselectError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dense simulation cap: states use 2^n amplitudes, two-copy runs use 2^(2n)
inline constexpr int max_qubits = 8;

inline int dim_of(int n) { return 1 << n; }

inline MultiIndex qubit_bit(int q) { return MultiIndex{1} << (q - 1); }

inline MultiIndex qubit_mask(const std::vector<int> &qubits) {
    MultiIndex m = 0;
    for (int q : qubits) m |= qubit_bit(q);
    return m;
}

inline int popcount32(MultiIndex v) { return __builtin_popcount(v); }

// "k1k2...kn" (qubit 1 leftmost) <-> packed little-endian index
inline std::string index_to_display(MultiIndex k, int n) {
    std::string s(static_cast<size_t>(n), '0');
    for (int q = 1; q <= n; ++q)
        if (k & qubit_bit(q)) s[static_cast<size_t>(q - 1)] = '1';
    return s;
}

inline MultiIndex display_to_index(const std::string &s) {
    MultiIndex k = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '1')
            k |= MultiIndex{1} << i;
        else if (s[i] != '0')
            throw SpecError("multi-index display string must be over {0,1}: " + s);
    }
    return k;
}

// sub-index of k restricted to a qubit list: bit j of the result is the bit of
// the j-th qubit in ascending order
inline MultiIndex pack_sub_index(MultiIndex k, std::vector<int> qubits) {
    std::sort(qubits.begin(), qubits.end());
    MultiIndex out = 0;
    for (size_t j = 0; j < qubits.size(); ++j)
        if (k & qubit_bit(qubits[j])) out |= MultiIndex{1} << j;
    return out;
}

inline MultiIndex unpack_sub_index(MultiIndex sub, std::vector<int> qubits) {
    std::sort(qubits.begin(), qubits.end());
    MultiIndex out = 0;
    for (size_t j = 0; j < qubits.size(); ++j)
        if (sub & (MultiIndex{1} << j)) out |= qubit_bit(qubits[j]);
    return out;
}

// An LME-state description: every gate flips the sign of the all-ones pattern
// on its qubit subset. The coloring partitions {1..n}; it is valid when no
// gate touches two qubits of the same color, and regular when additionally
// every gate has order equal to the number of colors (one qubit per color).
struct LmesSpec {
    int n = 0;
    std::vector<std::vector<int>> gates;
    std::vector<std::vector<int>> colors;  // index 0 = color "A", 1 = "B", ...

    static std::string color_name(int idx) {
        if (idx < 0 || idx >= 26) throw SpecError("color index out of range");
        return std::string(1, static_cast<char>('A' + idx));
    }

    int color_index(const std::string &name) const {
        if (name.size() == 1 && name[0] >= 'A' && name[0] < 'A' + static_cast<char>(colors.size()))
            return name[0] - 'A';
        throw SpecError("unknown color '" + name + "' (spec has " +
                        std::to_string(colors.size()) + " colors)");
    }

    const std::vector<int> &color(int idx) const {
        if (idx < 0 || static_cast<size_t>(idx) >= colors.size())
            throw SpecError("color index " + std::to_string(idx) + " out of range");
        return colors[static_cast<size_t>(idx)];
    }

    std::vector<int> complement_qubits(int color_idx) const {
        const auto &c = color(color_idx);
        std::vector<int> out;
        for (int q = 1; q <= n; ++q)
            if (std::find(c.begin(), c.end(), q) == c.end()) out.push_back(q);
        return out;
    }

    // all qubits sharing a gate with q
    std::vector<int> neighbors(int q) const {
        std::vector<bool> seen(static_cast<size_t>(n) + 1, false);
        for (const auto &g : gates)
            if (std::find(g.begin(), g.end(), q) != g.end())
                for (int p : g)
                    if (p != q) seen[static_cast<size_t>(p)] = true;
        std::vector<int> out;
        for (int p = 1; p <= n; ++p)
            if (seen[static_cast<size_t>(p)]) out.push_back(p);
        return out;
    }

    bool has_coloring() const { return !colors.empty(); }

    // no gate may contain two qubits of the same color
    bool coloring_valid() const {
        std::vector<int> color_of(static_cast<size_t>(n) + 1, -1);
        for (size_t c = 0; c < colors.size(); ++c)
            for (int q : colors[c]) color_of[static_cast<size_t>(q)] = static_cast<int>(c);
        for (const auto &g : gates) {
            std::vector<bool> used(colors.size(), false);
            for (int q : g) {
                int c = color_of[static_cast<size_t>(q)];
                if (c < 0) return false;
                if (used[static_cast<size_t>(c)]) return false;
                used[static_cast<size_t>(c)] = true;
            }
        }
        return true;
    }

    // derived: every gate has order == #colors and touches each color once
    bool regular() const {
        if (!has_coloring() || !coloring_valid()) return false;
        for (const auto &g : gates)
            if (g.size() != colors.size()) return false;
        return true;
    }

    // structural checks; throws SpecError with a diagnostic on violation
    void validate() const {
        if (n < 1) throw SpecError("qubit count must be >= 1");
        if (n > max_qubits)
            throw SpecError("qubit count " + std::to_string(n) + " exceeds dense cap " +
                            std::to_string(max_qubits));
        for (const auto &g : gates) {
            if (g.size() < 2) throw SpecError("gate must act on at least 2 qubits");
            std::vector<int> s = g;
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end())
                throw SpecError("gate lists a qubit twice");
            for (int q : s)
                if (q < 1 || q > n)
                    throw SpecError("gate qubit " + std::to_string(q) + " outside 1.." +
                                    std::to_string(n));
        }
        if (!has_coloring()) return;
        std::vector<int> seen(static_cast<size_t>(n) + 1, 0);
        for (const auto &c : colors) {
            if (c.empty()) throw SpecError("empty color in coloring");
            for (int q : c) {
                if (q < 1 || q > n)
                    throw SpecError("color qubit " + std::to_string(q) + " outside 1.." +
                                    std::to_string(n));
                if (seen[static_cast<size_t>(q)]++)
                    throw SpecError("coloring assigns qubit " + std::to_string(q) + " twice");
            }
        }
        for (int q = 1; q <= n; ++q)
            if (!seen[static_cast<size_t>(q)])
                throw SpecError("coloring misses qubit " + std::to_string(q));
        if (!coloring_valid())
            throw SpecError("invalid coloring: some gate touches one color twice");
    }

    bool operator==(const LmesSpec &o) const {
        return n == o.n && gates == o.gates && colors == o.colors;
    }
};

// normalized construction: sorts qubit lists and validates
inline LmesSpec make_spec(int n, std::vector<std::vector<int>> gates,
                          std::vector<std::vector<int>> colors = {}) {
    LmesSpec s;
    s.n = n;
    s.gates = std::move(gates);
    s.colors = std::move(colors);
    for (auto &g : s.gates) std::sort(g.begin(), g.end());
    for (auto &c : s.colors) std::sort(c.begin(), c.end());
    s.validate();
    return s;
}

}  // namespace lmepurify
