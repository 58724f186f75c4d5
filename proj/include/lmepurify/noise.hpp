#pragma once
// Noise models: per-qubit depolarizing and dephasing channels acting on
// density matrices (Kraus form), and the global white-noise family expressed
// directly as a diagonal LME coefficient matrix.

#include "lme_core.hpp"
#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

struct ChannelSpec {
    enum class Kind { local_depolarizing, local_dephasing, global_white };
    Kind kind = Kind::global_white;
    double parameter = 1.0;
    std::vector<int> targets;  // empty = every qubit (local kinds only)

    static Kind kind_from_name(const std::string &name) {
        if (name == "local_depolarizing") return Kind::local_depolarizing;
        if (name == "local_dephasing") return Kind::local_dephasing;
        if (name == "global_white") return Kind::global_white;
        throw SpecError("unknown channel kind '" + name + "'");
    }
    static std::string kind_name(Kind k) {
        switch (k) {
            case Kind::local_depolarizing: return "local_depolarizing";
            case Kind::local_dephasing: return "local_dephasing";
            case Kind::global_white: return "global_white";
        }
        throw SpecError("bad channel kind");
    }
};

namespace detail {
inline void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw SpecError("channel parameter must lie in [0,1]");
}
inline std::vector<int> all_qubits(int n) {
    std::vector<int> q(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) q[static_cast<size_t>(i)] = i + 1;
    return q;
}
}  // namespace detail

// per-qubit map rho -> p rho + (1-p)/4 (rho + X rho X + Y rho Y + Z rho Z)
inline DensityMatrix depolarize_local(const DensityMatrix &rho, int n, double p,
                                      std::vector<int> qubits = {}) {
    detail::check_probability(p);
    if (qubits.empty()) qubits = detail::all_qubits(n);
    DensityMatrix out = rho;
    for (int q : qubits) {
        const Mat x = op_on(n, q, pauli_x());
        const Mat y = op_on(n, q, pauli_y());
        const Mat z = op_on(n, q, pauli_z());
        out = p * out + (1.0 - p) / 4.0 *
                            (out + x * out * x.adjoint() + y * out * y.adjoint() +
                             z * out * z.adjoint());
    }
    return out;
}

// per-qubit map rho -> p rho + (1-p)/2 (rho + Z rho Z)
inline DensityMatrix dephase_local(const DensityMatrix &rho, int n, double p,
                                   std::vector<int> qubits = {}) {
    detail::check_probability(p);
    if (qubits.empty()) qubits = detail::all_qubits(n);
    DensityMatrix out = rho;
    for (int q : qubits) {
        const Mat z = op_on(n, q, pauli_z());
        out = p * out + (1.0 - p) / 2.0 * (out + z * out * z.adjoint());
    }
    return out;
}

// diagonal white-noise family: weight f on the target, the rest uniform.
// Equals x |Psi><Psi| + (1-x)/2^n * 1 with x = f - (1-f)/(2^n - 1), so f may
// not drop below 1/2^n (x would turn negative).
inline Eigen::VectorXd white_noise_diagonal(int n, double f) {
    const int d = dim_of(n);
    const double fmin = 1.0 / static_cast<double>(d);
    if (!(f >= fmin && f <= 1.0))
        throw SpecError("white-noise fidelity must lie in [2^-n, 1]");
    Eigen::VectorXd lam =
        Eigen::VectorXd::Constant(d, (1.0 - f) / static_cast<double>(d - 1));
    lam(0) = f;
    return lam;
}

inline LmeCoeffMatrix white_noise(const LmesSpec &spec, double f) {
    return white_noise_diagonal(spec.n, f).cast<cplx>().asDiagonal();
}

// coefficient matrix of the noisy target state under the given channel
inline LmeCoeffMatrix channel_coeffs(const LmesSpec &spec, const ChannelSpec &ch) {
    if (ch.kind == ChannelSpec::Kind::global_white) return white_noise(spec, ch.parameter);
    const StateVector psi = build_state(spec);
    DensityMatrix rho = psi * psi.adjoint();
    if (ch.kind == ChannelSpec::Kind::local_depolarizing)
        rho = depolarize_local(rho, spec.n, ch.parameter, ch.targets);
    else
        rho = dephase_local(rho, spec.n, ch.parameter, ch.targets);
    return to_lme_coeffs(rho, spec);
}

}  // namespace lmepurify
