#pragma once
// Construction of LME states, the Z-shifted orthonormal LME basis, the
// stabilizer operators S_i = U_ph X_i U_ph^dagger, and conversion between the
// computational-basis density matrix and its LME-basis coefficient matrix.

#include "spec.hpp"
#include "state.hpp"

namespace lmepurify {

// sign vector s(x) = (-1)^{g(x)}, where g counts gates whose qubits are all 1
inline Eigen::VectorXd phase_signs(const LmesSpec &spec) {
    const int d = dim_of(spec.n);
    Eigen::VectorXd s = Eigen::VectorXd::Ones(d);
    for (const auto &g : spec.gates) {
        const MultiIndex m = qubit_mask(g);
        for (int x = 0; x < d; ++x)
            if ((static_cast<MultiIndex>(x) & m) == m) s(x) = -s(x);
    }
    return s;
}

// |Psi> = (product of pi-phase gates) |+>^n : amplitudes 2^{-n/2} (-1)^{g(x)}
inline StateVector build_state(const LmesSpec &spec) {
    spec.validate();
    const int d = dim_of(spec.n);
    const Eigen::VectorXd s = phase_signs(spec);
    StateVector psi(d);
    const double a = 1.0 / std::sqrt(static_cast<double>(d));
    for (int x = 0; x < d; ++x) psi(x) = a * s(x);
    return psi;
}

// |Psi_k> = Z^{k_1} x ... x Z^{k_n} |Psi>
inline StateVector lme_basis_vector(const LmesSpec &spec, MultiIndex k) {
    StateVector psi = build_state(spec);
    const int d = dim_of(spec.n);
    for (int x = 0; x < d; ++x)
        if (popcount32(static_cast<MultiIndex>(x) & k) & 1) psi(x) = -psi(x);
    return psi;
}

// real orthogonal matrix whose column k is |Psi_k>
inline Eigen::MatrixXd lme_basis_matrix(const LmesSpec &spec) {
    const int d = dim_of(spec.n);
    Eigen::MatrixXd b(d, d);
    for (int k = 0; k < d; ++k)
        b.col(k) = lme_basis_vector(spec, static_cast<MultiIndex>(k)).real();
    return b;
}

// S_i |x> = (-1)^{g(x) + g(x^e_i)} |x^e_i>; real, involutive, Hermitian
inline DenseOperator stabilizer_operator(const LmesSpec &spec, int i) {
    spec.validate();
    if (i < 1 || i > spec.n) throw SpecError("stabilizer qubit out of range");
    const int d = dim_of(spec.n);
    const Eigen::VectorXd s = phase_signs(spec);
    const int e = 1 << (i - 1);
    DenseOperator out = DenseOperator::Zero(d, d);
    for (int x = 0; x < d; ++x) out(x ^ e, x) = s(x) * s(x ^ e);
    return out;
}

// lambda_k^l = <Psi_k| rho |Psi_l>
inline LmeCoeffMatrix to_lme_coeffs(const DensityMatrix &rho, const LmesSpec &spec) {
    const int d = dim_of(spec.n);
    if (rho.rows() != d || rho.cols() != d)
        throw DimensionError("density matrix dimension does not match spec");
    const Eigen::MatrixXd b = lme_basis_matrix(spec);
    return b.transpose() * rho * b;
}

inline DensityMatrix from_lme_coeffs(const LmeCoeffMatrix &lam, const LmesSpec &spec) {
    const int d = dim_of(spec.n);
    if (lam.rows() != d || lam.cols() != d)
        throw DimensionError("coefficient matrix dimension does not match spec");
    const Eigen::MatrixXd b = lme_basis_matrix(spec);
    return b * lam * b.transpose();
}

// overlap with the target state: the (0,0) coefficient
inline double fidelity(const LmeCoeffMatrix &lam) { return lam(0, 0).real(); }

}  // namespace lmepurify
