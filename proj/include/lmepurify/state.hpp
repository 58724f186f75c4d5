#pragma once
// Dense linear-algebra helpers on n-qubit states: Eigen aliases, single-qubit
// operator embedding, Hermitian eigen utilities, and a portable seeded RNG.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "spec.hpp"

namespace lmepurify {

using cplx = std::complex<double>;
using StateVector = Eigen::VectorXcd;
using DensityMatrix = Eigen::MatrixXcd;
using DenseOperator = Eigen::MatrixXcd;
using LmeCoeffMatrix = Eigen::MatrixXcd;  // entry (k,l) multiplies |Psi_k><Psi_l|
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}
inline Eigen::Matrix2cd pauli_y() {
    Eigen::Matrix2cd m;
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
inline Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

// embed a single-qubit operator on qubit q (bit q-1) of an n-qubit register
inline Mat op_on(int n, int q, const Eigen::Matrix2cd &u) {
    const int d = dim_of(n);
    const int bit = 1 << (q - 1);
    Mat out = Mat::Zero(d, d);
    for (int col = 0; col < d; ++col) {
        const int cb = (col & bit) ? 1 : 0;
        for (int rb = 0; rb < 2; ++rb) {
            const cplx v = u(rb, cb);
            if (v == cplx(0, 0)) continue;
            const int row = (col & ~bit) | (rb ? bit : 0);
            out(row, col) = v;
        }
    }
    return out;
}

inline Eigen::VectorXd eigvalsh(const Mat &a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eigenvalue(const Mat &a) { return eigvalsh(a).minCoeff(); }

// sum of |eigenvalue| of a Hermitian matrix
inline double trace_norm_hermitian(const Mat &a) {
    return eigvalsh(a).cwiseAbs().sum();
}

inline double max_abs(const Mat &a) { return a.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Mat &a, double tol = 1e-12) {
    return max_abs(a - a.adjoint()) <= tol;
}

// Kronecker product with the FIRST factor on the high bits (so bit layout of
// kron2(B, A) is: A owns the low bits, B the high bits)
inline Mat kron2(const Mat &high, const Mat &low) {
    Mat out(high.rows() * low.rows(), high.cols() * low.cols());
    for (Eigen::Index r = 0; r < high.rows(); ++r)
        for (Eigen::Index c = 0; c < high.cols(); ++c)
            out.block(r * low.rows(), c * low.cols(), low.rows(), low.cols()) = high(r, c) * low;
    return out;
}

inline Vec kron2v(const Vec &high, const Vec &low) {
    Vec out(high.size() * low.size());
    for (Eigen::Index i = 0; i < high.size(); ++i)
        out.segment(i * low.size(), low.size()) = high(i) * low;
    return out;
}

// Deterministic uniform/normal source. Draws are derived from raw mt19937_64
// output (not std::uniform_real_distribution) so that a given seed produces
// identical streams on every platform.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng() >> 11) * 0x1.0p-53;
    }
    double uniform_pos() {  // (0, 1]
        return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
    }
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform_pos(), v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925287 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }
    cplx cnormal() { return {normal(), normal()}; }

    // Haar-ish random pure state (Gaussian amplitudes, normalized)
    Vec random_state(int dim) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = cnormal();
        v /= v.norm();
        return v;
    }

    // random full-rank physical density matrix (G G^dagger, trace 1)
    Mat random_density(int dim) {
        Mat g(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) g(r, c) = cnormal();
        Mat rho = g * g.adjoint();
        rho /= rho.trace().real();
        return rho;
    }

private:
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lmepurify
