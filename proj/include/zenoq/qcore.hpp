// Copyright 2026 The zenoq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex linear algebra and exact state evolution for small registers.
//
// Basis convention: bit j of a basis index is the value of qubit j (qubit 0 is
// the least significant bit). Every module in the library shares it.

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zenoq/error.hpp"

namespace zenoq {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr int kHardQubitCap = 14;
inline constexpr double kStateTolerance = 1e-9;

/// Largest register the library accepts. ZENO_MAX_QUBITS may lower the cap, never raise it.
inline int max_qubits() {
    int cap = kHardQubitCap;
    if (const char *env = std::getenv("ZENO_MAX_QUBITS")) {
        int value = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), value);
        if (ec == std::errc() && value >= 1 && value < cap) {
            cap = value;
        }
    }
    return cap;
}

inline void check_qubit_count(int n) {
    if (n < 1 || n > max_qubits()) {
        throw ValidationError(
            "register of " + std::to_string(n) + " qubits is outside [1, " + std::to_string(max_qubits()) + "]");
    }
}

inline std::size_t dim_of(int n) {
    return std::size_t{1} << n;
}

inline int qubits_of_dim(std::size_t dim) {
    if (dim < 2 || !std::has_single_bit(dim)) {
        throw ValidationError("dimension " + std::to_string(dim) + " is not a power of two >= 2");
    }
    return std::countr_zero(dim);
}

inline bool is_hermitian(const ComplexMatrix &m, double tol) {
    return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const ComplexMatrix &m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    ComplexMatrix prod = m.adjoint() * m;
    return (prod - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

struct HermitianEigensystem {
    Eigen::VectorXd values;  // ascending
    ComplexMatrix vectors;   // columns are eigenvectors
};

inline HermitianEigensystem eigensystem_of(const ComplexMatrix &m) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw ValidationError("Hermitian eigendecomposition failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// e^{-i angle H} from a precomputed eigensystem of H.
inline ComplexMatrix propagator_from(const HermitianEigensystem &eig, double angle) {
    ComplexVector phases(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        phases[k] = std::polar(1.0, -angle * eig.values[k]);
    }
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

// Materialized Hermitian matrix whose eigensystem is computed on first use and then shared.
class DenseHermitianData {
public:
    explicit DenseHermitianData(ComplexMatrix matrix) : matrix_(std::move(matrix)) {
    }
    const ComplexMatrix &matrix() const {
        return matrix_;
    }
    const HermitianEigensystem &eigen() const {
        std::call_once(once_, [this] { eigen_ = eigensystem_of(matrix_); });
        return eigen_;
    }

private:
    ComplexMatrix matrix_;
    mutable std::once_flag once_;
    mutable HermitianEigensystem eigen_;
};

/// A Hermitian generator of evolutions e^{-i angle G}. Immutable; cheap to copy.
///
/// Structured kinds (diagonal, transverse field, rank-one uniform projector,
/// Pauli string) are never materialized by the evolution kernels.
class Generator {
public:
    enum class Kind { diagonal, transverse_field, rank_one_uniform, pauli_string, dense_hermitian };

    /// C = sum_x values[x] |x><x|.
    static Generator diagonal(std::vector<double> values) {
        int n = qubits_of_dim(values.size());
        check_qubit_count(n);
        for (double v : values) {
            require(std::isfinite(v), "diagonal generator has a non-finite entry");
        }
        Generator g(Kind::diagonal, n);
        g.diagonal_ = std::make_shared<const std::vector<double>>(std::move(values));
        return g;
    }

    /// B = sum_k X_k.
    static Generator transverse_field(int n) {
        check_qubit_count(n);
        return Generator(Kind::transverse_field, n);
    }

    /// B = |+><+| on n qubits.
    static Generator rank_one_uniform(int n) {
        check_qubit_count(n);
        return Generator(Kind::rank_one_uniform, n);
    }

    /// Tensor product of Paulis; paulis[j] in {I, X, Y, Z} acts on qubit j.
    static Generator pauli_string(std::string_view paulis) {
        int n = static_cast<int>(paulis.size());
        check_qubit_count(n);
        Generator g(Kind::pauli_string, n);
        for (int j = 0; j < n; ++j) {
            std::uint64_t bit = std::uint64_t{1} << j;
            switch (paulis[j]) {
                case 'I':
                    break;
                case 'X':
                    g.x_mask_ |= bit;
                    break;
                case 'Y':
                    g.x_mask_ |= bit;
                    g.z_mask_ |= bit;
                    ++g.y_count_;
                    break;
                case 'Z':
                    g.z_mask_ |= bit;
                    break;
                default:
                    throw ValidationError(std::string("unknown Pauli letter '") + paulis[j] + "'");
            }
        }
        g.label_ = std::string(paulis);
        return g;
    }

    static Generator dense_hermitian(ComplexMatrix matrix, double tol = 1e-10) {
        require(matrix.rows() == matrix.cols(), "dense generator must be square");
        int n = qubits_of_dim(static_cast<std::size_t>(matrix.rows()));
        check_qubit_count(n);
        require(matrix.allFinite(), "dense generator has non-finite entries");
        require(is_hermitian(matrix, tol), "dense generator is not Hermitian");
        // Exact symmetrization keeps downstream eigensolvers on the Hermitian path.
        ComplexMatrix sym = 0.5 * (matrix + matrix.adjoint());
        Generator g(Kind::dense_hermitian, n);
        g.dense_ = std::make_shared<const DenseHermitianData>(std::move(sym));
        return g;
    }

    Kind kind() const {
        return kind_;
    }
    int qubits() const {
        return n_;
    }
    std::size_t dim() const {
        return dim_of(n_);
    }

    const std::vector<double> &diagonal_values() const {
        require(kind_ == Kind::diagonal, "generator is not diagonal");
        return *diagonal_;
    }
    const DenseHermitianData &dense() const {
        require(kind_ == Kind::dense_hermitian, "generator is not dense");
        return *dense_;
    }
    std::uint64_t x_mask() const {
        return x_mask_;
    }
    std::uint64_t z_mask() const {
        return z_mask_;
    }
    const std::string &pauli_label() const {
        return label_;
    }

    /// Phase w(k) in P|k> = w(k)|k xor x_mask> for Pauli strings.
    cplx pauli_phase(std::uint64_t k) const {
        static constexpr cplx kIPowers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        cplx phase = kIPowers[y_count_ & 3];
        return (std::popcount(k & z_mask_) & 1) ? -phase : phase;
    }

    /// True when G^2 = I, which the two-point shift rule needs.
    bool is_involutory(double tol = 1e-10) const {
        switch (kind_) {
            case Kind::pauli_string:
                return true;
            case Kind::transverse_field:
                return n_ == 1;
            case Kind::rank_one_uniform:
                return false;
            case Kind::diagonal:
                for (double v : *diagonal_) {
                    if (std::abs(std::abs(v) - 1.0) > tol) {
                        return false;
                    }
                }
                return true;
            case Kind::dense_hermitian: {
                const auto &m = dense_->matrix();
                ComplexMatrix sq = m * m;
                return (sq - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
            }
        }
        return false;
    }

    ComplexMatrix materialize() const {
        const std::size_t d = dim();
        const auto di = static_cast<Eigen::Index>(d);
        ComplexMatrix m = ComplexMatrix::Zero(di, di);
        switch (kind_) {
            case Kind::diagonal:
                for (std::size_t i = 0; i < d; ++i) {
                    m(i, i) = (*diagonal_)[i];
                }
                break;
            case Kind::transverse_field:
                for (std::size_t i = 0; i < d; ++i) {
                    for (int k = 0; k < n_; ++k) {
                        m(i ^ (std::size_t{1} << k), i) += 1.0;
                    }
                }
                break;
            case Kind::rank_one_uniform:
                m.setConstant(1.0 / static_cast<double>(d));
                break;
            case Kind::pauli_string:
                for (std::size_t k = 0; k < d; ++k) {
                    m(k ^ x_mask_, k) = pauli_phase(k);
                }
                break;
            case Kind::dense_hermitian:
                m = dense_->matrix();
                break;
        }
        return m;
    }

private:
    Generator(Kind kind, int n) : kind_(kind), n_(n) {
    }

    Kind kind_;
    int n_;
    std::shared_ptr<const std::vector<double>> diagonal_;
    std::shared_ptr<const DenseHermitianData> dense_;
    std::uint64_t x_mask_ = 0;
    std::uint64_t z_mask_ = 0;
    int y_count_ = 0;
    std::string label_;
};

/// One parameterized evolution e^{-i angle G}.
struct Evolution {
    Generator generator;
    double angle = 0.0;
};

class StateVector {
public:
    explicit StateVector(ComplexVector amplitudes) : amps_(std::move(amplitudes)) {
        n_ = qubits_of_dim(static_cast<std::size_t>(amps_.size()));
        check_qubit_count(n_);
        require(amps_.allFinite(), "state vector has non-finite amplitudes");
        require(std::abs(amps_.norm() - 1.0) <= kStateTolerance, "state vector is not normalized");
    }

    static StateVector basis(int n, std::uint64_t index) {
        check_qubit_count(n);
        require(index < dim_of(n), "basis index out of range");
        ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim_of(n)));
        v[static_cast<Eigen::Index>(index)] = 1.0;
        return StateVector(std::move(v));
    }

    /// |+>^n.
    static StateVector uniform(int n) {
        check_qubit_count(n);
        auto d = static_cast<Eigen::Index>(dim_of(n));
        return StateVector(ComplexVector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d))));
    }

    int qubits() const {
        return n_;
    }
    std::size_t dim() const {
        return static_cast<std::size_t>(amps_.size());
    }
    const ComplexVector &amplitudes() const {
        return amps_;
    }
    /// Raw access for kernels; callers keep the norm invariant.
    ComplexVector &mutable_amplitudes() {
        return amps_;
    }
    cplx operator[](std::size_t i) const {
        return amps_[static_cast<Eigen::Index>(i)];
    }

    std::vector<double> probabilities() const {
        std::vector<double> p(dim());
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = std::norm(amps_[static_cast<Eigen::Index>(i)]);
        }
        return p;
    }

private:
    ComplexVector amps_;
    int n_ = 0;
};

class DensityMatrix {
public:
    /// Number of super-operator applications between drift corrections.
    static constexpr int kCleanupInterval = 100;

    explicit DensityMatrix(ComplexMatrix entries) : rho_(std::move(entries)) {
        require(rho_.rows() == rho_.cols(), "density matrix must be square");
        n_ = qubits_of_dim(static_cast<std::size_t>(rho_.rows()));
        check_qubit_count(n_);
        require(rho_.allFinite(), "density matrix has non-finite entries");
        require(is_hermitian(rho_, kStateTolerance), "density matrix is not Hermitian");
        require(std::abs(trace() - 1.0) <= kStateTolerance, "density matrix trace is not 1");
    }

    static DensityMatrix from_pure(const StateVector &psi) {
        const auto &a = psi.amplitudes();
        return DensityMatrix(a * a.adjoint());
    }

    static DensityMatrix maximally_mixed(int n) {
        check_qubit_count(n);
        auto d = static_cast<Eigen::Index>(dim_of(n));
        ComplexMatrix m = ComplexMatrix::Identity(d, d) / static_cast<double>(d);
        return DensityMatrix(std::move(m));
    }

    int qubits() const {
        return n_;
    }
    std::size_t dim() const {
        return static_cast<std::size_t>(rho_.rows());
    }
    const ComplexMatrix &entries() const {
        return rho_;
    }
    ComplexMatrix &mutable_entries() {
        return rho_;
    }
    double trace() const {
        return rho_.trace().real();
    }

    std::vector<double> probabilities() const {
        std::vector<double> p(dim());
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto ii = static_cast<Eigen::Index>(i);
            p[i] = rho_(ii, ii).real();
        }
        return p;
    }

    double purity() const {
        return (rho_ * rho_).trace().real();
    }

    /// Re-symmetrizes and renormalizes every kCleanupInterval calls.
    void note_superoperator_applied() {
        if (++applied_since_cleanup_ >= kCleanupInterval) {
            clean_up();
        }
    }

    void clean_up() {
        ComplexMatrix sym = 0.5 * (rho_ + rho_.adjoint());
        rho_ = sym / sym.trace().real();
        applied_since_cleanup_ = 0;
    }

    /// Hermiticity, unit trace and positive semi-definiteness within tol.
    bool is_valid(double tol = kStateTolerance) const {
        if (!is_hermitian(rho_, tol) || std::abs(trace() - 1.0) > tol) {
            return false;
        }
        ComplexMatrix sym = 0.5 * (rho_ + rho_.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff() >= -tol;
    }

private:
    ComplexMatrix rho_;
    int n_ = 0;
    int applied_since_cleanup_ = 0;
};

/// 1/2 ||a - b||_1.
inline double trace_distance(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix diff = a - b;
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(diff, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    return trace_distance(a.entries(), b.entries());
}

namespace detail {

inline void check_angle(double angle) {
    if (!std::isfinite(angle)) {
        throw ValidationError("evolution angle is not finite");
    }
}

inline void check_dims(std::size_t state_dim, const Generator &g) {
    if (state_dim != g.dim()) {
        throw ValidationError("dimension mismatch: state has dim " + std::to_string(state_dim) +
                              ", generator has dim " + std::to_string(g.dim()));
    }
}

// In-place e^{-i angle X} on qubit k of every column of m (a vector is a one-column matrix).
template <class Mat>
void rotate_x_rows(Mat &m, int k, double angle) {
    const cplx c(std::cos(angle), 0.0);
    const cplx s(0.0, -std::sin(angle));
    const auto bit = Eigen::Index{1} << k;
    const Eigen::Index rows = m.rows();
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
        cplx *v = m.data() + col * rows;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (i & bit) {
                continue;
            }
            cplx a = v[i];
            cplx b = v[i | bit];
            v[i] = c * a + s * b;
            v[i | bit] = s * a + c * b;
        }
    }
}

// In-place m <- m e^{+i angle X_k} (right multiplication by the adjoint rotation).
inline void rotate_x_cols_adjoint(ComplexMatrix &m, int k, double angle) {
    const cplx c(std::cos(angle), 0.0);
    const cplx s(0.0, std::sin(angle));
    const auto bit = Eigen::Index{1} << k;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j & bit) {
            continue;
        }
        ComplexVector a = m.col(j);
        ComplexVector b = m.col(j | bit);
        m.col(j) = c * a + s * b;
        m.col(j | bit) = s * a + c * b;
    }
}

}  // namespace detail

/// psi <- e^{-i angle G} psi.
inline void apply_evolution(StateVector &psi, const Generator &g, double angle) {
    detail::check_angle(angle);
    detail::check_dims(psi.dim(), g);
    if (angle == 0.0) {
        return;
    }
    ComplexVector &v = psi.mutable_amplitudes();
    const auto d = static_cast<Eigen::Index>(psi.dim());
    switch (g.kind()) {
        case Generator::Kind::diagonal: {
            const auto &vals = g.diagonal_values();
            for (Eigen::Index i = 0; i < d; ++i) {
                v[i] *= std::polar(1.0, -angle * vals[static_cast<std::size_t>(i)]);
            }
            break;
        }
        case Generator::Kind::transverse_field:
            for (int k = 0; k < g.qubits(); ++k) {
                detail::rotate_x_rows(v, k, angle);
            }
            break;
        case Generator::Kind::rank_one_uniform: {
            const cplx c = std::polar(1.0, -angle) - 1.0;
            const cplx shift = c * v.sum() / static_cast<double>(d);
            v.array() += shift;
            break;
        }
        case Generator::Kind::pauli_string: {
            const double c = std::cos(angle);
            const cplx s(0.0, -std::sin(angle));
            ComplexVector out(d);
            const auto x = static_cast<Eigen::Index>(g.x_mask());
            for (Eigen::Index i = 0; i < d; ++i) {
                const auto src = i ^ x;
                out[i] = c * v[i] + s * g.pauli_phase(static_cast<std::uint64_t>(src)) * v[src];
            }
            v = std::move(out);
            break;
        }
        case Generator::Kind::dense_hermitian: {
            const auto &eig = g.dense().eigen();
            ComplexVector t = eig.vectors.adjoint() * v;
            for (Eigen::Index k = 0; k < d; ++k) {
                t[k] *= std::polar(1.0, -angle * eig.values[k]);
            }
            v = eig.vectors * t;
            break;
        }
    }
}

/// rho <- e^{-i angle G} rho e^{+i angle G}.
inline void apply_evolution(DensityMatrix &state, const Generator &g, double angle) {
    detail::check_angle(angle);
    detail::check_dims(state.dim(), g);
    if (angle == 0.0) {
        return;
    }
    ComplexMatrix &rho = state.mutable_entries();
    const auto d = rho.rows();
    switch (g.kind()) {
        case Generator::Kind::diagonal: {
            const auto &vals = g.diagonal_values();
            ComplexVector ph(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                ph[i] = std::polar(1.0, -angle * vals[static_cast<std::size_t>(i)]);
            }
            for (Eigen::Index j = 0; j < d; ++j) {
                const cplx cj = std::conj(ph[j]);
                for (Eigen::Index i = 0; i < d; ++i) {
                    rho(i, j) *= ph[i] * cj;
                }
            }
            break;
        }
        case Generator::Kind::transverse_field:
            for (int k = 0; k < g.qubits(); ++k) {
                detail::rotate_x_rows(rho, k, angle);
                detail::rotate_x_cols_adjoint(rho, k, angle);
            }
            break;
        case Generator::Kind::rank_one_uniform: {
            // (I + cP) rho (I + c* P) with P = |u><u|, u = |+>; rho is Hermitian.
            const cplx c = std::polar(1.0, -angle) - 1.0;
            const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
            ComplexVector w = rho.rowwise().sum() * inv_sqrt_d;  // rho u
            const cplx s = w.sum() * inv_sqrt_d;                 // u^dag rho u
            const cplx corner = std::norm(c) * s / static_cast<double>(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                const cplx left = c * inv_sqrt_d * std::conj(w[j]);
                for (Eigen::Index i = 0; i < d; ++i) {
                    rho(i, j) += left + std::conj(c) * w[i] * inv_sqrt_d + corner;
                }
            }
            break;
        }
        case Generator::Kind::pauli_string: {
            // (c - isP) rho (c + isP), P|k> = w(k)|k^x>.
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            const auto x = static_cast<Eigen::Index>(g.x_mask());
            ComplexVector w(d);
            for (Eigen::Index k = 0; k < d; ++k) {
                w[k] = g.pauli_phase(static_cast<std::uint64_t>(k));
            }
            ComplexMatrix out(d, d);
            const cplx ics(0.0, c * s);
            for (Eigen::Index j = 0; j < d; ++j) {
                const Eigen::Index jx = j ^ x;
                for (Eigen::Index i = 0; i < d; ++i) {
                    const Eigen::Index ix = i ^ x;
                    const cplx p_rho = w[ix] * rho(ix, j);
                    const cplx rho_p = rho(i, jx) * w[j];
                    const cplx p_rho_p = w[ix] * rho(ix, jx) * w[j];
                    out(i, j) = c * c * rho(i, j) - ics * p_rho + ics * rho_p + s * s * p_rho_p;
                }
            }
            rho = std::move(out);
            break;
        }
        case Generator::Kind::dense_hermitian: {
            ComplexMatrix u = propagator_from(g.dense().eigen(), angle);
            ComplexMatrix tmp = u * rho;
            rho.noalias() = tmp * u.adjoint();
            break;
        }
    }
    state.note_superoperator_applied();
}

inline void apply_evolution(StateVector &psi, const Evolution &e) {
    apply_evolution(psi, e.generator, e.angle);
}
inline void apply_evolution(DensityMatrix &rho, const Evolution &e) {
    apply_evolution(rho, e.generator, e.angle);
}

namespace detail {

inline double checked_real(cplx value) {
    if (std::abs(value.imag()) > 1e-9) {
        throw ValidationError("expectation value has imaginary residue " + std::to_string(value.imag()));
    }
    return value.real();
}

}  // namespace detail

/// <psi|G|psi>.
inline double expectation(const StateVector &psi, const Generator &g) {
    detail::check_dims(psi.dim(), g);
    const ComplexVector &v = psi.amplitudes();
    const auto d = v.size();
    cplx acc = 0.0;
    switch (g.kind()) {
        case Generator::Kind::diagonal: {
            const auto &vals = g.diagonal_values();
            for (Eigen::Index i = 0; i < d; ++i) {
                acc += std::norm(v[i]) * vals[static_cast<std::size_t>(i)];
            }
            break;
        }
        case Generator::Kind::transverse_field:
            for (int k = 0; k < g.qubits(); ++k) {
                const auto bit = Eigen::Index{1} << k;
                for (Eigen::Index i = 0; i < d; ++i) {
                    acc += std::conj(v[i]) * v[i ^ bit];
                }
            }
            break;
        case Generator::Kind::rank_one_uniform:
            acc = std::norm(v.sum()) / static_cast<double>(d);
            break;
        case Generator::Kind::pauli_string: {
            const auto x = static_cast<Eigen::Index>(g.x_mask());
            for (Eigen::Index i = 0; i < d; ++i) {
                const auto src = i ^ x;
                acc += std::conj(v[i]) * g.pauli_phase(static_cast<std::uint64_t>(src)) * v[src];
            }
            break;
        }
        case Generator::Kind::dense_hermitian:
            acc = v.dot(g.dense().matrix() * v);
            break;
    }
    return detail::checked_real(acc);
}

/// Tr[G rho].
inline double expectation(const DensityMatrix &state, const Generator &g) {
    detail::check_dims(state.dim(), g);
    const ComplexMatrix &rho = state.entries();
    const auto d = rho.rows();
    cplx acc = 0.0;
    switch (g.kind()) {
        case Generator::Kind::diagonal: {
            const auto &vals = g.diagonal_values();
            for (Eigen::Index i = 0; i < d; ++i) {
                acc += rho(i, i) * vals[static_cast<std::size_t>(i)];
            }
            break;
        }
        case Generator::Kind::transverse_field:
            for (int k = 0; k < g.qubits(); ++k) {
                const auto bit = Eigen::Index{1} << k;
                for (Eigen::Index i = 0; i < d; ++i) {
                    acc += rho(i ^ bit, i);
                }
            }
            break;
        case Generator::Kind::rank_one_uniform:
            acc = rho.sum() / static_cast<double>(d);
            break;
        case Generator::Kind::pauli_string: {
            const auto x = static_cast<Eigen::Index>(g.x_mask());
            for (Eigen::Index i = 0; i < d; ++i) {
                acc += g.pauli_phase(static_cast<std::uint64_t>(i)) * rho(i, i ^ x);
            }
            break;
        }
        case Generator::Kind::dense_hermitian:
            acc = g.dense().matrix().cwiseProduct(rho.transpose()).sum();
            break;
    }
    return detail::checked_real(acc);
}

}  // namespace zenoq
