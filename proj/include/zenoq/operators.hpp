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

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "zenoq/qcore.hpp"

namespace zenoq {

/// Value of variable x_{j+1} (qubit j) in basis index x.
inline bool bit_of(std::uint64_t x, int j) {
    return (x >> j) & 1U;
}

/// Orthogonal projector onto a span of computational basis states, stored as an index set.
class Projector {
public:
    Projector(int n, std::vector<std::uint64_t> indices) : n_(n), indices_(std::move(indices)) {
        check_qubit_count(n);
        const std::uint64_t d = dim_of(n);
        for (std::size_t k = 0; k < indices_.size(); ++k) {
            require(indices_[k] < d, "projector index out of range");
            require(k == 0 || indices_[k - 1] < indices_[k], "projector indices must be strictly increasing");
        }
        member_.assign(d, 0);
        for (auto i : indices_) {
            member_[i] = 1;
        }
    }

    int qubits() const {
        return n_;
    }
    std::size_t dim() const {
        return dim_of(n_);
    }
    std::size_t size() const {
        return indices_.size();
    }
    bool empty() const {
        return indices_.empty();
    }
    const std::vector<std::uint64_t> &indices() const {
        return indices_;
    }
    bool contains(std::uint64_t x) const {
        return x < member_.size() && member_[x] != 0;
    }

    ComplexMatrix materialize() const {
        auto d = static_cast<Eigen::Index>(dim());
        ComplexMatrix m = ComplexMatrix::Zero(d, d);
        for (auto i : indices_) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
        }
        return m;
    }

    friend bool operator==(const Projector &a, const Projector &b) {
        return a.n_ == b.n_ && a.indices_ == b.indices_;
    }

private:
    int n_;
    std::vector<std::uint64_t> indices_;
    std::vector<std::uint8_t> member_;
};

/// Basis states x with pred(x). An empty result is a valid value; consumers that need a
/// non-empty set check for it.
inline Projector projector_from_predicate(int n, const std::function<bool(std::uint64_t)> &pred) {
    check_qubit_count(n);
    std::vector<std::uint64_t> idx;
    for (std::uint64_t x = 0; x < dim_of(n); ++x) {
        if (pred(x)) {
            idx.push_back(x);
        }
    }
    return Projector(n, std::move(idx));
}

inline Projector complement(const Projector &p) {
    return projector_from_predicate(p.qubits(), [&](std::uint64_t x) { return !p.contains(x); });
}

/// Complete family of orthogonal basis-aligned projectors.
///
/// A single projector {I} is accepted as the trivial measurement.
class Measurement {
public:
    explicit Measurement(std::vector<Projector> projectors) : projectors_(std::move(projectors)) {
        require(!projectors_.empty(), "measurement needs at least one projector");
        n_ = projectors_.front().qubits();
        const std::size_t d = dim_of(n_);
        label_.assign(d, -1);
        for (std::size_t k = 0; k < projectors_.size(); ++k) {
            require(projectors_[k].qubits() == n_, "measurement projectors act on different registers");
            for (auto i : projectors_[k].indices()) {
                require(label_[i] < 0, "measurement projectors overlap");
                label_[i] = static_cast<int>(k);
            }
        }
        for (int l : label_) {
            require(l >= 0, "measurement projectors do not sum to the identity");
        }
    }

    /// {P, I - P}.
    static Measurement binary(const Projector &p) {
        return Measurement({p, complement(p)});
    }

    static Measurement trivial(int n) {
        return Measurement({projector_from_predicate(n, [](std::uint64_t) { return true; })});
    }

    int qubits() const {
        return n_;
    }
    std::size_t dim() const {
        return dim_of(n_);
    }
    const std::vector<Projector> &projectors() const {
        return projectors_;
    }
    /// Outcome label of basis state x.
    int label(std::uint64_t x) const {
        return label_[x];
    }
    const std::vector<int> &labels() const {
        return label_;
    }

private:
    int n_ = 0;
    std::vector<Projector> projectors_;
    std::vector<int> label_;
};

/// sum_j P_j B P_j as a dense Hermitian generator.
inline Generator zeno_hamiltonian(const Generator &b, const Measurement &m) {
    require(b.dim() == m.dim(), "dimension mismatch between generator and measurement");
    ComplexMatrix h = b.materialize();
    const auto d = h.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            if (m.label(static_cast<std::uint64_t>(i)) != m.label(static_cast<std::uint64_t>(j))) {
                h(i, j) = 0.0;
            }
        }
    }
    return Generator::dense_hermitian(std::move(h));
}

struct SpectralSpan {
    double xi_min = 0.0;
    double xi_max = 0.0;
    double width() const {
        return xi_max - xi_min;
    }
    double norm() const {
        return std::max(std::abs(xi_min), std::abs(xi_max));
    }
};

inline SpectralSpan spectral_span(const Generator &g) {
    switch (g.kind()) {
        case Generator::Kind::transverse_field:
            return {-static_cast<double>(g.qubits()), static_cast<double>(g.qubits())};
        case Generator::Kind::rank_one_uniform:
            return {0.0, 1.0};
        case Generator::Kind::pauli_string:
            if (g.x_mask() == 0 && g.z_mask() == 0) {
                return {1.0, 1.0};
            }
            return {-1.0, 1.0};
        case Generator::Kind::diagonal: {
            const auto &v = g.diagonal_values();
            auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            return {*lo, *hi};
        }
        case Generator::Kind::dense_hermitian: {
            const auto &vals = g.dense().eigen().values;
            return {vals.minCoeff(), vals.maxCoeff()};
        }
    }
    return {};
}

}  // namespace zenoq
