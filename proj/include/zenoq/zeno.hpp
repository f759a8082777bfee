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

// Non-selective measurement, measured evolution blocks, measurement-count
// schedules and the infinite-measurement limit.

#pragma once

#include <climits>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "zenoq/operators.hpp"
#include "zenoq/qcore.hpp"

namespace zenoq {

/// A register state that stays pure until the first measurement.
using QuantumState = std::variant<StateVector, DensityMatrix>;

inline DensityMatrix &promote(QuantumState &state) {
    if (auto *psi = std::get_if<StateVector>(&state)) {
        state = DensityMatrix::from_pure(*psi);
    }
    return std::get<DensityMatrix>(state);
}

inline DensityMatrix to_density(const QuantumState &state) {
    if (const auto *psi = std::get_if<StateVector>(&state)) {
        return DensityMatrix::from_pure(*psi);
    }
    return std::get<DensityMatrix>(state);
}

inline std::size_t state_dim(const QuantumState &state) {
    return std::visit([](const auto &s) { return s.dim(); }, state);
}

inline void apply_evolution(QuantumState &state, const Generator &g, double angle) {
    std::visit([&](auto &s) { apply_evolution(s, g, angle); }, state);
}

inline double expectation(const QuantumState &state, const Generator &g) {
    return std::visit([&](const auto &s) { return expectation(s, g); }, state);
}

inline std::vector<double> probabilities(const QuantumState &state) {
    return std::visit([](const auto &s) { return s.probabilities(); }, state);
}

/// rho <- sum_j P_j rho P_j, done by zeroing the off-diagonal blocks.
inline void apply_measurement(DensityMatrix &state, const Measurement &m) {
    require(state.dim() == m.dim(), "dimension mismatch between state and measurement");
    if (m.projectors().size() == 1) {
        return;
    }
    ComplexMatrix &rho = state.mutable_entries();
    const auto &labels = m.labels();
    const auto d = rho.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
        const int lj = labels[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < d; ++i) {
            if (labels[static_cast<std::size_t>(i)] != lj) {
                rho(i, j) = 0.0;
            }
        }
    }
    state.note_superoperator_applied();
}

inline void apply_measurement(QuantumState &state, const Measurement &m) {
    apply_measurement(promote(state), m);
}

/// [P prod_j e^{-i (angle_j / N) G_j}]^N. N = 0 applies the unscaled product with no measurement.
inline void zeno_block(QuantumState &state, std::span<const Evolution> evolutions, const Measurement &m, int n_meas) {
    require(n_meas >= 0, "measurement count must be non-negative");
    require(state_dim(state) == m.dim(), "dimension mismatch between state and measurement");
    if (n_meas == 0) {
        for (const auto &e : evolutions) {
            apply_evolution(state, e.generator, e.angle);
        }
        return;
    }
    DensityMatrix &rho = promote(state);
    for (int step = 0; step < n_meas; ++step) {
        for (const auto &e : evolutions) {
            apply_evolution(rho, e.generator, e.angle / n_meas);
        }
        apply_measurement(rho, m);
    }
}

inline void zeno_block(DensityMatrix &rho, std::span<const Evolution> evolutions, const Measurement &m, int n_meas) {
    QuantumState s = std::move(rho);
    zeno_block(s, evolutions, m, n_meas);
    rho = std::get<DensityMatrix>(std::move(s));
}

/// Evolution under the projected generator sum_j P_j (sum_k angle_k G_k) P_j after one
/// measurement, exponentiated block by block.
inline void zeno_limit_propagator(DensityMatrix &state, std::span<const Evolution> evolutions, const Measurement &m) {
    require(state.dim() == m.dim(), "dimension mismatch between state and measurement");
    apply_measurement(state, m);
    const auto d = static_cast<Eigen::Index>(state.dim());
    ComplexMatrix h = ComplexMatrix::Zero(d, d);
    for (const auto &e : evolutions) {
        require(e.generator.dim() == state.dim(), "dimension mismatch between state and generator");
        require(std::isfinite(e.angle), "evolution angle is not finite");
        h += e.angle * e.generator.materialize();
    }
    ComplexMatrix &rho = state.mutable_entries();
    for (const auto &p : m.projectors()) {
        const auto &idx = p.indices();
        const auto b = static_cast<Eigen::Index>(idx.size());
        if (b == 0) {
            continue;
        }
        ComplexMatrix hb(b, b);
        ComplexMatrix rb(b, b);
        for (Eigen::Index j = 0; j < b; ++j) {
            for (Eigen::Index i = 0; i < b; ++i) {
                auto ii = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]);
                auto jj = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]);
                hb(i, j) = h(ii, jj);
                rb(i, j) = rho(ii, jj);
            }
        }
        hb = 0.5 * (hb + hb.adjoint()).eval();
        ComplexMatrix u = propagator_from(eigensystem_of(hb), 1.0);
        ComplexMatrix out = u * rb * u.adjoint();
        for (Eigen::Index j = 0; j < b; ++j) {
            for (Eigen::Index i = 0; i < b; ++i) {
                rho(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)])) = out(i, j);
            }
        }
    }
    state.note_superoperator_applied();
}

// ---------------------------------------------------------------------------
// Schedules

enum class ScheduleRule { theorem1, cor1_commuting, cor1_general, cor3, eta, manual };

inline const char *to_string(ScheduleRule rule) {
    switch (rule) {
        case ScheduleRule::theorem1:
            return "theorem1";
        case ScheduleRule::cor1_commuting:
            return "cor1_commuting";
        case ScheduleRule::cor1_general:
            return "cor1_general";
        case ScheduleRule::cor3:
            return "cor3";
        case ScheduleRule::eta:
            return "eta";
        case ScheduleRule::manual:
            return "manual";
    }
    return "unknown";
}

/// Per-block measurement counts and the rule that produced them.
struct ZenoSchedule {
    ScheduleRule rule = ScheduleRule::manual;
    double delta = 0.0;  // target out-of-constraint bound, 0 when unused
    double eta = 0.0;    // only for ScheduleRule::eta
    std::vector<int> counts;

    long long total_measurements() const {
        long long t = 0;
        for (int c : counts) {
            t += c;
        }
        return t;
    }
};

inline constexpr double kMaxDelta = 0.19;

inline void check_delta(double delta) {
    if (!(delta > 0.0 && delta <= kMaxDelta)) {
        throw ValidationError("delta must lie in (0, 0.19], got " + std::to_string(delta));
    }
}

namespace detail {

inline int ceil_at_least_one(double x) {
    require(std::isfinite(x), "schedule evaluated to a non-finite count");
    double c = std::ceil(x);
    require(c <= static_cast<double>(INT_MAX), "schedule count overflows");
    return c < 1.0 ? 1 : static_cast<int>(c);
}

inline double sq(double x) {
    return x * x;
}

}  // namespace detail

/// ln (1 - 2 delta)^{-2} for commuting generators, ln (1 - delta)^{-1.78} otherwise.
inline double tau(double delta, bool commuting) {
    check_delta(delta);
    return commuting ? -2.0 * std::log1p(-2.0 * delta) : -1.78 * std::log1p(-delta);
}

/// N = ceil([theta (xi_max - xi_min)]^2 / ln (1 - 2 delta)^{-2}), at least 1.
inline int schedule_theorem1(double theta, double xi_min, double xi_max, double delta) {
    check_delta(delta);
    require(std::isfinite(theta) && std::isfinite(xi_min) && std::isfinite(xi_max), "non-finite schedule input");
    return detail::ceil_at_least_one(detail::sq(theta * (xi_max - xi_min)) / tau(delta, true));
}

/// N_k = ceil(4 L (sum |theta|)^2 max ||H||^2 / tau(delta)) per block.
inline std::vector<int> schedule_cor1(
    std::span<const double> angle_sums, std::span<const double> max_norms, int measured_blocks, double delta,
    bool commuting) {
    require(angle_sums.size() == max_norms.size(), "schedule_cor1 needs one norm per block");
    require(measured_blocks >= 1, "schedule_cor1 needs at least one measured block");
    const double t = tau(delta, commuting);
    std::vector<int> out;
    out.reserve(angle_sums.size());
    for (std::size_t k = 0; k < angle_sums.size(); ++k) {
        require(angle_sums[k] >= 0.0 && max_norms[k] >= 0.0, "schedule_cor1 inputs must be non-negative");
        double x = 4.0 * measured_blocks * detail::sq(angle_sums[k]) * detail::sq(max_norms[k]) / t;
        out.push_back(detail::ceil_at_least_one(x));
    }
    return out;
}

/// Measurement count for one mixing layer of depth-p QAOA.
inline int schedule_cor3(const Generator &mixer, double beta, int p, int n, double delta) {
    check_delta(delta);
    require(p >= 1, "layer count must be positive");
    require(std::isfinite(beta), "non-finite mixing angle");
    switch (mixer.kind()) {
        case Generator::Kind::transverse_field:
            // p beta^2 n^2 / ln (1 - 2 delta)^{-1/2}, written so that p = 1 is bit-identical to
            // schedule_theorem1 with span 2n.
            return detail::ceil_at_least_one(p * detail::sq(beta * (2.0 * n)) / tau(delta, true));
        case Generator::Kind::rank_one_uniform:
            return detail::ceil_at_least_one(p * detail::sq(beta) / tau(delta, true));
        default:
            throw ValidationError("schedule_cor3 supports only the transverse-field and rank-one mixers");
    }
}

/// N = ceil(beta^2 / eta), at least 1.
inline int schedule_eta(double beta, double eta) {
    require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
    return detail::ceil_at_least_one(detail::sq(beta) / eta);
}

/// Copies needed so that at least one lands in-constraint with probability 1 - eps.
inline int repetitions_cor2(double c, double eps) {
    require(c > 0.0 && c <= 1.0, "in-constraint probability bound must lie in (0, 1]");
    require(eps > 0.0 && eps < 1.0, "failure probability must lie in (0, 1)");
    if (c == 1.0) {
        return 1;
    }
    return detail::ceil_at_least_one(std::log(1.0 / eps) / -std::log1p(-c));
}

/// 1/2 + 1/2 (2 cos^2(span theta / 2N) - 1)^N.
inline double survival_bound_lemma2(double theta, int n_meas, double span) {
    require(n_meas >= 1, "measurement count must be positive");
    require(span >= 0.0, "spectral span must be non-negative");
    require(std::abs(theta) * span <= std::numbers::pi * n_meas * (1.0 + 1e-12),
            "theta is outside the validity range of the bound");
    double c = std::cos(span * theta / (2.0 * n_meas));
    return 0.5 + 0.5 * std::pow(2.0 * c * c - 1.0, n_meas);
}

}  // namespace zenoq
