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

// Discrete mean-variance portfolio instances, linear constraints, penalty
// relaxation with binary slack registers, and approximation-ratio metrics.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "zenoq/operators.hpp"
#include "zenoq/qcore.hpp"
#include "zenoq/zeno.hpp"

namespace zenoq {

enum class Sense { EQ, GEQ, LEQ };

inline const char *to_string(Sense s) {
    switch (s) {
        case Sense::EQ:
            return "EQ";
        case Sense::GEQ:
            return "GEQ";
        case Sense::LEQ:
            return "LEQ";
    }
    return "?";
}

inline Sense parse_sense(const std::string &token) {
    if (token == "EQ") {
        return Sense::EQ;
    }
    if (token == "GEQ") {
        return Sense::GEQ;
    }
    if (token == "LEQ") {
        return Sense::LEQ;
    }
    throw ValidationError("unknown constraint sense '" + token + "'");
}

/// Tolerance for deciding satisfaction of constraints with real data.
inline constexpr double kConstraintTolerance = 1e-9;

/// a^T x (sense) rhs.
struct LinearConstraint {
    std::vector<double> coeffs;
    Sense sense = Sense::EQ;
    double rhs = 0.0;

    void validate() const {
        require(!coeffs.empty(), "constraint has no coefficients");
        bool any = false;
        for (double c : coeffs) {
            require(std::isfinite(c), "constraint coefficient is not finite");
            any = any || c != 0.0;
        }
        require(any, "constraint coefficients are all zero");
        require(std::isfinite(rhs), "constraint right-hand side is not finite");
    }

    double lhs(std::uint64_t x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < coeffs.size(); ++j) {
            if (bit_of(x, static_cast<int>(j))) {
                s += coeffs[j];
            }
        }
        return s;
    }

    /// Signed slack: a^T x - rhs for EQ and GEQ, rhs - a^T x for LEQ. Satisfied iff 0 (EQ) or >= 0.
    double slack(std::uint64_t x) const {
        double v = lhs(x) - rhs;
        return sense == Sense::LEQ ? -v : v;
    }

    bool satisfied(std::uint64_t x) const {
        double g = slack(x);
        return sense == Sense::EQ ? std::abs(g) <= kConstraintTolerance : g >= -kConstraintTolerance;
    }

    bool is_integral() const {
        auto integral = [](double v) { return std::nearbyint(v) == v; };
        return integral(rhs) && std::all_of(coeffs.begin(), coeffs.end(), integral);
    }
};

struct PortfolioInstance {
    int n = 0;
    double q = 0.5;
    Eigen::MatrixXd sigma;
    std::vector<double> mu;
    std::vector<LinearConstraint> constraints;

    void validate() const {
        require(n >= 1 && n <= 12, "asset count must lie in [1, 12]");
        require(std::isfinite(q), "risk aversion is not finite");
        require(sigma.rows() == n && sigma.cols() == n, "sigma must be n x n");
        require(static_cast<int>(mu.size()) == n, "mu must have n entries");
        require(sigma.allFinite(), "sigma has non-finite entries");
        for (double m : mu) {
            require(std::isfinite(m), "mu has non-finite entries");
        }
        require((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "sigma is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
        require(es.eigenvalues().minCoeff() >= -1e-9, "sigma is not positive semi-definite");
        for (const auto &c : constraints) {
            c.validate();
            require(static_cast<int>(c.coeffs.size()) == n, "constraint length differs from asset count");
        }
    }
};

/// q x^T Sigma x - mu^T x.
inline double objective_value(const PortfolioInstance &inst, std::uint64_t x) {
    require(x < dim_of(inst.n), "bitstring has more bits than assets");
    double quad = 0.0;
    double lin = 0.0;
    for (int i = 0; i < inst.n; ++i) {
        if (!bit_of(x, i)) {
            continue;
        }
        lin += inst.mu[static_cast<std::size_t>(i)];
        for (int j = 0; j < inst.n; ++j) {
            if (bit_of(x, j)) {
                quad += inst.sigma(i, j);
            }
        }
    }
    return inst.q * quad - lin;
}

inline std::vector<double> objective_diagonal(const PortfolioInstance &inst) {
    std::vector<double> f(dim_of(inst.n));
    for (std::uint64_t x = 0; x < f.size(); ++x) {
        f[x] = objective_value(inst, x);
    }
    return f;
}

struct InstanceConfig {
    double q = 0.5;
    bool budget = true;
    bool return_constraint = false;
};

/// Deterministic pseudo-random numbers shared by instance generation and optimizers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {
    }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }
    /// Box-Muller; one normal per call.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    std::uint64_t next() {
        return engine_();
    }

private:
    std::mt19937_64 engine_;
};

/// Sigma = A A^T / n with standard normal A, mu uniform in [0, 1); budget sum x <= ceil(n/2); optional
/// return constraint mu^T x >= median of mu^T x over the budget-feasible states.
inline PortfolioInstance generate_instance(int n, std::uint64_t seed, const InstanceConfig &cfg = {}) {
    require(n >= 2 && n <= 12, "generated instances need 2 to 12 assets");
    Rng rng(seed);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = rng.normal();
        }
    }
    PortfolioInstance inst;
    inst.n = n;
    inst.q = cfg.q;
    inst.sigma = a * a.transpose() / static_cast<double>(n);
    inst.sigma = 0.5 * (inst.sigma + inst.sigma.transpose()).eval();
    inst.mu.resize(static_cast<std::size_t>(n));
    for (auto &m : inst.mu) {
        m = rng.uniform();
    }
    if (cfg.budget) {
        inst.constraints.push_back({std::vector<double>(static_cast<std::size_t>(n), 1.0), Sense::LEQ,
                                    static_cast<double>((n + 1) / 2)});
    }
    if (cfg.return_constraint) {
        LinearConstraint ret{inst.mu, Sense::GEQ, 0.0};
        std::vector<double> values;
        for (std::uint64_t x = 0; x < dim_of(n); ++x) {
            if (!cfg.budget || inst.constraints.front().satisfied(x)) {
                values.push_back(ret.lhs(x));
            }
        }
        std::sort(values.begin(), values.end());
        const std::size_t k = values.size();
        ret.rhs = k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
        inst.constraints.push_back(std::move(ret));
    }
    inst.validate();
    return inst;
}

inline bool is_feasible(const PortfolioInstance &inst, std::uint64_t x) {
    return std::all_of(inst.constraints.begin(), inst.constraints.end(),
                       [&](const LinearConstraint &c) { return c.satisfied(x); });
}

inline Projector feasible_states(const PortfolioInstance &inst) {
    return projector_from_predicate(inst.n, [&](std::uint64_t x) { return is_feasible(inst, x); });
}

// ---------------------------------------------------------------------------
// Penalty relaxation

struct PenaltyRelaxation {
    PortfolioInstance instance;
    std::vector<double> lambdas;
    std::vector<int> slack_bits;          // per constraint; 0 for equalities
    std::vector<double> slack_resolution; // Delta_g per constraint; 0 for equalities
    int total_qubits = 0;
    std::vector<double> diagonal;         // f + sum_j lambda_j gbar_j over the extended register

    int problem_qubits() const {
        return instance.n;
    }
};

/// Extended register: problem bits first, then one slack register per inequality in constraint order.
/// Slack widths are bit_width(floor(g_max / Delta_g)) so every achievable slack value is representable.
inline PenaltyRelaxation penalty_objective(const PortfolioInstance &inst, const std::vector<double> &lambdas,
                                           std::optional<double> slack_resolution = std::nullopt) {
    inst.validate();
    require(lambdas.size() == inst.constraints.size(), "need one penalty factor per constraint");
    for (double l : lambdas) {
        require(l >= 0.0 && std::isfinite(l), "penalty factors must be finite and non-negative");
    }
    if (slack_resolution) {
        require(*slack_resolution > 0.0 && std::isfinite(*slack_resolution), "slack resolution must be positive");
    }
    PenaltyRelaxation out;
    out.instance = inst;
    out.lambdas = lambdas;
    int total = inst.n;
    for (const auto &c : inst.constraints) {
        if (c.sense == Sense::EQ) {
            out.slack_bits.push_back(0);
            out.slack_resolution.push_back(0.0);
            continue;
        }
        double dg = 1.0;
        if (!c.is_integral()) {
            require(slack_resolution.has_value(),
                    "inequality with non-integer data needs an explicit slack resolution");
            dg = *slack_resolution;
        } else if (slack_resolution) {
            dg = *slack_resolution;
        }
        double gmax = 0.0;
        for (std::uint64_t x = 0; x < dim_of(inst.n); ++x) {
            if (c.satisfied(x)) {
                gmax = std::max(gmax, c.slack(x));
            }
        }
        auto levels = static_cast<std::uint64_t>(std::floor(gmax / dg + 1e-9));
        int bits = std::bit_width(levels);
        out.slack_bits.push_back(bits);
        out.slack_resolution.push_back(dg);
        total += bits;
    }
    check_qubit_count(total);
    out.total_qubits = total;

    const std::size_t d = dim_of(total);
    const std::uint64_t xmask = dim_of(inst.n) - 1;
    auto f = objective_diagonal(inst);
    out.diagonal.resize(d);
    for (std::uint64_t z = 0; z < d; ++z) {
        const std::uint64_t x = z & xmask;
        double v = f[x];
        int offset = inst.n;
        for (std::size_t j = 0; j < inst.constraints.size(); ++j) {
            const auto &c = inst.constraints[j];
            double g = c.slack(x);
            const int bits = out.slack_bits[j];
            if (c.sense != Sense::EQ) {
                const std::uint64_t s = (z >> offset) & ((std::uint64_t{1} << bits) - 1);
                g -= out.slack_resolution[j] * static_cast<double>(s);
                offset += bits;
            }
            v += lambdas[j] * g * g;
        }
        out.diagonal[z] = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Initial states and metrics

/// Amplitude 1/sqrt|F| on every feasible basis state.
inline StateVector initial_state_uniform_feasible(const Projector &f) {
    if (f.empty()) {
        throw InfeasibleError("feasible set is empty");
    }
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(f.dim()));
    const double a = 1.0 / std::sqrt(static_cast<double>(f.size()));
    for (auto i : f.indices()) {
        v[static_cast<Eigen::Index>(i)] = a;
    }
    return StateVector(std::move(v));
}

/// Everything the metrics need about an instance, computed once.
struct ProblemData {
    PortfolioInstance instance;
    Projector feasible;
    std::vector<double> objective;  // f over the full cube
    double f_min = 0.0;             // over the feasible set
    double f_max = 0.0;
    double cube_span = 0.0;         // max - min of f over the full cube

    static ProblemData build(const PortfolioInstance &inst) {
        inst.validate();
        ProblemData d{inst, feasible_states(inst), objective_diagonal(inst)};
        if (d.feasible.empty()) {
            throw InfeasibleError("feasible set is empty");
        }
        d.f_min = d.f_max = d.objective[d.feasible.indices().front()];
        for (auto i : d.feasible.indices()) {
            d.f_min = std::min(d.f_min, d.objective[i]);
            d.f_max = std::max(d.f_max, d.objective[i]);
        }
        if (d.f_min == d.f_max) {
            throw InfeasibleError("objective is constant on the feasible set");
        }
        auto [lo, hi] = std::minmax_element(d.objective.begin(), d.objective.end());
        d.cube_span = *hi - *lo;
        return d;
    }

    /// C / (max f - min f over the cube), the cost operator handed to phase layers.
    Generator scaled_cost() const {
        std::vector<double> c(objective);
        for (auto &v : c) {
            v /= cube_span;
        }
        return Generator::diagonal(std::move(c));
    }

    /// Approximation ratio of a feasible basis state.
    double ratio_of(std::uint64_t x) const {
        return (objective[x] - f_max) / (f_min - f_max);
    }

    Measurement measurement() const {
        return Measurement::binary(feasible);
    }
};

struct Metrics {
    double r = 0.0;
    std::optional<double> r_penalty;
    double in_constraint_prob = 0.0;
};

/// r from the probabilities of the n problem bits: (sum_{x in F} p(x) f(x) - f_max) / (f_min - f_max).
/// C_F is supported on F only, so out-of-constraint weight contributes zero energy.
inline Metrics metrics_from_probabilities(const std::vector<double> &probs, const ProblemData &data) {
    require(probs.size() == data.objective.size(), "probability vector has the wrong dimension");
    double energy = 0.0;
    double weight = 0.0;
    for (auto i : data.feasible.indices()) {
        energy += probs[i] * data.objective[i];
        weight += probs[i];
    }
    Metrics m;
    m.r = (energy - data.f_max) / (data.f_min - data.f_max);
    m.in_constraint_prob = std::clamp(weight, 0.0, 1.0);
    return m;
}

inline Metrics evaluate_metrics(const QuantumState &state, const ProblemData &data) {
    return metrics_from_probabilities(probabilities(state), data);
}

/// Metrics of a pure state on the extended register: r on the problem-bit marginal, r_penalty over
/// the full extended cube.
inline Metrics evaluate_metrics(const StateVector &psi, const ProblemData &data, const PenaltyRelaxation &relax) {
    require(psi.qubits() == relax.total_qubits, "state does not live on the extended register");
    auto probs = psi.probabilities();
    std::vector<double> marginal(data.objective.size(), 0.0);
    const std::uint64_t xmask = marginal.size() - 1;
    double energy = 0.0;
    for (std::uint64_t z = 0; z < probs.size(); ++z) {
        marginal[z & xmask] += probs[z];
        energy += probs[z] * relax.diagonal[z];
    }
    Metrics m = metrics_from_probabilities(marginal, data);
    auto [lo, hi] = std::minmax_element(relax.diagonal.begin(), relax.diagonal.end());
    if (*lo != *hi) {
        m.r_penalty = (energy - *hi) / (*lo - *hi);
    }
    return m;
}

}  // namespace zenoq
