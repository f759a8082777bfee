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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zenoq/operators.hpp"
#include "zenoq/qcore.hpp"
#include "zenoq/zeno.hpp"

namespace zenoq {

/// Evolution e^{-i scale theta[param] G}.
struct ParamTerm {
    Generator generator;
    int param = 0;
    double scale = 1.0;
};

/// Terms applied in order; measurements = N subdivides every angle by N and measures after each pass.
struct ParamBlock {
    std::vector<ParamTerm> terms;
    int measurements = 0;
};

/// A parameterized product of measured and unmeasured blocks.
struct ZenoCircuit {
    int qubits = 0;
    int num_params = 0;
    std::vector<ParamBlock> blocks;
    std::optional<Measurement> measurement;

    void validate() const {
        check_qubit_count(qubits);
        for (const auto &b : blocks) {
            require(b.measurements >= 0, "block measurement count must be non-negative");
            require(b.measurements == 0 || measurement.has_value(), "measured block without a measurement");
            for (const auto &t : b.terms) {
                require(t.param >= 0 && t.param < num_params, "term refers to an unknown parameter");
                require(t.generator.qubits() == qubits, "term generator acts on the wrong register");
            }
        }
        if (measurement) {
            require(measurement->qubits() == qubits, "measurement acts on the wrong register");
        }
    }

    long long total_measurements() const {
        long long t = 0;
        for (const auto &b : blocks) {
            t += b.measurements;
        }
        return t;
    }
};

/// Adds delta to one sub-step angle of one term: block `block`, term `term`, pass `substep`.
struct AngleShift {
    std::size_t block = 0;
    std::size_t term = 0;
    int substep = 0;
    double delta = 0.0;
};

inline QuantumState run_circuit(const ZenoCircuit &circuit, std::span<const double> theta, const StateVector &initial,
                                const AngleShift *shift = nullptr) {
    require(static_cast<int>(theta.size()) == circuit.num_params, "parameter vector has the wrong length");
    require(initial.qubits() == circuit.qubits, "initial state acts on the wrong register");
    for (double t : theta) {
        require(std::isfinite(t), "parameter is not finite");
    }
    QuantumState state = initial;
    for (std::size_t b = 0; b < circuit.blocks.size(); ++b) {
        const auto &block = circuit.blocks[b];
        const int passes = block.measurements == 0 ? 1 : block.measurements;
        const double divisor = static_cast<double>(passes);
        for (int k = 0; k < passes; ++k) {
            for (std::size_t t = 0; t < block.terms.size(); ++t) {
                const auto &term = block.terms[t];
                double angle = term.scale * theta[static_cast<std::size_t>(term.param)] / divisor;
                if (shift && shift->block == b && shift->term == t && shift->substep == k) {
                    angle += shift->delta;
                }
                apply_evolution(state, term.generator, angle);
            }
            if (block.measurements > 0) {
                apply_measurement(state, *circuit.measurement);
            }
        }
    }
    return state;
}

// ---------------------------------------------------------------------------
// QAOA

struct QaoaParams {
    std::vector<double> betas;
    std::vector<double> gammas;

    int p() const {
        return static_cast<int>(betas.size());
    }

    /// Layout used by optimizers: betas then gammas.
    std::vector<double> flat() const {
        std::vector<double> v(betas);
        v.insert(v.end(), gammas.begin(), gammas.end());
        return v;
    }

    static QaoaParams from_flat(std::span<const double> v) {
        require(v.size() % 2 == 0, "QAOA parameter vector must have even length");
        const auto p = v.size() / 2;
        return {std::vector<double>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(p)),
                std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(p), v.end())};
    }

    void validate() const {
        require(betas.size() == gammas.size(), "betas and gammas differ in length");
        for (double x : flat()) {
            require(std::isfinite(x), "QAOA parameter is not finite");
        }
    }
};

/// prod_j [U_B(beta_j, N_j) e^{-i gamma_j C}]. Phase layers are never measured; a zero count leaves
/// the mixing layer unmeasured.
inline ZenoCircuit qaoa_circuit(const Generator &cost, const Generator &mixer, const std::optional<Measurement> &m,
                                const std::vector<int> &counts) {
    require(cost.kind() == Generator::Kind::diagonal, "QAOA cost operator must be diagonal");
    require(cost.qubits() == mixer.qubits(), "cost and mixer act on different registers");
    const int p = static_cast<int>(counts.size());
    ZenoCircuit c;
    c.qubits = cost.qubits();
    c.num_params = 2 * p;
    c.measurement = m;
    for (int j = 0; j < p; ++j) {
        c.blocks.push_back({{ParamTerm{cost, p + j, 1.0}}, 0});
        c.blocks.push_back({{ParamTerm{mixer, j, 1.0}}, counts[static_cast<std::size_t>(j)]});
    }
    c.validate();
    return c;
}

/// Probability mass of psi inside projector p.
inline double weight_in(const QuantumState &state, const Projector &p) {
    auto probs = probabilities(state);
    double w = 0.0;
    for (auto i : p.indices()) {
        w += probs[i];
    }
    return w;
}

/// Zeno-QAOA. The first projector of m is the feasible subspace; the initial state must lie in it.
inline DensityMatrix run_qaoa_zeno(const Generator &cost, const Generator &mixer, const Measurement &m,
                                   const QaoaParams &params, const ZenoSchedule &schedule,
                                   const StateVector &initial) {
    params.validate();
    require(schedule.counts.size() == params.betas.size(), "schedule and parameters differ in layer count");
    require(std::abs(weight_in(QuantumState(initial), m.projectors().front()) - 1.0) <= kStateTolerance,
            "initial state is not in-constraint");
    auto circuit = qaoa_circuit(cost, mixer, m, schedule.counts);
    return to_density(run_circuit(circuit, params.flat(), initial));
}

/// Measurement-free QAOA from |+>^n on the relaxed cost.
inline StateVector run_qaoa_penalty(const Generator &cost_relaxed, const Generator &mixer, const QaoaParams &params) {
    params.validate();
    auto circuit = qaoa_circuit(cost_relaxed, mixer, std::nullopt, std::vector<int>(params.betas.size(), 0));
    auto out = run_circuit(circuit, params.flat(), StateVector::uniform(cost_relaxed.qubits()));
    return std::get<StateVector>(std::move(out));
}

// ---------------------------------------------------------------------------
// L-VQE

/// theta0 has one angle per qubit; each layer has 2(n - 1) angles, two per nearest-neighbour bond.
struct LvqeParams {
    std::vector<double> theta0;
    std::vector<std::vector<double>> layers;

    std::vector<double> flat() const {
        std::vector<double> v(theta0);
        for (const auto &l : layers) {
            v.insert(v.end(), l.begin(), l.end());
        }
        return v;
    }

    static LvqeParams from_flat(int n, int p, std::span<const double> v) {
        const std::size_t per_layer = 2 * static_cast<std::size_t>(n - 1);
        require(v.size() == static_cast<std::size_t>(n) + p * per_layer, "L-VQE parameter vector has the wrong length");
        LvqeParams out;
        out.theta0.assign(v.begin(), v.begin() + n);
        for (int l = 0; l < p; ++l) {
            auto first = v.begin() + n + static_cast<std::ptrdiff_t>(l * per_layer);
            out.layers.emplace_back(first, first + static_cast<std::ptrdiff_t>(per_layer));
        }
        return out;
    }
};

inline int lvqe_param_count(int n, int p) {
    return n + 2 * p * (n - 1);
}

namespace detail {

inline Generator two_site_pauli(int n, int site, char a, char b) {
    std::string s(static_cast<std::size_t>(n), 'I');
    s[static_cast<std::size_t>(site)] = a;
    s[static_cast<std::size_t>(site + 1)] = b;
    return Generator::pauli_string(s);
}

}  // namespace detail

/// Generator sequence of Ry^{(n)}(theta0) followed by p brickwork layers of
/// CNOT (Ry x Ry) CNOT = e^{-i a/2 Y_i X_{i+1}} e^{-i b/2 Z_i Y_{i+1}} on bonds (i, i+1),
/// even bonds first.
inline std::vector<ParamTerm> lvqe_terms(int n, int p) {
    require(n >= 2, "L-VQE needs at least two qubits");
    require(p >= 0, "layer count must be non-negative");
    std::vector<ParamTerm> terms;
    for (int j = 0; j < n; ++j) {
        std::string s(static_cast<std::size_t>(n), 'I');
        s[static_cast<std::size_t>(j)] = 'Y';
        terms.push_back({Generator::pauli_string(s), j, 0.5});
    }
    std::vector<int> bonds;
    for (int i = 0; i + 1 < n; i += 2) {
        bonds.push_back(i);
    }
    for (int i = 1; i + 1 < n; i += 2) {
        bonds.push_back(i);
    }
    int next = n;
    for (int l = 0; l < p; ++l) {
        for (int i : bonds) {
            terms.push_back({detail::two_site_pauli(n, i, 'Y', 'X'), next++, 0.5});
            terms.push_back({detail::two_site_pauli(n, i, 'Z', 'Y'), next++, 0.5});
        }
    }
    return terms;
}

/// One measured block over the whole circuit (N passes at angle / N), or with per_gate one measured
/// block per generator.
inline ZenoCircuit lvqe_circuit(int n, int p, const std::optional<Measurement> &m, int n_meas, bool per_gate = false) {
    ZenoCircuit c;
    c.qubits = n;
    c.num_params = lvqe_param_count(n, p);
    c.measurement = m;
    auto terms = lvqe_terms(n, p);
    if (per_gate) {
        for (auto &t : terms) {
            c.blocks.push_back({{std::move(t)}, n_meas});
        }
    } else {
        c.blocks.push_back({std::move(terms), n_meas});
    }
    c.validate();
    return c;
}

inline DensityMatrix run_lvqe_zeno(const Measurement &m, const LvqeParams &params, int n_meas) {
    const int n = m.qubits();
    const int p = static_cast<int>(params.layers.size());
    auto flat = params.flat();
    require(static_cast<int>(flat.size()) == lvqe_param_count(n, p), "L-VQE parameter vector has the wrong length");
    auto circuit = lvqe_circuit(n, p, m, n_meas);
    return to_density(run_circuit(circuit, flat, StateVector::basis(n, 0)));
}

// ---------------------------------------------------------------------------
// Adiabatic schedule

struct AdiabaticConfig {
    double total_time = 1.0;
    int steps = 1;
};

/// beta_j = -(T/p)(1 - j/p), gamma_j = -jT/p^2 for j = 1..p.
inline QaoaParams adiabatic_schedule(const AdiabaticConfig &cfg) {
    require(cfg.total_time >= 0.0 && std::isfinite(cfg.total_time), "total time must be finite and non-negative");
    require(cfg.steps >= 1, "step count must be positive");
    const double t = cfg.total_time;
    const double p = cfg.steps;
    QaoaParams out;
    for (int j = 1; j <= cfg.steps; ++j) {
        out.betas.push_back(-(t / p) * (1.0 - j / p));
        out.gammas.push_back(-(j * t) / (p * p));
    }
    return out;
}

/// Lowest eigenvector of P B P restricted to the span of p, embedded in the full register.
inline StateVector projected_ground_state(const Generator &b, const Projector &p) {
    require(!p.empty(), "projector is empty");
    require(b.dim() == p.dim(), "dimension mismatch between generator and projector");
    ComplexMatrix full = b.materialize();
    const auto &idx = p.indices();
    const auto k = static_cast<Eigen::Index>(idx.size());
    ComplexMatrix block(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) {
            block(i, j) = full(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                               static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
        }
    }
    auto eig = eigensystem_of(block);
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(p.dim()));
    ComplexVector g = eig.vectors.col(0);
    // Fix the global phase so the largest component is real and positive.
    Eigen::Index best = 0;
    g.cwiseAbs().maxCoeff(&best);
    g *= std::abs(g[best]) / g[best];
    for (Eigen::Index i = 0; i < k; ++i) {
        v[static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)])] = g[i];
    }
    return StateVector(v.normalized());
}

}  // namespace zenoq
