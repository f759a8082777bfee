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

// End-to-end experiment setups shared by the command-line tool and the acceptance suite.

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zenoq/ansatz.hpp"
#include "zenoq/optimize.hpp"
#include "zenoq/problems.hpp"
#include "zenoq/zeno.hpp"

namespace zenoq {

enum class MixerKind { transverse_field, complete_graph };

inline const char *to_string(MixerKind m) {
    return m == MixerKind::transverse_field ? "x" : "cg";
}

inline MixerKind parse_mixer(const std::string &s) {
    if (s == "x") {
        return MixerKind::transverse_field;
    }
    if (s == "cg") {
        return MixerKind::complete_graph;
    }
    throw ValidationError("unknown mixer '" + s + "' (expected x or cg)");
}

inline Generator make_mixer(MixerKind kind, int n) {
    return kind == MixerKind::transverse_field ? Generator::transverse_field(n) : Generator::rank_one_uniform(n);
}

/// Default optimization box for a mixing angle.
inline Interval beta_box(MixerKind kind) {
    const double b = kind == MixerKind::transverse_field ? std::numbers::pi / 2 : std::numbers::pi;
    return {-b, b};
}

inline Interval gamma_box() {
    return {-std::numbers::pi, std::numbers::pi};
}

inline std::vector<Interval> qaoa_box(MixerKind kind, int p) {
    std::vector<Interval> box(static_cast<std::size_t>(p), beta_box(kind));
    box.insert(box.end(), static_cast<std::size_t>(p), gamma_box());
    return box;
}

/// How measurement counts follow from the mixing angles.
struct ScheduleSpec {
    ScheduleRule rule = ScheduleRule::eta;
    double delta = 0.1;
    double eta = 0.1;
    std::vector<int> manual;
};

/// Per-layer counts for the given mixing angles. Every mixing layer is one measured block.
inline ZenoSchedule make_schedule(const ScheduleSpec &spec, const Generator &mixer, std::span<const double> betas) {
    ZenoSchedule s;
    s.rule = spec.rule;
    const int p = static_cast<int>(betas.size());
    switch (spec.rule) {
        case ScheduleRule::manual:
            require(spec.manual.size() == betas.size(), "manual schedule needs one count per layer");
            for (int c : spec.manual) {
                require(c >= 0, "manual measurement counts must be non-negative");
            }
            s.counts = spec.manual;
            return s;
        case ScheduleRule::eta:
            s.eta = spec.eta;
            for (double b : betas) {
                s.counts.push_back(schedule_eta(b, spec.eta));
            }
            return s;
        case ScheduleRule::theorem1: {
            s.delta = spec.delta;
            auto span = spectral_span(mixer);
            for (double b : betas) {
                s.counts.push_back(schedule_theorem1(b, span.xi_min, span.xi_max, spec.delta));
            }
            return s;
        }
        case ScheduleRule::cor1_commuting:
        case ScheduleRule::cor1_general: {
            s.delta = spec.delta;
            std::vector<double> sums;
            for (double b : betas) {
                sums.push_back(std::abs(b));
            }
            std::vector<double> norms(betas.size(), spectral_span(mixer).norm());
            s.counts = schedule_cor1(sums, norms, p, spec.delta, spec.rule == ScheduleRule::cor1_commuting);
            return s;
        }
        case ScheduleRule::cor3:
            s.delta = spec.delta;
            for (double b : betas) {
                s.counts.push_back(schedule_cor3(mixer, b, p, mixer.qubits(), spec.delta));
            }
            return s;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Zeno-QAOA

struct ZenoQaoaSetup {
    ProblemData data;
    MixerKind mixer_kind = MixerKind::complete_graph;
    Generator cost;
    Generator mixer;
    Measurement measurement;
    StateVector initial;
    ScheduleSpec schedule;
    int p = 1;

    static ZenoQaoaSetup build(const PortfolioInstance &inst, MixerKind mixer, int p, const ScheduleSpec &schedule) {
        require(p >= 1, "layer count must be positive");
        auto data = ProblemData::build(inst);
        auto cost = data.scaled_cost();
        auto meas = data.measurement();
        auto init = initial_state_uniform_feasible(data.feasible);
        return {std::move(data), mixer, std::move(cost), make_mixer(mixer, inst.n), std::move(meas), std::move(init),
                schedule, p};
    }
};

struct RunOutcome {
    std::vector<double> params;
    std::vector<int> counts;
    Metrics metrics;
    double objective = 0.0;
    long long total_measurements = 0;
};

inline RunOutcome evaluate_zeno_qaoa(const ZenoQaoaSetup &s, std::span<const double> flat) {
    require(static_cast<int>(flat.size()) == 2 * s.p, "QAOA parameter vector has the wrong length");
    auto params = QaoaParams::from_flat(flat);
    auto sched = make_schedule(s.schedule, s.mixer, params.betas);
    auto circuit = qaoa_circuit(s.cost, s.mixer, s.measurement, sched.counts);
    auto state = run_circuit(circuit, flat, s.initial);
    RunOutcome out;
    out.params.assign(flat.begin(), flat.end());
    out.counts = sched.counts;
    out.metrics = evaluate_metrics(state, s.data);
    // Tr[C_F rho] with the rescaled cost.
    out.objective = 0.0;
    auto probs = probabilities(state);
    for (auto i : s.data.feasible.indices()) {
        out.objective += probs[i] * s.data.objective[i] / s.data.cube_span;
    }
    out.total_measurements = sched.total_measurements();
    return out;
}

inline OptimizationReport optimize_zeno_qaoa(const ZenoQaoaSetup &s, const OptimizerSettings &settings) {
    auto box = qaoa_box(s.mixer_kind, s.p);
    return optimize_params([&](std::span<const double> x) { return evaluate_zeno_qaoa(s, x).objective; }, box,
                           settings);
}

// ---------------------------------------------------------------------------
// Penalty QAOA

struct PenaltyQaoaSetup {
    ProblemData data;
    PenaltyRelaxation relax;
    MixerKind mixer_kind = MixerKind::transverse_field;
    Generator cost;  // relaxed diagonal divided by its span
    Generator mixer;
    int p = 1;

    static PenaltyQaoaSetup build(const PortfolioInstance &inst, MixerKind mixer, int p,
                                  const std::vector<double> &lambdas,
                                  std::optional<double> slack_resolution = std::nullopt) {
        require(p >= 1, "layer count must be positive");
        auto data = ProblemData::build(inst);
        auto relax = penalty_objective(inst, lambdas, slack_resolution);
        auto [lo, hi] = std::minmax_element(relax.diagonal.begin(), relax.diagonal.end());
        const double span = *hi - *lo;
        std::vector<double> c(relax.diagonal);
        for (auto &v : c) {
            v /= span;
        }
        const int total = relax.total_qubits;
        return {std::move(data), std::move(relax), mixer, Generator::diagonal(std::move(c)), make_mixer(mixer, total),
                p};
    }
};

inline RunOutcome evaluate_penalty_qaoa(const PenaltyQaoaSetup &s, std::span<const double> flat) {
    require(static_cast<int>(flat.size()) == 2 * s.p, "QAOA parameter vector has the wrong length");
    auto psi = run_qaoa_penalty(s.cost, s.mixer, QaoaParams::from_flat(flat));
    RunOutcome out;
    out.params.assign(flat.begin(), flat.end());
    out.counts.assign(static_cast<std::size_t>(s.p), 0);
    out.metrics = evaluate_metrics(psi, s.data, s.relax);
    out.objective = expectation(psi, s.cost);
    return out;
}

inline OptimizationReport optimize_penalty_qaoa(const PenaltyQaoaSetup &s, const OptimizerSettings &settings) {
    auto box = qaoa_box(s.mixer_kind, s.p);
    return optimize_params([&](std::span<const double> x) { return evaluate_penalty_qaoa(s, x).objective; }, box,
                           settings);
}

// ---------------------------------------------------------------------------
// L-VQE

struct LvqeSetup {
    ProblemData data;
    Generator cost;
    ZenoCircuit circuit;
    int p = 1;

    static LvqeSetup build(const PortfolioInstance &inst, int p, int n_meas) {
        require(p >= 0, "layer count must be non-negative");
        require(n_meas >= 0, "measurement count must be non-negative");
        auto data = ProblemData::build(inst);
        auto cost = data.scaled_cost();
        auto circuit = lvqe_circuit(inst.n, p, data.measurement(), n_meas);
        return {std::move(data), std::move(cost), std::move(circuit), p};
    }
};

inline RunOutcome evaluate_lvqe(const LvqeSetup &s, std::span<const double> flat) {
    auto state = run_circuit(s.circuit, flat, StateVector::basis(s.circuit.qubits, 0));
    RunOutcome out;
    out.params.assign(flat.begin(), flat.end());
    out.counts = {static_cast<int>(s.circuit.total_measurements())};
    out.metrics = evaluate_metrics(state, s.data);
    auto probs = probabilities(state);
    for (auto i : s.data.feasible.indices()) {
        out.objective += probs[i] * s.data.objective[i] / s.data.cube_span;
    }
    out.total_measurements = s.circuit.total_measurements();
    return out;
}

inline OptimizationReport optimize_lvqe(const LvqeSetup &s, const OptimizerSettings &settings) {
    std::vector<Interval> box(static_cast<std::size_t>(s.circuit.num_params),
                              Interval{-std::numbers::pi, std::numbers::pi});
    return optimize_params([&](std::span<const double> x) { return evaluate_lvqe(s, x).objective; }, box, settings);
}

}  // namespace zenoq
