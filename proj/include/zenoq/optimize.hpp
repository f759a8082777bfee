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
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "zenoq/ansatz.hpp"
#include "zenoq/parallel.hpp"
#include "zenoq/problems.hpp"

namespace zenoq {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct OptimizerSettings {
    int restarts = 50;
    std::uint64_t seed = 0;
    int budget = 400;           // objective evaluations per restart
    double initial_step = 0.1;  // initial simplex edge as a fraction of the box width
    double f_tol = 1e-12;
    double x_tol = 1e-9;
    int jobs = 1;
};

inline int default_restarts(int p) {
    return p <= 3 ? 50 : 100;
}

struct TracePoint {
    long long evaluation = 0;
    double best = 0.0;
};

struct OptimizationReport {
    std::vector<double> best_params;
    double best_value = 0.0;
    std::vector<TracePoint> trace;  // best-so-far after every evaluation, restarts concatenated in order
    int restarts = 0;
    std::uint64_t seed = 0;
    long long evaluations = 0;
};

/// Folds x into [lo, hi] by mirror reflection at the bounds.
inline double reflect_into(double x, Interval box) {
    const double w = box.hi - box.lo;
    if (w <= 0.0) {
        return box.lo;
    }
    double t = std::fmod(x - box.lo, 2.0 * w);
    if (t < 0.0) {
        t += 2.0 * w;
    }
    return t <= w ? box.lo + t : box.lo + 2.0 * w - t;
}

/// SplitMix64 step, used to derive independent per-restart seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace detail {

struct LocalRun {
    std::vector<double> best;
    double best_value = 0.0;
    std::vector<double> history;  // every objective value in evaluation order
};

// Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2) with every trial point
// reflected into the box.
inline LocalRun nelder_mead(const std::function<double(std::span<const double>)> &f, std::vector<double> x0,
                            std::span<const Interval> box, const OptimizerSettings &s) {
    const std::size_t dim = x0.size();
    LocalRun run;
    auto eval = [&](std::vector<double> &x) {
        for (std::size_t i = 0; i < dim; ++i) {
            x[i] = reflect_into(x[i], box[i]);
        }
        double v = f(x);
        require(!std::isnan(v), "objective returned NaN");
        run.history.push_back(v);
        return v;
    };
    auto budget_left = [&] { return static_cast<int>(run.history.size()) < s.budget; };

    std::vector<std::vector<double>> simplex{x0};
    std::vector<double> values{eval(simplex[0])};
    for (std::size_t i = 0; i < dim && budget_left(); ++i) {
        auto x = x0;
        const double step = s.initial_step * (box[i].hi - box[i].lo);
        x[i] += (x[i] + step <= box[i].hi) ? step : -step;
        values.push_back(eval(x));
        simplex.push_back(std::move(x));
    }

    std::vector<std::size_t> order(simplex.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> sx;
        std::vector<double> sv;
        for (auto k : order) {
            sx.push_back(simplex[k]);
            sv.push_back(values[k]);
        }
        simplex = std::move(sx);
        values = std::move(sv);
    };

    while (simplex.size() == dim + 1 && budget_left()) {
        sort_simplex();
        double spread = values.back() - values.front();
        double size = 0.0;
        for (std::size_t k = 1; k <= dim; ++k) {
            for (std::size_t i = 0; i < dim; ++i) {
                size = std::max(size, std::abs(simplex[k][i] - simplex[0][i]));
            }
        }
        if (spread <= s.f_tol && size <= s.x_tol) {
            break;
        }
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t k = 0; k < dim; ++k) {
            for (std::size_t i = 0; i < dim; ++i) {
                centroid[i] += simplex[k][i] / static_cast<double>(dim);
            }
        }
        auto along = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                x[i] = centroid[i] + t * (simplex[dim][i] - centroid[i]);
            }
            return x;
        };
        auto xr = along(-1.0);
        double fr = eval(xr);
        if (fr < values[0]) {
            if (!budget_left()) {
                simplex[dim] = xr;
                values[dim] = fr;
                break;
            }
            auto xe = along(-2.0);
            double fe = eval(xe);
            if (fe < fr) {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
            continue;
        }
        if (fr < values[dim - 1]) {
            simplex[dim] = xr;
            values[dim] = fr;
            continue;
        }
        if (!budget_left()) {
            break;
        }
        const bool outside = fr < values[dim];
        auto xc = along(outside ? -0.5 : 0.5);
        double fc = eval(xc);
        if (fc < (outside ? fr : values[dim])) {
            simplex[dim] = xc;
            values[dim] = fc;
            continue;
        }
        for (std::size_t k = 1; k <= dim && budget_left(); ++k) {
            for (std::size_t i = 0; i < dim; ++i) {
                simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
            }
            values[k] = eval(simplex[k]);
        }
    }
    std::size_t arg = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    run.best = simplex[arg];
    run.best_value = values[arg];
    return run;
}

}  // namespace detail

/// Multistart Nelder-Mead from uniform random starts in the box. Restart r draws its start from an
/// independent stream seeded by mix_seed(seed + r), so results do not depend on `jobs`.
inline OptimizationReport optimize_params(const std::function<double(std::span<const double>)> &objective,
                                          std::span<const Interval> box, const OptimizerSettings &s) {
    require(!box.empty(), "optimization needs at least one parameter");
    require(s.budget >= 1, "evaluation budget must be positive");
    require(s.restarts >= 1, "restart count must be positive");
    for (const auto &iv : box) {
        require(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo <= iv.hi, "invalid box");
    }
    std::vector<detail::LocalRun> runs(static_cast<std::size_t>(s.restarts));
    parallel_for(runs.size(), s.jobs, [&](std::size_t r) {
        Rng rng(mix_seed(s.seed + r));
        std::vector<double> x0(box.size());
        for (std::size_t i = 0; i < box.size(); ++i) {
            x0[i] = rng.uniform(box[i].lo, box[i].hi);
        }
        runs[r] = detail::nelder_mead(objective, std::move(x0), box, s);
    });

    OptimizationReport rep;
    rep.restarts = s.restarts;
    rep.seed = s.seed;
    bool have = false;
    for (const auto &run : runs) {
        for (double v : run.history) {
            ++rep.evaluations;
            if (!have || v < rep.best_value) {
                rep.best_value = v;
                have = true;
            }
            rep.trace.push_back({rep.evaluations, rep.best_value});
        }
    }
    // Nelder-Mead never discards its best vertex, so each run's final best equals the minimum of its
    // history; ties go to the earliest restart.
    for (const auto &run : runs) {
        if (run.best_value == rep.best_value) {
            rep.best_params = run.best;
            break;
        }
    }
    return rep;
}

/// Re-evaluates fixed parameters under another configuration without re-optimizing.
template <class Evaluator>
auto transfer_params(const OptimizationReport &source, std::size_t expected_dim, Evaluator &&evaluate) {
    require(source.best_params.size() == expected_dim, "transferred parameters have the wrong shape");
    return evaluate(std::span<const double>(source.best_params));
}

// ---------------------------------------------------------------------------
// Gradients

/// Exact gradient of Tr[M rho(theta)] in parameter r for circuits whose generators square to the
/// identity. Every pass k of every term carrying r is shifted by +-pi/4 in its sub-step angle;
/// the results are summed with weight scale / N. Uses 2 N evaluations per occurrence.
inline double parameter_shift_gradient(const ZenoCircuit &circuit, std::span<const double> theta,
                                       const StateVector &initial, const Generator &observable, int r,
                                       long long *evaluations = nullptr) {
    require(r >= 0 && r < circuit.num_params, "parameter index out of range");
    double grad = 0.0;
    long long count = 0;
    for (std::size_t b = 0; b < circuit.blocks.size(); ++b) {
        const auto &block = circuit.blocks[b];
        const int passes = block.measurements == 0 ? 1 : block.measurements;
        for (std::size_t t = 0; t < block.terms.size(); ++t) {
            const auto &term = block.terms[t];
            if (term.param != r) {
                continue;
            }
            if (!term.generator.is_involutory()) {
                throw ValidationError("parameter-shift rule needs a generator that squares to the identity");
            }
            for (int k = 0; k < passes; ++k) {
                AngleShift plus{b, t, k, std::numbers::pi / 4};
                AngleShift minus{b, t, k, -std::numbers::pi / 4};
                double ep = expectation(run_circuit(circuit, theta, initial, &plus), observable);
                double em = expectation(run_circuit(circuit, theta, initial, &minus), observable);
                grad += term.scale / passes * (ep - em);
                count += 2;
            }
        }
    }
    if (evaluations) {
        *evaluations = count;
    }
    return grad;
}

/// Central difference (f(x + h e_r) - f(x - h e_r)) / 2h.
inline double finite_difference(const std::function<double(std::span<const double>)> &f,
                                std::span<const double> x, std::size_t r, double h = 1e-5) {
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> xm(x.begin(), x.end());
    xp[r] += h;
    xm[r] -= h;
    return (f(xp) - f(xm)) / (2.0 * h);
}

}  // namespace zenoq
