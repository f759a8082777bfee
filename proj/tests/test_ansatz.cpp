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

#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "zenoq/ansatz.hpp"
#include "zenoq/problems.hpp"

using namespace zenoq;

namespace {

const double kPi = std::numbers::pi;

oracle::Mat diag_matrix(const std::vector<double> &v) {
    oracle::Mat m = oracle::Mat::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = v[i];
    }
    return m;
}

oracle::Vec dense_qaoa(const oracle::Mat &c, const oracle::Mat &b, const QaoaParams &params, oracle::Vec psi) {
    for (int j = 0; j < params.p(); ++j) {
        psi = oracle::expm(c, params.gammas[static_cast<std::size_t>(j)]) * psi;
        psi = oracle::expm(b, params.betas[static_cast<std::size_t>(j)]) * psi;
    }
    return psi;
}

oracle::Mat ry(double t) {
    oracle::Mat m(2, 2);
    m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    return m;
}

// CNOT with control `c` and target `t` on n qubits.
oracle::Mat cnot(int n, int c, int t) {
    const auto d = Eigen::Index{1} << n;
    oracle::Mat m = oracle::Mat::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
        Eigen::Index y = ((x >> c) & 1) ? (x ^ (Eigen::Index{1} << t)) : x;
        m(y, x) = 1.0;
    }
    return m;
}

// Gate-level L-VQE: Ry layer, then per layer CNOT (Ry x Ry) CNOT on even bonds, then odd bonds.
oracle::Vec gate_level_lvqe(int n, int p, const std::vector<double> &theta) {
    const auto d = Eigen::Index{1} << n;
    oracle::Vec psi = oracle::Vec::Unit(d, 0);
    std::vector<oracle::Mat> layer;
    for (int j = 0; j < n; ++j) {
        layer.push_back(ry(theta[static_cast<std::size_t>(j)]));
    }
    psi = oracle::kron_string(layer) * psi;
    std::vector<int> bonds;
    for (int i = 0; i + 1 < n; i += 2) {
        bonds.push_back(i);
    }
    for (int i = 1; i + 1 < n; i += 2) {
        bonds.push_back(i);
    }
    std::size_t next = static_cast<std::size_t>(n);
    for (int l = 0; l < p; ++l) {
        for (int i : bonds) {
            std::vector<oracle::Mat> ops(static_cast<std::size_t>(n), oracle::Mat::Identity(2, 2));
            ops[static_cast<std::size_t>(i)] = ry(theta[next++]);
            ops[static_cast<std::size_t>(i + 1)] = ry(theta[next++]);
            oracle::Mat cx = cnot(n, i, i + 1);
            psi = cx * oracle::kron_string(ops) * cx * psi;
        }
    }
    return psi;
}

std::vector<double> random_angles(std::mt19937_64 &rng, std::size_t k) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    std::vector<double> v(k);
    for (auto &x : v) {
        x = u(rng);
    }
    return v;
}

}  // namespace

TEST(ansatz, zero_parameters_return_initial_state) {
    auto data = ProblemData::build(generate_instance(4, 7));
    auto init = initial_state_uniform_feasible(data.feasible);
    QaoaParams params{{0, 0}, {0, 0}};
    auto rho = run_qaoa_zeno(data.scaled_cost(), Generator::rank_one_uniform(4), data.measurement(), params,
                             ZenoSchedule{ScheduleRule::manual, 0.1, 0.1, {3, 3}}, init);
    EXPECT_LT(oracle::max_abs(rho.entries() - DensityMatrix::from_pure(init).entries()), 1e-14);
    EXPECT_NEAR(weight_in(QuantumState(rho), data.feasible), 1.0, 1e-14);
}

TEST(ansatz, suppressed_mixer_leaves_state_nearly_unchanged) {
    Projector f(2, {1, 2});
    auto init = initial_state_uniform_feasible(f);
    QaoaParams params{{1.2}, {0.0}};
    auto cost = Generator::diagonal({0, 1, 2, 3});
    auto rho = run_qaoa_zeno(cost, Generator::transverse_field(2), Measurement::binary(f), params,
                             ZenoSchedule{ScheduleRule::manual, 0.1, 0.1, {2000}}, init);
    EXPECT_LT(trace_distance(rho, DensityMatrix::from_pure(init)), 1e-2);
}

TEST(ansatz, corollary3_schedule_keeps_ninety_percent_in_constraint) {
    std::mt19937_64 rng(3);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto data = ProblemData::build(generate_instance(4, seed));
        auto init = initial_state_uniform_feasible(data.feasible);
        for (bool tf : {true, false}) {
            Generator mixer = tf ? Generator::transverse_field(4) : Generator::rank_one_uniform(4);
            const int p = 2;
            QaoaParams params{random_angles(rng, p), random_angles(rng, p)};
            if (tf) {
                for (auto &b : params.betas) {
                    b /= 2;
                }
            }
            ZenoSchedule s{ScheduleRule::cor3, 0.1, 0.0, {}};
            for (double b : params.betas) {
                s.counts.push_back(schedule_cor3(mixer, b, p, 4, 0.1));
            }
            auto rho = run_qaoa_zeno(data.scaled_cost(), mixer, data.measurement(), params, s, init);
            EXPECT_GE(weight_in(QuantumState(rho), data.feasible), 0.9);
            EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
            // Block diagonal right after the final measurement.
            for (std::uint64_t i = 0; i < 16; ++i) {
                for (std::uint64_t j = 0; j < 16; ++j) {
                    if (data.feasible.contains(i) != data.feasible.contains(j)) {
                        EXPECT_EQ(std::abs(rho.entries()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))),
                                  0.0);
                    }
                }
            }
        }
    }
}

TEST(ansatz, trivial_measurement_reduces_to_standard_qaoa) {
    std::mt19937_64 rng(4);
    auto inst = generate_instance(3, 5);
    auto data = ProblemData::build(inst);
    auto cost = data.scaled_cost();
    QaoaParams params{random_angles(rng, 3), random_angles(rng, 3)};
    auto all = projector_from_predicate(3, [](std::uint64_t) { return true; });
    auto rho = run_qaoa_zeno(cost, Generator::transverse_field(3), Measurement({all}), params,
                             ZenoSchedule{ScheduleRule::manual, 0.1, 0.1, {1, 1, 1}}, StateVector::uniform(3));
    auto psi = run_qaoa_penalty(cost, Generator::transverse_field(3), params);
    EXPECT_LT(oracle::max_abs(rho.entries() - DensityMatrix::from_pure(psi).entries()), 1e-10);
    oracle::Vec ref = dense_qaoa(diag_matrix(cost.diagonal_values()), oracle::transverse_field(3), params,
                                 StateVector::uniform(3).amplitudes());
    EXPECT_LT(oracle::phase_insensitive_distance(psi.amplitudes(), ref), 1e-10);
}

TEST(ansatz, penalty_qaoa_edge_cases) {
    auto inst = generate_instance(4, 6);
    auto relax = penalty_objective(inst, {0.0});
    auto cost = Generator::diagonal(relax.diagonal);
    auto mixer = Generator::transverse_field(relax.total_qubits);
    auto psi0 = run_qaoa_penalty(cost, mixer, QaoaParams{});
    EXPECT_LT((psi0.amplitudes() - StateVector::uniform(relax.total_qubits).amplitudes()).cwiseAbs().maxCoeff(),
              1e-15);

    // With zero penalty the slack qubits decouple: the problem marginal equals plain QAOA on f.
    std::mt19937_64 rng(5);
    QaoaParams params{random_angles(rng, 2), random_angles(rng, 2)};
    auto psi = run_qaoa_penalty(cost, mixer, params);
    auto plain = run_qaoa_penalty(Generator::diagonal(objective_diagonal(inst)), Generator::transverse_field(4),
                                  params);
    std::vector<double> marginal(16, 0.0);
    auto probs = psi.probabilities();
    for (std::size_t z = 0; z < probs.size(); ++z) {
        marginal[z & 15] += probs[z];
    }
    auto want = plain.probabilities();
    for (std::size_t x = 0; x < 16; ++x) {
        EXPECT_NEAR(marginal[x], want[x], 1e-10);
    }
}

TEST(ansatz, rejects_inconsistent_inputs) {
    Projector f(2, {1, 2});
    auto m = Measurement::binary(f);
    auto cost = Generator::diagonal({0, 1, 2, 3});
    auto mixer = Generator::rank_one_uniform(2);
    QaoaParams params{{0.1}, {0.2}};
    ZenoSchedule s{ScheduleRule::manual, 0.1, 0.1, {2}};
    EXPECT_THROW(run_qaoa_zeno(cost, mixer, m, params, s, StateVector::basis(2, 0)), ValidationError);
    ZenoSchedule wrong{ScheduleRule::manual, 0.1, 0.1, {2, 2}};
    EXPECT_THROW(run_qaoa_zeno(cost, mixer, m, params, wrong, initial_state_uniform_feasible(f)), ValidationError);
    EXPECT_THROW(run_qaoa_zeno(cost, mixer, m, QaoaParams{{0.1}, {}}, s, initial_state_uniform_feasible(f)),
                 ValidationError);
    EXPECT_THROW(qaoa_circuit(Generator::transverse_field(2), mixer, m, {1}), ValidationError);
}

TEST(ansatz, lvqe_generators_match_gate_level_circuit) {
    std::mt19937_64 rng(6);
    for (int n = 2; n <= 5; ++n) {
        for (int p = 0; p <= 2; ++p) {
            auto theta = random_angles(rng, static_cast<std::size_t>(lvqe_param_count(n, p)));
            auto circuit = lvqe_circuit(n, p, std::nullopt, 0);
            auto state = run_circuit(circuit, theta, StateVector::basis(n, 0));
            auto ref = gate_level_lvqe(n, p, theta);
            EXPECT_LT(oracle::phase_insensitive_distance(std::get<StateVector>(state).amplitudes(), ref), 1e-10)
                << n << " " << p;
        }
    }
}

TEST(ansatz, lvqe_zeno_block_matches_dense_oracle) {
    std::mt19937_64 rng(7);
    const int n = 3;
    const int p = 1;
    Projector f(n, {0, 1, 2, 4, 7});
    auto m = Measurement::binary(f);
    auto theta = random_angles(rng, static_cast<std::size_t>(lvqe_param_count(n, p)));
    const int steps = 7;
    auto rho = run_lvqe_zeno(m, LvqeParams::from_flat(n, p, theta), steps);

    oracle::Mat u = oracle::Mat::Identity(8, 8);
    for (const auto &t : lvqe_terms(n, p)) {
        u = (oracle::expm(t.generator.materialize(), t.scale * theta[static_cast<std::size_t>(t.param)] / steps) * u)
                .eval();
    }
    oracle::Mat pf = f.materialize();
    oracle::Mat pg = oracle::Mat::Identity(8, 8) - pf;
    oracle::Mat ref = oracle::Mat::Zero(8, 8);
    ref(0, 0) = 1.0;
    for (int k = 0; k < steps; ++k) {
        oracle::Mat e = u * ref * u.adjoint();
        ref = pf * e * pf + pg * e * pg;
    }
    EXPECT_LT(oracle::max_abs(rho.entries() - ref), 1e-10);
}

TEST(ansatz, lvqe_zero_angles_and_layout) {
    Projector has_zero(3, {0, 3});
    Projector no_zero(3, {3, 5});
    auto zeros = std::vector<double>(static_cast<std::size_t>(lvqe_param_count(3, 2)), 0.0);
    auto params = LvqeParams::from_flat(3, 2, zeros);
    EXPECT_EQ(params.layers.size(), 2U);
    EXPECT_EQ(params.layers[0].size(), 4U);
    EXPECT_NEAR(weight_in(QuantumState(run_lvqe_zeno(Measurement::binary(has_zero), params, 10)), has_zero), 1.0,
                1e-14);
    EXPECT_NEAR(weight_in(QuantumState(run_lvqe_zeno(Measurement::binary(no_zero), params, 10)), no_zero), 0.0,
                1e-14);
    EXPECT_EQ(lvqe_circuit(3, 2, Measurement::binary(no_zero), 5, true).blocks.size(),
              static_cast<std::size_t>(lvqe_param_count(3, 2)));
    EXPECT_EQ(lvqe_circuit(3, 2, Measurement::binary(no_zero), 5).total_measurements(), 5);
    EXPECT_THROW(LvqeParams::from_flat(3, 2, std::vector<double>(5, 0.0)), ValidationError);
}

TEST(ansatz, adiabatic_schedule_values) {
    auto a = adiabatic_schedule({1.0, 2});
    EXPECT_EQ(a.betas, (std::vector<double>{-0.25, 0.0}));
    EXPECT_EQ(a.gammas, (std::vector<double>{-0.25, -0.5}));
    auto b = adiabatic_schedule({3.0, 1});
    EXPECT_EQ(b.betas, (std::vector<double>{0.0}));
    EXPECT_EQ(b.gammas, (std::vector<double>{-3.0}));
    auto c = adiabatic_schedule({0.0, 4});
    for (double x : c.flat()) {
        EXPECT_EQ(x, 0.0);
    }
    EXPECT_THROW(adiabatic_schedule({1.0, 0}), ValidationError);
}

TEST(ansatz, projected_ground_state_is_lowest_eigenvector_of_block) {
    auto f = feasible_states(generate_instance(4, 7));
    auto g = projected_ground_state(Generator::transverse_field(4), f);
    EXPECT_NEAR(weight_in(QuantumState(g), f), 1.0, 1e-14);
    oracle::Mat pf = f.materialize();
    oracle::Mat h = pf * oracle::transverse_field(4) * pf;
    double energy = g.amplitudes().dot(h * g.amplitudes()).real();
    // Lowest eigenvalue of the block: eigenvalues of P H P include zeros from outside F, so restrict.
    std::vector<Eigen::Index> idx(f.indices().begin(), f.indices().end());
    oracle::Mat block(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < idx.size(); ++j) {
            block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h(idx[i], idx[j]);
        }
    }
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(block);
    EXPECT_NEAR(energy, es.eigenvalues()(0), 1e-12);
}
