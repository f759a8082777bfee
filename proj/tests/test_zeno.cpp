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
#include "zenoq/zeno.hpp"

using namespace zenoq;

namespace {

const double kPi = std::numbers::pi;

oracle::Mat dense_measure(const oracle::Mat &rho, const Measurement &m) {
    oracle::Mat out = oracle::Mat::Zero(rho.rows(), rho.cols());
    for (const auto &p : m.projectors()) {
        oracle::Mat pm = p.materialize();
        out += pm * rho * pm;
    }
    return out;
}

// [P prod_j U_j(angle_j / N)]^N from matrix exponentials.
oracle::Mat dense_zeno_block(oracle::Mat rho, const std::vector<std::pair<oracle::Mat, double>> &gens,
                             const Measurement &m, int n) {
    oracle::Mat u = oracle::Mat::Identity(rho.rows(), rho.cols());
    for (const auto &[h, a] : gens) {
        u = (oracle::expm(h, a / n) * u).eval();
    }
    for (int k = 0; k < n; ++k) {
        rho = dense_measure(u * rho * u.adjoint(), m);
    }
    return rho;
}

// One-qubit worst case: H = (span / 2) X, P = |0><0|, rho0 = |0><0|, an equal mix of the extreme eigenvectors.
double worst_case_survival(double theta, double span, int n) {
    oracle::Mat h = 0.5 * span * oracle::pauli('X');
    Measurement m = Measurement::binary(Projector(1, {0}));
    QuantumState state = StateVector::basis(1, 0);
    std::vector<Evolution> evs{{Generator::dense_hermitian(h), theta}};
    zeno_block(state, evs, m, n);
    return probabilities(state)[0];
}

Projector random_subspace(std::mt19937_64 &rng, int n) {
    const std::uint64_t d = dim_of(n);
    std::vector<std::uint64_t> idx;
    while (idx.empty() || idx.size() == d) {
        idx.clear();
        for (std::uint64_t x = 0; x < d; ++x) {
            if (rng() % 2) {
                idx.push_back(x);
            }
        }
    }
    return Projector(n, idx);
}

StateVector random_state_in(std::mt19937_64 &rng, const Projector &p) {
    oracle::Vec v = oracle::random_state(rng, static_cast<Eigen::Index>(p.dim()));
    for (std::uint64_t x = 0; x < p.dim(); ++x) {
        if (!p.contains(x)) {
            v[static_cast<Eigen::Index>(x)] = 0.0;
        }
    }
    return StateVector(v.normalized());
}

}  // namespace

TEST(zeno, measurement_dephases_in_basis) {
    DensityMatrix rho = DensityMatrix::from_pure(StateVector::uniform(1));
    apply_measurement(rho, Measurement::binary(Projector(1, {0})));
    EXPECT_LT(oracle::max_abs(rho.entries() - 0.5 * oracle::Mat::Identity(2, 2)), 1e-15);
}

TEST(zeno, measurement_keeps_in_subspace_states) {
    std::mt19937_64 rng(1);
    Projector p(3, {0, 3, 5, 6});
    auto m = Measurement::binary(p);
    DensityMatrix rho = DensityMatrix::from_pure(random_state_in(rng, p));
    auto before = rho.entries();
    apply_measurement(rho, m);
    EXPECT_LT(oracle::max_abs(rho.entries() - before), 1e-15);
}

TEST(zeno, measurement_matches_projector_sum_and_is_idempotent) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = Measurement::binary(random_subspace(rng, 3));
        oracle::Mat r = oracle::random_density(rng, 8);
        DensityMatrix rho(r);
        apply_measurement(rho, m);
        EXPECT_LT(oracle::max_abs(rho.entries() - dense_measure(r, m)), 1e-14);
        auto once = rho.entries();
        apply_measurement(rho, m);
        EXPECT_LT(oracle::max_abs(rho.entries() - once), 1e-12);
        EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
    }
}

TEST(zeno, measurement_commutes_with_diagonal_evolution) {
    std::mt19937_64 rng(3);
    std::vector<double> c(8);
    for (auto &v : c) {
        v = static_cast<double>(rng() % 1000) / 100.0;
    }
    auto cost = Generator::diagonal(c);
    for (int trial = 0; trial < 10; ++trial) {
        auto m = Measurement::binary(random_subspace(rng, 3));
        DensityMatrix a(oracle::random_density(rng, 8));
        DensityMatrix b = a;
        apply_evolution(a, cost, 0.7);
        apply_measurement(a, m);
        apply_measurement(b, m);
        apply_evolution(b, cost, 0.7);
        EXPECT_LT(oracle::max_abs(a.entries() - b.entries()), 1e-12);
    }
}

TEST(zeno, lemma1_single_step_weight) {
    for (double theta : {0.1, 0.8, 1.9}) {
        for (double span : {1.0, 2.5}) {
            EXPECT_NEAR(worst_case_survival(theta, span, 1), std::pow(std::cos(span * theta / 2), 2), 1e-13);
        }
    }
}

TEST(zeno, lemma2_closed_form_is_exact) {
    for (int n = 1; n <= 100; ++n) {
        EXPECT_NEAR(worst_case_survival(1.0, 1.0, n), survival_bound_lemma2(1.0, n, 1.0), 1e-10) << n;
        EXPECT_NEAR(worst_case_survival(1.7, 1.7, n), survival_bound_lemma2(1.7, n, 1.7), 1e-10) << n;
    }
}

TEST(zeno, block_matches_dense_oracle) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 2);
        const auto d = static_cast<Eigen::Index>(dim_of(n));
        auto m = Measurement::binary(random_subspace(rng, n));
        oracle::Mat h1 = oracle::random_hermitian(rng, d);
        oracle::Mat h2 = oracle::random_hermitian(rng, d);
        const int steps = 1 + static_cast<int>(rng() % 6);
        oracle::Mat r = oracle::random_density(rng, d);
        DensityMatrix rho(r);
        std::vector<Evolution> evs{{Generator::dense_hermitian(h1), 0.7}, {Generator::transverse_field(n), -1.1},
                                   {Generator::dense_hermitian(h2), 0.3}};
        zeno_block(rho, evs, m, steps);
        auto ref = dense_zeno_block(r, {{h1, 0.7}, {oracle::transverse_field(n), -1.1}, {h2, 0.3}}, m, steps);
        EXPECT_LT(oracle::max_abs(rho.entries() - ref), 1e-10);
    }
}

TEST(zeno, zero_measurements_apply_unscaled_product_without_promotion) {
    QuantumState state = StateVector::basis(2, 0);
    std::vector<Evolution> evs{{Generator::transverse_field(2), 0.4}};
    zeno_block(state, evs, Measurement::binary(Projector(2, {0})), 0);
    ASSERT_TRUE(std::holds_alternative<StateVector>(state));
    oracle::Vec ref = oracle::expm(oracle::transverse_field(2), 0.4).col(0);
    EXPECT_LT((std::get<StateVector>(state).amplitudes() - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(zeno, zero_angle_block_is_identity) {
    Projector f(2, {1, 2});
    oracle::Vec v = oracle::Vec::Zero(4);
    v[1] = 0.6;
    v[2] = cplx(0.0, 0.8);
    DensityMatrix rho = DensityMatrix::from_pure(StateVector(v));
    auto before = rho.entries();
    std::vector<Evolution> evs{{Generator::transverse_field(2), 0.0}};
    zeno_block(rho, evs, Measurement::binary(f), 5);
    EXPECT_LT(oracle::max_abs(rho.entries() - before), 1e-15);
}

TEST(zeno, suppressed_mixer_freezes_dynamics) {
    Projector f(2, {1, 2});
    auto m = Measurement::binary(f);
    oracle::Vec v = oracle::Vec::Zero(4);
    v[1] = 0.6;
    v[2] = cplx(0.0, 0.8);
    DensityMatrix start = DensityMatrix::from_pure(StateVector(v));
    std::vector<Evolution> evs{{Generator::transverse_field(2), 1.2}};

    double previous = 1.0;
    for (int n : {10, 100, 1000}) {
        DensityMatrix rho = start;
        zeno_block(rho, evs, m, n);
        double dist = trace_distance(rho, start);
        EXPECT_LT(dist, previous);
        previous = dist;
    }
    EXPECT_LT(previous, 1e-2);

    DensityMatrix limit = start;
    zeno_limit_propagator(limit, evs, m);
    EXPECT_LT(oracle::max_abs(limit.entries() - start.entries()), 1e-15);
}

TEST(zeno, limit_with_trivial_measurement_is_plain_evolution) {
    std::mt19937_64 rng(6);
    oracle::Mat h = oracle::random_hermitian(rng, 4);
    oracle::Mat r = oracle::random_density(rng, 4);
    DensityMatrix a(r);
    std::vector<Evolution> evs{{Generator::dense_hermitian(h), 0.9}};
    zeno_limit_propagator(a, evs, Measurement::trivial(2));
    oracle::Mat u = oracle::expm(h, 0.9);
    EXPECT_LT(oracle::max_abs(a.entries() - u * r * u.adjoint()), 1e-10);
}

TEST(zeno, finite_blocks_converge_to_limit_at_first_order) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 3; ++trial) {
        auto m = Measurement::binary(random_subspace(rng, 3));
        DensityMatrix start = DensityMatrix::from_pure(StateVector(oracle::random_state(rng, 8)));
        std::vector<Evolution> evs{{Generator::dense_hermitian(oracle::random_hermitian(rng, 8)), 1.0}};
        DensityMatrix limit = start;
        zeno_limit_propagator(limit, evs, m);
        std::vector<double> errors;
        for (int n : {16, 32, 64, 128, 256}) {
            DensityMatrix rho = start;
            apply_measurement(rho, m);
            zeno_block(rho, evs, m, n);
            errors.push_back(trace_distance(rho, limit));
        }
        for (std::size_t k = 1; k < errors.size(); ++k) {
            double ratio = errors[k - 1] / errors[k];
            EXPECT_GE(ratio, 1.5);
            EXPECT_LE(ratio, 2.5);
        }
    }
}

TEST(zeno, theorem1_schedule_keeps_weight_in_subspace) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const double deltas[] = {0.05, 0.1, 0.19};
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 3);
        auto p = random_subspace(rng, n);
        auto g = Generator::dense_hermitian(oracle::random_hermitian(rng, static_cast<Eigen::Index>(dim_of(n))));
        const double theta = angle(rng);
        const double delta = deltas[trial % 3];
        auto span = spectral_span(g);
        const int steps = schedule_theorem1(theta, span.xi_min, span.xi_max, delta);
        QuantumState state = random_state_in(rng, p);
        std::vector<Evolution> evs{{g, theta}};
        zeno_block(state, evs, Measurement::binary(p), steps);
        double w = 0.0;
        auto probs = probabilities(state);
        for (auto i : p.indices()) {
            w += probs[i];
        }
        EXPECT_GE(w, 1.0 - delta);
    }
}

TEST(zeno, corollary1_schedule_for_non_commuting_blocks) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> angle(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 3);
        const auto d = static_cast<Eigen::Index>(dim_of(n));
        auto p = random_subspace(rng, n);
        auto m = Measurement::binary(p);
        const double delta = trial % 2 ? 0.1 : 0.19;
        const int blocks = 1 + static_cast<int>(rng() % 2);
        std::vector<std::vector<Evolution>> evs(static_cast<std::size_t>(blocks));
        std::vector<double> sums;
        std::vector<double> norms;
        for (auto &block : evs) {
            double sum = 0.0;
            double norm = 0.0;
            for (int j = 0; j < 2; ++j) {
                auto g = Generator::dense_hermitian(oracle::random_hermitian(rng, d, 0.5));
                double a = angle(rng);
                block.push_back({g, a});
                sum += std::abs(a);
                norm = std::max(norm, spectral_span(g).norm());
            }
            sums.push_back(sum);
            norms.push_back(norm);
        }
        auto counts = schedule_cor1(sums, norms, blocks, delta, false);
        QuantumState state = random_state_in(rng, p);
        for (int k = 0; k < blocks; ++k) {
            zeno_block(state, evs[static_cast<std::size_t>(k)], m, counts[static_cast<std::size_t>(k)]);
        }
        double w = 0.0;
        auto probs = probabilities(state);
        for (auto i : p.indices()) {
            w += probs[i];
        }
        EXPECT_GE(w, 1.0 - delta);
    }
}

TEST(zeno, schedule_values) {
    EXPECT_EQ(schedule_theorem1(1.0, 0.0, 1.0, 0.19), 2);
    EXPECT_EQ(schedule_theorem1(0.0, -3.0, 3.0, 0.1), 1);
    EXPECT_EQ(schedule_theorem1(kPi, -1.0, 1.0, 0.1), 89);

    const double one[] = {1.0};
    EXPECT_EQ(schedule_cor1(one, one, 1, 0.19, true), std::vector<int>{5});
    EXPECT_EQ(schedule_cor1(one, one, 1, 0.19, false), std::vector<int>{11});

    EXPECT_EQ(schedule_cor3(Generator::transverse_field(3), kPi / 2, 1, 3, 0.19), 93);
    EXPECT_EQ(schedule_cor3(Generator::rank_one_uniform(3), kPi, 1, 3, 0.19), 11);
    EXPECT_EQ(schedule_cor3(Generator::transverse_field(3), 0.0, 2, 3, 0.1), 1);
    EXPECT_EQ(schedule_cor3(Generator::rank_one_uniform(3), 0.0, 2, 3, 0.1), 1);

    EXPECT_EQ(schedule_eta(1.6, 1.6), 2);
    EXPECT_EQ(schedule_eta(0.0, 0.3), 1);
    EXPECT_EQ(schedule_eta(1.0, 0.01), 100);

    EXPECT_EQ(repetitions_cor2(0.5, 0.01), 7);
    EXPECT_EQ(repetitions_cor2(0.99, 0.5), 1);
    EXPECT_EQ(repetitions_cor2(1.0, 0.01), 1);
}

TEST(zeno, corollary1_is_linear_in_block_count) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(0.01, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double s[] = {u(rng)};
        const double h[] = {u(rng)};
        const double delta = 0.19 * u(rng) / 3.0;
        const double t = -1.78 * std::log(1.0 - delta);
        for (int l : {1, 2}) {
            double raw = 4.0 * l * s[0] * s[0] * h[0] * h[0] / t;
            int expected = std::max(1, static_cast<int>(std::ceil(raw)));
            int got = schedule_cor1(s, h, l, delta, false)[0];
            // The library uses log1p; allow the ceiling to land on either side of an exact integer.
            EXPECT_LE(std::abs(got - expected), std::abs(raw - std::round(raw)) < 1e-9 ? 1 : 0);
        }
    }
}

TEST(zeno, corollary3_matches_theorem1_at_single_layer) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> beta(-kPi, kPi);
    std::uniform_real_distribution<double> delta(1e-3, 0.19);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        const double b = beta(rng);
        const double d = delta(rng);
        EXPECT_EQ(schedule_cor3(Generator::transverse_field(n), b, 1, n, d),
                  schedule_theorem1(b, -static_cast<double>(n), static_cast<double>(n), d));
    }
}

TEST(zeno, survival_bound_edge_cases) {
    EXPECT_NEAR(survival_bound_lemma2(0.8, 1, 1.5), std::pow(std::cos(0.6), 2), 1e-15);
    EXPECT_NEAR(survival_bound_lemma2(kPi, 1, 1.0), 0.0, 1e-15);
    EXPECT_THROW(survival_bound_lemma2(4.0, 1, 1.0), ValidationError);
}

TEST(zeno, schedule_rejects_bad_inputs) {
    EXPECT_THROW(schedule_theorem1(1.0, 0.0, 1.0, 0.2), ValidationError);
    EXPECT_THROW(schedule_theorem1(1.0, 0.0, 1.0, 0.0), ValidationError);
    EXPECT_THROW(schedule_eta(1.0, 0.0), ValidationError);
    EXPECT_THROW(schedule_cor3(Generator::pauli_string("XX"), 1.0, 1, 2, 0.1), ValidationError);
    EXPECT_THROW(repetitions_cor2(0.0, 0.1), ValidationError);
    EXPECT_THROW(repetitions_cor2(0.5, 1.0), ValidationError);
    EXPECT_THROW(tau(0.3, true), ValidationError);
}

TEST(zeno, long_measured_chains_stay_valid) {
    std::mt19937_64 rng(16);
    auto m = Measurement::binary(random_subspace(rng, 3));
    DensityMatrix rho(oracle::random_density(rng, 8));
    std::vector<Evolution> evs{{Generator::transverse_field(3), 2.0},
                               {Generator::dense_hermitian(oracle::random_hermitian(rng, 8)), 1.0}};
    zeno_block(rho, evs, m, 2000);
    EXPECT_TRUE(rho.is_valid(1e-9));
}
