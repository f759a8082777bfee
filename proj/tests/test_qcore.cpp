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

#include <cstdlib>
#include <numbers>

#include "oracles.hpp"
#include "zenoq/qcore.hpp"

using namespace zenoq;

namespace {

const double kPi = std::numbers::pi;

std::vector<Generator> generators_on(int n, std::mt19937_64 &rng) {
    std::vector<double> diag(dim_of(n));
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (auto &v : diag) {
        v = u(rng);
    }
    std::string paulis;
    const char letters[] = "IXYZ";
    for (int j = 0; j < n; ++j) {
        paulis += letters[rng() % 4];
    }
    return {Generator::diagonal(diag), Generator::transverse_field(n), Generator::rank_one_uniform(n),
            Generator::pauli_string(paulis),
            Generator::dense_hermitian(oracle::random_hermitian(rng, static_cast<Eigen::Index>(dim_of(n))))};
}

}  // namespace

TEST(qcore, materialized_generators_match_kronecker_construction) {
    EXPECT_LT(oracle::max_abs(Generator::transverse_field(3).materialize() - oracle::transverse_field(3)), 1e-15);
    EXPECT_LT(oracle::max_abs(Generator::rank_one_uniform(3).materialize() - oracle::plus_projector(3)), 1e-15);
    for (const char *s : {"X", "Y", "Z", "XY", "YZI", "IZYX"}) {
        // Generator label: qubit j is character j; the oracle puts character j on qubit j too.
        EXPECT_LT(oracle::max_abs(Generator::pauli_string(s).materialize() - oracle::pauli_string(s)), 1e-15) << s;
    }
}

TEST(qcore, zero_angle_is_identity) {
    std::mt19937_64 rng(1);
    for (const auto &g : generators_on(2, rng)) {
        DensityMatrix rho(oracle::random_density(rng, 4));
        auto before = rho.entries();
        apply_evolution(rho, g, 0.0);
        EXPECT_LT(oracle::max_abs(rho.entries() - before), 1e-15);
    }
}

TEST(qcore, half_period_x_rotation_flips_qubit) {
    auto psi = StateVector::basis(1, 0);
    apply_evolution(psi, Generator::transverse_field(1), kPi / 2);
    EXPECT_NEAR(std::abs(psi[0]), 0.0, 1e-15);
    EXPECT_NEAR(psi[1].real(), 0.0, 1e-15);
    EXPECT_NEAR(psi[1].imag(), -1.0, 1e-15);
}

TEST(qcore, rank_one_overlap_matches_closed_form_and_dense_oracle) {
    for (double theta : {0.3, 1.1, 2.9, -0.7}) {
        auto psi = StateVector::basis(2, 0);
        apply_evolution(psi, Generator::rank_one_uniform(2), theta);
        cplx expected = 1.0 + (std::exp(cplx(0, -theta)) - 1.0) / 4.0;
        EXPECT_NEAR(std::norm(psi[0]), std::norm(expected), 1e-14);
        oracle::Vec ref = oracle::expm(oracle::plus_projector(2), theta).col(0);
        EXPECT_LT((psi.amplitudes() - ref).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(qcore, specialized_paths_agree_with_matrix_exponential) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int n = 1; n <= 4; ++n) {
        const auto d = static_cast<Eigen::Index>(dim_of(n));
        for (int trial = 0; trial < 5; ++trial) {
            for (const auto &g : generators_on(n, rng)) {
                const double a = angle(rng);
                oracle::Mat u = oracle::expm(g.materialize(), a);

                oracle::Vec v = oracle::random_state(rng, d);
                StateVector psi(v);
                apply_evolution(psi, g, a);
                EXPECT_LT((psi.amplitudes() - u * v).cwiseAbs().maxCoeff(), 1e-10);

                oracle::Mat r = oracle::random_density(rng, d);
                DensityMatrix rho(r);
                apply_evolution(rho, g, a);
                EXPECT_LT(oracle::max_abs(rho.entries() - u * r * u.adjoint()), 1e-10);

                // The same evolution through the dense path.
                DensityMatrix rho2(r);
                apply_evolution(rho2, Generator::dense_hermitian(g.materialize()), a);
                EXPECT_LT(oracle::max_abs(rho2.entries() - rho.entries()), 1e-10);
            }
        }
    }
}

TEST(qcore, evolutions_compose_additively) {
    std::mt19937_64 rng(11);
    for (const auto &g : generators_on(3, rng)) {
        DensityMatrix a(oracle::random_density(rng, 8));
        DensityMatrix b = a;
        apply_evolution(a, g, 0.4);
        apply_evolution(a, g, -1.3);
        apply_evolution(b, g, -0.9);
        EXPECT_LT(oracle::max_abs(a.entries() - b.entries()), 1e-10);
    }
}

TEST(qcore, density_matrix_stays_valid_over_long_chains) {
    std::mt19937_64 rng(3);
    auto gens = generators_on(3, rng);
    DensityMatrix rho(oracle::random_density(rng, 8));
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    for (int step = 0; step < 10000; ++step) {
        apply_evolution(rho, gens[static_cast<std::size_t>(step) % gens.size()], angle(rng));
    }
    EXPECT_TRUE(rho.is_valid(1e-9));
    EXPECT_NEAR(rho.trace(), 1.0, 1e-9);
}

TEST(qcore, expectation_values) {
    EXPECT_NEAR(expectation(StateVector::basis(1, 0), Generator::diagonal({5, 7})), 5.0, 1e-15);
    EXPECT_NEAR(expectation(DensityMatrix::maximally_mixed(1), Generator::diagonal({3, -8})), -2.5, 1e-15);
    EXPECT_NEAR(expectation(StateVector::uniform(2), Generator::transverse_field(2)), 2.0, 1e-14);
    EXPECT_NEAR(expectation(StateVector::uniform(3), Generator::rank_one_uniform(3)), 1.0, 1e-14);
}

TEST(qcore, expectation_matches_trace_formula) {
    std::mt19937_64 rng(5);
    for (const auto &g : generators_on(3, rng)) {
        oracle::Mat r = oracle::random_density(rng, 8);
        double ref = (g.materialize() * r).trace().real();
        EXPECT_NEAR(expectation(DensityMatrix(r), g), ref, 1e-12);
        oracle::Vec v = oracle::random_state(rng, 8);
        double ref_pure = v.dot(g.materialize() * v).real();
        EXPECT_NEAR(expectation(StateVector(v), g), ref_pure, 1e-12);
    }
}

TEST(qcore, rejects_invalid_input) {
    auto two = StateVector::basis(2, 0);
    EXPECT_THROW(apply_evolution(two, Generator::transverse_field(3), 0.1), ValidationError);
    auto psi = StateVector::basis(1, 0);
    EXPECT_THROW(apply_evolution(psi, Generator::transverse_field(1), std::nan("")), ValidationError);
    oracle::Mat m(2, 2);
    m << 0, 1, 0, 0;
    EXPECT_THROW(Generator::dense_hermitian(m), ValidationError);
    EXPECT_THROW(Generator::pauli_string("XQ"), ValidationError);
    EXPECT_THROW(StateVector::basis(kHardQubitCap + 1, 0), ValidationError);
    EXPECT_THROW(StateVector(oracle::Vec::Ones(4)), ValidationError);
}

TEST(qcore, qubit_cap_can_only_be_lowered) {
    ::setenv("ZENO_MAX_QUBITS", "3", 1);
    EXPECT_EQ(max_qubits(), 3);
    EXPECT_THROW(Generator::transverse_field(4), ValidationError);
    ::setenv("ZENO_MAX_QUBITS", "40", 1);
    EXPECT_EQ(max_qubits(), kHardQubitCap);
    ::unsetenv("ZENO_MAX_QUBITS");
    EXPECT_EQ(max_qubits(), kHardQubitCap);
}

TEST(qcore, involution_flags) {
    EXPECT_TRUE(Generator::pauli_string("XYZ").is_involutory());
    EXPECT_TRUE(Generator::transverse_field(1).is_involutory());
    EXPECT_FALSE(Generator::transverse_field(2).is_involutory());
    EXPECT_FALSE(Generator::rank_one_uniform(2).is_involutory());
    EXPECT_TRUE(Generator::diagonal({1, -1, -1, 1}).is_involutory());
    EXPECT_FALSE(Generator::diagonal({1, 0.5}).is_involutory());
}
