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

// Gate-level circuits with mid-circuit measurement and classical control, an exact
// branch-enumerating simulator, and Fourier-arithmetic constraint oracles.
//
// Qubit q of a circuit is bit q of the basis index. Builders place the system register on
// qubits [0, n) and auxiliary qubits after it.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "zenoq/operators.hpp"
#include "zenoq/problems.hpp"
#include "zenoq/qcore.hpp"

namespace zenoq {

// ---------------------------------------------------------------------------
// Circuit IR

enum class OpKind { H, X, PHASE, CP, CNOT, MEASURE, RESET, CCOND, BARRIER };

struct Op {
    OpKind kind = OpKind::BARRIER;
    std::vector<int> controls;  // CP: one or more controls; CNOT: exactly one
    int target = -1;
    double angle = 0.0;         // PHASE, CP
    int clbit = -1;             // MEASURE destination, CCOND condition
    std::shared_ptr<const Op> inner;  // CCOND body, applied when the clbit is 1

    static Op make(OpKind kind, int target = -1, double angle = 0.0) {
        Op op;
        op.kind = kind;
        op.target = target;
        op.angle = angle;
        return op;
    }
    static Op h(int q) {
        return make(OpKind::H, q);
    }
    static Op x(int q) {
        return make(OpKind::X, q);
    }
    static Op phase(int q, double a) {
        return make(OpKind::PHASE, q, a);
    }
    static Op cp(std::vector<int> controls, int t, double a) {
        Op op = make(OpKind::CP, t, a);
        op.controls = std::move(controls);
        return op;
    }
    static Op cnot(int c, int t) {
        Op op = make(OpKind::CNOT, t);
        op.controls = {c};
        return op;
    }
    static Op measure(int q, int c) {
        Op op = make(OpKind::MEASURE, q);
        op.clbit = c;
        return op;
    }
    static Op reset(int q) {
        return make(OpKind::RESET, q);
    }
    static Op ccond(int c, Op body) {
        Op op = make(OpKind::CCOND);
        op.clbit = c;
        op.inner = std::make_shared<const Op>(std::move(body));
        return op;
    }
    static Op barrier() {
        return make(OpKind::BARRIER);
    }

    bool is_unitary_gate() const {
        return kind == OpKind::H || kind == OpKind::X || kind == OpKind::PHASE || kind == OpKind::CP ||
               kind == OpKind::CNOT;
    }

    /// Inverse of a unitary gate.
    Op inverse() const {
        require(is_unitary_gate() || kind == OpKind::BARRIER, "only unitary gates can be inverted");
        Op out = *this;
        if (kind == OpKind::PHASE || kind == OpKind::CP) {
            out.angle = angle == 0.0 ? 0.0 : -angle;
        }
        return out;
    }
};

struct Circuit {
    int num_qubits = 0;
    int num_clbits = 0;
    int system_qubits = 0;  // leading qubits holding the system register; the rest are auxiliary
    std::vector<Op> ops;

    void validate() const {
        require(num_qubits >= 1 && num_qubits <= 62, "circuit qubit count out of range");
        require(num_clbits >= 0, "negative clbit count");
        require(system_qubits >= 0 && system_qubits <= num_qubits, "system register larger than the circuit");
        for (const auto &op : ops) {
            validate_op(op, false);
        }
    }

    void append(const Circuit &other) {
        require(other.num_qubits <= num_qubits && other.num_clbits <= num_clbits, "appended circuit does not fit");
        ops.insert(ops.end(), other.ops.begin(), other.ops.end());
    }

private:
    void check_qubit(int q) const {
        require(q >= 0 && q < num_qubits, "qubit index " + std::to_string(q) + " out of range");
    }
    void check_clbit(int c) const {
        require(c >= 0 && c < num_clbits, "clbit index " + std::to_string(c) + " out of range");
    }
    void validate_op(const Op &op, bool nested) const {
        switch (op.kind) {
            case OpKind::H:
            case OpKind::X:
            case OpKind::RESET:
                check_qubit(op.target);
                break;
            case OpKind::PHASE:
                check_qubit(op.target);
                require(std::isfinite(op.angle), "phase angle is not finite");
                break;
            case OpKind::CP:
            case OpKind::CNOT: {
                check_qubit(op.target);
                require(!op.controls.empty(), "controlled gate without controls");
                require(op.kind == OpKind::CP || op.controls.size() == 1, "CNOT takes exactly one control");
                require(std::isfinite(op.angle), "phase angle is not finite");
                std::vector<int> all = op.controls;
                all.push_back(op.target);
                for (int q : all) {
                    check_qubit(q);
                }
                std::sort(all.begin(), all.end());
                require(std::adjacent_find(all.begin(), all.end()) == all.end(), "repeated qubit in controlled gate");
                break;
            }
            case OpKind::MEASURE:
                check_qubit(op.target);
                check_clbit(op.clbit);
                break;
            case OpKind::CCOND:
                require(!nested, "nested classical conditions are not supported");
                check_clbit(op.clbit);
                require(op.inner && op.inner->is_unitary_gate(), "classical condition must wrap a unitary gate");
                validate_op(*op.inner, true);
                break;
            case OpKind::BARRIER:
                break;
        }
    }
};

// ---------------------------------------------------------------------------
// Text format
//
//   QUBITS 5
//   CLBITS 3
//   SYSTEM 4
//   H 4
//   CP 0,1 4 -1.5707963267948966
//   MEASURE 4 -> c0
//   CCOND c0 PHASE 4 -0.7853981633974483
//   RESET 4
//   BARRIER
//
// Angles are written in shortest round-trip decimal form; '#' starts a comment line.

namespace detail {

inline std::string format_angle(double a) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), a);
    return std::string(buf, res.ptr);
}

inline double parse_angle(const std::string &tok) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ValidationError("bad angle '" + tok + "'");
    }
    return v;
}

inline int parse_index(const std::string &tok) {
    int v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0) {
        throw ValidationError("bad index '" + tok + "'");
    }
    return v;
}

inline int parse_clbit(const std::string &tok) {
    if (tok.size() < 2 || tok[0] != 'c') {
        throw ValidationError("bad clbit '" + tok + "'");
    }
    return parse_index(tok.substr(1));
}

inline std::string format_op(const Op &op) {
    switch (op.kind) {
        case OpKind::H:
            return "H " + std::to_string(op.target);
        case OpKind::X:
            return "X " + std::to_string(op.target);
        case OpKind::PHASE:
            return "PHASE " + std::to_string(op.target) + " " + format_angle(op.angle);
        case OpKind::CP: {
            std::string s = "CP ";
            for (std::size_t i = 0; i < op.controls.size(); ++i) {
                s += (i ? "," : "") + std::to_string(op.controls[i]);
            }
            return s + " " + std::to_string(op.target) + " " + format_angle(op.angle);
        }
        case OpKind::CNOT:
            return "CNOT " + std::to_string(op.controls.at(0)) + " " + std::to_string(op.target);
        case OpKind::MEASURE:
            return "MEASURE " + std::to_string(op.target) + " -> c" + std::to_string(op.clbit);
        case OpKind::RESET:
            return "RESET " + std::to_string(op.target);
        case OpKind::CCOND:
            return "CCOND c" + std::to_string(op.clbit) + " " + format_op(*op.inner);
        case OpKind::BARRIER:
            return "BARRIER";
    }
    return "";
}

inline Op parse_op(std::istringstream &in, const std::string &line) {
    std::string name;
    in >> name;
    auto next = [&]() {
        std::string t;
        if (!(in >> t)) {
            throw ValidationError("truncated instruction: " + line);
        }
        return t;
    };
    if (name == "H") {
        return Op::h(parse_index(next()));
    }
    if (name == "X") {
        return Op::x(parse_index(next()));
    }
    if (name == "PHASE") {
        int q = parse_index(next());
        return Op::phase(q, parse_angle(next()));
    }
    if (name == "CP") {
        std::string ctl = next();
        std::vector<int> controls;
        std::size_t start = 0;
        while (true) {
            auto comma = ctl.find(',', start);
            controls.push_back(parse_index(ctl.substr(start, comma - start)));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        int t = parse_index(next());
        return Op::cp(std::move(controls), t, parse_angle(next()));
    }
    if (name == "CNOT") {
        int c = parse_index(next());
        return Op::cnot(c, parse_index(next()));
    }
    if (name == "MEASURE") {
        int q = parse_index(next());
        if (next() != "->") {
            throw ValidationError("expected '->' in: " + line);
        }
        return Op::measure(q, parse_clbit(next()));
    }
    if (name == "RESET") {
        return Op::reset(parse_index(next()));
    }
    if (name == "CCOND") {
        int c = parse_clbit(next());
        return Op::ccond(c, parse_op(in, line));
    }
    if (name == "BARRIER") {
        return Op::barrier();
    }
    throw ValidationError("unknown instruction: " + line);
}

}  // namespace detail

inline std::string circuit_to_text(const Circuit &c) {
    std::string out = "QUBITS " + std::to_string(c.num_qubits) + "\nCLBITS " + std::to_string(c.num_clbits) +
                      "\nSYSTEM " + std::to_string(c.system_qubits) + "\n";
    for (const auto &op : c.ops) {
        out += detail::format_op(op) + "\n";
    }
    return out;
}

inline Circuit circuit_from_text(const std::string &text) {
    Circuit c;
    bool have_qubits = false;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream in(line);
        std::string head;
        in >> head;
        if (head == "QUBITS" || head == "CLBITS" || head == "SYSTEM") {
            std::string v;
            in >> v;
            int value = detail::parse_index(v);
            if (head == "QUBITS") {
                c.num_qubits = value;
                have_qubits = true;
            } else if (head == "CLBITS") {
                c.num_clbits = value;
            } else {
                c.system_qubits = value;
            }
            continue;
        }
        std::istringstream again(line);
        c.ops.push_back(detail::parse_op(again, line));
        std::string extra;
        if (again >> extra) {
            throw ValidationError("trailing tokens in: " + line);
        }
    }
    require(have_qubits, "circuit text lacks a QUBITS header");
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Resource counts

struct ResourceCount {
    std::map<std::string, int> per_kind;  // top-level instruction counts by mnemonic
    int controlled_phase = 0;             // CP gates, including classically conditioned ones
    int multi_controlled_phase = 0;       // CP gates with two or more controls
    int bank_rotations = 0;               // phase gates on auxiliary qubits controlled only by system qubits
    int measurements = 0;
    int resets = 0;
    int classically_controlled = 0;
    int two_qubit_gates = 0;              // CP and CNOT acting on exactly two qubits
    int aux_qubits = 0;
    std::string t_count_reversible = "O(K(n+m))";
    std::string t_count_fourier_load = "O(Kmn)";
    std::string t_count_total = "O(Kmn + m log m)";
};

inline ResourceCount count_resources(const Circuit &c) {
    ResourceCount rc;
    rc.aux_qubits = c.num_qubits - c.system_qubits;
    static const char *kNames[] = {"H", "X", "PHASE", "CP", "CNOT", "MEASURE", "RESET", "CCOND", "BARRIER"};
    auto count_gate = [&](const Op &op, bool conditioned) {
        if (op.kind == OpKind::CP) {
            ++rc.controlled_phase;
            if (op.controls.size() >= 2) {
                ++rc.multi_controlled_phase;
            }
            if (op.controls.size() == 1) {
                ++rc.two_qubit_gates;
            }
        }
        if (op.kind == OpKind::CNOT) {
            ++rc.two_qubit_gates;
        }
        if (!conditioned && (op.kind == OpKind::CP || op.kind == OpKind::PHASE) && op.target >= c.system_qubits) {
            bool system_controls = std::all_of(op.controls.begin(), op.controls.end(),
                                               [&](int q) { return q < c.system_qubits; });
            if (system_controls) {
                ++rc.bank_rotations;
            }
        }
    };
    for (const auto &op : c.ops) {
        ++rc.per_kind[kNames[static_cast<int>(op.kind)]];
        switch (op.kind) {
            case OpKind::MEASURE:
                ++rc.measurements;
                break;
            case OpKind::RESET:
                ++rc.resets;
                break;
            case OpKind::CCOND:
                ++rc.classically_controlled;
                count_gate(*op.inner, true);
                break;
            default:
                count_gate(op, false);
        }
    }
    return rc;
}

// ---------------------------------------------------------------------------
// Simulation

namespace detail {

inline void apply_gate(ComplexVector &v, const Op &op) {
    const auto d = v.size();
    const Eigen::Index tbit = Eigen::Index{1} << op.target;
    switch (op.kind) {
        case OpKind::H: {
            const double s = std::numbers::sqrt2 / 2.0;
            for (Eigen::Index i = 0; i < d; ++i) {
                if (!(i & tbit)) {
                    cplx a = v[i];
                    cplx b = v[i | tbit];
                    v[i] = s * (a + b);
                    v[i | tbit] = s * (a - b);
                }
            }
            break;
        }
        case OpKind::X:
            for (Eigen::Index i = 0; i < d; ++i) {
                if (!(i & tbit)) {
                    std::swap(v[i], v[i | tbit]);
                }
            }
            break;
        case OpKind::PHASE:
        case OpKind::CP: {
            Eigen::Index mask = tbit;
            for (int q : op.controls) {
                mask |= Eigen::Index{1} << q;
            }
            const cplx ph = std::polar(1.0, op.angle);
            for (Eigen::Index i = 0; i < d; ++i) {
                if ((i & mask) == mask) {
                    v[i] *= ph;
                }
            }
            break;
        }
        case OpKind::CNOT: {
            const Eigen::Index cbit = Eigen::Index{1} << op.controls[0];
            for (Eigen::Index i = 0; i < d; ++i) {
                if ((i & cbit) && !(i & tbit)) {
                    std::swap(v[i], v[i | tbit]);
                }
            }
            break;
        }
        default:
            throw ValidationError("not a unitary gate");
    }
}

}  // namespace detail

/// Unitary of a measurement-free circuit.
inline ComplexMatrix circuit_unitary(const Circuit &c) {
    c.validate();
    check_qubit_count(c.num_qubits);
    const auto d = static_cast<Eigen::Index>(dim_of(c.num_qubits));
    ComplexMatrix u = ComplexMatrix::Identity(d, d);
    for (const auto &op : c.ops) {
        if (op.kind == OpKind::BARRIER) {
            continue;
        }
        require(op.is_unitary_gate(), "circuit contains non-unitary instructions");
        for (Eigen::Index col = 0; col < d; ++col) {
            ComplexVector v = u.col(col);
            detail::apply_gate(v, op);
            u.col(col) = v;
        }
    }
    return u;
}

/// One measurement history. `path` lists every measurement and reset outcome in order; `clbits` holds the
/// final classical register (clbit i at position i, unwritten bits read 0).
struct Branch {
    std::vector<std::uint8_t> path;
    std::vector<std::uint8_t> clbits;
    double probability = 0.0;
    ComplexVector state;  // normalized post-measurement state
    ComplexVector unnormalized;

    std::string clbit_string() const {
        std::string s;
        for (auto b : clbits) {
            s += b ? '1' : '0';
        }
        return s;
    }
};

inline constexpr double kBranchPruneProbability = 1e-14;

namespace detail {

// Splits every branch on the value of qubit q; outcome 1 of a reset is flipped back to |0>.
inline std::vector<Branch> split(std::vector<Branch> &branches, int q, int clbit, bool reset) {
    std::vector<Branch> out;
    out.reserve(branches.size() * 2);
    const Eigen::Index bit = Eigen::Index{1} << q;
    for (auto &b : branches) {
        for (std::uint8_t outcome = 0; outcome < 2; ++outcome) {
            ComplexVector v = b.unnormalized;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (((i & bit) != 0) != (outcome == 1)) {
                    v[i] = 0.0;
                }
            }
            double p = v.squaredNorm();
            if (p < kBranchPruneProbability) {
                continue;
            }
            if (reset && outcome == 1) {
                apply_gate(v, Op::x(q));
            }
            Branch nb;
            nb.path = b.path;
            nb.path.push_back(outcome);
            nb.clbits = b.clbits;
            if (clbit >= 0) {
                nb.clbits[static_cast<std::size_t>(clbit)] = outcome;
            }
            nb.unnormalized = std::move(v);
            out.push_back(std::move(nb));
        }
    }
    return out;
}

}  // namespace detail

/// Exact simulation that follows every measurement outcome with probability >= 1e-14.
inline std::vector<Branch> enumerate_branches(const Circuit &c, const ComplexVector &input) {
    c.validate();
    check_qubit_count(c.num_qubits);
    require(input.size() == static_cast<Eigen::Index>(dim_of(c.num_qubits)), "input state has the wrong dimension");
    require(std::abs(input.norm() - 1.0) <= kStateTolerance, "input state is not normalized");
    std::vector<Branch> branches(1);
    branches[0].clbits.assign(static_cast<std::size_t>(c.num_clbits), 0);
    branches[0].unnormalized = input;
    for (const auto &op : c.ops) {
        switch (op.kind) {
            case OpKind::BARRIER:
                break;
            case OpKind::MEASURE:
                branches = detail::split(branches, op.target, op.clbit, false);
                break;
            case OpKind::RESET:
                branches = detail::split(branches, op.target, -1, true);
                break;
            case OpKind::CCOND:
                for (auto &b : branches) {
                    if (b.clbits[static_cast<std::size_t>(op.clbit)]) {
                        detail::apply_gate(b.unnormalized, *op.inner);
                    }
                }
                break;
            default:
                for (auto &b : branches) {
                    detail::apply_gate(b.unnormalized, op);
                }
        }
    }
    for (auto &b : branches) {
        b.probability = b.unnormalized.squaredNorm();
        b.state = b.unnormalized / std::sqrt(b.probability);
    }
    return branches;
}

inline std::vector<Branch> enumerate_branches(const Circuit &c, const StateVector &input) {
    return enumerate_branches(c, input.amplitudes());
}

/// Probability of every classical register value, keyed by clbit string (c0 first).
inline std::map<std::string, double> outcome_distribution(const std::vector<Branch> &branches) {
    std::map<std::string, double> dist;
    for (const auto &b : branches) {
        dist[b.clbit_string()] += b.probability;
    }
    return dist;
}

/// One shot: every measurement outcome is drawn from rng.
inline Branch sample_circuit(const Circuit &c, const StateVector &input, Rng &rng) {
    c.validate();
    require(input.qubits() == c.num_qubits, "input state has the wrong dimension");
    Branch b;
    b.clbits.assign(static_cast<std::size_t>(c.num_clbits), 0);
    b.unnormalized = input.amplitudes();
    b.probability = 1.0;
    auto collapse = [&](int q, int clbit, bool reset) {
        std::vector<Branch> one{b};
        one.front().probability = 1.0;
        auto parts = detail::split(one, q, clbit, reset);
        double total = 0.0;
        for (auto &p : parts) {
            total += p.unnormalized.squaredNorm();
        }
        double u = rng.uniform() * total;
        std::size_t pick = 0;
        for (; pick + 1 < parts.size(); ++pick) {
            double w = parts[pick].unnormalized.squaredNorm();
            if (u < w) {
                break;
            }
            u -= w;
        }
        auto &chosen = parts[pick];
        double w = chosen.unnormalized.squaredNorm();
        b.path = chosen.path;
        b.clbits = chosen.clbits;
        b.probability *= w / total;
        b.unnormalized = chosen.unnormalized / std::sqrt(w);
    };
    for (const auto &op : c.ops) {
        switch (op.kind) {
            case OpKind::BARRIER:
                break;
            case OpKind::MEASURE:
                collapse(op.target, op.clbit, false);
                break;
            case OpKind::RESET:
                collapse(op.target, -1, true);
                break;
            case OpKind::CCOND:
                if (b.clbits[static_cast<std::size_t>(op.clbit)]) {
                    detail::apply_gate(b.unnormalized, *op.inner);
                }
                break;
            default:
                detail::apply_gate(b.unnormalized, op);
        }
    }
    b.state = b.unnormalized;
    return b;
}

// ---------------------------------------------------------------------------
// Induced channel on the system register

/// rho -> sum_k K_k rho K_k^dagger on the system register.
struct InducedChannel {
    int system_qubits = 0;
    std::vector<ComplexMatrix> kraus;

    ComplexMatrix apply(const ComplexMatrix &rho) const {
        ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
        for (const auto &k : kraus) {
            out += k * rho * k.adjoint();
        }
        return out;
    }

    DensityMatrix apply(const DensityMatrix &rho) const {
        return DensityMatrix(apply(rho.entries()));
    }

    double trace_preservation_error() const {
        const auto d = static_cast<Eigen::Index>(dim_of(system_qubits));
        ComplexMatrix s = ComplexMatrix::Zero(d, d);
        for (const auto &k : kraus) {
            s += k.adjoint() * k;
        }
        return (s - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
    }
};

/// Probe inputs |i>, (|i> + |j>)/sqrt2 and (|i> + i|j>)/sqrt2, labelled for diagnostics.
struct Probe {
    std::string label;
    ComplexVector state;
};

inline std::string basis_label(std::uint64_t i, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int j = 0; j < n; ++j) {
        if (bit_of(i, j)) {
            s[static_cast<std::size_t>(j)] = '1';
        }
    }
    return "|" + s + ">";  // x_1 first
}

inline std::vector<Probe> probe_states(int n) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    std::vector<Probe> out;
    for (Eigen::Index i = 0; i < d; ++i) {
        ComplexVector v = ComplexVector::Zero(d);
        v[i] = 1.0;
        out.push_back({basis_label(static_cast<std::uint64_t>(i), n), v});
    }
    const double s = std::numbers::sqrt2 / 2.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            ComplexVector v = ComplexVector::Zero(d);
            v[i] = s;
            v[j] = s;
            out.push_back({"(" + basis_label(static_cast<std::uint64_t>(i), n) + " + " +
                               basis_label(static_cast<std::uint64_t>(j), n) + ")/sqrt2",
                           v});
            v[j] = cplx(0.0, s);
            out.push_back({"(" + basis_label(static_cast<std::uint64_t>(i), n) + " + i" +
                               basis_label(static_cast<std::uint64_t>(j), n) + ")/sqrt2",
                           v});
        }
    }
    return out;
}

inline constexpr double kAuxPurityThreshold = 1.0 - 1e-9;

/// Kraus decomposition of the circuit acting on the first `system_qubits` qubits, auxiliaries starting in |0>.
/// Throws VerificationError if any branch leaves the auxiliaries entangled with the system.
inline InducedChannel induced_superoperator(const Circuit &c, int system_qubits) {
    c.validate();
    require(system_qubits >= 1 && system_qubits <= c.num_qubits, "system register out of range");
    const auto sd = static_cast<Eigen::Index>(dim_of(system_qubits));
    const auto fd = static_cast<Eigen::Index>(dim_of(c.num_qubits));
    const Eigen::Index ad = fd / sd;

    std::map<std::vector<std::uint8_t>, ComplexMatrix> per_path;
    for (Eigen::Index i = 0; i < sd; ++i) {
        ComplexVector in = ComplexVector::Zero(fd);
        in[i] = 1.0;
        for (auto &b : enumerate_branches(c, in)) {
            auto [it, fresh] = per_path.try_emplace(b.path, ComplexMatrix::Zero(fd, sd));
            it->second.col(i) = b.unnormalized;
        }
    }

    for (const auto &probe : probe_states(system_qubits)) {
        for (const auto &[path, k] : per_path) {
            ComplexVector out = k * probe.state;
            double p = out.squaredNorm();
            if (p < kBranchPruneProbability) {
                continue;
            }
            // Reshape into a system x aux matrix; aux purity is Tr[(M^dag M)^2] / p^2.
            Eigen::Map<const ComplexMatrix> m(out.data(), sd, ad);
            ComplexMatrix red = m.transpose() * m.conjugate();
            double purity = (red * red).trace().real() / (p * p);
            if (purity < kAuxPurityThreshold) {
                throw VerificationError("auxiliary qubits stay entangled with the system for input " + probe.label);
            }
        }
    }

    InducedChannel ch;
    ch.system_qubits = system_qubits;
    for (const auto &[path, k] : per_path) {
        for (Eigen::Index a = 0; a < ad; ++a) {
            ComplexMatrix block = k.middleRows(a * sd, sd);
            if (block.cwiseAbs().maxCoeff() > 1e-15) {
                ch.kraus.push_back(std::move(block));
            }
        }
    }
    return ch;
}

struct ChannelComparison {
    double max_distance = 0.0;
    std::string worst_probe;
    std::optional<std::string> first_mismatch;  // first probe above tolerance, in probe order
};

/// Maximum trace distance between the channel and a matrix-level measurement over probe_states.
inline ChannelComparison compare_with_measurement(const InducedChannel &ch, const Measurement &m,
                                                  double tol = 1e-9) {
    require(m.qubits() == ch.system_qubits, "measurement acts on a different register");
    ChannelComparison cmp;
    for (const auto &probe : probe_states(ch.system_qubits)) {
        ComplexMatrix rho = probe.state * probe.state.adjoint();
        DensityMatrix expected(rho);
        apply_measurement(expected, m);
        double dist = trace_distance(ch.apply(rho), expected.entries());
        if (dist > cmp.max_distance) {
            cmp.max_distance = dist;
            cmp.worst_probe = probe.label;
        }
        if (dist > tol && !cmp.first_mismatch) {
            cmp.first_mismatch = probe.label;
        }
    }
    return cmp;
}

// ---------------------------------------------------------------------------
// Two's complement and the quantum Fourier transform

inline std::uint64_t twos_complement(std::int64_t value, int m) {
    require(m >= 1 && m <= 62, "register width out of range");
    const std::int64_t lo = -(std::int64_t{1} << (m - 1));
    const std::int64_t hi = std::int64_t{1} << (m - 1);
    if (value < lo || value >= hi) {
        throw ValidationError("value " + std::to_string(value) + " overflows a " + std::to_string(m) +
                              "-bit two's complement register");
    }
    return static_cast<std::uint64_t>(value) & ((std::uint64_t{1} << m) - 1);
}

inline std::int64_t from_twos_complement(std::uint64_t bits, int m) {
    require(m >= 1 && m <= 62, "register width out of range");
    require(bits < (std::uint64_t{1} << m), "bit pattern wider than the register");
    return (bits >> (m - 1)) & 1U ? static_cast<std::int64_t>(bits) - (std::int64_t{1} << m)
                                  : static_cast<std::int64_t>(bits);
}

/// QFT |s> -> 2^{-m/2} sum_k e^{2 pi i k s / 2^m} |k> on qubits first..first+m-1.
///
/// Without swaps the output qubit order is reversed: qubit first+q holds the Fourier phase of weight 2^{m-1-q}.
/// The inverse is the reversed gate list with negated angles.
inline std::vector<Op> qft_ops(int m, int first, bool inverse, bool with_swaps) {
    require(m >= 1, "QFT width must be positive");
    std::vector<Op> ops;
    for (int q = m - 1; q >= 0; --q) {
        ops.push_back(Op::h(first + q));
        for (int l = q - 1; l >= 0; --l) {
            ops.push_back(Op::cp({first + l}, first + q, std::numbers::pi / static_cast<double>(1LL << (q - l))));
        }
    }
    if (with_swaps) {
        for (int q = 0; q < m / 2; ++q) {
            int a = first + q;
            int b = first + m - 1 - q;
            ops.push_back(Op::cnot(a, b));
            ops.push_back(Op::cnot(b, a));
            ops.push_back(Op::cnot(a, b));
        }
    }
    if (inverse) {
        std::reverse(ops.begin(), ops.end());
        for (auto &op : ops) {
            op = op.inverse();
        }
    }
    return ops;
}

inline Circuit qft_circuit(int m, bool inverse, bool with_swaps) {
    Circuit c;
    c.num_qubits = m;
    c.ops = qft_ops(m, 0, inverse, with_swaps);
    c.validate();
    return c;
}

/// In-place inverse QFT (no swaps) followed by measuring every qubit, with each two-qubit phase replaced by
/// a phase conditioned on an earlier measurement result. Clbit q receives bit q of the result.
inline Circuit semiclassical_inverse_qft(int m) {
    require(m >= 1, "QFT width must be positive");
    Circuit c;
    c.num_qubits = m;
    c.num_clbits = m;
    for (int q = 0; q < m; ++q) {
        for (int l = 0; l < q; ++l) {
            c.ops.push_back(Op::ccond(l, Op::phase(q, -std::numbers::pi / static_cast<double>(1LL << (q - l)))));
        }
        c.ops.push_back(Op::h(q));
        c.ops.push_back(Op::measure(q, q));
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------------------
// Fourier-arithmetic oracles

/// g(b) = sum_k d_k prod_{l in S_k} b_l with integer coefficients, loaded into an m-qubit
/// two's complement register.
struct FixedPointPoly {
    struct Term {
        std::int64_t coeff = 0;
        std::vector<int> subset;  // system qubit indices; empty means a constant term
    };
    std::vector<Term> terms;
    int precision = 1;

    /// Polynomial value on system bits b.
    std::int64_t value(std::uint64_t b) const {
        std::int64_t v = 0;
        for (const auto &t : terms) {
            bool on = std::all_of(t.subset.begin(), t.subset.end(), [&](int l) { return bit_of(b, l); });
            if (on) {
                v += t.coeff;
            }
        }
        return v;
    }

    /// Scale mapping register values onto phases theta = scale * g in [-1/2, 1/2).
    double scale() const {
        return std::ldexp(1.0, -precision);
    }

    void validate(int n) const {
        require(precision >= 1 && precision <= 30, "precision out of range");
        for (const auto &t : terms) {
            for (int l : t.subset) {
                require(l >= 0 && l < n, "polynomial term refers to a missing variable");
            }
        }
        const std::int64_t lo = -(std::int64_t{1} << (precision - 1));
        const std::int64_t hi = std::int64_t{1} << (precision - 1);
        for (std::uint64_t b = 0; b < dim_of(n); ++b) {
            std::int64_t v = value(b);
            if (v < lo || v >= hi) {
                throw ValidationError("polynomial value " + std::to_string(v) + " does not fit " +
                                      std::to_string(precision) + " bits of precision");
            }
        }
    }
};

/// Linear polynomial s (a^T x - rhs) for an integer constraint.
inline FixedPointPoly linear_poly(const LinearConstraint &c, int m, int sign = 1) {
    c.validate();
    require(c.is_integral(), "oracle construction needs integer coefficients");
    FixedPointPoly p;
    p.precision = m;
    for (std::size_t j = 0; j < c.coeffs.size(); ++j) {
        auto a = static_cast<std::int64_t>(c.coeffs[j]);
        if (a != 0) {
            p.terms.push_back({sign * a, {static_cast<int>(j)}});
        }
    }
    auto r = static_cast<std::int64_t>(c.rhs);
    if (r != 0) {
        p.terms.push_back({-sign * r, {}});
    }
    return p;
}

namespace detail {

// pi d / 2^q reduced exactly to (-pi, pi].
inline double bank_angle(std::int64_t d, int q) {
    const std::int64_t period = std::int64_t{1} << (q + 1);
    std::int64_t r = ((d % period) + period) % period;
    if (r > period / 2) {
        r -= period;
    }
    return std::numbers::pi * std::ldexp(static_cast<double>(r), -q);
}

// Rotations loading the Fourier qubit of local index q (physical first + q) for every term.
inline void append_bank(std::vector<Op> &ops, const FixedPointPoly &poly, int target, int q) {
    for (const auto &t : poly.terms) {
        if (t.coeff == 0) {
            continue;
        }
        double a = bank_angle(t.coeff, q);
        if (t.subset.empty()) {
            ops.push_back(Op::phase(target, a));
        } else {
            ops.push_back(Op::cp(t.subset, target, a));
        }
    }
}

}  // namespace detail

/// |b>|0...0> -> |b>|g(b) mod 2^m> with the register on qubits n..n+m-1 (qubit n is the least significant
/// bit): H on every auxiliary qubit, K m controlled-phase rotations, then the swap-free inverse QFT.
inline Circuit fourier_load_polynomial(const FixedPointPoly &poly, int n) {
    poly.validate(n);
    const int m = poly.precision;
    Circuit c;
    c.num_qubits = n + m;
    c.system_qubits = n;
    for (int q = 0; q < m; ++q) {
        c.ops.push_back(Op::h(n + q));
    }
    for (const auto &t : poly.terms) {
        if (t.coeff == 0) {
            continue;
        }
        FixedPointPoly single{{t}, m};
        for (int q = 0; q < m; ++q) {
            detail::append_bank(c.ops, single, n + q, q);
        }
    }
    auto iqft = qft_ops(m, n, true, false);
    c.ops.insert(c.ops.end(), iqft.begin(), iqft.end());
    c.validate();
    return c;
}

/// Equality check g(b) = 0: load, read out the whole register, reset the auxiliaries to |0>.
/// Success is the all-zero readout.
inline Circuit equality_circuit(const FixedPointPoly &poly, int n) {
    Circuit c = fourier_load_polynomial(poly, n);
    const int m = poly.precision;
    c.num_clbits = m;
    for (int q = 0; q < m; ++q) {
        c.ops.push_back(Op::measure(n + q, q));
    }
    for (int q = 0; q < m; ++q) {
        c.ops.push_back(Op::reset(n + q));
    }
    c.validate();
    return c;
}

/// Equality check with a single auxiliary qubit (index n) that is loaded, phase-corrected, measured and
/// reset once per result bit. The auxiliary ends in |+>. Success is the all-zero readout.
inline Circuit equality_circuit_qcl(const FixedPointPoly &poly, int n) {
    poly.validate(n);
    const int m = poly.precision;
    const int aux = n;
    Circuit c;
    c.num_qubits = n + 1;
    c.num_clbits = m;
    c.system_qubits = n;
    c.ops.push_back(Op::h(aux));
    for (int q = 0; q < m; ++q) {
        detail::append_bank(c.ops, poly, aux, q);
        for (int l = 0; l < q; ++l) {
            c.ops.push_back(Op::ccond(l, Op::phase(aux, -std::numbers::pi / static_cast<double>(1LL << (q - l)))));
        }
        c.ops.push_back(Op::h(aux));
        c.ops.push_back(Op::measure(aux, q));
        c.ops.push_back(Op::reset(aux));
        c.ops.push_back(Op::h(aux));
    }
    c.validate();
    return c;
}

/// Inequality check v(b) >= 0: load, measure the sign qubit into c0, then undo the load.
/// Success is c0 = 0.
inline Circuit inequality_circuit(const FixedPointPoly &poly, int n) {
    Circuit load = fourier_load_polynomial(poly, n);
    Circuit c = load;
    c.num_clbits = 1;
    c.ops.push_back(Op::measure(n + poly.precision - 1, 0));
    for (auto it = load.ops.rbegin(); it != load.ops.rend(); ++it) {
        c.ops.push_back(it->inverse());
    }
    c.validate();
    return c;
}

/// Which classical readouts of a constraint circuit mean "in-constraint".
enum class SuccessRule { all_zero, first_zero };

struct ConstraintCircuit {
    Circuit circuit;
    SuccessRule success = SuccessRule::all_zero;
    FixedPointPoly poly;

    bool is_success(const std::vector<std::uint8_t> &clbits) const {
        if (success == SuccessRule::first_zero) {
            return clbits.at(0) == 0;
        }
        return std::all_of(clbits.begin(), clbits.end(), [](auto b) { return b == 0; });
    }
};

/// Gate-level constraint measurement. Equalities read a.x - rhs; GEQ reads a.x - rhs and LEQ reads
/// rhs - a.x, so the sign bit is 0 exactly on in-constraint inputs.
inline ConstraintCircuit constraint_measurement_circuit(const LinearConstraint &c, int n, int m, bool qcl) {
    c.validate();
    require(static_cast<int>(c.coeffs.size()) == n, "constraint length differs from the system register");
    require(c.is_integral(), "oracle construction needs integer coefficients");
    ConstraintCircuit out;
    if (c.sense == Sense::EQ) {
        out.poly = linear_poly(c, m, 1);
        out.circuit = qcl ? equality_circuit_qcl(out.poly, n) : equality_circuit(out.poly, n);
        out.success = SuccessRule::all_zero;
    } else {
        require(!qcl, "the single-auxiliary variant applies to equality constraints only");
        out.poly = linear_poly(c, m, c.sense == Sense::GEQ ? 1 : -1);
        out.circuit = inequality_circuit(out.poly, n);
        out.success = SuccessRule::first_zero;
    }
    return out;
}

/// Matrix-level measurement a circuit should realize. A sign-bit readout resolves {feasible, infeasible};
/// a full-register readout resolves every value of the polynomial.
inline Measurement expected_measurement(const ConstraintCircuit &cc, int n) {
    if (cc.success == SuccessRule::first_zero) {
        return Measurement::binary(
            projector_from_predicate(n, [&](std::uint64_t x) { return cc.poly.value(x) >= 0; }));
    }
    std::map<std::int64_t, std::vector<std::uint64_t>> groups;
    for (std::uint64_t x = 0; x < dim_of(n); ++x) {
        groups[cc.poly.value(x)].push_back(x);
    }
    std::vector<Projector> ps;
    // Zero first so that the feasible block is the leading projector.
    if (auto it = groups.find(0); it != groups.end()) {
        ps.emplace_back(n, it->second);
    }
    for (auto &[v, idx] : groups) {
        if (v != 0) {
            ps.emplace_back(n, idx);
        }
    }
    return Measurement(std::move(ps));
}

/// Per basis input: probability of the success readout, which must be 1 on in-constraint inputs and 0
/// elsewhere. Returns the label of the first violating input.
inline std::optional<std::string> check_success_readout(const ConstraintCircuit &cc, int n,
                                                        const std::function<bool(std::uint64_t)> &feasible,
                                                        double tol = 1e-9) {
    const auto fd = static_cast<Eigen::Index>(dim_of(cc.circuit.num_qubits));
    for (std::uint64_t x = 0; x < dim_of(n); ++x) {
        ComplexVector in = ComplexVector::Zero(fd);
        in[static_cast<Eigen::Index>(x)] = 1.0;
        double success = 0.0;
        for (const auto &b : enumerate_branches(cc.circuit, in)) {
            if (cc.is_success(b.clbits)) {
                success += b.probability;
            }
        }
        double want = feasible(x) ? 1.0 : 0.0;
        if (std::abs(success - want) > tol) {
            return basis_label(x, n) + ": success probability " + std::to_string(success) + ", expected " +
                   std::to_string(want);
        }
    }
    return std::nullopt;
}

}  // namespace zenoq
