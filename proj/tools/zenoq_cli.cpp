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

// Command-line experiment runner. Exit codes: 0 success, 2 invalid input, 3 infeasible or degenerate
// instance, 4 failed circuit verification.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zenoq/zenoq.hpp"

using namespace zenoq;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerification = 4;

const char *const kCsvHeader = "sweep_var,value1,value2,r,r_penalty,in_constraint_prob,total_measurements,seed";

// ---------------------------------------------------------------------------
// Parsing helpers

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        out.push_back(item);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string &s, const std::string &what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        throw ValidationError("cannot parse " + what + " '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw ValidationError("cannot parse " + what + " '" + s + "'");
    }
    return v;
}

long long parse_int(const std::string &s, const std::string &what) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception &) {
        throw ValidationError("cannot parse " + what + " '" + s + "'");
    }
    if (used != s.size()) {
        throw ValidationError("cannot parse " + what + " '" + s + "'");
    }
    return v;
}

std::vector<double> parse_doubles(const std::string &s, const std::string &what) {
    std::vector<double> out;
    for (const auto &t : split(s, ',')) {
        out.push_back(parse_double(t, what));
    }
    require(!out.empty(), what + " is empty");
    return out;
}

std::vector<int> parse_ints(const std::string &s, const std::string &what) {
    std::vector<int> out;
    for (const auto &t : split(s, ',')) {
        long long v = parse_int(t, what);
        require(v >= INT_MIN && v <= INT_MAX, what + " is out of range");
        out.push_back(static_cast<int>(v));
    }
    require(!out.empty(), what + " is empty");
    return out;
}

/// "a1,a2,... SENSE rhs" with integer coefficients and right-hand side.
LinearConstraint parse_constraint(const std::string &text) {
    std::istringstream in(text);
    std::string coeffs;
    std::string sense;
    std::string rhs;
    std::string extra;
    if (!(in >> coeffs >> sense >> rhs) || (in >> extra)) {
        throw ValidationError("constraint must look like \"2,-1,-1,0 EQ 0\", got '" + text + "'");
    }
    LinearConstraint c;
    for (const auto &t : split(coeffs, ',')) {
        c.coeffs.push_back(static_cast<double>(parse_int(t, "constraint coefficient")));
    }
    c.sense = parse_sense(sense);
    c.rhs = static_cast<double>(parse_int(rhs, "constraint right-hand side"));
    c.validate();
    return c;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write '" + path + "'");
    }
    out << text;
}

// ---------------------------------------------------------------------------
// Instance JSON

Json instance_to_json(const PortfolioInstance &inst) {
    Json sigma = Json::array();
    for (int i = 0; i < inst.n; ++i) {
        Json row = Json::array();
        for (int j = 0; j < inst.n; ++j) {
            row.push_back(inst.sigma(i, j));
        }
        sigma.push_back(row);
    }
    Json cons = Json::array();
    for (const auto &c : inst.constraints) {
        cons.push_back({{"coeffs", c.coeffs}, {"sense", to_string(c.sense)}, {"rhs", c.rhs}});
    }
    return {{"n", inst.n}, {"q", inst.q}, {"sigma", sigma}, {"mu", inst.mu}, {"constraints", cons}};
}

void expect_keys(const Json &j, std::initializer_list<const char *> keys, const std::string &where) {
    require(j.is_object(), where + " must be an object");
    for (const auto &k : keys) {
        require(j.contains(k), where + " is missing '" + k + "'");
    }
    for (const auto &[k, v] : j.items()) {
        bool known = false;
        for (const auto &want : keys) {
            known = known || k == want;
        }
        require(known, where + " has unknown field '" + k + "'");
    }
}

double number(const Json &j, const std::string &where) {
    require(j.is_number(), where + " must be a number");
    return j.get<double>();
}

PortfolioInstance instance_from_json(const Json &j) {
    expect_keys(j, {"n", "q", "sigma", "mu", "constraints"}, "instance");
    require(j["n"].is_number_integer(), "instance.n must be an integer");
    PortfolioInstance inst;
    inst.n = j["n"].get<int>();
    require(inst.n >= 1 && inst.n <= 12, "instance.n must lie in [1, 12]");
    inst.q = number(j["q"], "instance.q");
    const auto &sigma = j["sigma"];
    require(sigma.is_array() && static_cast<int>(sigma.size()) == inst.n, "instance.sigma must have n rows");
    inst.sigma.resize(inst.n, inst.n);
    for (int i = 0; i < inst.n; ++i) {
        const auto &row = sigma[static_cast<std::size_t>(i)];
        require(row.is_array() && static_cast<int>(row.size()) == inst.n, "instance.sigma rows must have n entries");
        for (int k = 0; k < inst.n; ++k) {
            inst.sigma(i, k) = number(row[static_cast<std::size_t>(k)], "instance.sigma entry");
        }
    }
    require(j["mu"].is_array(), "instance.mu must be an array");
    for (const auto &m : j["mu"]) {
        inst.mu.push_back(number(m, "instance.mu entry"));
    }
    require(j["constraints"].is_array(), "instance.constraints must be an array");
    for (const auto &cj : j["constraints"]) {
        expect_keys(cj, {"coeffs", "sense", "rhs"}, "constraint");
        LinearConstraint c;
        require(cj["coeffs"].is_array(), "constraint.coeffs must be an array");
        for (const auto &a : cj["coeffs"]) {
            c.coeffs.push_back(number(a, "constraint coefficient"));
        }
        require(cj["sense"].is_string(), "constraint.sense must be a string");
        c.sense = parse_sense(cj["sense"].get<std::string>());
        c.rhs = number(cj["rhs"], "constraint.rhs");
        inst.constraints.push_back(c);
    }
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// Shared options

struct InstanceOptions {
    std::string file;
    std::string generate;
    double q = 0.5;
    bool return_constraint = false;
    bool no_budget = false;

    void add(CLI::App *app) {
        auto *f = app->add_option("--instance", file, "Instance JSON file");
        auto *g = app->add_option("--generate", generate, "Generate an instance: n,seed");
        f->excludes(g);
        app->add_option("--q", q, "Risk aversion for generated instances");
        app->add_flag("--return-constraint", return_constraint, "Add the median return constraint when generating");
        app->add_flag("--no-budget", no_budget, "Omit the budget constraint when generating");
    }

    PortfolioInstance load() const {
        if (!file.empty()) {
            Json j;
            try {
                j = Json::parse(read_file(file));
            } catch (const Json::parse_error &e) {
                throw ValidationError(std::string("instance file is not valid JSON: ") + e.what());
            }
            return instance_from_json(j);
        }
        require(!generate.empty(), "one of --instance or --generate is required");
        auto parts = parse_ints(generate, "--generate");
        require(parts.size() == 2 && parts[1] >= 0, "--generate expects n,seed");
        return generate_instance(parts[0], static_cast<std::uint64_t>(parts[1]),
                                 InstanceConfig{.q = q, .budget = !no_budget, .return_constraint = return_constraint});
    }

    Json describe() const {
        Json j;
        if (!file.empty()) {
            j["source"] = "file";
            j["path"] = file;
            j["seed"] = nullptr;
        } else {
            auto parts = parse_ints(generate, "--generate");
            j["source"] = "generated";
            j["path"] = nullptr;
            j["seed"] = parts.at(1);
            j["q"] = q;
            j["budget"] = !no_budget;
            j["return_constraint"] = return_constraint;
        }
        return j;
    }
};

struct OptimizerOptions {
    int restarts = 0;  // 0: default for the layer count
    int budget = 400;
    std::uint64_t seed = 0;
    int jobs = 0;

    void add(CLI::App *app) {
        app->add_option("--restarts", restarts, "Random restarts (default 50 for p <= 3, else 100)")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--budget", budget, "Objective evaluations per restart")->check(CLI::PositiveNumber);
        app->add_option("--seed", seed, "Optimizer seed");
        app->add_option("--jobs", jobs, "Worker threads (default: machine parallelism)")->check(CLI::NonNegativeNumber);
    }

    OptimizerSettings settings(int p) const {
        OptimizerSettings s;
        s.restarts = restarts > 0 ? restarts : default_restarts(p);
        s.budget = budget;
        s.seed = seed;
        s.jobs = jobs > 0 ? jobs : default_jobs();
        return s;
    }

    Json describe(int p) const {
        auto s = settings(p);
        return {{"method", "nelder-mead"}, {"restarts", s.restarts}, {"budget", s.budget}, {"seed", s.seed},
                {"initial_step", s.initial_step}, {"f_tol", s.f_tol},   {"x_tol", s.x_tol}};
    }
};

struct OutputOptions {
    std::string out;
    std::string csv;
    bool record_time = false;

    void add(CLI::App *app) {
        app->add_option("--out", out, "Write the JSON result here instead of stdout");
        app->add_option("--csv", csv, "Also write a long-format CSV");
        app->add_flag("--record-time", record_time, "Store wall-clock time (makes output non-reproducible)");
    }
};

struct ScheduleOptions {
    std::string schedule;
    double delta = 0.1;

    void add(CLI::App *app) {
        app->add_option("--schedule", schedule, "theorem1 | cor1 | cor1-general | cor3 | eta=VAL | manual=N1,...");
        app->add_option("--delta", delta, "Target out-of-constraint bound for theorem1/cor1/cor3");
    }

    ScheduleSpec spec() const {
        ScheduleSpec s;
        s.delta = delta;
        const std::string text = schedule.empty() ? "eta=0.1" : schedule;
        if (text == "theorem1") {
            s.rule = ScheduleRule::theorem1;
        } else if (text == "cor1") {
            s.rule = ScheduleRule::cor1_commuting;
        } else if (text == "cor1-general") {
            s.rule = ScheduleRule::cor1_general;
        } else if (text == "cor3") {
            s.rule = ScheduleRule::cor3;
        } else if (text.rfind("eta=", 0) == 0) {
            s.rule = ScheduleRule::eta;
            s.eta = parse_double(text.substr(4), "eta");
            require(s.eta > 0.0, "eta must be positive");
        } else if (text.rfind("manual=", 0) == 0) {
            s.rule = ScheduleRule::manual;
            s.manual = parse_ints(text.substr(7), "manual schedule");
        } else {
            throw ValidationError("unknown schedule '" + text + "'");
        }
        if (s.rule == ScheduleRule::theorem1 || s.rule == ScheduleRule::cor1_commuting ||
            s.rule == ScheduleRule::cor1_general || s.rule == ScheduleRule::cor3) {
            check_delta(delta);
        }
        return s;
    }
};

Json schedule_json(const ScheduleSpec &s) {
    Json j{{"rule", to_string(s.rule)}};
    j["delta"] = s.rule == ScheduleRule::eta || s.rule == ScheduleRule::manual ? Json(nullptr) : Json(s.delta);
    j["eta"] = s.rule == ScheduleRule::eta ? Json(s.eta) : Json(nullptr);
    j["manual"] = s.rule == ScheduleRule::manual ? Json(s.manual) : Json(nullptr);
    return j;
}

std::string command_line(int argc, char **argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        std::string a = argv[i];
        bool plain = !a.empty() && a.find_first_not_of(
                                       "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_=.,/:+") ==
                                       std::string::npos;
        if (!plain) {
            std::string q = "'";
            for (char c : a) {
                q += c == '\'' ? std::string("'\\''") : std::string(1, c);
            }
            a = q + "'";
        }
        out += (i ? " " : "") + a;
    }
    return out;
}

/// Shortest text that parses back to the same double.
std::string num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct CsvRow {
    std::string var;
    double value1 = 0.0;
    std::optional<double> value2;
    Metrics metrics;
    long long total_measurements = 0;
    std::uint64_t seed = 0;
};

std::string csv_text(const std::vector<CsvRow> &rows) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto &r : rows) {
        out += r.var + "," + num(r.value1) + "," + (r.value2 ? num(*r.value2) : "") + "," + num(r.metrics.r) + "," +
               (r.metrics.r_penalty ? num(*r.metrics.r_penalty) : "") + "," + num(r.metrics.in_constraint_prob) +
               "," + std::to_string(r.total_measurements) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

Json metrics_json(const RunOutcome &o, long long evaluations) {
    return {{"r", o.metrics.r},
            {"r_penalty", o.metrics.r_penalty ? Json(*o.metrics.r_penalty) : Json(nullptr)},
            {"in_constraint_prob", o.metrics.in_constraint_prob},
            {"total_measurements", o.total_measurements},
            {"evaluations", evaluations}};
}

Json result_json(const RunOutcome &o, double best_value) {
    return {{"params", o.params}, {"counts", o.counts}, {"objective", best_value}};
}

void emit(const Json &record, const OutputOptions &out, const std::vector<CsvRow> &rows) {
    const std::string text = record.dump(2) + "\n";
    if (out.out.empty()) {
        std::cout << text;
    } else {
        write_file(out.out, text);
    }
    if (!out.csv.empty()) {
        write_file(out.csv, csv_text(rows));
    }
}

using Clock = std::chrono::steady_clock;

Json wall_time(const OutputOptions &out, Clock::time_point t0) {
    if (!out.record_time) {
        return nullptr;
    }
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Json base_record(const std::string &experiment, const std::string &algorithm, const InstanceOptions &io,
                 const PortfolioInstance &inst) {
    Json inst_j = io.describe();
    inst_j["n"] = inst.n;
    inst_j["constraints"] = static_cast<int>(inst.constraints.size());
    return {{"schema_version", 1}, {"experiment", experiment}, {"algorithm", algorithm}, {"instance", inst_j}};
}

void finish_record(Json &rec, const OutputOptions &out, Clock::time_point t0, const std::string &cmd) {
    rec["wall_time_seconds"] = wall_time(out, t0);
    rec["version"] = kVersion;
    rec["command"] = cmd;
}

// ---------------------------------------------------------------------------
// Experiments

struct QaoaRun {
    RunOutcome outcome;
    OptimizationReport report;
};

QaoaRun run_zeno(const PortfolioInstance &inst, MixerKind mixer, int p, const ScheduleSpec &spec,
                 const OptimizerSettings &s) {
    auto setup = ZenoQaoaSetup::build(inst, mixer, p, spec);
    auto rep = optimize_zeno_qaoa(setup, s);
    return {evaluate_zeno_qaoa(setup, rep.best_params), rep};
}

QaoaRun run_penalty(const PortfolioInstance &inst, MixerKind mixer, int p, const std::vector<double> &lambdas,
                    std::optional<double> slack, const OptimizerSettings &s) {
    auto setup = PenaltyQaoaSetup::build(inst, mixer, p, lambdas, slack);
    auto rep = optimize_penalty_qaoa(setup, s);
    return {evaluate_penalty_qaoa(setup, rep.best_params), rep};
}

Json zeno_config(MixerKind mixer, int p, const ScheduleSpec &spec, const ProblemData &data) {
    return {{"mixer", to_string(mixer)}, {"layers", p},           {"schedule", schedule_json(spec)},
            {"lambdas", nullptr},        {"slack_resolution", nullptr}, {"cost_scale", data.cube_span}};
}

Json penalty_config(MixerKind mixer, int p, const std::vector<double> &lambdas, std::optional<double> slack,
                    const PenaltyQaoaSetup &setup) {
    auto [lo, hi] = std::minmax_element(setup.relax.diagonal.begin(), setup.relax.diagonal.end());
    return {{"mixer", to_string(mixer)},
            {"layers", p},
            {"schedule", nullptr},
            {"lambdas", lambdas},
            {"slack_resolution", slack ? Json(*slack) : Json(nullptr)},
            {"slack_bits", setup.relax.slack_bits},
            {"cost_scale", *hi - *lo}};
}

std::vector<double> parse_lambdas(const std::string &s, const PortfolioInstance &inst) {
    auto l = parse_doubles(s, "--penalty");
    require(l.size() == inst.constraints.size(), "--penalty needs one factor per constraint (" +
                                                     std::to_string(inst.constraints.size()) + ")");
    return l;
}

// ---------------------------------------------------------------------------
// Oracle compilation

int auto_precision(const LinearConstraint &c, int n) {
    for (int m = 1; m <= 30; ++m) {
        try {
            linear_poly(c, m).validate(n);
            return m;
        } catch (const ValidationError &) {
        }
    }
    throw ValidationError("constraint values need more than 30 bits");
}

Json resources_json(const ResourceCount &rc) {
    return {{"per_kind", rc.per_kind},
            {"controlled_phase", rc.controlled_phase},
            {"multi_controlled_phase", rc.multi_controlled_phase},
            {"bank_rotations", rc.bank_rotations},
            {"measurements", rc.measurements},
            {"resets", rc.resets},
            {"classically_controlled", rc.classically_controlled},
            {"two_qubit_gates", rc.two_qubit_gates},
            {"aux_qubits", rc.aux_qubits},
            {"t_count_reversible", rc.t_count_reversible},
            {"t_count_fourier_load", rc.t_count_fourier_load},
            {"t_count_total", rc.t_count_total}};
}

/// Exhaustive readout check plus channel comparison. Throws VerificationError on the first mismatch.
Json verify_constraint_circuit(const ConstraintCircuit &cc, const LinearConstraint &c, int n) {
    if (auto bad = check_success_readout(cc, n, [&](std::uint64_t x) { return c.satisfied(x); })) {
        throw VerificationError("readout mismatch on input " + *bad);
    }
    auto ch = induced_superoperator(cc.circuit, n);
    auto cmp = compare_with_measurement(ch, expected_measurement(cc, n));
    if (cmp.first_mismatch) {
        throw VerificationError("channel differs from the expected measurement on input " + *cmp.first_mismatch +
                                " (trace distance " + num(cmp.max_distance) + ")");
    }
    return {{"readout", "ok"},
            {"max_trace_distance", cmp.max_distance},
            {"trace_preservation_error", ch.trace_preservation_error()},
            {"measurement_outcomes", static_cast<int>(expected_measurement(cc, n).projectors().size())}};
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Constrained quantum optimization with measurement-enforced constraints"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    const std::string cmd = command_line(argc, argv);

    // run-qaoa
    auto *qaoa = app.add_subcommand("run-qaoa", "Optimize Zeno-QAOA (or penalty QAOA with --penalty)");
    InstanceOptions q_inst;
    OptimizerOptions q_opt;
    OutputOptions q_out;
    ScheduleOptions q_sched;
    std::string q_mixer = "cg";
    int q_layers = 1;
    std::string q_penalty;
    std::optional<double> q_slack;
    q_inst.add(qaoa);
    q_opt.add(qaoa);
    q_out.add(qaoa);
    q_sched.add(qaoa);
    qaoa->add_option("--mixer", q_mixer, "x (transverse field) or cg (rank-one complete graph)");
    qaoa->add_option("--layers", q_layers, "QAOA depth p")->check(CLI::PositiveNumber);
    qaoa->add_option("--penalty", q_penalty, "Penalty factors lambda1[,lambda2]; switches to penalty QAOA");
    qaoa->add_option("--slack-resolution", q_slack, "Slack step for inequalities with real coefficients");

    // sweep
    auto *sweep = app.add_subcommand("sweep", "Grid sweeps over eta, lambda, layers, or transferred parameters");
    InstanceOptions s_inst;
    OptimizerOptions s_opt;
    OutputOptions s_out;
    ScheduleOptions s_sched;
    std::string s_kind;
    std::string s_grid;
    std::string s_grid2;
    std::string s_mixer = "x";
    int s_layers = 1;
    std::string s_penalty;
    std::string s_transfer_from;
    std::string s_source = "eta=1.6";
    std::optional<double> s_slack;
    s_inst.add(sweep);
    s_opt.add(sweep);
    s_out.add(sweep);
    s_sched.add(sweep);
    sweep->add_option("kind", s_kind, "eta | lambda | layers | transfer")
        ->required()
        ->check(CLI::IsMember({"eta", "lambda", "layers", "transfer"}));
    sweep->add_option("--grid", s_grid, "Comma-separated grid values")->required();
    sweep->add_option("--grid2", s_grid2, "Second lambda grid (two-constraint lambda sweeps)");
    sweep->add_option("--mixer", s_mixer, "x or cg");
    sweep->add_option("--layers", s_layers, "QAOA depth p (ignored by the layers sweep)")->check(CLI::PositiveNumber);
    sweep->add_option("--penalty", s_penalty, "Fixed penalty factors for a penalty layers sweep");
    sweep->add_option("--transfer-from", s_transfer_from, "RunRecord JSON whose parameters are transferred");
    sweep->add_option("--source", s_source, "Source point when optimizing for a transfer: eta=V or lambda=V");
    sweep->add_option("--slack-resolution", s_slack, "Slack step for inequalities with real coefficients");

    // run-lvqe
    auto *lvqe = app.add_subcommand("run-lvqe", "Optimize Zeno-enhanced L-VQE");
    InstanceOptions l_inst;
    OptimizerOptions l_opt;
    OutputOptions l_out;
    int l_layers = 1;
    int l_meas = 100;
    bool l_per_gate = false;
    l_inst.add(lvqe);
    l_opt.add(lvqe);
    l_out.add(lvqe);
    lvqe->add_option("--layers", l_layers, "Entangling layers p")->check(CLI::NonNegativeNumber);
    lvqe->add_option("--measurements", l_meas, "Measurements N (0 disables them)")->check(CLI::NonNegativeNumber);
    lvqe->add_flag("--per-gate", l_per_gate, "Measure after every gate instead of once after the circuit");

    // compile-oracle
    auto *oracle = app.add_subcommand("compile-oracle", "Build, count and verify a constraint-measurement circuit");
    std::string o_constraint;
    int o_precision = 0;
    bool o_qcl = false;
    bool o_verify = false;
    std::string o_emit;
    std::string o_circuit;
    std::string o_out;
    oracle->add_option("--constraint", o_constraint, "\"a1,...,an SENSE rhs\" with SENSE in EQ, LEQ, GEQ")
        ->required();
    oracle->add_option("--precision", o_precision, "Auxiliary register width m (default: smallest that fits)")
        ->check(CLI::PositiveNumber);
    oracle->add_flag("--qcl", o_qcl, "Single-auxiliary semiclassical variant (equalities only)");
    oracle->add_flag("--verify", o_verify, "Check every basis input and the induced channel");
    oracle->add_option("--emit", o_emit, "Write the circuit in text form");
    oracle->add_option("--circuit", o_circuit, "Verify this circuit file instead of the generated one");
    oracle->add_option("--out", o_out, "Write the JSON report here instead of stdout");

    // scaling-table
    auto *scaling = app.add_subcommand("scaling-table", "Measurement counts versus mixing angle for both mixers");
    int t_qubits = 3;
    int t_layers = 1;
    std::string t_deltas = "0.01,0.05,0.1,0.19";
    int t_steps = 16;
    std::string t_out;
    scaling->add_option("--qubits", t_qubits, "Qubit count n")->check(CLI::Range(1, 14));
    scaling->add_option("--layers", t_layers, "QAOA depth p")->check(CLI::PositiveNumber);
    scaling->add_option("--deltas", t_deltas, "Comma-separated out-of-constraint bounds");
    scaling->add_option("--steps", t_steps, "Angle grid intervals per mixer")->check(CLI::PositiveNumber);
    scaling->add_option("--out", t_out, "Write the CSV here instead of stdout");

    // generate-instance
    auto *gen = app.add_subcommand("generate-instance", "Write a seeded instance as JSON");
    InstanceOptions g_inst;
    std::string g_out;
    g_inst.add(gen);
    gen->add_option("--out", g_out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitValidation;
    }

    const auto t0 = Clock::now();
    try {
        if (qaoa->parsed()) {
            require(q_penalty.empty() || q_sched.schedule.empty(), "--penalty and --schedule cannot be combined");
            auto inst = q_inst.load();
            auto mixer = parse_mixer(q_mixer);
            auto settings = q_opt.settings(q_layers);
            Json rec;
            std::vector<CsvRow> rows;
            if (!q_penalty.empty()) {
                auto lambdas = parse_lambdas(q_penalty, inst);
                auto setup = PenaltyQaoaSetup::build(inst, mixer, q_layers, lambdas, q_slack);
                auto run = run_penalty(inst, mixer, q_layers, lambdas, q_slack, settings);
                rec = base_record("run-qaoa", "penalty-qaoa", q_inst, inst);
                rec["config"] = penalty_config(mixer, q_layers, lambdas, q_slack, setup);
                rec["optimizer"] = q_opt.describe(q_layers);
                rec["result"] = result_json(run.outcome, run.report.best_value);
                rec["metrics"] = metrics_json(run.outcome, run.report.evaluations);
                rows.push_back({"lambda", lambdas[0], lambdas.size() > 1 ? std::optional(lambdas[1]) : std::nullopt,
                                run.outcome.metrics, 0, q_opt.seed});
            } else {
                auto spec = q_sched.spec();
                auto run = run_zeno(inst, mixer, q_layers, spec, settings);
                rec = base_record("run-qaoa", "zeno-qaoa", q_inst, inst);
                rec["config"] = zeno_config(mixer, q_layers, spec, ProblemData::build(inst));
                rec["optimizer"] = q_opt.describe(q_layers);
                rec["result"] = result_json(run.outcome, run.report.best_value);
                rec["metrics"] = metrics_json(run.outcome, run.report.evaluations);
                rows.push_back({"layers", static_cast<double>(q_layers), std::nullopt, run.outcome.metrics,
                                run.outcome.total_measurements, q_opt.seed});
            }
            finish_record(rec, q_out, t0, cmd);
            emit(rec, q_out, rows);
        } else if (sweep->parsed()) {
            auto inst = s_inst.load();
            auto mixer = parse_mixer(s_mixer);
            auto grid = parse_doubles(s_grid, "--grid");
            std::sort(grid.begin(), grid.end());
            std::vector<double> grid2;
            if (!s_grid2.empty()) {
                require(s_kind == "lambda", "--grid2 applies to lambda sweeps only");
                grid2 = parse_doubles(s_grid2, "--grid2");
                std::sort(grid2.begin(), grid2.end());
            }
            // One point per (value1, value2); value2 is unused except for two-constraint lambda grids.
            std::vector<std::pair<double, std::optional<double>>> points;
            for (double a : grid) {
                if (grid2.empty()) {
                    points.emplace_back(a, std::nullopt);
                } else {
                    for (double b : grid2) {
                        points.emplace_back(a, b);
                    }
                }
            }
            std::vector<Json> records(points.size());
            std::vector<CsvRow> rows(points.size());
            auto base = [&](const std::string &algorithm) {
                return base_record("sweep-" + s_kind, algorithm, s_inst, inst);
            };

            if (s_kind == "eta" || (s_kind == "layers" && s_penalty.empty())) {
                require(s_kind == "layers" || s_sched.schedule.empty(), "the eta sweep sets the schedule itself");
                require(s_penalty.empty(), "--penalty does not apply to an eta sweep");
                auto base_spec = s_sched.spec();
                parallel_for(points.size(), s_opt.jobs > 0 ? s_opt.jobs : default_jobs(), [&](std::size_t i) {
                    const auto t_point = Clock::now();
                    const double v = points[i].first;
                    ScheduleSpec spec = base_spec;
                    int p = s_layers;
                    if (s_kind == "eta") {
                        spec.rule = ScheduleRule::eta;
                        spec.eta = v;
                        require(v > 0.0, "eta values must be positive");
                    } else {
                        require(v >= 1 && v == std::floor(v), "layer values must be positive integers");
                        p = static_cast<int>(v);
                        if (spec.rule == ScheduleRule::manual) {
                            require(spec.manual.size() == 1, "a layers sweep with manual counts takes a single count");
                            spec.manual.assign(static_cast<std::size_t>(p), spec.manual[0]);
                        }
                    }
                    auto s = s_opt.settings(p);
                    s.jobs = 1;
                    auto run = run_zeno(inst, mixer, p, spec, s);
                    Json r = base("zeno-qaoa");
                    r["config"] = zeno_config(mixer, p, spec, ProblemData::build(inst));
                    r["optimizer"] = s_opt.describe(p);
                    r["result"] = result_json(run.outcome, run.report.best_value);
                    r["metrics"] = metrics_json(run.outcome, run.report.evaluations);
                    finish_record(r, s_out, t_point, cmd);
                    records[i] = std::move(r);
                    rows[i] = {s_kind, v, std::nullopt, run.outcome.metrics, run.outcome.total_measurements,
                               s_opt.seed};
                });
            } else if (s_kind == "lambda" || s_kind == "layers") {
                require(s_sched.schedule.empty(), "penalty sweeps take no --schedule");
                require(grid2.empty() || inst.constraints.size() == 2, "--grid2 needs a two-constraint instance");
                require(!grid2.empty() || s_kind == "layers" || inst.constraints.size() == 1,
                        "a two-constraint instance needs --grid2");
                parallel_for(points.size(), s_opt.jobs > 0 ? s_opt.jobs : default_jobs(), [&](std::size_t i) {
                    const auto t_point = Clock::now();
                    std::vector<double> lambdas;
                    int p = s_layers;
                    if (s_kind == "lambda") {
                        lambdas.push_back(points[i].first);
                        if (points[i].second) {
                            lambdas.push_back(*points[i].second);
                        }
                    } else {
                        lambdas = parse_lambdas(s_penalty, inst);
                        const double v = points[i].first;
                        require(v >= 1 && v == std::floor(v), "layer values must be positive integers");
                        p = static_cast<int>(v);
                    }
                    auto s = s_opt.settings(p);
                    s.jobs = 1;
                    auto setup = PenaltyQaoaSetup::build(inst, mixer, p, lambdas, s_slack);
                    auto rep = optimize_penalty_qaoa(setup, s);
                    auto out = evaluate_penalty_qaoa(setup, rep.best_params);
                    Json r = base("penalty-qaoa");
                    r["config"] = penalty_config(mixer, p, lambdas, s_slack, setup);
                    r["optimizer"] = s_opt.describe(p);
                    r["result"] = result_json(out, rep.best_value);
                    r["metrics"] = metrics_json(out, rep.evaluations);
                    finish_record(r, s_out, t_point, cmd);
                    records[i] = std::move(r);
                    rows[i] = {s_kind, points[i].first, points[i].second, out.metrics, 0, s_opt.seed};
                });
            } else {
                // transfer: fixed parameters from a source record or a source optimization
                std::vector<double> params;
                std::string source_kind;
                double source_value = 0.0;
                int p = s_layers;
                if (!s_transfer_from.empty()) {
                    Json src;
                    try {
                        src = Json::parse(read_file(s_transfer_from));
                    } catch (const Json::parse_error &e) {
                        throw ValidationError(std::string("transfer source is not valid JSON: ") + e.what());
                    }
                    require(src.contains("result") && src["result"].contains("params") && src.contains("config"),
                            "transfer source is not a run record");
                    params = src["result"]["params"].get<std::vector<double>>();
                    p = src["config"]["layers"].get<int>();
                    mixer = parse_mixer(src["config"]["mixer"].get<std::string>());
                    const auto alg = src["algorithm"].get<std::string>();
                    if (alg == "zeno-qaoa") {
                        source_kind = "eta";
                        const auto &sc = src["config"]["schedule"];
                        source_value = sc["eta"].is_number() ? sc["eta"].get<double>() : 0.0;
                    } else if (alg == "penalty-qaoa") {
                        source_kind = "lambda";
                        source_value = src["config"]["lambdas"][0].get<double>();
                    } else {
                        throw ValidationError("cannot transfer parameters from a '" + alg + "' record");
                    }
                } else {
                    auto eq = s_source.find('=');
                    require(eq != std::string::npos, "--source expects eta=V or lambda=V");
                    source_kind = s_source.substr(0, eq);
                    source_value = parse_double(s_source.substr(eq + 1), "--source value");
                    require(source_kind == "eta" || source_kind == "lambda", "--source expects eta=V or lambda=V");
                    auto s = s_opt.settings(p);
                    if (source_kind == "eta") {
                        ScheduleSpec spec{ScheduleRule::eta, s_sched.delta, source_value, {}};
                        params = run_zeno(inst, mixer, p, spec, s).report.best_params;
                    } else {
                        require(inst.constraints.size() == 1, "lambda transfer needs a single-constraint instance");
                        params = run_penalty(inst, mixer, p, {source_value}, s_slack, s).report.best_params;
                    }
                }
                require(static_cast<int>(params.size()) == 2 * p, "transferred parameters have the wrong shape");
                OptimizationReport source;
                source.best_params = params;
                parallel_for(points.size(), s_opt.jobs > 0 ? s_opt.jobs : default_jobs(), [&](std::size_t i) {
                    const auto t_point = Clock::now();
                    const double v = points[i].first;
                    RunOutcome out;
                    Json r;
                    if (source_kind == "eta") {
                        require(v > 0.0, "eta values must be positive");
                        ScheduleSpec spec{ScheduleRule::eta, s_sched.delta, v, {}};
                        auto setup = ZenoQaoaSetup::build(inst, mixer, p, spec);
                        out = transfer_params(source, params.size(),
                                              [&](std::span<const double> x) { return evaluate_zeno_qaoa(setup, x); });
                        r = base("zeno-qaoa");
                        r["config"] = zeno_config(mixer, p, spec, setup.data);
                    } else {
                        auto setup = PenaltyQaoaSetup::build(inst, mixer, p, {v}, s_slack);
                        out = transfer_params(
                            source, params.size(), [&](std::span<const double> x) { return evaluate_penalty_qaoa(setup, x); });
                        r = base("penalty-qaoa");
                        r["config"] = penalty_config(mixer, p, {v}, s_slack, setup);
                    }
                    r["transfer"] = {{"variable", source_kind}, {"source_value", source_value}};
                    r["optimizer"] = nullptr;
                    r["result"] = result_json(out, out.objective);
                    r["metrics"] = metrics_json(out, 1);
                    finish_record(r, s_out, t_point, cmd);
                    records[i] = std::move(r);
                    rows[i] = {"transfer_" + source_kind, v, std::nullopt, out.metrics, out.total_measurements,
                               s_opt.seed};
                });
            }
            Json result{{"schema_version", 1}, {"sweep", s_kind}, {"points", static_cast<int>(points.size())}};
            result["records"] = records;
            result["wall_time_seconds"] = wall_time(s_out, t0);
            result["version"] = kVersion;
            result["command"] = cmd;
            emit(result, s_out, rows);
        } else if (lvqe->parsed()) {
            auto inst = l_inst.load();
            auto setup = LvqeSetup::build(inst, l_layers, l_meas);
            if (l_per_gate) {
                setup.circuit = lvqe_circuit(inst.n, l_layers, setup.data.measurement(), l_meas, true);
            }
            const int dim = setup.circuit.num_params;
            auto rep = optimize_lvqe(setup, l_opt.settings(std::max(1, l_layers)));
            auto out = evaluate_lvqe(setup, rep.best_params);
            Json rec = base_record("run-lvqe", "zeno-lvqe", l_inst, inst);
            rec["config"] = {{"layers", l_layers},
                             {"measurements", l_meas},
                             {"per_gate", l_per_gate},
                             {"parameters", dim},
                             {"cost_scale", setup.data.cube_span}};
            rec["optimizer"] = l_opt.describe(std::max(1, l_layers));
            rec["result"] = result_json(out, rep.best_value);
            rec["metrics"] = metrics_json(out, rep.evaluations);
            finish_record(rec, l_out, t0, cmd);
            emit(rec, l_out, {{"layers", static_cast<double>(l_layers), std::nullopt, out.metrics,
                               out.total_measurements, l_opt.seed}});
        } else if (oracle->parsed()) {
            auto c = parse_constraint(o_constraint);
            const int n = static_cast<int>(c.coeffs.size());
            const int m = o_precision > 0 ? o_precision : auto_precision(c, n);
            auto cc = constraint_measurement_circuit(c, n, m, o_qcl);
            cc.poly.validate(n);
            if (!o_circuit.empty()) {
                auto loaded = circuit_from_text(read_file(o_circuit));
                require(loaded.system_qubits == n, "circuit file acts on " + std::to_string(loaded.system_qubits) +
                                                       " system qubits, constraint has " + std::to_string(n));
                require(loaded.num_clbits == cc.circuit.num_clbits,
                        "circuit file has a different number of classical bits");
                cc.circuit = std::move(loaded);
            }
            Json rep{{"constraint", o_constraint}, {"system_qubits", n}, {"precision", m}, {"qcl", o_qcl},
                     {"total_qubits", cc.circuit.num_qubits}, {"resources", resources_json(count_resources(cc.circuit))}};
            rep["success_readout"] = cc.success == SuccessRule::first_zero ? "c0 = 0" : "all clbits 0";
            if (!o_emit.empty()) {
                write_file(o_emit, circuit_to_text(cc.circuit));
            }
            if (o_verify) {
                rep["verification"] = verify_constraint_circuit(cc, c, n);
            }
            const std::string text = rep.dump(2) + "\n";
            if (o_out.empty()) {
                std::cout << text;
            } else {
                write_file(o_out, text);
            }
        } else if (scaling->parsed()) {
            auto deltas = parse_doubles(t_deltas, "--deltas");
            for (double d : deltas) {
                check_delta(d);
            }
            std::string csv = "mixer,qubits,layers,delta,beta,measurements\n";
            for (auto kind : {MixerKind::transverse_field, MixerKind::complete_graph}) {
                auto mixer = make_mixer(kind, t_qubits);
                const double top = beta_box(kind).hi;
                for (double d : deltas) {
                    for (int k = 0; k <= t_steps; ++k) {
                        const double beta = top * k / t_steps;
                        csv += std::string(to_string(kind)) + "," + std::to_string(t_qubits) + "," +
                               std::to_string(t_layers) + "," + num(d) + "," + num(beta) + "," +
                               std::to_string(schedule_cor3(mixer, beta, t_layers, t_qubits, d)) + "\n";
                    }
                }
            }
            if (t_out.empty()) {
                std::cout << csv;
            } else {
                write_file(t_out, csv);
            }
        } else if (gen->parsed()) {
            const std::string text = instance_to_json(g_inst.load()).dump(2) + "\n";
            if (g_out.empty()) {
                std::cout << text;
            } else {
                write_file(g_out, text);
            }
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::validation:
                return kExitValidation;
            case ErrorKind::infeasible:
                return kExitInfeasible;
            case ErrorKind::verification:
                return kExitVerification;
        }
    } catch (const Json::exception &e) {
        std::cerr << "error: malformed JSON input: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
