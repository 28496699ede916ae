#include "qcollide/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcollide/entanglement.hpp"
#include "qcollide/kernels.hpp"
#include "qcollide/rng.hpp"
#include "qcollide/thermo.hpp"
#include "qcollide/trajectories.hpp"

namespace qcollide {

using ojson = nlohmann::ordered_json;

std::vector<double> SweepRange::values() const {
    std::vector<double> out;
    if (count == 1) return {start};
    for (int i = 0; i < count; ++i) out.push_back(start + (stop - start) * i / (count - 1));
    return out;
}

namespace {

constexpr double kDeg = M_PI / 180.0;

[[noreturn]] void fail(const std::string& msg) { throw ValidationError(msg); }

double get_number(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) fail("config key '" + key + "' must be a number");
    return v.get<double>();
}

int get_int(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number_integer()) fail("config key '" + key + "' must be an integer");
    return v.get<int>();
}

std::string get_string(const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) fail("config key '" + key + "' must be a string");
    return v.get<std::string>();
}

bool get_bool(const nlohmann::json& v, const std::string& key) {
    if (!v.is_boolean()) fail("config key '" + key + "' must be a boolean");
    return v.get<bool>();
}

double get_beta(const nlohmann::json& v) {
    if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    return get_number(v, "beta");
}

SweepRange get_sweep(const nlohmann::json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 3) fail("sweep '" + key + "' must be [start, stop, count]");
    return {get_number(v[0], key), get_number(v[1], key), get_int(v[2], key)};
}

SweepRange parse_sweep_flag(const std::string& text, const std::string& name) {
    SweepRange r;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &r.start, &r.stop, &r.count, &tail) != 3) {
        fail("--" + name + " expects start:stop:count");
    }
    return r;
}

std::array<double, 4> parse_observable_flag(const std::string& text) {
    std::array<double, 4> a{};
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf%c", &a[0], &a[1], &a[2], &a[3], &tail) != 4) {
        fail("--observable expects a00,a11,re01,im01");
    }
    return a;
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ojson num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string resolved_format(const ExperimentConfig& cfg, bool tabular) {
    if (cfg.format) return *cfg.format;
    return tabular ? "csv" : "json";
}

void flatten(const ojson& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
    } else if (j.is_number_float()) {
        out.emplace_back(prefix, fmt(j.get<double>()));
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

void write_table(const ExperimentConfig& cfg, const Table& t, std::ostream& out) {
    if (resolved_format(cfg, true) == "json") {
        ojson doc;
        doc["config"] = ojson::parse(config_to_json(cfg));
        doc["columns"] = t.columns;
        ojson rows = ojson::array();
        for (const auto& r : t.rows) {
            ojson row = ojson::array();
            for (double x : r) row.push_back(num(x));
            rows.push_back(row);
        }
        doc["rows"] = rows;
        out << doc.dump(2) << "\n";
        return;
    }
    out << "# config: " << config_to_json(cfg) << "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << fmt(r[i]);
        out << "\n";
    }
}

void write_report(const ExperimentConfig& cfg, ojson report, std::ostream& out) {
    if (resolved_format(cfg, false) == "csv") {
        std::vector<std::pair<std::string, std::string>> kv;
        flatten(report, "", kv);
        out << "# config: " << config_to_json(cfg) << "\n";
        out << "key,value\n";
        for (const auto& [k, v] : kv) out << k << "," << v << "\n";
        return;
    }
    ojson doc;
    doc["config"] = ojson::parse(config_to_json(cfg));
    for (auto it = report.begin(); it != report.end(); ++it) doc[it.key()] = it.value();
    out << doc.dump(2) << "\n";
}

int steps_or(const ExperimentConfig& cfg, int fallback) { return cfg.steps.value_or(fallback); }

Mat2 observable_matrix(const std::array<double, 4>& a) {
    Mat2 m;
    m << a[0], cplx(a[2], a[3]), cplx(a[2], -a[3]), a[1];
    return m;
}

QubitState random_qubit_state(Rng& rng) {
    const double d = uniform01(rng);
    const double r = std::sqrt(d * (1.0 - d)) * uniform01(rng);
    return QubitState(d, std::polar(r, uniform(rng, 0.0, 2.0 * M_PI)));
}

MachineParams random_machine(Rng& rng) {
    return {uniform(rng, 0.0, M_PI / 2), uniform(rng, 0.0, 2.0 * M_PI), uniform(rng, 0.0, 2.0 * M_PI)};
}

// ---------------------------------------------------------------- commands

int cmd_thermalize(const ExperimentConfig& cfg, std::ostream& out) {
    const MachineParams m = resolve_machine(cfg);
    const BathSpec b = resolve_bath(cfg);
    const int n = steps_or(cfg, 100);
    const QubitState rho0(cfg.d0, cplx(cfg.k0_re, cfg.k0_im));
    const IterationPath path = cfg.path == "matrix" ? IterationPath::matrix : IterationPath::analytic;
    const Trajectory traj = iterate(rho0, m, b, n, path);
    const Mat2 xi = bath_state(b);
    const cplx lam = lambda(b.p(), m.theta, m.alpha);

    Table t{{"n", "d", "re_k", "im_k", "abs_k", "trace_distance_to_xi", "closed_form_d", "closed_form_k_mag"}, {}};
    for (int i = 0; i <= n; ++i) {
        const QubitState& s = traj[i];
        t.rows.push_back({static_cast<double>(i), s.d(), s.k().real(), s.k().imag(), std::abs(s.k()),
                          trace_distance(s.to_matrix(), xi), closed_form_d(rho0.d(), b.p(), m.phi, i),
                          std::abs(closed_form_k(rho0.k(), lam, m.phi, i))});
    }
    write_table(cfg, t, out);
    return kExitOk;
}

int cmd_rates(const ExperimentConfig& cfg, std::ostream& out) {
    const MachineParams m = resolve_machine(cfg);
    const BathSpec b = resolve_bath(cfg);
    const RelaxationRates r = rates_from_machine(m.phi, m.theta, cfg.tau0, b.p());
    const int n = steps_or(cfg, 1000);
    const QubitState rho0(cfg.d0, cplx(cfg.k0_re, cfg.k0_im));

    ojson rep;
    rep["T1"] = num(r.T1);
    rep["T2"] = num(r.T2);
    rep["Tpf"] = num(r.Tpf);
    try {
        const RelaxationFit fit = fit_relaxation(iterate(rho0, m, b, n), b.p(), cfg.tau0);
        rep["fitted_T1"] = num(fit.T1);
        rep["fitted_T2"] = num(fit.T2);
    } catch (const std::invalid_argument&) {
        // initial state has d0 = p or k0 = 0, or the trajectory collapses in one step
        rep["fitted_T1"] = nullptr;
        rep["fitted_T2"] = nullptr;
    }
    rep["bound_saturated"] = r.bound_saturated();
    write_report(cfg, rep, out);
    return kExitOk;
}

int cmd_fd(const ExperimentConfig& cfg, std::ostream& out) {
    const MachineParams m = resolve_machine(cfg);
    const BathSpec b = resolve_bath(cfg);
    const Mat2 a = observable_matrix(cfg.observable);
    const int n = steps_or(cfg, 50);
    const std::vector<double> sim = fd_protocol_series(m, b, a, n);
    Table t{{"n", "F_simulated", "F_closed", "D"}, {}};
    for (int i = 0; i <= n; ++i) {
        t.rows.push_back({static_cast<double>(i), sim[i], fd_closed_form(a, b, m.phi, i), dissipation(m.phi, i)});
    }
    write_table(cfg, t, out);
    return kExitOk;
}

int cmd_entangle(const ExperimentConfig& cfg, std::ostream& out) {
    const MachineParams base = resolve_machine(cfg);
    const std::vector<double> phis = cfg.sweep_phi ? cfg.sweep_phi->values() : std::vector<double>{base.phi};
    const std::vector<double> thetas =
        cfg.sweep_theta ? cfg.sweep_theta->values() : std::vector<double>{base.theta};
    const std::vector<double> ps = cfg.sweep_p ? cfg.sweep_p->values() : std::vector<double>{resolve_bath(cfg).p()};
    const BlochGrid grid{cfg.grid_theta, cfg.grid_phi};

    Table t{{"phi", "theta", "p", "power_numeric", "power_closed", "argmax_theta_bloch", "argmax_phi_bloch"}, {}};
    for (double phi : phis) {
        for (double theta : thetas) {
            for (double p : ps) {
                const MachineParams m{phi, theta, base.alpha};
                const EntanglingPowerResult r = entangling_power(m, BathSpec::from_population(p), grid, cfg.refine_tol);
                t.rows.push_back({phi, theta, p, r.value, entangling_power_closed(p, phi), r.bloch_theta, r.bloch_phi});
            }
        }
    }
    write_table(cfg, t, out);
    return kExitOk;
}

int cmd_irreversibility(const ExperimentConfig& cfg, std::ostream& out) {
    const MachineParams m = resolve_machine(cfg);
    const BathSpec b = resolve_bath(cfg);
    const int n = steps_or(cfg, 6);
    const Mode mode = cfg.mode == "sampled" ? Mode::sampled : Mode::exact;
    Rng state_rng(sub_seed(cfg.seed, 0x5157));
    const Vec2 psi0 = random_pure_state(2, state_rng);
    const ReconstructionReport r = reconstruction_experiment(psi0, n, m, b, mode, cfg.trials, cfg.seed);

    ojson rep;
    rep["initial_state"] = {{"re0", psi0(0).real()}, {"im0", psi0(0).imag()}, {"re1", psi0(1).real()}, {"im1", psi0(1).imag()}};
    rep["correct_fidelity"] = r.correct_fidelity;
    rep["no_key_fidelity"] = r.no_key_fidelity;
    rep["wrong_order"] = {{"count", r.wrong_order.count},     {"enumerated", r.enumerated},
                          {"mean", r.wrong_order.mean},       {"stddev", r.wrong_order.stddev},
                          {"std_error", r.wrong_order.std_error}, {"min", r.wrong_order.min},
                          {"max", r.wrong_order.max}};
    rep["margin"] = r.correct_fidelity - r.wrong_order.mean;
    if (cfg.per_trial) {
        ojson trials = ojson::array();
        for (std::size_t i = 0; i < r.wrong_orders.size(); ++i) {
            trials.push_back({{"order", r.wrong_orders[i]}, {"fidelity", r.wrong_fidelities[i]}});
        }
        rep["trials"] = trials;
    }
    write_report(cfg, rep, out);
    return kExitOk;
}

int cmd_classify(const ExperimentConfig& cfg, std::ostream& out) {
    const MachineParams m1 = resolve_machine(cfg);
    MachineParams m2{cfg.phi2.value_or(m1.phi), cfg.theta2.value_or(m1.theta), cfg.alpha2.value_or(m1.alpha)};
    m2.validate();
    Rng rng(cfg.seed);
    auto canon = [](const MachineParams& m) {
        const CanonicalParams c = canonical_params(m.phi, m.theta);
        return ojson{{"mu_x", c.mu_x}, {"mu_y", c.mu_y}, {"mu_z", c.mu_z}};
    };
    ojson rep;
    rep["dynamically_equivalent"] = dynamically_equivalent(m1, m2);
    rep["lu_equivalent"] = lu_equivalent(m1, m2);
    rep["canonical_params"] = ojson::array({canon(m1), canon(m2)});
    const bool bi1 = is_basis_independent(build_machine(m1), 20, 1e-9, rng);
    const bool bi2 = is_basis_independent(build_machine(m2), 20, 1e-9, rng);
    rep["basis_independent"] = ojson::array({bi1, bi2});
    write_report(cfg, rep, out);
    return kExitOk;
}

struct CheckResult {
    std::string name;
    double metric;
    double threshold;
    bool pass;
};

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
    Rng rng(cfg.seed);
    std::vector<CheckResult> checks;
    auto below = [&](std::string name, double metric, double threshold) {
        checks.push_back({std::move(name), metric, threshold, metric < threshold});
    };

    {
        std::vector<double> ps;
        for (int i = 0; i <= 10; ++i) ps.push_back(0.1 * i);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) worst = std::max(worst, check_stationarity(random_machine(rng), ps).max_deviation);
        below("stationarity", worst, 1e-12);
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const QubitState s = random_qubit_state(rng);
            const MachineParams m = random_machine(rng);
            const BathSpec b = BathSpec::from_population(uniform01(rng));
            const Trajectory traj = iterate(s, m, b, 50, IterationPath::matrix);
            const cplx lam = lambda(b.p(), m.theta, m.alpha);
            for (int n : {1, 5, 50}) {
                worst = std::max(worst, std::abs(traj[n].d() - closed_form_d(s.d(), b.p(), m.phi, n)));
                worst = std::max(worst, std::abs(traj[n].k() - closed_form_k(s.k(), lam, m.phi, n)));
            }
        }
        below("closed_form_dynamics", worst, 1e-11);
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const MachineParams m = random_machine(rng);
            const BathSpec b = BathSpec::from_temperature(uniform(rng, 0.0, 3.0), 1.0);
            const Mat2 a = observable_matrix({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)});
            const int n = 1 + static_cast<int>(uniform01(rng) * 40);
            worst = std::max(worst, std::abs(fd_protocol_simulated(m, b, a, n) - fd_closed_form(a, b, m.phi, n)));
        }
        below("fd_identity", worst, 1e-12);
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const Mat4 v = build_v(uniform(rng, 0.0, M_PI / 2), uniform(rng, 0.0, 2 * M_PI));
            const Mat4 g = gauge_transform(v, uniform(rng, 0.0, 2 * M_PI), uniform(rng, 0.0, 2 * M_PI));
            const Mat2 rho = random_density(2, rng);
            const Mat2 xi = bath_state(BathSpec::from_population(uniform01(rng)));
            worst = std::max(worst, max_abs(apply_channel(v, rho, xi) - apply_channel(g, rho, xi)));
        }
        below("gauge_invariance", worst, 1e-13);
    }
    {
        double worst = 0.0;
        for (kernels::Isa isa : kernels::available_isas()) {
            for (int nq = 2; nq <= 8; ++nq) {
                const VecX psi = random_pure_state(1 << nq, rng);
                std::vector<cplx> ref(psi.data(), psi.data() + psi.size());
                std::vector<cplx> got = ref;
                kernels::Gate4 g{};
                for (auto& x : g) x = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
                const int qa = static_cast<int>(uniform01(rng) * nq);
                const int qb = (qa + 1 + static_cast<int>(uniform01(rng) * (nq - 1))) % nq;
                kernels::apply_gate2(kernels::Isa::scalar, ref, nq, qa, qb, g);
                kernels::apply_gate2(isa, got, nq, qa, qb, g);
                for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(ref[i] - got[i]));
            }
        }
        below("kernel_equivalence", worst, 1e-12);
    }
    {
        const MachineParams m{0.7, 0.4, 0.2};
        const BathSpec b = BathSpec::from_population(0.8);
        const Mat2 rho0 = random_density(2, rng);
        const ForwardResult fr = forward_run(rho0, 6, m, b, Mode::exact, cfg.seed);
        const Trajectory traj = iterate(QubitState::from_matrix(rho0), m, b, 6);
        below("exact_joint_vs_channel", max_abs(fr.state.reduced_system() - traj.back().to_matrix()), 1e-12);
        const Vec2 psi = random_pure_state(2, rng);
        const ReconstructionReport r = reconstruction_experiment(psi, 4, m, b, Mode::exact, 10, cfg.seed);
        below("correct_order_reversal", 1.0 - r.correct_fidelity, 1e-10);
    }
    {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double phi = uniform(rng, 0.0, M_PI / 2);
            const double p = uniform(rng, 0.5, 1.0);
            const Mat4 v = build_v(phi, uniform(rng, 0.0, 2 * M_PI));
            const Mat4 out_state = v * Mat4(kron(projector1(), bath_state(BathSpec::from_population(p)))) * v.adjoint();
            worst = std::max(worst, std::abs(concurrence(out_state) - entangling_power_closed(p, phi)));
        }
        below("entanglement_at_excited_input", worst, 1e-10);
    }

    bool all = true;
    for (const auto& c : checks) all = all && c.pass;
    if (resolved_format(cfg, false) == "json") {
        ojson doc;
        doc["config"] = ojson::parse(config_to_json(cfg));
        ojson arr = ojson::array();
        for (const auto& c : checks) {
            arr.push_back({{"name", c.name}, {"metric", c.metric}, {"threshold", c.threshold}, {"pass", c.pass}});
        }
        doc["checks"] = arr;
        doc["all_pass"] = all;
        out << doc.dump(2) << "\n";
    } else {
        out << "# config: " << config_to_json(cfg) << "\n";
        out << "check,metric,threshold,result\n";
        for (const auto& c : checks) {
            out << c.name << "," << fmt(c.metric) << "," << fmt(c.threshold) << "," << (c.pass ? "PASS" : "FAIL")
                << "\n";
        }
    }
    return all ? kExitOk : kExitInvariantFailure;
}

}  // namespace

// ---------------------------------------------------------------- config

void apply_config_json(ExperimentConfig& cfg, std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("config must be a JSON object");
    if (doc.contains("p") && doc.contains("beta")) fail("config sets both p and beta");

    using Setter = std::function<void(const nlohmann::json&)>;
    const std::map<std::string, Setter> setters{
        {"experiment", [&](const auto& v) { cfg.command = get_string(v, "experiment"); }},
        {"phi", [&](const auto& v) { cfg.phi = get_number(v, "phi"); }},
        {"theta", [&](const auto& v) { cfg.theta = get_number(v, "theta"); }},
        {"alpha", [&](const auto& v) { cfg.alpha = get_number(v, "alpha"); }},
        {"p", [&](const auto& v) { cfg.p = get_number(v, "p"); cfg.beta.reset(); }},
        {"beta", [&](const auto& v) { cfg.beta = get_beta(v); cfg.p.reset(); }},
        {"energy", [&](const auto& v) { cfg.energy = get_number(v, "energy"); }},
        {"steps", [&](const auto& v) { cfg.steps = get_int(v, "steps"); }},
        {"tau0", [&](const auto& v) { cfg.tau0 = get_number(v, "tau0"); }},
        {"seed", [&](const auto& v) {
             if (!v.is_number_unsigned() && !(v.is_number_integer() && v.template get<long long>() >= 0)) {
                 fail("config key 'seed' must be a non-negative integer");
             }
             cfg.seed = v.template get<std::uint64_t>();
         }},
        {"mode", [&](const auto& v) { cfg.mode = get_string(v, "mode"); }},
        {"out", [&](const auto& v) { cfg.out = get_string(v, "out"); }},
        {"format", [&](const auto& v) { cfg.format = get_string(v, "format"); }},
        {"degrees", [&](const auto& v) { cfg.degrees = get_bool(v, "degrees"); }},
        {"d0", [&](const auto& v) { cfg.d0 = get_number(v, "d0"); }},
        {"k0_re", [&](const auto& v) { cfg.k0_re = get_number(v, "k0_re"); }},
        {"k0_im", [&](const auto& v) { cfg.k0_im = get_number(v, "k0_im"); }},
        {"path", [&](const auto& v) { cfg.path = get_string(v, "path"); }},
        {"observable", [&](const auto& v) {
             if (!v.is_array() || v.size() != 4) fail("observable must be [a00, a11, re01, im01]");
             for (int i = 0; i < 4; ++i) cfg.observable[i] = get_number(v[i], "observable");
         }},
        {"sweep", [&](const auto& v) {
             if (!v.is_object()) fail("sweep must be an object");
             for (auto it = v.begin(); it != v.end(); ++it) {
                 if (it.key() == "phi") cfg.sweep_phi = get_sweep(it.value(), "phi");
                 else if (it.key() == "theta") cfg.sweep_theta = get_sweep(it.value(), "theta");
                 else if (it.key() == "p") cfg.sweep_p = get_sweep(it.value(), "p");
                 else fail("unknown sweep key '" + it.key() + "'");
             }
         }},
        {"grid_theta", [&](const auto& v) { cfg.grid_theta = get_int(v, "grid_theta"); }},
        {"grid_phi", [&](const auto& v) { cfg.grid_phi = get_int(v, "grid_phi"); }},
        {"refine_tol", [&](const auto& v) { cfg.refine_tol = get_number(v, "refine_tol"); }},
        {"trials", [&](const auto& v) { cfg.trials = get_int(v, "trials"); }},
        {"per_trial", [&](const auto& v) { cfg.per_trial = get_bool(v, "per_trial"); }},
        {"max_live_ancillas", [&](const auto& v) { cfg.max_live_ancillas = get_int(v, "max_live_ancillas"); }},
        {"phi2", [&](const auto& v) { cfg.phi2 = get_number(v, "phi2"); }},
        {"theta2", [&](const auto& v) { cfg.theta2 = get_number(v, "theta2"); }},
        {"alpha2", [&](const auto& v) { cfg.alpha2 = get_number(v, "alpha2"); }},
    };
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const auto s = setters.find(it.key());
        if (s == setters.end()) fail("unknown config key '" + it.key() + "'");
        s->second(it.value());
    }
}

void finalize_config(ExperimentConfig& cfg) {
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
        fail("unknown experiment '" + cfg.command + "'");
    }
    if (cfg.degrees) {
        for (double* a : {&cfg.phi, &cfg.theta, &cfg.alpha}) *a *= kDeg;
        for (auto* a : {&cfg.phi2, &cfg.theta2, &cfg.alpha2}) {
            if (*a) **a *= kDeg;
        }
        for (auto* s : {&cfg.sweep_phi, &cfg.sweep_theta}) {
            if (*s) {
                (*s)->start *= kDeg;
                (*s)->stop *= kDeg;
            }
        }
        cfg.degrees = false;
    }
    auto finite = [](double x, const char* name) {
        if (!std::isfinite(x)) fail(std::string(name) + " must be finite");
    };
    finite(cfg.phi, "phi");
    finite(cfg.theta, "theta");
    finite(cfg.alpha, "alpha");
    if (cfg.phi < 0.0 || cfg.phi > M_PI / 2 + 1e-12) fail("phi must lie in [0, pi/2]");
    if (cfg.p && !(*cfg.p >= 0.0 && *cfg.p <= 1.0)) fail("p must lie in [0, 1]");
    if (cfg.beta && std::isnan(*cfg.beta)) fail("beta must be a number");
    if (!(cfg.energy > 0.0) || !std::isfinite(cfg.energy)) fail("energy must be > 0");
    if (cfg.steps && *cfg.steps < 0) fail("steps must be >= 0");
    if (!(cfg.tau0 > 0.0) || !std::isfinite(cfg.tau0)) fail("tau0 must be > 0");
    if (cfg.mode != "exact" && cfg.mode != "sampled") fail("mode must be exact or sampled");
    if (cfg.format && *cfg.format != "csv" && *cfg.format != "json") fail("format must be csv or json");
    if (cfg.path != "analytic" && cfg.path != "matrix") fail("path must be analytic or matrix");
    if (cfg.trials < 1) fail("trials must be >= 1");
    if (cfg.grid_theta < 32 || cfg.grid_phi < 64) fail("Bloch grid must be at least 32x64");
    if (!(cfg.refine_tol > 0.0)) fail("refine_tol must be > 0");
    if (cfg.max_live_ancillas < 1 || cfg.max_live_ancillas > kMaxLiveSampledAncillas) {
        fail("max_live_ancillas must lie in [1, 20]");
    }
    for (const auto* s : {&cfg.sweep_phi, &cfg.sweep_theta, &cfg.sweep_p}) {
        if (*s && (*s)->count < 1) fail("sweep count must be >= 1");
    }
    if (cfg.sweep_phi) {
        for (double v : cfg.sweep_phi->values()) {
            if (v < 0.0 || v > M_PI / 2 + 1e-12) fail("phi sweep leaves [0, pi/2]");
        }
    }
    if (cfg.sweep_p) {
        for (double v : cfg.sweep_p->values()) {
            if (v < 0.0 || v > 1.0) fail("p sweep leaves [0, 1]");
        }
    }
    try {
        resolve_machine(cfg);
        resolve_bath(cfg);
        QubitState(cfg.d0, cplx(cfg.k0_re, cfg.k0_im));
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

std::string config_to_json(const ExperimentConfig& cfg) {
    ojson j;
    j["experiment"] = cfg.command;
    j["phi"] = cfg.phi;
    j["theta"] = cfg.theta;
    j["alpha"] = cfg.alpha;
    const BathSpec b = resolve_bath(cfg);
    j["p"] = b.p();
    if (b.beta()) {
        j["beta"] = std::isinf(*b.beta()) ? ojson("inf") : ojson(*b.beta());
        j["energy"] = *b.energy();
    }
    if (cfg.steps) j["steps"] = *cfg.steps;
    j["tau0"] = cfg.tau0;
    j["seed"] = cfg.seed;
    j["mode"] = cfg.mode;
    if (cfg.format) j["format"] = *cfg.format;
    j["d0"] = cfg.d0;
    j["k0_re"] = cfg.k0_re;
    j["k0_im"] = cfg.k0_im;
    j["path"] = cfg.path;
    j["observable"] = cfg.observable;
    ojson sweep = ojson::object();
    if (cfg.sweep_phi) sweep["phi"] = {cfg.sweep_phi->start, cfg.sweep_phi->stop, cfg.sweep_phi->count};
    if (cfg.sweep_theta) sweep["theta"] = {cfg.sweep_theta->start, cfg.sweep_theta->stop, cfg.sweep_theta->count};
    if (cfg.sweep_p) sweep["p"] = {cfg.sweep_p->start, cfg.sweep_p->stop, cfg.sweep_p->count};
    if (!sweep.empty()) j["sweep"] = sweep;
    j["grid_theta"] = cfg.grid_theta;
    j["grid_phi"] = cfg.grid_phi;
    j["refine_tol"] = cfg.refine_tol;
    j["trials"] = cfg.trials;
    j["per_trial"] = cfg.per_trial;
    j["max_live_ancillas"] = cfg.max_live_ancillas;
    if (cfg.phi2) j["phi2"] = *cfg.phi2;
    if (cfg.theta2) j["theta2"] = *cfg.theta2;
    if (cfg.alpha2) j["alpha2"] = *cfg.alpha2;
    return j.dump();
}

BathSpec resolve_bath(const ExperimentConfig& cfg) {
    if (cfg.p) return BathSpec::from_population(*cfg.p);
    if (cfg.beta) return BathSpec::from_temperature(*cfg.beta, cfg.energy);
    return BathSpec::from_population(0.75);
}

MachineParams resolve_machine(const ExperimentConfig& cfg) {
    MachineParams m{cfg.phi, cfg.theta, cfg.alpha};
    m.validate();
    return m;
}

int run_command(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
    static const std::map<std::string, std::function<int(const ExperimentConfig&, std::ostream&)>> table{
        {"thermalize", cmd_thermalize}, {"rates", cmd_rates},       {"fd", cmd_fd},
        {"entangle", cmd_entangle},     {"irreversibility", cmd_irreversibility},
        {"classify", cmd_classify},     {"verify", cmd_verify},
    };
    const auto it = table.find(cfg.command);
    if (it == table.end()) {
        err << "error: unknown experiment '" << cfg.command << "'\n";
        return kExitValidation;
    }
    try {
        if (!cfg.out) return it->second(cfg, out);
        std::ostringstream buffer;
        const int code = it->second(cfg, buffer);
        std::ofstream file(*cfg.out, std::ios::binary);
        if (!file) {
            err << "error: cannot open output file " << *cfg.out << "\n";
            return kExitValidation;
        }
        file << buffer.str();
        return code;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Qubit collision-model thermalization experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    struct Flags {
        double phi, theta, alpha, p, energy, tau0, d0, k0_re, k0_im, refine_tol, phi2, theta2, alpha2;
        std::string beta, mode, out, config, format, path, observable, sweep_phi, sweep_theta, sweep_p;
        int steps, grid_theta, grid_phi, trials, max_live;
        std::uint64_t seed;
    } f{};

    std::map<std::string, CLI::Option*> opts;
    auto add = [&](const std::string& name, auto& target, const std::string& help) {
        opts[name] = app.add_option("--" + name, target, help);
    };
    add("phi", f.phi, "dissipation angle phi");
    add("theta", f.theta, "dephasing angle theta");
    add("alpha", f.alpha, "axis angle alpha");
    add("p", f.p, "ground-state population of the bath qubit");
    add("beta", f.beta, "inverse temperature (number or inf)");
    add("energy", f.energy, "level parameter E (h = -E sigma_z)");
    add("steps", f.steps, "number of collisions");
    add("tau0", f.tau0, "collision interval");
    add("seed", f.seed, "random seed");
    add("mode", f.mode, "exact | sampled");
    add("out", f.out, "output path (default stdout)");
    add("config", f.config, "JSON config file");
    add("format", f.format, "csv | json");
    add("d0", f.d0, "initial population of |0>");
    add("k0-re", f.k0_re, "initial coherence, real part");
    add("k0-im", f.k0_im, "initial coherence, imaginary part");
    add("path", f.path, "analytic | matrix iteration");
    add("observable", f.observable, "fd observable a00,a11,re01,im01");
    add("sweep-phi", f.sweep_phi, "phi sweep start:stop:count");
    add("sweep-theta", f.sweep_theta, "theta sweep start:stop:count");
    add("sweep-p", f.sweep_p, "p sweep start:stop:count");
    add("grid-theta", f.grid_theta, "Bloch grid polar samples");
    add("grid-phi", f.grid_phi, "Bloch grid azimuthal samples");
    add("refine-tol", f.refine_tol, "angle tolerance of the local refinement");
    add("trials", f.trials, "wrong-order reversal trials");
    add("max-live-ancillas", f.max_live, "sampled-mode live ancilla cap");
    add("phi2", f.phi2, "classify: second machine phi");
    add("theta2", f.theta2, "classify: second machine theta");
    add("alpha2", f.alpha2, "classify: second machine alpha");
    auto* degrees = app.add_flag("--degrees", "angles are given in degrees");
    auto* per_trial = app.add_flag("--per-trial", "include per-trial data in the report");

    for (std::string_view name : kCommands) {
        app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    ExperimentConfig cfg;
    try {
        if (opts["config"]->count()) {
            std::ifstream in(f.config);
            if (!in) fail("cannot read config file " + f.config);
            std::stringstream ss;
            ss << in.rdbuf();
            apply_config_json(cfg, ss.str());
        }
        cfg.command = app.get_subcommands().front()->get_name();

        auto set = [&](const char* name) { return opts[name]->count() > 0; };
        if (set("p") && set("beta")) fail("--p and --beta are mutually exclusive");
        if (set("phi")) cfg.phi = f.phi;
        if (set("theta")) cfg.theta = f.theta;
        if (set("alpha")) cfg.alpha = f.alpha;
        if (set("p")) {
            cfg.p = f.p;
            cfg.beta.reset();
        }
        if (set("beta")) {
            if (f.beta == "inf") {
                cfg.beta = std::numeric_limits<double>::infinity();
            } else {
                try {
                    cfg.beta = std::stod(f.beta);
                } catch (const std::exception&) {
                    fail("--beta expects a number or inf");
                }
            }
            cfg.p.reset();
        }
        if (set("energy")) cfg.energy = f.energy;
        if (set("steps")) cfg.steps = f.steps;
        if (set("tau0")) cfg.tau0 = f.tau0;
        if (set("seed")) cfg.seed = f.seed;
        if (set("mode")) cfg.mode = f.mode;
        if (set("out")) cfg.out = f.out;
        if (set("format")) cfg.format = f.format;
        if (set("d0")) cfg.d0 = f.d0;
        if (set("k0-re")) cfg.k0_re = f.k0_re;
        if (set("k0-im")) cfg.k0_im = f.k0_im;
        if (set("path")) cfg.path = f.path;
        if (set("observable")) cfg.observable = parse_observable_flag(f.observable);
        if (set("sweep-phi")) cfg.sweep_phi = parse_sweep_flag(f.sweep_phi, "sweep-phi");
        if (set("sweep-theta")) cfg.sweep_theta = parse_sweep_flag(f.sweep_theta, "sweep-theta");
        if (set("sweep-p")) cfg.sweep_p = parse_sweep_flag(f.sweep_p, "sweep-p");
        if (set("grid-theta")) cfg.grid_theta = f.grid_theta;
        if (set("grid-phi")) cfg.grid_phi = f.grid_phi;
        if (set("refine-tol")) cfg.refine_tol = f.refine_tol;
        if (set("trials")) cfg.trials = f.trials;
        if (set("max-live-ancillas")) cfg.max_live_ancillas = f.max_live;
        if (set("phi2")) cfg.phi2 = f.phi2;
        if (set("theta2")) cfg.theta2 = f.theta2;
        if (set("alpha2")) cfg.alpha2 = f.alpha2;
        if (degrees->count()) cfg.degrees = true;
        if (per_trial->count()) cfg.per_trial = true;

        finalize_config(cfg);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return run_command(cfg, out, err);
}

}  // namespace qcollide
