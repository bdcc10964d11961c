#pragma once

// Command-line front end. `run` takes explicit streams so the commands can be
// driven in-process from tests.
//
// Exit codes: 0 success, 2 usage or domain error, 3 I/O, 4 not converged,
// 5 degenerate ground state, 6 no bracket, 7 not monotone.

#include <kondoent/kondo_sim.hpp>
#include <kondoent/measures.hpp>
#include <kondoent/rkky.hpp>
#include <kondoent/werner.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kondoent::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_io = 3,
    exit_not_converged = 4,
    exit_degenerate = 5,
    exit_no_bracket = 6,
    exit_non_monotone = 7,
};

inline int exit_code_for(Errc c) {
    switch (c) {
    case Errc::not_converged: return exit_not_converged;
    case Errc::degenerate_ground: return exit_degenerate;
    case Errc::no_bracket: return exit_no_bracket;
    case Errc::non_monotone: return exit_non_monotone;
    default: return exit_usage;
    }
}

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Format { csv, json, pretty };

inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string pretty_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline const char* boolstr(bool b) { return b ? "true" : "false"; }

// CSV: comma separated, mandatory header, '\n' line endings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    std::string str() const {
        std::string s;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) s += ',';
                s += cells[i];
            }
            s += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return s;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open output file '" + out_path + "'");
    f << text;
    f.flush();
    if (!f) throw IoError("failed writing output file '" + out_path + "'");
}

inline std::vector<double> linear_grid(double lo, double hi, int steps) {
    std::vector<double> g(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k)
        g[static_cast<std::size_t>(k)] = k + 1 == steps ? hi : lo + (hi - lo) * k / (steps - 1);
    return g;
}

// --- report serialization --------------------------------------------------

inline const std::vector<std::string> report_columns = {
    "fs", "ps", "pt", "concurrence", "negativity", "pair_entropy", "single_entropy",
    "prob_singlet", "prob_triplet", "entangled", "teleport", "chsh"};

inline std::vector<std::string> report_cells(const werner::EntanglementReport& r) {
    return {num(r.correlation),   num(r.singlet_fidelity),    num((1.0 - r.singlet_fidelity) / 3.0),
            num(r.concurrence),   num(r.negativity),          num(r.pair_entropy),
            num(r.single_entropy), num(r.prob_singlet),       num(r.prob_triplet),
            boolstr(r.entangled), boolstr(r.teleportation_useful), boolstr(r.chsh_violating)};
}

inline nlohmann::ordered_json report_json(const werner::EntanglementReport& r) {
    nlohmann::ordered_json j;
    j["fs"] = r.correlation;
    j["ps"] = r.singlet_fidelity;
    j["pt"] = (1.0 - r.singlet_fidelity) / 3.0;
    j["concurrence"] = r.concurrence;
    j["negativity"] = r.negativity;
    j["pair_entropy"] = r.pair_entropy;
    j["single_entropy"] = r.single_entropy;
    j["prob_singlet"] = r.prob_singlet;
    j["prob_triplet"] = r.prob_triplet;
    j["entangled"] = r.entangled;
    j["teleport"] = r.teleportation_useful;
    j["chsh"] = r.chsh_violating;
    return j;
}

inline std::string report_pretty(const werner::EntanglementReport& r) {
    std::ostringstream s;
    s << "spin correlation f_s     " << pretty_num(r.correlation) << '\n'
      << "singlet fidelity p_s     " << pretty_num(r.singlet_fidelity) << '\n'
      << "P(S)                     " << pretty_num(r.prob_singlet) << '\n'
      << "P(T)                     " << pretty_num(r.prob_triplet) << '\n'
      << "concurrence              " << pretty_num(r.concurrence) << '\n'
      << "negativity               " << pretty_num(r.negativity) << '\n'
      << "pair entropy E(rho_AB)   " << pretty_num(r.pair_entropy) << " bits\n"
      << "single entropy E(rho_j)  " << pretty_num(r.single_entropy) << " bits\n"
      << "entangled                " << boolstr(r.entangled) << '\n'
      << "teleportation useful     " << boolstr(r.teleportation_useful) << '\n'
      << "violates CHSH            " << boolstr(r.chsh_violating) << '\n';
    return s.str();
}

// --- model flags -------------------------------------------------------------

struct ModelFlags {
    std::string config;
    int sites = 0;
    double hopping = 1.0;
    double jk = 0.0;
    double jkb = 0.0;
    double idirect = 0.0;
    int xa = 0, xb = 0, nup = 0, ndn = 0;
    bool dense = false;
    std::string solver = "auto";
    std::size_t max_iterations = 800;

    CLI::Option *o_sites{}, *o_hopping{}, *o_jk{}, *o_jkb{}, *o_idirect{}, *o_xa{}, *o_xb{}, *o_nup{}, *o_ndn{};

    void attach(CLI::App* app) {
        app->add_option("--config", config, "model file with key = value lines; flags override it");
        o_sites = app->add_option("--sites", sites, "chain length L (1..10)");
        o_hopping = app->add_option("--hopping", hopping, "hopping t > 0");
        o_jk = app->add_option("--jk", jk, "antiferromagnetic Kondo coupling (> 0 is AFM)");
        o_jkb = app->add_option("--jkb", jkb, "separate Kondo coupling for impurity B");
        o_idirect = app->add_option("--idirect", idirect, "direct impurity coupling I S_A.S_B (> 0 is AFM)");
        o_xa = app->add_option("--xa", xa, "site of impurity A (default 0)");
        o_xb = app->add_option("--xb", xb, "site of impurity B (default L-1)");
        o_nup = app->add_option("--nup", nup, "spin-up electron count (default half filling)");
        o_ndn = app->add_option("--ndn", ndn, "spin-down electron count (default half filling)");
        app->add_flag("--dense", dense, "force the dense eigensolver");
        app->add_option("--solver", solver, "auto, lanczos or dense")->check(CLI::IsMember({"auto", "lanczos", "dense"}));
        app->add_option("--max-iterations", max_iterations, "Lanczos iteration cap");
    }

    sim::ChainModel model() const {
        sim::ChainModel m;
        m.sites = -1;
        m.site_a = m.site_b = m.n_up = m.n_dn = -1;
        if (!config.empty()) {
            std::ifstream f(config);
            if (!f) throw IoError("cannot read config file '" + config + "'");
            m = sim::parse_model(f, m);
        }
        if (*o_sites) m.sites = sites;
        if (*o_hopping) m.hopping = hopping;
        if (*o_jk) m.kondo_coupling = jk;
        if (*o_jkb) m.kondo_coupling_b = jkb;
        if (*o_idirect) m.rkky_direct = idirect;
        if (*o_xa) m.site_a = xa;
        if (*o_xb) m.site_b = xb;
        if (*o_nup) m.n_up = nup;
        if (*o_ndn) m.n_dn = ndn;
        if (m.sites < 0) m.sites = 2;
        if (m.n_up < 0) m.n_up = (m.sites + 1) / 2;
        if (m.n_dn < 0) m.n_dn = m.sites / 2;
        if (m.site_a < 0) m.site_a = 0;
        if (m.site_b < 0) m.site_b = m.sites - 1;
        m.validate();
        return m;
    }

    sim::GroundStateOptions options() const {
        sim::GroundStateOptions o;
        o.max_iterations = max_iterations;
        o.solver = dense ? sim::Solver::dense
                         : solver == "lanczos" ? sim::Solver::lanczos
                         : solver == "dense"   ? sim::Solver::dense
                                               : sim::Solver::automatic;
        return o;
    }
};

inline Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    return Format::pretty;
}

inline unsigned env_threads() {
    const char* s = std::getenv("KE_THREADS");
    if (!s) return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    return (end != s && v > 0) ? static_cast<unsigned>(v) : 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement of two Kondo impurities: Werner-state algebra, RKKY scales, exact diagonalization",
                 "kondoent"};
    app.require_subcommand(1);
    const auto formats = CLI::IsMember({"csv", "json", "pretty"});

    // werner
    auto* werner_cmd = app.add_subcommand("werner", "entanglement report for one Werner state");
    std::optional<double> w_fs, w_ps;
    std::string w_format = "pretty", w_out;
    auto* o_fs = werner_cmd->add_option("--fs", w_fs, "spin correlation <S_A.S_B> in [-3/4, 1/4]");
    auto* o_ps = werner_cmd->add_option("--ps", w_ps, "singlet fidelity in [0, 1]");
    o_fs->excludes(o_ps);
    werner_cmd->add_option("--format", w_format)->check(formats);
    werner_cmd->add_option("--out", w_out);

    // diagram
    auto* diagram_cmd = app.add_subcommand("diagram", "closed-form measures on a grid of f_s");
    double d_min = -0.75, d_max = 0.25;
    int d_steps = 101;
    std::string d_format = "csv", d_out;
    diagram_cmd->add_option("--fs-min", d_min);
    diagram_cmd->add_option("--fs-max", d_max);
    diagram_cmd->add_option("--steps", d_steps);
    diagram_cmd->add_option("--format", d_format)->check(CLI::IsMember({"csv", "json"}));
    diagram_cmd->add_option("--out", d_out);

    // rkky
    auto* rkky_cmd = app.add_subcommand("rkky", "RKKY coupling and Kondo temperature versus distance");
    rkky::RkkyParams rp;
    rp.j = 0.2;
    double r_min = 0.0, r_max = 0.0;
    int r_steps = 100;
    std::string r_format = "csv", r_out;
    rkky_cmd->add_option("--dim", rp.dimension)->check(CLI::IsMember({1, 3}));
    rkky_cmd->add_option("--j", rp.j, "exchange coupling J");
    rkky_cmd->add_option("--ef", rp.fermi_energy, "Fermi energy");
    rkky_cmd->add_option("--kf", rp.fermi_wavevector, "Fermi wavevector");
    rkky_cmd->add_option("--rhof", rp.dos_fermi, "density of states at the Fermi level");
    rkky_cmd->add_option("--bandwidth", rp.bandwidth, "band width D");
    rkky_cmd->add_option("--r-min", r_min)->required();
    rkky_cmd->add_option("--r-max", r_max)->required();
    rkky_cmd->add_option("--steps", r_steps);
    rkky_cmd->add_option("--format", r_format)->check(CLI::IsMember({"csv", "json"}));
    rkky_cmd->add_option("--out", r_out);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "ground-state impurity entanglement of a finite chain");
    ModelFlags s_model;
    s_model.attach(sim_cmd);
    std::string s_format = "pretty", s_out;
    sim_cmd->add_option("--format", s_format)->check(formats);
    sim_cmd->add_option("--out", s_out);

    // critical
    auto* crit_cmd = app.add_subcommand("critical", "parameter value where f_s crosses -1/4");
    ModelFlags c_model;
    c_model.attach(crit_cmd);
    std::string c_param = "jk", c_format = "pretty", c_out;
    double c_min = 0.0, c_max = 0.0, c_tol = 1e-6, c_target = -0.25;
    crit_cmd->add_option("--param", c_param)->check(CLI::IsMember({"jk", "idirect"}));
    crit_cmd->add_option("--min", c_min)->required();
    crit_cmd->add_option("--max", c_max)->required();
    crit_cmd->add_option("--tol", c_tol);
    crit_cmd->add_option("--target", c_target, "target correlation (default -1/4)");
    crit_cmd->add_option("--format", c_format)->check(formats);
    crit_cmd->add_option("--out", c_out);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "ground-state analysis over a parameter grid");
    ModelFlags w_model;
    w_model.attach(sweep_cmd);
    std::string sw_param = "jk", sw_format = "csv", sw_out;
    std::vector<double> sw_values;
    double sw_min = 0.0, sw_max = 0.0;
    int sw_steps = 0;
    sweep_cmd->add_option("--param", sw_param)->check(CLI::IsMember({"jk", "idirect", "separation"}));
    auto* o_values = sweep_cmd->add_option("--values", sw_values, "explicit grid")->delimiter(',');
    auto* o_smin = sweep_cmd->add_option("--min", sw_min);
    sweep_cmd->add_option("--max", sw_max);
    sweep_cmd->add_option("--steps", sw_steps);
    o_values->excludes(o_smin);
    sweep_cmd->add_option("--format", sw_format)->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--out", sw_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    auto param_of = [](const std::string& p) {
        return p == "jk" ? sim::SweepParam::kondo_coupling
                         : p == "idirect" ? sim::SweepParam::rkky_direct : sim::SweepParam::separation;
    };

    try {
        if (*werner_cmd) {
            if (!w_fs && !w_ps) throw Error(Errc::out_of_range, "one of --fs or --ps is required");
            const auto w = w_fs ? werner::from_correlation(werner::SpinCorrelation(*w_fs)) : werner::from_fidelity(*w_ps);
            const auto r = werner::classify(w);
            std::string text;
            switch (parse_format(w_format)) {
            case Format::csv: {
                CsvTable t(report_columns);
                t.add(report_cells(r));
                text = t.str();
                break;
            }
            case Format::json: text = report_json(r).dump() + "\n"; break;
            case Format::pretty: text = report_pretty(r); break;
            }
            emit(text, w_out, out);
        } else if (*diagram_cmd) {
            if (d_steps < 2) throw Error(Errc::out_of_range, "--steps must be >= 2");
            if (!(d_min < d_max) || d_min < werner::SpinCorrelation::min || d_max > werner::SpinCorrelation::max)
                throw Error(Errc::out_of_range, "need -3/4 <= fs-min < fs-max <= 1/4");
            CsvTable t({"fs", "ps", "pt", "concurrence", "negativity", "pair_entropy", "single_entropy", "entangled",
                        "teleport", "chsh"});
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (double fs : linear_grid(d_min, d_max, d_steps)) {
                const auto r = werner::classify(werner::from_correlation(werner::SpinCorrelation(fs)));
                auto cells = report_cells(r);
                t.add({cells[0], cells[1], cells[2], cells[3], cells[4], cells[5], cells[6], cells[9], cells[10],
                       cells[11]});
                auto j = report_json(r);
                j.erase("prob_singlet");
                j.erase("prob_triplet");
                rows.push_back(j);
            }
            emit(d_format == "json" ? rows.dump() + "\n" : t.str(), d_out, out);
        } else if (*rkky_cmd) {
            if (r_steps < 1) throw Error(Errc::out_of_range, "--steps must be >= 1");
            if (!(r_min > 0.0) || r_max < r_min) throw Error(Errc::domain_error, "need 0 < r-min <= r-max");
            CsvTable t({"R", "x", "F", "I", "sign_class", "T_K", "I_over_TK"});
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            const auto grid = r_steps == 1 ? std::vector<double>{r_min} : linear_grid(r_min, r_max, r_steps);
            for (double R : grid) {
                auto p = rp;
                p.distance = R;
                const auto c = rkky::coupling(p);
                t.add({num(R), num(c.range_argument), num(c.range_function), num(c.coupling_I),
                       rkky::sign_class_name(c.sign_class), num(c.kondo_temperature), num(c.ratio)});
                rows.push_back({{"R", R},
                                {"x", c.range_argument},
                                {"F", c.range_function},
                                {"I", c.coupling_I},
                                {"sign_class", rkky::sign_class_name(c.sign_class)},
                                {"T_K", c.kondo_temperature},
                                {"I_over_TK", c.ratio}});
            }
            emit(r_format == "json" ? rows.dump() + "\n" : t.str(), r_out, out);
        } else if (*sim_cmd) {
            const auto m = s_model.model();
            const auto p = sim::analyze(m, s_model.options());
            const std::string solver = sim::solver_name(p.solver);
            std::string text;
            switch (parse_format(s_format)) {
            case Format::csv: {
                std::vector<std::string> head = {"sites", "dimension", "solver", "energy", "singlet",
                                                 "werner_residual", "concurrence_direct", "negativity_direct"};
                head.insert(head.end(), report_columns.begin(), report_columns.end());
                CsvTable t(head);
                std::vector<std::string> row = {std::to_string(m.sites), std::to_string(p.dimension), solver,
                                                num(p.energy), boolstr(p.singlet), num(p.werner_residual),
                                                num(p.concurrence_direct), num(p.negativity_direct)};
                const auto cells = report_cells(p.report);
                row.insert(row.end(), cells.begin(), cells.end());
                t.add(row);
                text = t.str();
                break;
            }
            case Format::json: {
                nlohmann::ordered_json j;
                j["sites"] = m.sites;
                j["dimension"] = p.dimension;
                j["solver"] = solver;
                j["energy"] = p.energy;
                j["singlet"] = p.singlet;
                j["werner_residual"] = p.werner_residual;
                j["concurrence_direct"] = p.concurrence_direct;
                j["negativity_direct"] = p.negativity_direct;
                j["report"] = report_json(p.report);
                text = j.dump() + "\n";
                break;
            }
            case Format::pretty: {
                std::ostringstream s;
                s << "sector dimension         " << p.dimension << " (" << solver << ")\n"
                  << "ground energy E0         " << pretty_num(p.energy) << '\n'
                  << "singlet ground state     " << boolstr(p.singlet) << '\n'
                  << "Werner residual          " << pretty_num(p.werner_residual) << '\n'
                  << report_pretty(p.report);
                text = s.str();
                break;
            }
            }
            emit(text, s_out, out);
        } else if (*crit_cmd) {
            const auto m = c_model.model();
            sim::CrossingOptions co;
            co.tol = c_tol;
            co.target = c_target;
            if (!(c_tol > 0.0)) throw Error(Errc::out_of_range, "--tol must be positive");
            const auto r = sim::find_crossing(m, param_of(c_param), c_min, c_max, co, c_model.options());
            std::string text;
            switch (parse_format(c_format)) {
            case Format::json: {
                nlohmann::ordered_json j;
                j["param"] = c_param;
                j["value"] = r.value;
                j["fs"] = r.correlation;
                j["bracket_lo"] = r.bracket_lo;
                j["bracket_hi"] = r.bracket_hi;
                j["evaluations"] = r.evaluations;
                text = j.dump() + "\n";
                break;
            }
            case Format::csv: {
                CsvTable t({"param", "value", "fs", "bracket_lo", "bracket_hi", "evaluations"});
                t.add({c_param, num(r.value), num(r.correlation), num(r.bracket_lo), num(r.bracket_hi),
                       std::to_string(r.evaluations)});
                text = t.str();
                break;
            }
            case Format::pretty:
                text = c_param + " = " + pretty_num(r.value) + "  (f_s = " + pretty_num(r.correlation) + ")\n";
                break;
            }
            emit(text, c_out, out);
        } else if (*sweep_cmd) {
            const auto m = w_model.model();
            std::vector<double> grid = sw_values;
            if (grid.empty()) {
                if (sw_steps < 2 || !(sw_min < sw_max))
                    throw Error(Errc::out_of_range, "give --values or --min < --max with --steps >= 2");
                grid = linear_grid(sw_min, sw_max, sw_steps);
            }
            const auto points = sim::sweep(m, param_of(sw_param), grid, w_model.options(), env_threads());
            CsvTable t({"value", "status", "energy", "fs", "werner_residual", "concurrence", "negativity",
                        "pair_entropy", "singlet", "message"});
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& p : points) {
                std::string msg = p.message;
                for (char& ch : msg)
                    if (ch == ',' || ch == '\n') ch = ';';
                t.add({num(p.value), sim::point_status_name(p.status), num(p.energy), num(p.correlation),
                       num(p.werner_residual), num(p.report.concurrence), num(p.report.negativity),
                       num(p.report.pair_entropy), boolstr(p.singlet), msg});
                rows.push_back({{"value", p.value},
                                {"status", sim::point_status_name(p.status)},
                                {"energy", p.energy},
                                {"fs", p.correlation},
                                {"werner_residual", p.werner_residual},
                                {"concurrence", p.report.concurrence},
                                {"negativity", p.report.negativity},
                                {"pair_entropy", p.report.pair_entropy},
                                {"singlet", p.singlet},
                                {"message", p.message}});
            }
            emit(sw_format == "json" ? rows.dump() + "\n" : t.str(), sw_out, out);
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
    return exit_ok;
}

} // namespace kondoent::cli
