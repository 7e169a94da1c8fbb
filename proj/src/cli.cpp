/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "confluxlab/bounds.hpp"
#include "confluxlab/cdag.hpp"
#include "confluxlab/cli.hpp"
#include "confluxlab/costmodels.hpp"
#include "confluxlab/daap.hpp"
#include "confluxlab/error.hpp"
#include "confluxlab/factor.hpp"
#include "confluxlab/pebble.hpp"

namespace confluxlab {

namespace {

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw DomainError("cannot write '" + path + "'");
    f << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

daap::Bindings bind_params(const daap::DaapProgram& prog, long long n,
                           const std::vector<std::string>& extra) {
    daap::Bindings b;
    if (n > 0) {
        if (prog.params.size() != 1)
            throw DomainError("--n needs a program with exactly one parameter; use --param");
        b[prog.params.front()] = n;
    }
    for (const auto& kv : extra) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ParseError(0, 0, "expected NAME=VALUE, got '" + kv + "'");
        b[kv.substr(0, eq)] = std::stoll(kv.substr(eq + 1));
    }
    return b;
}

// ---------------------------------------------------------------- derive

struct DeriveArgs {
    std::string program;
    double memory = 0;
    long long procs = 1;
    long long n = 0;
    std::vector<std::string> params;
    std::string csv;
    bool quiet = false;
};

int cmd_derive(const DeriveArgs& a, std::ostream& out) {
    daap::DaapProgram prog = daap::load_daap(a.program);
    daap::Bindings params = bind_params(prog, a.n, a.params);
    bool symbolic = false;
    for (const auto& p : prog.params) symbolic = symbolic || !params.count(p);
    daap::Bindings eval_params = params;
    for (const auto& p : prog.params)
        if (!eval_params.count(p)) eval_params[p] = 64;

    bounds::BoundReport rep = bounds::parallel_bound(prog, eval_params, a.memory, a.procs);
    if (!a.quiet)
        for (const auto& line : rep.trace) out << line << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    if (!symbolic) {
        out << "Q >= " << num(static_cast<double>(rep.Q_par));
        if (a.procs > 1) out << "  (per processor, P = " << a.procs << ")";
        out << "\n";
    }
    out << "leading term: " << rep.leading_term() << "\n";

    if (!a.csv.empty()) {
        std::ostringstream os;
        os << "# schema_version=1\n";
        os << "statement,depth,V,rho,X0,u,Q\n";
        for (const auto& s : rep.statements) {
            os << s.label << "," << s.depth << "," << num(static_cast<double>(s.V_value)) << ","
               << num(s.rho) << "," << num(s.intensity.X0) << "," << s.u << ","
               << num(static_cast<double>(s.Q)) << "\n";
        }
        os << "total,,,,,," << num(static_cast<double>(rep.Q_par)) << "\n";
        write_text(a.csv, os.str(), out);
    }
    return 0;
}

// ------------------------------------------------------------- factorize

struct FactorArgs {
    std::string kind = "lu";
    int n = 0;
    std::string grid = "1,1,1";
    int block = 0;
    double memory = 0;
    std::uint64_t seed = 1;
    std::string input;
    bool pad = false;
    bool hard_memory = false;
    bool check = false;
    std::string tree = "flat";
    std::string csv;
    std::string save;
};

struct Prepared {
    DenseMatrix A;
    int original_n = 0;
    sim::GridSpec grid;
    int v = 0;
    double M = 0;
};

Prepared prepare(const FactorArgs& a) {
    if (a.kind != "lu" && a.kind != "chol")
        throw DomainError("--kind must be lu or chol, got '" + a.kind + "'");
    Prepared p;
    p.grid = sim::GridSpec::parse(a.grid);
    p.grid.validate();
    if (!a.input.empty()) {
        p.A = load_matrix(a.input);
    } else {
        if (a.n <= 0) throw DomainError("--n must be positive");
        p.A = a.kind == "lu" ? random_matrix(static_cast<std::size_t>(a.n), a.seed)
                             : random_spd(static_cast<std::size_t>(a.n), a.seed);
    }
    const int n = static_cast<int>(p.A.rows);
    p.original_n = n;
    p.M = a.memory > 0 ? a.memory
                       : static_cast<double>(n) * n / std::pow(p.grid.P(), 2.0 / 3.0);
    if (a.pad) {
        int v = a.block;
        if (v <= 0) {
            v = static_cast<int>(std::floor(2.0 * p.grid.P() * p.M / (static_cast<double>(n) * n)));
            v = std::clamp(v, p.grid.c(), std::max(p.grid.c(), 64));
        }
        p.v = v;
        const int padded = factor::padded_size(n, v, p.grid);
        if (padded != n) p.A = factor::pad_identity(p.A, static_cast<std::size_t>(padded));
        if (a.memory <= 0)
            p.M = static_cast<double>(padded) * padded / std::pow(p.grid.P(), 2.0 / 3.0);
    } else {
        p.v = a.block > 0 ? a.block : factor::default_block_size(n, p.grid, p.M);
    }
    return p;
}

factor::FactorResult execute_factor(const FactorArgs& a, const Prepared& p) {
    factor::FactorOptions opts;
    opts.sim.hard_memory = a.hard_memory;
    if (a.tree == "binomial") opts.sim.tree = sim::Tree::Binomial;
    else if (a.tree != "flat") throw DomainError("--tree must be flat or binomial");
    return a.kind == "lu" ? factor::conflux(p.A, p.grid, p.v, p.M, opts)
                          : factor::confchox(p.A, p.grid, p.v, p.M, opts);
}

int cmd_factorize(const FactorArgs& a, std::ostream& out) {
    Prepared p = prepare(a);
    factor::FactorResult r = execute_factor(a, p);
    const double model = factor::conflux_model(r.N, r.grid.P(), r.M);
    out << "kind " << a.kind << "\n";
    out << "N " << r.N;
    if (r.N != p.original_n) out << " (padded from " << p.original_n << ")";
    out << "\n";
    out << "grid " << r.grid.str() << "\n";
    out << "v " << r.v << "\n";
    out << "M " << num(r.M) << "\n";
    out << "residual " << num(r.residual) << "\n";
    out << "max_recv_words " << r.stats.max_recv() << "\n";
    out << "total_recv_words " << r.stats.total_recv() << "\n";
    out << "model_words " << num(model) << "\n";
    out << "measured_over_model " << num(static_cast<double>(r.stats.max_recv()) / model) << "\n";
    for (const auto& w : r.warnings) out << "warning: " << w << "\n";
    if (!a.csv.empty()) write_text(a.csv, sim::comm_report_csv(r.stats), out);
    if (!a.save.empty()) {
        save_matrix(r.L, a.save + ".L.bin");
        if (a.kind == "lu") save_matrix(r.U, a.save + ".U.bin");
    }
    if (a.check && !(r.residual <= 1e-8 * r.N))
        throw DomainError("residual " + num(r.residual) + " exceeds 1e-8 * N");
    return 0;
}

// ----------------------------------------------------------------- sweep

struct SweepArgs {
    FactorArgs base;
    std::vector<int> ns;
    std::vector<std::string> grids;
    std::vector<std::string> models;
    std::string csv = "-";
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    std::vector<costmodels::ModelId> models;
    if (a.models.empty()) {
        models.push_back(a.base.kind == "chol" ? costmodels::ModelId::Confchox
                                               : costmodels::ModelId::Conflux);
    }
    for (const auto& m : a.models) models.push_back(costmodels::parse_model(m));

    std::vector<std::string> grids;
    for (const auto& g : a.grids) {
        std::stringstream ss(g);
        std::string part;
        while (std::getline(ss, part, ';'))
            if (!part.empty()) grids.push_back(part);
    }
    if (a.ns.empty() || grids.empty()) throw DomainError("sweep needs --n-list and --grids");

    std::ostringstream os;
    os << "# schema_version=1\n";
    os << "kind,N,Px,Py,Pz,v,M,rank,recv_words,sent_words,model,model_words,ratio,approximate\n";
    std::vector<std::string> warnings;
    for (int n : a.ns) {
        for (const auto& g : grids) {
            FactorArgs fa = a.base;
            fa.n = n;
            fa.grid = g;
            Prepared p = prepare(fa);
            factor::FactorResult r = execute_factor(fa, p);
            for (const auto& w : r.warnings) warnings.push_back(w);
            for (costmodels::ModelId id : models) {
                costmodels::ModelValue mv = costmodels::model_words(id, r.N, r.grid.P(), r.M);
                for (std::size_t k = 0; k < r.stats.ranks.size(); ++k) {
                    const auto& rs = r.stats.ranks[k];
                    os << fa.kind << "," << r.N << "," << r.grid.Px << "," << r.grid.Py << ","
                       << r.grid.Pz << "," << r.v << "," << num(r.M) << "," << k << ","
                       << rs.recv << "," << rs.sent << "," << costmodels::tag(id) << ","
                       << num(mv.words) << "," << num(static_cast<double>(rs.recv) / mv.words)
                       << "," << (mv.approximate ? 1 : 0) << "\n";
                }
            }
        }
    }
    write_text(a.csv, os.str(), out);
    if (a.csv != "-")
        for (const auto& w : warnings) out << "warning: " << w << "\n";
    return 0;
}

// ---------------------------------------------------------------- pebble

struct PebbleArgs {
    std::string cdag;
    std::string program;
    long long n = 0;
    std::vector<std::string> params;
    int memory = 2;
    int procs = 1;
    bool brute_force = false;
    bool charge_sender = false;
    std::string schedule;
    std::string witness;
};

int cmd_pebble(const PebbleArgs& a, std::ostream& out) {
    if (a.cdag.empty() == a.program.empty())
        throw DomainError("give exactly one of --cdag and --program");
    Cdag g;
    std::optional<daap::DaapProgram> prog;
    daap::Bindings params;
    if (!a.cdag.empty()) {
        g = load_cdag(a.cdag);
    } else {
        prog = daap::load_daap(a.program);
        params = bind_params(*prog, a.n, a.params);
        g = build_cdag(*prog, params);
    }
    pebble::GameConfig cfg;
    cfg.M = a.memory;
    cfg.parallel = a.procs > 1;
    cfg.P = a.procs;
    cfg.charge_sender = a.charge_sender;

    out << "vertices " << g.size() << "\n";
    out << "compute_vertices " << g.compute_vertices().size() << "\n";
    out << "M " << a.memory << "\n";
    if (prog) {
        bounds::BoundReport rep = cfg.parallel
                                      ? bounds::parallel_bound(*prog, params, a.memory, a.procs)
                                      : bounds::program_bound(*prog, params, a.memory);
        out << "derived_bound " << num(static_cast<double>(cfg.parallel ? rep.Q_par : rep.Q_seq))
            << "\n";
    }
    if (!a.schedule.empty()) {
        pebble::Schedule s = pebble::parse_schedule(read_text(a.schedule), g);
        pebble::RunResult r = pebble::run_schedule(g, s, cfg);
        out << "schedule_legal " << (r.legal ? "yes" : "no") << "\n";
        if (!r.legal) out << "schedule_error step " << r.failed_step << ": " << r.reason << "\n";
        out << "schedule_complete " << (r.complete ? "yes" : "no") << "\n";
        out << "schedule_Q " << r.Q << "\n";
        if (cfg.parallel) out << "schedule_max_rank_io " << r.max_rank_io << "\n";
    }
    if (a.brute_force) {
        pebble::OracleResult o = pebble::brute_force_optimal_Q(g, cfg);
        out << "Q_opt " << o.Q << "\n";
        if (cfg.parallel) out << "max_rank_io " << o.max_rank_io << "\n";
        out << "states_explored " << o.states_explored << "\n";
        if (!a.witness.empty())
            write_text(a.witness, pebble::format_schedule(o.witness, g, cfg.parallel), out);
    }
    return 0;
}

// ---------------------------------------------------------------- models

struct ModelsArgs {
    double n = 0;
    double procs = 0;
    double memory = 0;
    std::vector<std::string> models;
};

int cmd_models(const ModelsArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<costmodels::ModelId> ids;
    for (const auto& m : a.models) ids.push_back(costmodels::parse_model(m));
    if (ids.empty()) ids = costmodels::all_models();
    out << costmodels::models_csv(ids, a.n, a.procs, a.memory);
    if (!costmodels::in_memory_regime(a.n, a.procs, a.memory))
        err << "warning: " << costmodels::model_words(ids.front(), a.n, a.procs, a.memory).warnings.front()
            << "\n";
    return 0;
}

// ----------------------------------------------------------------- audit

int cmd_audit(const FactorArgs& a, int t, const std::string& csv, std::ostream& out) {
    Prepared p = prepare(a);
    factor::FactorResult r = execute_factor(a, p);
    std::ostringstream os;
    os << "# schema_version=1\n";
    os << "t,step,measured_words,predicted_words\n";
    const int first = t > 0 ? t : 1;
    const int last = t > 0 ? t : r.N / r.v;
    for (int k = first; k <= last; ++k)
        for (const auto& row : factor::step_cost_audit(r, k))
            os << row.t << "," << row.step << "," << row.measured << "," << num(row.predicted)
               << "\n";
    write_text(csv, os.str(), out);
    return 0;
}

void add_factor_options(CLI::App* sub, FactorArgs& f, bool with_n) {
    sub->add_option("--kind", f.kind, "lu or chol")->capture_default_str();
    if (with_n) sub->add_option("--n", f.n, "matrix size");
    sub->add_option("--grid", f.grid, "processor grid X,Y,Z")->capture_default_str();
    sub->add_option("--block", f.block, "block size v (default 2PM/N^2, adjusted)");
    sub->add_option("--memory", f.memory, "words per rank (default N^2/P^(2/3))");
    sub->add_option("--seed", f.seed, "matrix seed")->capture_default_str();
    sub->add_option("--input", f.input, "binary matrix file instead of a seeded matrix");
    sub->add_flag("--pad", f.pad, "embed A in the next valid size with an identity border");
    sub->add_flag("--hard-memory", f.hard_memory, "fail when a rank exceeds M");
    sub->add_option("--tree", f.tree, "collective tree: flat or binomial")->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Communication lower bounds, pebbling oracles and 2.5D factorizations"};
    app.name("confluxlab");
    app.require_subcommand(1);

    DeriveArgs derive;
    auto* s_derive = app.add_subcommand("derive", "derive an I/O lower bound for a DAAP program");
    s_derive->add_option("--program", derive.program, "DAAP file")->required();
    s_derive->add_option("--memory", derive.memory, "fast memory size M")->required();
    s_derive->add_option("--procs", derive.procs, "processor count P")->capture_default_str();
    s_derive->add_option("--n", derive.n, "value of the program's single parameter");
    s_derive->add_option("--param", derive.params, "NAME=VALUE parameter binding");
    s_derive->add_option("--csv", derive.csv, "per-statement CSV path, - for stdout");
    s_derive->add_flag("--quiet", derive.quiet, "omit the derivation trace");

    FactorArgs fact;
    auto* s_fact = app.add_subcommand("factorize", "run COnfLUX or COnfCHOX on the simulated machine");
    add_factor_options(s_fact, fact, true);
    s_fact->add_flag("--check", fact.check, "fail unless the residual is within 1e-8 * N");
    s_fact->add_option("--csv", fact.csv, "per-rank traffic CSV path, - for stdout");
    s_fact->add_option("--save", fact.save, "write factors to PREFIX.L.bin / PREFIX.U.bin");

    SweepArgs sweep;
    auto* s_sweep = app.add_subcommand("sweep", "factorize over a set of sizes and grids");
    add_factor_options(s_sweep, sweep.base, false);
    s_sweep->add_option("--n-list", sweep.ns, "matrix sizes")->required()->delimiter(',');
    s_sweep->add_option("--grids", sweep.grids, "grids, e.g. 2x2x1 2x2x2")->required();
    s_sweep->add_option("--models", sweep.models, "cost models to compare against")->delimiter(',');
    s_sweep->add_option("--csv", sweep.csv, "output path, - for stdout")->capture_default_str();

    PebbleArgs peb;
    auto* s_peb = app.add_subcommand("pebble", "play or solve the red-blue pebble game");
    s_peb->add_option("--cdag", peb.cdag, "cDAG file");
    s_peb->add_option("--program", peb.program, "DAAP file to expand into a cDAG");
    s_peb->add_option("--n", peb.n, "value of the program's single parameter");
    s_peb->add_option("--param", peb.params, "NAME=VALUE parameter binding");
    s_peb->add_option("--memory", peb.memory, "red pebbles M")->required();
    s_peb->add_option("--procs", peb.procs, "ranks for the parallel game")->capture_default_str();
    s_peb->add_flag("--brute-force", peb.brute_force, "compute the exact optimum");
    s_peb->add_flag("--charge-sender", peb.charge_sender, "parallel game: charge both ends");
    s_peb->add_option("--schedule", peb.schedule, "schedule file to replay");
    s_peb->add_option("--witness", peb.witness, "write the optimal schedule here");

    ModelsArgs mod;
    auto* s_mod = app.add_subcommand("models", "evaluate closed-form communication models");
    s_mod->add_option("--n", mod.n, "matrix size")->required();
    s_mod->add_option("--procs", mod.procs, "processor count")->required();
    s_mod->add_option("--memory", mod.memory, "words per processor")->required();
    s_mod->add_option("--model", mod.models, "model tags (default all)")->delimiter(',');

    FactorArgs aud;
    int aud_t = 0;
    std::string aud_csv = "-";
    auto* s_aud = app.add_subcommand("audit", "per-step measured traffic against the step formulas");
    add_factor_options(s_aud, aud, true);
    s_aud->add_option("--t", aud_t, "iteration (1-based, default all)");
    s_aud->add_option("--csv", aud_csv, "output path, - for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Parse);
    }

    try {
        if (*s_derive) return cmd_derive(derive, out);
        if (*s_fact) return cmd_factorize(fact, out);
        if (*s_sweep) return cmd_sweep(sweep, out);
        if (*s_peb) return cmd_pebble(peb, out);
        if (*s_mod) return cmd_models(mod, out, err);
        if (*s_aud) return cmd_audit(aud, aud_t, aud_csv, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Parse);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::Domain);
    }
    return 0;
}

}  // namespace confluxlab
