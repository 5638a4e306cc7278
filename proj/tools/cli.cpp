#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "ncdp/cones/cones.hpp"
#include "ncdp/dp/brute_force.hpp"
#include "ncdp/dp/solver.hpp"
#include "ncdp/errors.hpp"
#include "ncdp/io/problem_io.hpp"
#include "ncdp/io/report.hpp"
#include "ncdp/market/market.hpp"

namespace ncdp::cli {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
    std::string input;
    std::string out_dir;
    int grid_points = 33;
    double box_max = 1024.0;
    double eps_opt = 1e-6;
    double eps_gap = 1e-3;
    int threads = 0;
    bool force = false;
    std::string form = "cash";
    std::string grids;
    std::uint64_t seed = 1;
};

struct Input {
    std::string stem;
    std::optional<market::MarketModel> model;
    std::optional<dp::Problem> problem;

    [[nodiscard]] const tree::ScenarioTree& tree() const { return model ? *model->tree : *problem->tree; }
};

Input load_input(const std::string& path) {
    const auto j = io::read_json_file(path);
    Input in;
    in.stem = fs::path(path).stem().string();
    if (j.contains("assets")) {
        in.model = market::model_from_json(j);
    } else if (j.contains("decision_dims")) {
        in.problem = io::problem_from_json(j);
    } else {
        throw InvalidModel(path + ": neither a market model (\"assets\") nor a problem (\"decision_dims\")");
    }
    return in;
}

std::string out_dir(const RunConfig& cfg) {
    std::string dir = cfg.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("NCDP_OUT");
        dir = env != nullptr && *env != '\0' ? env : ".";
    }
    fs::create_directories(dir);
    return dir;
}

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(out_dir(cfg)) / name).string(); }

void write_json(const std::string& path, const nlohmann::json& j) { io::write_text(path, j.dump(2) + "\n"); }

struct CheckOutcome {
    int exit = kOk;
    cones::CheckReport horizon;
    nlohmann::json report;
};

int combine(int a, int b) {
    if (a == kConditionFails || b == kConditionFails) return kConditionFails;
    if (a == kUndecided || b == kUndecided) return kUndecided;
    return kOk;
}

int exit_of(const cones::CheckReport& r) {
    if (r.verdict == market::Verdict::Undecided) return kUndecided;
    return r.holds_or_linear() ? kOk : kConditionFails;
}

CheckOutcome run_check(const Input& in) {
    CheckOutcome c;
    c.report["input"] = in.stem;
    if (in.model) {
        const auto& m = *in.model;
        const auto v = market::validate(m);
        c.report["validation"] = v.to_json();
        int code = kOk;
        for (const char* cond : {"uu1", "VT", "assV"}) {
            const auto o = v.overall(cond);
            code = combine(code, o == market::Verdict::Holds ? kOk
                                 : o == market::Verdict::Fails ? kConditionFails
                                                               : kUndecided);
        }
        c.horizon = cones::check_horizon_positivity(m);
        c.exit = combine(code, exit_of(c.horizon));
        if (m.frictionless()) {
            const auto lp = cones::no_arbitrage_lp(m);
            c.report["no_arbitrage_lp"] = {{"arbitrage", lp.arbitrage},
                                           {"holdings", io::sequence_to_json(*m.tree, lp.holdings)}};
        }
        if (c.horizon.verdict == market::Verdict::Fails && c.horizon.kind == cones::ConeKind::Linear) {
            c.report["null_space"] = cones::null_space(m).to_json(*m.tree);
        }
    } else {
        c.horizon = cones::check_horizon_positivity(*in.problem);
        c.exit = exit_of(c.horizon);
        if (c.horizon.verdict == market::Verdict::Fails && c.horizon.kind == cones::ConeKind::Linear) {
            c.report["null_space"] = cones::null_space(*in.problem).to_json(*in.problem->tree);
        }
    }
    c.report["horizon_check"] = c.horizon.to_json(in.tree());
    c.report["exit"] = c.exit;
    return c;
}

// Problem to solve: the requested market form, projected onto the complement of a
// linear null space when there is one.
dp::Problem prepare(const Input& in, const RunConfig& cfg, const cones::CheckReport& check, nlohmann::json& rep) {
    dp::Problem p;
    if (in.model) {
        if (cfg.form == "cash") {
            p = market::build_problem_cash(*in.model);
        } else if (cfg.form == "terminal") {
            p = market::build_problem_terminal(*in.model);
        } else {
            throw InvalidModel("--form: expected cash or terminal");
        }
        rep["form"] = cfg.form;
    } else {
        p = *in.problem;
        rep["form"] = "history";
    }
    if (check.verdict == market::Verdict::Fails && check.kind == cones::ConeKind::Linear) {
        if (in.model && cfg.form != "cash") {
            throw UnsupportedStructure("null-space projection is available for the cash form only");
        }
        const auto N = in.model ? cones::null_space(*in.model) : cones::null_space(*in.problem);
        rep["projected_onto"] = N.to_json(in.tree());
        p = cones::project_problem(p, N);
    }
    return p;
}

dp::SolverConfig solver_config(const RunConfig& cfg) {
    dp::SolverConfig s;
    s.search.grid_points = cfg.grid_points;
    s.search.box_max = cfg.box_max;
    s.eps_opt = cfg.eps_opt;
    s.eps_gap = cfg.eps_gap;
    s.threads = cfg.threads;
    return s;
}

nlohmann::json config_json(const RunConfig& cfg) {
    return {{"grid_points", cfg.grid_points}, {"box_max", cfg.box_max}, {"eps_opt", cfg.eps_opt},
            {"eps_gap", cfg.eps_gap}, {"seed", cfg.seed}};
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const auto in = load_input(cfg.input);
    auto c = run_check(in);
    write_json(path_in(cfg, in.stem + ".check.json"), c.report);
    if (c.horizon.witness) {
        const dp::Problem p = in.model ? market::horizon_surrogate(*in.model) : *in.problem;
        io::write_text(path_in(cfg, in.stem + ".witness.csv"), io::sequence_csv(p, *c.horizon.witness));
    }
    out << in.stem << ": horizon check " << market::to_string(c.horizon.verdict) << " ("
        << cones::to_string(c.horizon.kind) << "), exit " << c.exit << "\n";
    return c.exit;
}

// Random perturbations of the policy never beat the root value (seeded).
nlohmann::json inequality_spot_check(dp::Solver& solver, const dp::AdaptedSequence& policy, double root,
                                     std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = kInf;
    int feasible = 0;
    for (int k = 0; k < 20; ++k) {
        auto x = policy;
        for (auto& d : x.x) {
            for (auto& v : d) v += u(rng);
        }
        const auto r = dp::verify_optimality(solver, x);
        if (r.chain.empty() || r.chain.back().is_inf()) continue;
        ++feasible;
        for (const auto& c : r.chain) {
            if (c.is_finite()) worst = std::min(worst, c.value() - root);
        }
    }
    return {{"draws", 20}, {"feasible", feasible}, {"min_margin", io::ext_to_json(ExtReal(worst))}};
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto in = load_input(cfg.input);
    const auto check = run_check(in);
    nlohmann::json rep{{"input", in.stem}, {"config", config_json(cfg)}};
    rep["check"] = {{"verdict", market::to_string(check.horizon.verdict)},
                    {"kind", cones::to_string(check.horizon.kind)},
                    {"exit", check.exit}};
    if (check.exit != kOk) {
        if (!cfg.force) {
            err << in.stem << ": existence conditions not established (check exit " << check.exit
                << "); rerun with --force to solve anyway\n";
            return check.exit;
        }
        rep["forced"] = true;
    }
    const auto p = prepare(in, cfg, check.horizon, rep);
    dp::Solver solver(p, solver_config(cfg));
    const auto sol = solver.solve();
    const auto ver = dp::verify_optimality(solver, sol.policy);
    rep["solution"] = io::solution_to_json(p, sol);
    rep["verification"] = io::verify_to_json(*p.tree, ver);
    rep["inequality_spot_check"] = inequality_spot_check(solver, sol.policy, sol.value.value(), cfg.seed);
    write_json(path_in(cfg, in.stem + ".solve.json"), rep);
    io::write_text(path_in(cfg, in.stem + ".policy.csv"), io::sequence_csv(p, sol.policy));
    io::write_text(path_in(cfg, in.stem + ".tables.csv"), io::value_tables_csv(p, sol));
    out << in.stem << ": value " << rep["solution"]["value"].dump() << ", forward "
        << rep["solution"]["forward_value"].dump() << ", optimal " << (ver.optimal ? "yes" : "no") << "\n";
    return kOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
    const auto in = load_input(cfg.input);
    double lo = 0, hi = 0;
    std::size_t points = 0;
    if (!cfg.grids.empty()) {
        const auto a = cfg.grids.find(':'), b = cfg.grids.rfind(':');
        if (a == std::string::npos || a == b) throw InvalidModel("--grids: expected lo:hi:points");
        try {
            lo = std::stod(cfg.grids.substr(0, a));
            hi = std::stod(cfg.grids.substr(a + 1, b - a - 1));
            points = std::stoul(cfg.grids.substr(b + 1));
        } catch (const std::exception&) {
            throw InvalidModel("--grids: expected lo:hi:points");
        }
    } else {
        const nlohmann::json o = in.model ? in.model->oracle : nlohmann::json::object();
        if (!o.contains("points")) throw InvalidModel("oracle: no --grids given and the file has no oracle grid");
        lo = o.at("lo").get<double>();
        hi = o.at("hi").get<double>();
        points = o.at("points").get<std::size_t>();
    }
    if (points < 1 || !(hi >= lo)) throw InvalidModel("--grids: need points >= 1 and hi >= lo");
    const auto check = run_check(in);
    nlohmann::json rep{{"input", in.stem}, {"config", config_json(cfg)}};
    const auto p = prepare(in, cfg, check.horizon, rep);
    // The oracle enumerates the original problem, never the projection.
    const dp::Problem raw = in.model ? (cfg.form == "terminal" ? market::build_problem_terminal(*in.model)
                                                               : market::build_problem_cash(*in.model))
                                     : *in.problem;
    const auto bf = dp::brute_force(raw, dp::uniform_decision_grids(raw, lo, hi, points), true, cfg.threads);
    const auto sol = dp::backward_solve(p, solver_config(cfg));
    rep["grids"] = {{"lo", lo}, {"hi", hi}, {"points", points}};
    rep["brute_force"] = io::brute_force_to_json(*raw.tree, bf);
    rep["solution"] = io::solution_to_json(p, sol);
    const double v = sol.value.value(), b = bf.value.value();
    const double gap = std::abs(v - b), tol = std::max(1e-3, 1e-3 * std::abs(v));
    const bool pass = sol.value.is_finite() && bf.value.is_finite() && gap <= tol;
    rep["gap"] = gap;
    rep["tolerance"] = tol;
    rep["pass"] = pass;
    write_json(path_in(cfg, in.stem + ".oracle.json"), rep);
    out << in.stem << ": dp " << nlohmann::json(v).dump() << ", brute force " << nlohmann::json(b).dump() << ", gap "
        << nlohmann::json(gap).dump() << (pass ? " pass" : " FAIL") << "\n";
    return pass ? kOk : kConditionFails;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multistage stochastic programs on scenario trees: existence checks and dynamic programming"};
    app.require_subcommand(1);
    RunConfig cfg;
    auto* check = app.add_subcommand("check", "Verify existence conditions of a market model or problem");
    auto* solve = app.add_subcommand("solve", "Backward solve with optimality verification");
    auto* oracle = app.add_subcommand("oracle", "Compare the dynamic program against brute-force enumeration");
    for (auto* sc : {check, solve, oracle}) {
        sc->add_option("file", cfg.input, "Market model or problem JSON")->required();
        sc->add_option("--out", cfg.out_dir, "Output directory (default $NCDP_OUT or .)");
        sc->add_option("--threads", cfg.threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
    }
    for (auto* sc : {solve, oracle}) {
        sc->add_option("--grid", cfg.grid_points, "Search grid points per axis (odd, >= 5)");
        sc->add_option("--bmax", cfg.box_max, "Largest search half-width")->check(CLI::PositiveNumber);
        sc->add_option("--eps", cfg.eps_opt, "Optimality tolerance")->check(CLI::PositiveNumber);
        sc->add_option("--eps-gap", cfg.eps_gap, "Forward-gap tolerance")->check(CLI::PositiveNumber);
        sc->add_option("--form", cfg.form, "Market formulation: cash or terminal");
        sc->add_option("--seed", cfg.seed, "Seed for randomized spot checks");
    }
    solve->add_flag("--force", cfg.force, "Solve even when the existence check does not pass");
    oracle->add_option("--grids", cfg.grids, "Decision grid lo:hi:points (default: the file's oracle grid)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kBadInput;
    }
    if (cfg.grid_points < 5 || cfg.grid_points % 2 == 0) {
        err << "--grid: must be odd and at least 5\n";
        return kBadInput;
    }
    if (cfg.form != "cash" && cfg.form != "terminal") {
        err << "--form: expected cash or terminal\n";
        return kBadInput;
    }

    try {
        if (*check) return cmd_check(cfg, out);
        if (*solve) return cmd_solve(cfg, out, err);
        return cmd_oracle(cfg, out);
    } catch (const SearchBoxExhausted& e) {
        err << "SearchBoxExhausted: " << e.what() << "\n";
        return kSearchFailed;
    } catch (const GridTooCoarse& e) {
        err << "GridTooCoarse: " << e.what() << "\n";
        return kSearchFailed;
    } catch (const BudgetExceeded& e) {
        err << "BudgetExceeded: " << e.what() << "\n";
        return kBudget;
    } catch (const NotASubspace& e) {
        err << "NotASubspace: " << e.what() << "\n";
        return kConditionFails;
    } catch (const Error& e) {
        err << e.code() << ": " << e.what() << "\n";
        return kBadInput;
    } catch (const fs::filesystem_error& e) {
        err << e.what() << "\n";
        return kBadInput;
    }
}

}  // namespace ncdp::cli
