#include "ncdp/market/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ncdp/efun/horizon.hpp"
#include "ncdp/errors.hpp"
#include "ncdp/io/problem_io.hpp"

namespace ncdp::market {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) { throw InvalidModel(field + ": " + msg); }

double num(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    return j.get<double>();
}

std::vector<double> nums(const nlohmann::json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(num(x));
    return out;
}

CostSpec cost_from_json(const nlohmann::json& j, const std::string& field) {
    CostSpec c;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "frictionless") return c;
    if (kind != "power") bad(field, "unknown cost kind '" + kind + "'");
    c.kind = CostSpec::Kind::Power;
    c.lambda = j.at("lambda").get<double>();
    c.p = j.at("p").get<double>();
    if (!(c.lambda > 0) || !(c.p >= 1)) bad(field, "power cost needs lambda > 0 and p >= 1");
    return c;
}

ConstraintSpec constraint_from_json(const nlohmann::json& j, std::size_t J, const std::string& field) {
    ConstraintSpec c;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "none") return c;
    if (kind == "box") {
        c.kind = ConstraintSpec::Kind::Box;
        c.lower = nums(j.at("lower"));
        c.upper = nums(j.at("upper"));
        if (c.lower.size() != J || c.upper.size() != J) bad(field, "box bounds need one entry per asset");
        for (std::size_t i = 0; i < J; ++i) {
            if (!(c.lower[i] <= 0 && 0 <= c.upper[i])) bad(field, "constraint set must contain the origin");
        }
        return c;
    }
    if (kind == "polycone") {
        c.kind = ConstraintSpec::Kind::PolyCone;
        for (const auto& r : j.at("normals")) {
            c.normals.push_back(nums(r));
            if (c.normals.back().size() != J) bad(field, "cone normals need one entry per asset");
        }
        return c;
    }
    bad(field, "unknown constraint kind '" + kind + "'");
}

void utility_from_json(const nlohmann::json& j, MarketModel& m) {
    auto& u = m.utility;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "sshaped") {
        u.kind = UtilitySpec::Kind::SShaped;
        u.gamma = j.value("gamma", 2.0);
        u.kappa = j.value("kappa", 1.0);
        u.beta = j.value("beta", 1.0);
        m.V = efun::sshaped(u.gamma, u.kappa, u.beta);
        m.V_lower = -u.kappa;
        return;
    }
    if (kind == "exponential") {
        u.kind = UtilitySpec::Kind::Exponential;
        u.risk_aversion = j.value("risk_aversion", 1.0);
        if (j.contains("range")) {
            const auto r = nums(j.at("range"));
            if (r.size() != 2 || !(r[1] > r[0])) bad("utility.range", "need [lo, hi] with lo < hi");
            u.range_lo = r[0];
            u.range_hi = r[1];
        }
        u.points = j.value("points", std::size_t{2001});
        if (!(u.risk_aversion > 0) || u.points < 2) bad("utility", "exponential needs risk_aversion > 0, points >= 2");
        u.x.resize(u.points);
        u.y.resize(u.points);
        for (std::size_t i = 0; i < u.points; ++i) {
            u.x[i] = u.range_lo + (u.range_hi - u.range_lo) * static_cast<double>(i) / static_cast<double>(u.points - 1);
            u.y[i] = (1.0 - std::exp(-u.risk_aversion * u.x[i])) / u.risk_aversion;
        }
        u.left_slope = kInf;  // wealth below the sampled range is not allowed
        u.right_slope = 0.0;
    } else if (kind == "sampled") {
        u.kind = UtilitySpec::Kind::Sampled;
        u.x = nums(j.at("x"));
        u.y = nums(j.at("y"));
        u.left_slope = num(j.at("left_slope"));
        u.right_slope = num(j.at("right_slope"));
    } else if (kind == "disutility") {
        u.kind = UtilitySpec::Kind::Disutility;
        auto V = efun::from_json(j.at("function"));
        if (V.dim() != 1) bad("utility.function", "disutility must be a function of one variable");
        if (!j.contains("lower_bound")) bad("utility.lower_bound", "required for a disutility");
        u.disutility = V;
        u.lower_bound = j.at("lower_bound").get<double>();
        m.V = V;
        m.V_lower = *u.lower_bound;
        return;
    } else {
        bad("utility.kind", "unknown utility '" + kind + "'");
    }
    // Sampled u (also the exponential table).
    if (u.x.size() != u.y.size() || u.x.empty()) bad("utility", "x and y must have equal nonzero length");
    for (std::size_t i = 1; i < u.x.size(); ++i) {
        if (!(u.x[i] > u.x[i - 1])) bad("utility.x", "must be strictly increasing");
        if (u.y[i] < u.y[i - 1]) bad("utility.y", "utility must be nondecreasing");
    }
    if (u.left_slope < 0) bad("utility.left_slope", "utility must be nondecreasing");
    if (u.right_slope != 0.0) bad("utility.right_slope", "utility must be bounded above (right slope 0)");
    // V(c) = -u(-c): reflect the sample and swap the slopes.
    std::vector<double> vx(u.x.size()), vy(u.y.size());
    for (std::size_t i = 0; i < u.x.size(); ++i) {
        vx[i] = -u.x[u.x.size() - 1 - i];
        vy[i] = -u.y[u.y.size() - 1 - i];
    }
    m.V = efun::sampled1d(std::move(vx), std::move(vy), u.right_slope, u.left_slope);
    m.V_lower = -u.y.back();
}

std::vector<dp::StateGrid> grids_from_json(const nlohmann::json& j) {
    std::vector<dp::StateGrid> out;
    for (const auto& g : j) out.push_back(io::grid_from_json(g));
    return out;
}

double max_abs_price(const MarketModel& m) {
    double z = 0.0;
    for (const auto& row : m.Z) {
        for (double x : row) z = std::max(z, std::abs(x));
    }
    return z;
}

// Default grids when the model file gives none: holdings in [-4, 4], cash wide enough
// to absorb any such position at the largest price.
std::vector<dp::StateGrid> default_grids(const MarketModel& m, bool terminal) {
    const std::size_t J = m.assets;
    const double span = 4.0 * std::max(1.0, max_abs_price(m)) * static_cast<double>(J) * 2.0 + std::abs(m.initial_cash) + 4.0;
    std::vector<dp::StateGrid> out;
    for (int t = 0; t < m.horizon(); ++t) {
        dp::StateGrid g;
        std::vector<double> cash(161);
        for (std::size_t i = 0; i < cash.size(); ++i) cash[i] = -span + 2.0 * span * static_cast<double>(i) / 160.0;
        g.axes.push_back(cash);
        std::vector<double> hold(81);
        for (std::size_t i = 0; i < hold.size(); ++i) hold[i] = -4.0 + 0.1 * static_cast<double>(i);
        for (std::size_t k = 0; k < J; ++k) g.axes.push_back(hold);
        if (terminal) g.axes.push_back({0.0});
        out.push_back(std::move(g));
    }
    return out;
}

efun::ExtFun constraint_function(const ConstraintSpec& c, std::size_t J) {
    if (c.kind == ConstraintSpec::Kind::Box) return efun::indicator_box(c.lower, c.upper);
    return efun::indicator_polycone(c.normals, J);
}

// Rows selecting coordinates [from, from + k) of an n-vector, optionally negated.
efun::Matrix block(std::size_t k, std::size_t n, std::size_t from, double sign = 1.0) {
    efun::Matrix A(k, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < k; ++i) A[i][from + i] = sign;
    return A;
}

}  // namespace

bool MarketModel::frictionless() const {
    return std::all_of(cost.begin(), cost.end(), [](const CostSpec& c) { return c.kind == CostSpec::Kind::Frictionless; });
}

MarketModel model_from_json(const nlohmann::json& j) {
    MarketModel m;
    std::string field = "tree";
    try {
        m.name = j.value("name", std::string());
        m.tree = std::make_shared<const tree::ScenarioTree>(tree::tree_from_json(j.at("tree")));
        const std::size_t N = m.tree->size();
        field = "assets";
        m.assets = j.at("assets").get<std::size_t>();
        if (m.assets == 0) bad(field, "need at least one risky asset");
        field = "costs";
        const CostSpec base_cost = j.contains("costs") ? cost_from_json(j.at("costs"), field) : CostSpec{};
        field = "constraints";
        const ConstraintSpec base_con = j.contains("constraints")
                                            ? constraint_from_json(j.at("constraints"), m.assets, field)
                                            : ConstraintSpec{};
        field = "claims";
        const auto claims = j.value("claims", nlohmann::json::object());
        m.initial_cash = claims.value("X0", 0.0);
        const double W = claims.value("W", 0.0);
        m.Z.resize(N);
        m.cost.assign(N, base_cost);
        m.constraint.assign(N, base_con);
        m.claims.assign(N, 0.0);
        for (NodeIndex v = 0; v < N; ++v) {
            const auto& node = m.tree->node(v);
            field = "tree." + node.id + ".data";
            const auto& d = node.data;
            if (!d.contains("Z")) bad(field, "missing prices Z");
            m.Z[v] = nums(d.at("Z"));
            if (m.Z[v].size() != m.assets) bad(field, "Z needs one entry per asset");
            if (d.contains("cost")) m.cost[v] = cost_from_json(d.at("cost"), field + ".cost");
            if (d.contains("constraint")) {
                m.constraint[v] = constraint_from_json(d.at("constraint"), m.assets, field + ".constraint");
            }
            if (d.contains("c")) m.claims[v] += d.at("c").get<double>();
            if (m.tree->is_leaf(v)) m.claims[v] -= d.value("W", W);
        }
        m.claims[m.tree->root()] -= m.initial_cash;
        field = "utility";
        utility_from_json(j.at("utility"), m);
        field = "grids";
        if (j.contains("grids")) {
            const auto& g = j.at("grids");
            if (g.contains("cash")) m.cash_grids = grids_from_json(g.at("cash"));
            if (g.contains("terminal")) m.terminal_grids = grids_from_json(g.at("terminal"));
        }
        if (m.cash_grids.empty()) m.cash_grids = default_grids(m, false);
        if (m.terminal_grids.empty()) m.terminal_grids = default_grids(m, true);
        if (j.contains("oracle")) m.oracle = j.at("oracle");
    } catch (const InvalidModel& e) {
        const std::string what = e.what();
        if (what.rfind(field, 0) == 0) throw;
        throw InvalidModel(field + ": " + what);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidModel(field + ": " + e.what());
    }
    return m;
}

std::optional<efun::ExtFun> cost_function(const MarketModel& m, NodeIndex v) {
    const auto& c = m.cost[v];
    if (c.kind == CostSpec::Kind::Frictionless) return std::nullopt;
    return efun::power_cost(c.lambda, c.p, m.assets);
}

efun::ExtFun total_cost(const MarketModel& m, NodeIndex v) {
    auto lin = efun::affine(m.Z[v]);
    if (auto G = cost_function(m, v)) return efun::sum({lin, *G});
    return lin;
}

double liquidation_value(const MarketModel& m, NodeIndex v, std::span<const double> phi, bool with_frictions) {
    double val = 0.0;
    for (std::size_t i = 0; i < m.assets; ++i) val += phi[i] * m.Z[v][i];
    if (with_frictions) {
        if (auto G = cost_function(m, v)) {
            std::vector<double> neg(phi.begin(), phi.end());
            for (auto& x : neg) x = -x;
            val -= G->eval(neg).value();
        }
    }
    return val;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Fails: return "fails";
        case Verdict::Undecided: return "undecided";
    }
    return "undecided";
}

Verdict ValidationReport::overall(const std::string& condition) const {
    Verdict out = Verdict::Holds;
    for (const auto& r : results) {
        if (r.condition != condition) continue;
        if (r.verdict == Verdict::Fails) return Verdict::Fails;
        if (r.verdict == Verdict::Undecided) out = Verdict::Undecided;
    }
    return out;
}

nlohmann::json ValidationReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json row{{"condition", r.condition}, {"verdict", to_string(r.verdict)}, {"evidence", r.evidence}};
        if (!r.node.empty()) row["node"] = r.node;
        if (!r.counterexample.empty()) row["counterexample"] = r.counterexample;
        rows.push_back(std::move(row));
    }
    return {{"conditions", rows}, {"cost_condition_all", cost_condition_all}, {"utility_ok", utility_ok}};
}

ValidationReport validate(const MarketModel& m) {
    ValidationReport rep;
    const auto& tree = *m.tree;
    const std::size_t J = m.assets;
    auto verdict_of = [](efun::SignVerdict s) {
        switch (s) {
            case efun::SignVerdict::Certified: return Verdict::Holds;
            case efun::SignVerdict::Violated: return Verdict::Fails;
            case efun::SignVerdict::SampledNoViolation: return Verdict::Undecided;
        }
        return Verdict::Undecided;
    };
    efun::ConeRegion nonpositive;
    nonpositive.rows = block(J, J, 0);

    bool costs_ok = true;
    for (NodeIndex v = 0; v < tree.size(); ++v) {
        const auto& id = tree.node(v).id;
        const auto& c = m.cost[v];
        const auto H = efun::horizon(total_cost(m, v)).fn;
        const auto k1 = efun::is_nonnegative_on(H);
        const auto k2 = efun::is_positive_off(H, {}, nonpositive);
        std::string tag = k1.method;
        if (c.kind == CostSpec::Kind::Power && c.p > 1) {
            tag = "analytic: superlinear cost, horizon of G is the indicator of {0}";
        } else if (c.kind == CostSpec::Kind::Frictionless) {
            tag = "analytic: frictionless, horizon is Z.z";
        }
        ConditionResult r1{"kk1", id, verdict_of(k1.verdict), tag, k1.counterexample};
        ConditionResult r2{"kk2", id, verdict_of(k2.verdict), tag, k2.counterexample};
        if (c.kind == CostSpec::Kind::Frictionless && r2.verdict == Verdict::Fails) {
            r2.evidence += "; existence must come from the linearity (no-arbitrage) route";
        }
        const Verdict ca = (r1.verdict == Verdict::Holds && r2.verdict == Verdict::Holds) ? Verdict::Holds
                           : (r1.verdict == Verdict::Fails || r2.verdict == Verdict::Fails) ? Verdict::Fails
                                                                                              : Verdict::Undecided;
        costs_ok = costs_ok && ca == Verdict::Holds;
        rep.results.push_back(std::move(r1));
        rep.results.push_back(std::move(r2));
        rep.results.push_back({"cond_ca", id, ca, "kk1 and kk2 for the convex total cost", {}});

        // Free disposal: S(z) <= S(z + delta) for delta >= 0, on deterministic samples.
        const auto S = total_cost(m, v);
        std::mt19937_64 rng(0xd15c0 + v);
        std::uniform_real_distribution<double> uz(-20.0, 20.0), ud(0.0, 2.0);
        ConditionResult fd{"free_disposal", id, Verdict::Holds, "sampled 200 ordered pairs", {}};
        for (int k = 0; k < 200 && fd.verdict == Verdict::Holds; ++k) {
            std::vector<double> z(J), z2(J);
            for (std::size_t i = 0; i < J; ++i) {
                z[i] = uz(rng);
                z2[i] = z[i] + ud(rng);
            }
            const double a = S.eval(z).value(), b = S.eval(z2).value();
            if (a > b + 1e-12 * std::max(1.0, std::abs(b))) {
                fd.verdict = Verdict::Fails;
                fd.counterexample = z;
                fd.counterexample.insert(fd.counterexample.end(), z2.begin(), z2.end());
            }
        }
        if (fd.verdict == Verdict::Holds && c.kind == CostSpec::Kind::Frictionless) {
            const bool nonneg = std::all_of(m.Z[v].begin(), m.Z[v].end(), [](double z) { return z >= 0; });
            fd.evidence = nonneg ? "analytic: nonnegative prices" : fd.evidence;
        }
        rep.results.push_back(std::move(fd));
    }
    rep.cost_condition_all = costs_ok;

    const auto HV = efun::horizon(m.V).fn;
    const ExtReal up = HV.eval(std::vector<double>{1.0});
    const ExtReal down = HV.eval(std::vector<double>{-1.0});
    std::string utag;
    switch (m.utility.kind) {
        case UtilitySpec::Kind::SShaped: utag = "analytic: S-shaped, limsup u(aw)/a = beta*w < 0"; break;
        case UtilitySpec::Kind::Exponential: utag = "analytic: exponential, u = -inf below the sampled range"; break;
        case UtilitySpec::Kind::Sampled: utag = "asymptotic slopes of the sampled utility"; break;
        case UtilitySpec::Kind::Disutility: utag = "horizon of the disutility"; break;
    }
    const bool vt = up.is_inf() || up.value() > 0;
    rep.results.push_back({"uu1", "", vt ? Verdict::Holds : Verdict::Fails, utag,
                           vt ? std::vector<double>{} : std::vector<double>{-1.0}});
    rep.results.push_back({"VT", "", vt ? Verdict::Holds : Verdict::Fails, utag,
                           vt ? std::vector<double>{} : std::vector<double>{1.0}});
    const bool assv = vt && down.is_finite() && down.value() <= 0;
    rep.results.push_back({"assV", "", assv ? Verdict::Holds : Verdict::Fails,
                           "horizon of V nonpositive exactly on the nonpositive half-line", {}});
    rep.results.push_back({"inada", "", up.is_inf() ? Verdict::Holds : Verdict::Fails,
                           up.is_inf() ? "horizon of V is the indicator of the nonpositive half-line"
                                       : "finite asymptotic slope",
                           {}});
    rep.utility_ok = vt;
    return rep;
}

namespace {

dp::Problem empty_problem(const MarketModel& m) {
    if (m.horizon() < 1) throw NoCashAccount("market model needs at least one trading period (T >= 1)");
    dp::Problem p;
    const std::size_t N = m.tree->size();
    p.tree = m.tree;
    p.transitions.resize(N);
    p.state_cost.resize(N);
    p.decision_cost.resize(N);
    p.lower_bound.resize(N);
    return p;
}

dp::Problem cash_problem(const MarketModel& m, bool surrogate) {
    dp::Problem p = empty_problem(m);
    const std::size_t J = m.assets;
    const int T = m.horizon();
    const auto& tree = *m.tree;
    p.decision_dims.assign(static_cast<std::size_t>(T) + 1, J);
    p.decision_dims.back() = 0;
    p.state_dims.assign(static_cast<std::size_t>(T) + 1, 1 + J);
    p.state_dims.back() = surrogate ? 1 + J : 1;
    p.initial_state.assign(1 + J, 0.0);
    p.grids = m.cash_grids;
    for (NodeIndex v = 0; v < tree.size(); ++v) {
        auto& tr = p.transitions[v];
        const auto G = cost_function(m, v);
        if (surrogate && G && m.cost[v].p <= 1) {
            throw UnsupportedStructure("no affine horizon surrogate for linear-growth costs at node " + tree.node(v).id);
        }
        if (!tree.is_leaf(v)) {
            // (X, phi), y -> (X - Z.y - G(y) - c, phi + y)
            tr.A = block(1 + J, 1 + J, 0);
            tr.B.assign(1 + J, std::vector<double>(J, 0.0));
            for (std::size_t i = 0; i < J; ++i) {
                tr.B[0][i] = -m.Z[v][i];
                tr.B[1 + i][i] = 1.0;
            }
            tr.c.assign(1 + J, 0.0);
            tr.c[0] = -m.claims[v];
            if (G) {
                if (surrogate) {
                    p.decision_cost[v] = efun::indicator_box(std::vector<double>(J, 0.0), std::vector<double>(J, 0.0));
                } else {
                    tr.terms.push_back({0, -1.0, efun::precompose(*G, block(J, 1 + 2 * J, 1 + J), std::vector<double>(J, 0.0))});
                }
            }
            if (m.constraint[v].kind != ConstraintSpec::Kind::None) {
                p.state_cost[v] = efun::precompose(constraint_function(m.constraint[v], J), block(J, 1 + J, 1),
                                                   std::vector<double>(J, 0.0));
            }
        } else {
            // Liquidation: X_T = X + Z.phi - G(-phi) - c_T.
            const std::size_t out = p.state_dims.back();
            tr.A.assign(out, std::vector<double>(1 + J, 0.0));
            tr.A[0][0] = 1.0;
            for (std::size_t i = 0; i < J; ++i) tr.A[0][1 + i] = m.Z[v][i];
            if (surrogate) {
                for (std::size_t i = 0; i < J; ++i) tr.A[1 + i][1 + i] = 1.0;
            }
            tr.B.assign(out, {});
            tr.c.assign(out, 0.0);
            tr.c[0] = -m.claims[v];
            std::vector<double> neg_cash(out, 0.0);
            neg_cash[0] = -1.0;
            std::vector<efun::ExtFun> leaf{efun::precompose(m.V, {neg_cash}, {0.0})};
            if (G) {
                if (surrogate) {
                    leaf.push_back(efun::precompose(
                        efun::indicator_box(std::vector<double>(J, 0.0), std::vector<double>(J, 0.0)),
                        block(J, out, 1), std::vector<double>(J, 0.0)));
                } else {
                    tr.terms.push_back({0, -1.0, efun::precompose(*G, block(J, 1 + J, 1, -1.0), std::vector<double>(J, 0.0))});
                }
            }
            p.state_cost[v] = efun::sum(std::move(leaf));
            p.lower_bound[v] = m.V_lower;
        }
    }
    p.validate();
    return p;
}

}  // namespace

dp::Problem build_problem_cash(const MarketModel& m) { return cash_problem(m, false); }

dp::Problem horizon_surrogate(const MarketModel& m) { return cash_problem(m, true); }

dp::Problem build_problem_terminal(const MarketModel& m) {
    dp::Problem p = empty_problem(m);
    const std::size_t J = m.assets;
    const std::size_t S = 2 + J;  // (z0, z~, d)
    const int T = m.horizon();
    const auto& tree = *m.tree;
    p.decision_dims.assign(static_cast<std::size_t>(T) + 1, 1 + J);
    p.decision_dims.back() = 0;
    p.state_dims.assign(static_cast<std::size_t>(T) + 1, S);
    p.state_dims.back() = 1;
    p.initial_state.assign(S, 0.0);
    p.grids = m.terminal_grids;
    for (NodeIndex v = 0; v < tree.size(); ++v) {
        auto& tr = p.transitions[v];
        const auto G = cost_function(m, v);
        if (!tree.is_leaf(v)) {
            // z = x; d = (x0 - z0_prev) + Z.(x~ - z~_prev) + c + G(x~ - z~_prev)
            tr.A.assign(S, std::vector<double>(S, 0.0));
            tr.B.assign(S, std::vector<double>(1 + J, 0.0));
            for (std::size_t i = 0; i <= J; ++i) tr.B[i][i] = 1.0;
            tr.A[1 + J][0] = -1.0;
            tr.B[1 + J][0] = 1.0;
            for (std::size_t i = 0; i < J; ++i) {
                tr.A[1 + J][1 + i] = -m.Z[v][i];
                tr.B[1 + J][1 + i] = m.Z[v][i];
            }
            tr.c.assign(S, 0.0);
            tr.c[1 + J] = m.claims[v];
            if (G) {
                efun::Matrix D(J, std::vector<double>(S + 1 + J, 0.0));
                for (std::size_t i = 0; i < J; ++i) {
                    D[i][1 + i] = -1.0;
                    D[i][S + 1 + i] = 1.0;
                }
                tr.terms.push_back({1 + J, 1.0, efun::precompose(*G, D, std::vector<double>(J, 0.0))});
            }
            std::vector<double> dlo(1, -kInf), dhi(1, 0.0);
            std::vector<efun::ExtFun> cost{
                efun::precompose(efun::indicator_box(dlo, dhi), block(1, S, 1 + J), {0.0})};
            if (m.constraint[v].kind != ConstraintSpec::Kind::None) {
                cost.push_back(efun::precompose(constraint_function(m.constraint[v], J), block(J, S, 1),
                                                std::vector<double>(J, 0.0)));
            }
            p.state_cost[v] = efun::sum(std::move(cost));
        } else {
            // z_T = 0: d_T = -z0_prev - Z.z~_prev + c_T + G(-z~_prev)
            tr.A.assign(1, std::vector<double>(S, 0.0));
            tr.A[0][0] = -1.0;
            for (std::size_t i = 0; i < J; ++i) tr.A[0][1 + i] = -m.Z[v][i];
            tr.B.assign(1, {});
            tr.c = {m.claims[v]};
            if (G) tr.terms.push_back({0, 1.0, efun::precompose(*G, block(J, S, 1, -1.0), std::vector<double>(J, 0.0))});
            p.state_cost[v] = m.V;
            p.lower_bound[v] = m.V_lower;
        }
    }
    p.validate();
    return p;
}

}  // namespace ncdp::market
