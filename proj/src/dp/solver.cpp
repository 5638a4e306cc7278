#include "ncdp/dp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>

#include <omp.h>

#include "ncdp/errors.hpp"
#include "ncdp/linalg/affine_solver.hpp"

namespace ncdp::dp {

namespace {

std::string memo_key(NodeIndex v, std::span<const double> s) {
    std::string k(sizeof(NodeIndex) + s.size_bytes(), '\0');
    std::memcpy(k.data(), &v, sizeof(NodeIndex));
    if (!s.empty()) std::memcpy(k.data() + sizeof(NodeIndex), s.data(), s.size_bytes());
    return k;
}

template <class E>
[[noreturn]] void rethrow_at(const E& e, const tree::Node& node) {
    throw E(std::string(e.what()) + " at node " + node.id);
}

}  // namespace

Solver::Solver(const Problem& problem, SolverConfig cfg) : p_(problem), cfg_(cfg) {
    p_.validate();
    const std::size_t N = p_.tree->size();
    tables_.resize(N);
    cont_.resize(N);
    params_.resize(N);
    direct_.assign(N, false);
    for (NodeIndex v = 0; v < N; ++v) {
        tables_[v].node = v;
        const auto ch = p_.tree->children(v);
        direct_[v] = !ch.empty() && std::all_of(ch.begin(), ch.end(), [&](NodeIndex c) {
            return p_.tree->is_leaf(c) && p_.n(c) == 0;
        });
        if (!p_.decision_cost[v]) continue;
        const auto eqs = p_.decision_cost[v]->equalities();
        if (eqs.empty()) continue;
        const std::size_t n = p_.n(v);
        std::vector<std::vector<double>> R;
        std::vector<double> rhs;
        for (const auto& e : eqs) {
            R.push_back(e.a);
            rhs.push_back(e.rhs);
        }
        linalg::AffineSolver solver(R, n);
        const auto origin = solver.solve(rhs);
        if (!origin) continue;  // inconsistent: the decision cost is +inf everywhere
        params_[v] = AffineParam{*origin, solver.null_basis()};
    }
}

bool Solver::needs_table(NodeIndex v) const { return !p_.tree->is_leaf(v) && !direct_[v]; }

SearchResult Solver::minimize_at(NodeIndex v, std::span<const double> prev, const Objective& f,
                                 const Objective* guide) const {
    (void)prev;
    const std::size_t n = p_.n(v);
    if (n == 0) {
        SearchResult r;
        r.value = f(std::span<const double>());
        r.evaluations = 1;
        return r;
    }
    try {
        return minimize_section(f, n, cfg_.search, guide, params_[v] ? &*params_[v] : nullptr);
    } catch (const SearchBoxExhausted& e) {
        rethrow_at(e, p_.tree->node(v));
    } catch (const BudgetExceeded& e) {
        rethrow_at(e, p_.tree->node(v));
    }
}

ExtReal Solver::continuation_table(NodeIndex v, std::span<const double> s) const {
    if (!cont_[v].empty()) {
        const auto t = static_cast<std::size_t>(p_.tree->node(v).time);
        return p_.grids[t].interpolate(cont_[v], s);
    }
    // Children are leaves without decisions: evaluate them directly.
    ExtReal acc(0.0);
    std::vector<double> out;
    for (NodeIndex c : p_.tree->children(v)) {
        out.assign(p_.state_dims[static_cast<std::size_t>(p_.tree->node(c).time)], 0.0);
        acc += p_.stage(c, s, {}, out).scaled(p_.tree->node(c).prob);
        if (acc.is_inf()) return acc;
    }
    return acc;
}

ExtReal Solver::table_h(NodeIndex v, std::span<const double> prev, std::span<const double> x) const {
    std::vector<double> s(p_.state_dims[static_cast<std::size_t>(p_.tree->node(v).time)]);
    ExtReal acc = p_.stage(v, prev, x, s);
    if (acc.is_inf() || p_.tree->is_leaf(v)) return acc;
    return acc + continuation_table(v, s);
}

ExtReal Solver::h(NodeIndex v, std::span<const double> prev, std::span<const double> x) {
    std::vector<double> s(p_.state_dims[static_cast<std::size_t>(p_.tree->node(v).time)]);
    ExtReal acc = p_.stage(v, prev, x, s);
    if (acc.is_inf()) return acc;
    for (NodeIndex c : p_.tree->children(v)) {
        const ExtReal r = section(c, s).value;
        acc += r.scaled(p_.tree->node(c).prob);
        if (acc.is_inf()) return acc;
    }
    return acc;
}

const SearchResult& Solver::section(NodeIndex v, std::span<const double> prev) {
    std::string key = memo_key(v, prev);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    const std::vector<double> s(prev.begin(), prev.end());
    const Objective f = [this, v, &s](std::span<const double> x) { return h(v, s, x); };
    const Objective g = [this, v, &s](std::span<const double> x) { return table_h(v, s, x); };
    const bool guided = built_ && needs_table(v);
    SearchResult r = minimize_at(v, s, f, guided ? &g : nullptr);
    exact_evals_ += r.evaluations;
    return memo_.emplace(std::move(key), std::move(r)).first->second;
}

void Solver::build_tables() {
    const int T = p_.horizon();
    for (NodeIndex v = 0; v < p_.tree->size(); ++v) {
        if (needs_table(v)) {
            cont_[v].assign(p_.grids[static_cast<std::size_t>(p_.tree->node(v).time)].size(), 0.0);
        }
    }
    for (int t = T; t >= 1; --t) {
        const auto& grid = p_.grids[static_cast<std::size_t>(t - 1)];
        const std::size_t G = grid.size();
        std::vector<NodeIndex> nodes;
        for (NodeIndex v : p_.tree->nodes_at(t)) {
            if (needs_table(p_.tree->node(v).parent)) nodes.push_back(v);
        }
        if (nodes.empty()) continue;
        std::vector<std::vector<double>> points(G);
        for (std::size_t i = 0; i < G; ++i) points[i] = grid.point(i);
        for (NodeIndex v : nodes) {
            auto& tab = tables_[v];
            tab.grid = t - 1;
            tab.values.assign(G, kInf);
            tab.argmin.assign(G, {});
        }
        const auto tasks = static_cast<long>(nodes.size() * G);
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(tasks));
        std::vector<long> evals(static_cast<std::size_t>(tasks), 0);
        std::vector<double> boxes(static_cast<std::size_t>(tasks), 0.0);
        auto run = [&](long task) {
            const auto k = static_cast<std::size_t>(task);
            const NodeIndex v = nodes[k / G];
            const std::size_t i = k % G;
            const auto& s = points[i];
            try {
                const Objective f = [this, v, &s](std::span<const double> x) { return table_h(v, s, x); };
                SearchResult r = minimize_at(v, s, f, nullptr);
                auto& tab = tables_[v];
                tab.values[i] = r.value.value();
                tab.argmin[i] = std::move(r.argmin);
                evals[k] = r.evaluations;
                boxes[k] = r.box;
            } catch (...) {
                errors[k] = std::current_exception();
            }
        };
        if (cfg_.parallel) {
            const int nt = cfg_.threads > 0 ? cfg_.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
            for (long task = 0; task < tasks; ++task) run(task);
        } else {
            for (long task = 0; task < tasks; ++task) run(task);
        }
        for (const auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        for (long task = 0; task < tasks; ++task) {
            auto& tab = tables_[nodes[static_cast<std::size_t>(task) / G]];
            tab.evaluations += evals[static_cast<std::size_t>(task)];
            tab.max_box = std::max(tab.max_box, boxes[static_cast<std::size_t>(task)]);
            table_evals_ += evals[static_cast<std::size_t>(task)];
        }
        for (NodeIndex par : p_.tree->nodes_at(t - 1)) {
            if (!needs_table(par)) continue;
            auto& H = cont_[par];
            for (std::size_t i = 0; i < G; ++i) {
                ExtReal acc(0.0);
                for (NodeIndex c : p_.tree->children(par)) {
                    acc += ExtReal(tables_[c].values[i]).scaled(p_.tree->node(c).prob);
                }
                H[i] = acc.value();
            }
        }
    }
    built_ = true;
}

AdaptedSequence Solver::extract_policy() {
    AdaptedSequence x;
    x.x.resize(p_.tree->size());
    std::vector<std::vector<double>> prev(p_.tree->size());
    const NodeIndex root = p_.tree->root();
    prev[root] = p_.initial_state;
    for (NodeIndex v = 0; v < p_.tree->size(); ++v) {  // parents precede children
        const auto& r = section(v, prev[v]);
        if (r.value.is_inf()) throw InvalidModel("problem is infeasible at node " + p_.tree->node(v).id);
        x.x[v] = r.argmin;
        std::vector<double> s(p_.state_dims[static_cast<std::size_t>(p_.tree->node(v).time)]);
        if (!p_.step(v, prev[v], x.x[v], s)) throw InvalidModel("infeasible transition at node " + p_.tree->node(v).id);
        for (NodeIndex c : p_.tree->children(v)) prev[c] = s;
    }
    return x;
}

Solution Solver::solve() {
    if (!built_) build_tables();
    Solution sol;
    const NodeIndex root = p_.tree->root();
    sol.value = section(root, p_.initial_state).value;
    if (needs_table(root)) {
        const auto& s0 = p_.initial_state;
        const Objective g = [this, root, &s0](std::span<const double> x) { return table_h(root, s0, x); };
        const auto r = minimize_at(root, s0, g, nullptr);
        table_evals_ += r.evaluations;
        sol.table_value = r.value;
    } else {
        sol.table_value = sol.value;
    }
    if (sol.value.is_finite()) {
        sol.policy = extract_policy();
        sol.forward_value = p_.expected_objective(sol.policy);
        const double fwd = sol.forward_value.value();
        const bool gap_bad =
            sol.forward_value.is_inf() ||
            (sol.table_value.is_finite() &&
             fwd - sol.table_value.value() > cfg_.eps_gap * (1.0 + std::abs(sol.value.value())));
        if (gap_bad && sol.table_value.is_finite()) {
            throw GridTooCoarse("forward value " + std::to_string(fwd) + " exceeds table value " +
                                std::to_string(sol.table_value.value()) + " at node " + p_.tree->node(root).id);
        }
    }
    sol.tables = tables_;
    sol.continuation = cont_;
    sol.table_evaluations = table_evals_;
    sol.exact_evaluations = exact_evals_;
    return sol;
}

Solution backward_solve(const Problem& problem, const SolverConfig& cfg) {
    Solver s(problem, cfg);
    return s.solve();
}

std::vector<double> policy_lookup(const Problem& problem, const ValueTable& table, std::span<const double> state) {
    if (table.grid < 0 || table.values.empty()) return {};
    const auto& grid = problem.grids[static_cast<std::size_t>(table.grid)];
    std::size_t flat = 0;
    for (std::size_t d = 0; d < grid.dim(); ++d) {
        const auto& a = grid.axes[d];
        std::size_t best = 0;
        for (std::size_t i = 1; i < a.size(); ++i) {
            if (std::abs(a[i] - state[d]) < std::abs(a[best] - state[d])) best = i;
        }
        flat = flat * a.size() + best;
    }
    return table.argmin[flat];
}

VerifyReport verify_optimality(Solver& solver, const AdaptedSequence& candidate) {
    const Problem& p = solver.problem();
    const auto& tree = *p.tree;
    const double eps = solver.config().eps_opt;
    VerifyReport rep;
    rep.root_value = solver.section(tree.root(), p.initial_state).value;
    rep.node_gap.assign(tree.size(), 0.0);
    std::vector<std::vector<double>> prev(tree.size());
    prev[tree.root()] = p.initial_state;
    std::vector<ExtReal> hv(tree.size(), ExtReal(0.0));
    std::vector<bool> reachable(tree.size(), true);
    bool nodes_ok = true;
    for (NodeIndex v = 0; v < tree.size(); ++v) {
        const auto& x = candidate.x.at(v);
        if (!reachable[v]) {
            hv[v] = ExtReal::inf();
            rep.node_gap[v] = kInf;
            rep.max_node_gap = kInf;
            nodes_ok = false;
            for (NodeIndex c : tree.children(v)) reachable[c] = false;
            continue;
        }
        hv[v] = solver.h(v, prev[v], x);
        const ExtReal best = solver.section(v, prev[v]).value;
        if (hv[v].is_inf() || best.is_inf()) {
            rep.node_gap[v] = hv[v] == best ? 0.0 : kInf;
        } else {
            rep.node_gap[v] = hv[v].value() - best.value();
        }
        if (!close(hv[v], best, eps)) nodes_ok = false;
        rep.max_node_gap = std::max(rep.max_node_gap, std::abs(rep.node_gap[v]));
        std::vector<double> s(p.state_dims[static_cast<std::size_t>(tree.node(v).time)]);
        const bool ok = p.step(v, prev[v], x, s);
        for (NodeIndex c : tree.children(v)) {
            prev[c] = s;
            reachable[c] = ok;
        }
    }
    bool chain_ok = true;
    ExtReal last = rep.root_value;
    for (int t = 0; t <= p.horizon(); ++t) {
        ExtReal acc(0.0);
        for (NodeIndex v : tree.nodes_at(t)) acc += hv[v].scaled(tree.path_prob(v));
        rep.chain.push_back(acc);
        if (!close(acc, last, eps)) chain_ok = false;
        if (acc.is_finite() && last.is_finite()) {
            rep.max_chain_gap = std::max(rep.max_chain_gap, std::abs(acc.value() - last.value()));
        } else if (acc != last) {
            rep.max_chain_gap = kInf;
        }
        last = acc;
    }
    rep.optimal = chain_ok && nodes_ok;
    return rep;
}

}  // namespace ncdp::dp
