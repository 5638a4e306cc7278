#include "ncdp/dp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ncdp/errors.hpp"

namespace ncdp::dp {

std::size_t StateGrid::size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

std::vector<double> StateGrid::point(std::size_t flat) const {
    std::vector<double> p(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
        const std::size_t m = axes[d].size();
        p[d] = axes[d][flat % m];
        flat /= m;
    }
    return p;
}

ExtReal StateGrid::interpolate(std::span<const double> values, std::span<const double> s) const {
    const std::size_t D = axes.size();
    if (s.size() != D) throw std::invalid_argument("StateGrid::interpolate: dimension mismatch");
    // Per axis: lower cell index and weight of the upper corner.
    std::vector<std::size_t> lo(D, 0);
    std::vector<double> w(D, 0.0);
    std::vector<std::size_t> active;
    for (std::size_t d = 0; d < D; ++d) {
        const auto& a = axes[d];
        if (a.size() == 1) continue;
        const double span = a.back() - a.front();
        const double tol = 1e-9 * span;
        const double x = s[d];
        if (!(x >= a.front() - tol && x <= a.back() + tol)) return ExtReal::inf();
        const double xc = std::clamp(x, a.front(), a.back());
        auto it = std::upper_bound(a.begin(), a.end(), xc);
        std::size_t i = it == a.begin() ? 0 : static_cast<std::size_t>(it - a.begin()) - 1;
        if (i >= a.size() - 1) i = a.size() - 2;
        lo[d] = i;
        w[d] = (xc - a[i]) / (a[i + 1] - a[i]);
        active.push_back(d);
    }
    std::vector<std::size_t> stride(D, 1);
    for (std::size_t d = D; d-- > 1;) stride[d - 1] = stride[d] * axes[d].size();
    std::size_t base = 0;
    for (std::size_t d = 0; d < D; ++d) base += lo[d] * stride[d];

    double acc = 0.0;
    const std::size_t corners = std::size_t{1} << active.size();
    for (std::size_t c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::size_t idx = base;
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t d = active[k];
            if (c >> k & 1U) {
                weight *= w[d];
                idx += stride[d];
            } else {
                weight *= 1.0 - w[d];
            }
        }
        if (weight == 0.0) continue;
        const double v = values[idx];
        if (v == kInf) return ExtReal::inf();
        acc += weight * v;
    }
    return ExtReal(acc);
}

StateGrid StateGrid::uniform(std::span<const double> lo, std::span<const double> hi,
                             std::span<const std::size_t> n) {
    StateGrid g;
    for (std::size_t d = 0; d < lo.size(); ++d) {
        std::vector<double> a(n[d]);
        if (n[d] == 1) {
            a[0] = lo[d];
        } else {
            for (std::size_t i = 0; i < n[d]; ++i) {
                a[i] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) / static_cast<double>(n[d] - 1);
            }
        }
        g.axes.push_back(std::move(a));
    }
    return g;
}

Problem Problem::history(std::shared_ptr<const tree::ScenarioTree> tree, std::vector<std::size_t> decision_dims) {
    Problem p;
    const std::size_t N = tree->size();
    p.tree = std::move(tree);
    p.decision_dims = std::move(decision_dims);
    std::size_t acc = 0;
    for (auto n : p.decision_dims) {
        acc += n;
        p.state_dims.push_back(acc);
    }
    p.transitions.resize(N);
    p.state_cost.resize(N);
    p.decision_cost.resize(N);
    p.lower_bound.resize(N);
    for (NodeIndex v = 0; v < N; ++v) {
        const int t = p.tree->node(v).time;
        const std::size_t prev = p.prev_dim(t);
        const std::size_t n = p.n(v);
        auto& tr = p.transitions[v];
        tr.A.assign(prev + n, std::vector<double>(prev, 0.0));
        tr.B.assign(prev + n, std::vector<double>(n, 0.0));
        tr.c.assign(prev + n, 0.0);
        for (std::size_t i = 0; i < prev; ++i) tr.A[i][i] = 1.0;
        for (std::size_t i = 0; i < n; ++i) tr.B[prev + i][i] = 1.0;
    }
    return p;
}

void Problem::validate() const {
    if (!tree) throw InvalidModel("problem has no scenario tree");
    const std::size_t N = tree->size();
    const auto T = static_cast<std::size_t>(horizon());
    std::ostringstream err;
    if (decision_dims.size() != T + 1) err << "decision_dims must have " << T + 1 << " entries; ";
    if (state_dims.size() != T + 1) err << "state_dims must have " << T + 1 << " entries; ";
    if (transitions.size() != N || state_cost.size() != N || decision_cost.size() != N || lower_bound.size() != N) {
        err << "per-node arrays must have " << N << " entries; ";
    }
    if (grids.size() < T) err << "need state grids for stages 0.." << static_cast<int>(T) - 1 << "; ";
    if (!err.str().empty()) throw InvalidModel(err.str());
    for (std::size_t t = 0; t < T; ++t) {
        if (grids[t].dim() != state_dims[t]) err << "grid " << t << " has dimension " << grids[t].dim() << "; ";
        for (const auto& a : grids[t].axes) {
            if (a.empty() || !std::is_sorted(a.begin(), a.end()) ||
                std::adjacent_find(a.begin(), a.end()) != a.end()) {
                err << "grid " << t << " axis must be strictly increasing; ";
                break;
            }
        }
    }
    for (NodeIndex v = 0; v < N; ++v) {
        const auto& node = tree->node(v);
        const auto t = static_cast<std::size_t>(node.time);
        const std::size_t out = state_dims[t];
        const std::size_t prev = prev_dim(node.time);
        const std::size_t n = decision_dims[t];
        const auto& tr = transitions[v];
        auto shape_ok = [](const efun::Matrix& M, std::size_t r, std::size_t c) {
            if (M.size() != r) return false;
            return std::all_of(M.begin(), M.end(), [c](const auto& row) { return row.size() == c; });
        };
        if (!shape_ok(tr.A, out, prev) || !shape_ok(tr.B, out, n) || tr.c.size() != out) {
            err << "node " << node.id << ": transition shape mismatch; ";
        }
        for (const auto& term : tr.terms) {
            if (term.target >= out || term.fn.dim() != prev + n) {
                err << "node " << node.id << ": transition term shape mismatch; ";
            }
        }
        if (state_cost[v] && state_cost[v]->dim() != out) err << "node " << node.id << ": state cost dimension; ";
        if (decision_cost[v] && decision_cost[v]->dim() != n) err << "node " << node.id << ": decision cost dimension; ";
    }
    if (!err.str().empty()) throw InvalidModel(err.str());
}

bool Problem::affine_transitions() const {
    return std::all_of(transitions.begin(), transitions.end(), [](const Transition& t) { return t.terms.empty(); });
}

bool Problem::step(NodeIndex v, std::span<const double> prev, std::span<const double> x, std::span<double> s) const {
    const auto& tr = transitions[v];
    for (std::size_t i = 0; i < s.size(); ++i) {
        double acc = tr.c[i];
        const auto& a = tr.A[i];
        for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * prev[j];
        const auto& b = tr.B[i];
        for (std::size_t j = 0; j < b.size(); ++j) acc += b[j] * x[j];
        s[i] = acc;
    }
    if (tr.terms.empty()) return true;
    std::vector<double> joint(prev.begin(), prev.end());
    joint.insert(joint.end(), x.begin(), x.end());
    for (const auto& term : tr.terms) {
        const ExtReal r = term.fn.eval(joint);
        if (r.is_inf()) return false;
        s[term.target] += term.coef * r.value();
    }
    return true;
}

ExtReal Problem::stage(NodeIndex v, std::span<const double> prev, std::span<const double> x,
                       std::span<double> s) const {
    ExtReal acc(0.0);
    if (decision_cost[v]) {
        acc += decision_cost[v]->eval(x);
        if (acc.is_inf()) return acc;
    }
    if (!step(v, prev, x, s)) return ExtReal::inf();
    if (state_cost[v]) acc += state_cost[v]->eval(s);
    return acc;
}

ExtReal Problem::path_objective(const AdaptedSequence& x, NodeIndex leaf) const {
    std::vector<double> prev = initial_state;
    std::vector<double> s;
    ExtReal acc(0.0);
    for (NodeIndex v : tree->path(leaf)) {
        s.assign(state_dims[static_cast<std::size_t>(tree->node(v).time)], 0.0);
        acc += stage(v, prev, x.x.at(v), s);
        if (acc.is_inf()) return acc;
        prev.swap(s);
    }
    return acc;
}

ExtReal Problem::expected_objective(const AdaptedSequence& x) const {
    ExtReal acc(0.0);
    for (NodeIndex leaf : tree->leaves()) {
        acc += path_objective(x, leaf).scaled(tree->path_prob(leaf));
        if (acc.is_inf()) return acc;
    }
    return acc;
}

std::vector<std::size_t> Problem::decision_offsets() const {
    std::vector<std::size_t> off(tree->size() + 1, 0);
    for (NodeIndex v = 0; v < tree->size(); ++v) off[v + 1] = off[v] + n(v);
    return off;
}

std::size_t Problem::total_decision_dim() const { return decision_offsets().back(); }

AdaptedSequence Problem::unstack(std::span<const double> flat) const {
    const auto off = decision_offsets();
    AdaptedSequence x;
    x.x.resize(tree->size());
    for (NodeIndex v = 0; v < tree->size(); ++v) {
        x.x[v].assign(flat.begin() + static_cast<std::ptrdiff_t>(off[v]),
                      flat.begin() + static_cast<std::ptrdiff_t>(off[v + 1]));
    }
    return x;
}

std::vector<double> Problem::stack(const AdaptedSequence& x) const {
    std::vector<double> flat;
    for (const auto& b : x.x) flat.insert(flat.end(), b.begin(), b.end());
    return flat;
}

efun::ExtFun Problem::path_function(NodeIndex leaf) const {
    const auto off = decision_offsets();
    const std::size_t N = off.back();
    // prev state as an affine map of the stacked decisions: M x + m.
    efun::Matrix M(initial_state.size(), std::vector<double>(N, 0.0));
    std::vector<double> m = initial_state;
    std::vector<efun::ExtFun> terms;
    for (NodeIndex v : tree->path(leaf)) {
        const auto& tr = transitions[v];
        if (!tr.terms.empty()) {
            throw UnsupportedStructure("path function needs affine transitions (node " + tree->node(v).id + ")");
        }
        const std::size_t out = tr.c.size();
        efun::Matrix M2(out, std::vector<double>(N, 0.0));
        std::vector<double> m2 = tr.c;
        for (std::size_t i = 0; i < out; ++i) {
            for (std::size_t j = 0; j < tr.A[i].size(); ++j) {
                const double a = tr.A[i][j];
                if (a == 0.0) continue;
                for (std::size_t k = 0; k < N; ++k) M2[i][k] += a * M[j][k];
                m2[i] += a * m[j];
            }
            for (std::size_t j = 0; j < tr.B[i].size(); ++j) M2[i][off[v] + j] += tr.B[i][j];
        }
        if (decision_cost[v]) {
            std::vector<std::size_t> idx(n(v));
            std::iota(idx.begin(), idx.end(), off[v]);
            terms.push_back(efun::precompose(*decision_cost[v], efun::selection(idx, N), std::vector<double>(idx.size(), 0.0)));
        }
        if (state_cost[v]) terms.push_back(efun::precompose(*state_cost[v], M2, m2));
        M = std::move(M2);
        m = std::move(m2);
    }
    if (terms.empty()) return efun::affine(std::vector<double>(N, 0.0));
    return efun::sum(std::move(terms));
}

}  // namespace ncdp::dp
