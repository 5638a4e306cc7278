#include "ncdp/cones/cones.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ncdp/efun/horizon.hpp"
#include "ncdp/errors.hpp"

namespace ncdp::cones {

namespace {

using linalg::Rational;
using linalg::Relation;
using linalg::RMat;
using linalg::RVec;

constexpr int kSphereSamples = 20000;
constexpr std::uint64_t kSphereSeed = 0x5eed'c0de;

struct LeafData {
    NodeIndex leaf = 0;
    efun::ExtFun f;                              ///< h(., leaf) on the stacked decisions
    efun::ExtFun H;                              ///< its symbolic horizon
    std::optional<efun::PolyhedralForm> poly;    ///< of H
    std::optional<efun::PolyhedralForm> poly_neg;  ///< of H(-.)
};

RVec unit(std::size_t n, std::size_t i, int sign) {
    RVec e(n);
    e[i] = sign;
    return e;
}

std::optional<RVec> nonzero_point(const efun::PolyhedralSystem& base, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (int s : {1, -1}) {
            efun::PolyhedralSystem sys = base;
            sys.add_row(unit(n, i, s), Relation::GreaterEq, Rational(1));
            if (auto x = sys.feasible_x()) return x;
        }
    }
    return std::nullopt;
}

std::vector<double> normalized(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    std::vector<double> out = x;
    if (m > 0) {
        for (auto& v : out) v /= m;
    }
    return out;
}

// Symbolic check at every leaf; with an inexact horizon also the numeric ladder on h.
bool verify_witness(const std::vector<LeafData>& leaves, const std::vector<double>& w, bool exact) {
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) return false;
    for (const auto& L : leaves) {
        const ExtReal hv = L.H.eval(w);
        if (hv.is_inf() || hv.value() > 1e-9) return false;
        if (!exact) {
            const auto base = efun::find_domain_point(L.f);
            if (!base) return false;
            const auto num = efun::horizon_numeric(L.f, w, *base, true);
            if (num.value.is_inf() || num.value.value() > 1e-9) return false;
        }
    }
    return true;
}

CheckReport sampled_check(const dp::Problem& p, const std::vector<LeafData>& leaves, bool exact, CheckReport rep) {
    const std::size_t n = p.total_decision_dim();
    std::mt19937_64 rng(kSphereSeed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> w(n);
    int candidates = 0;
    for (int k = 0; k < kSphereSamples; ++k) {
        double norm = 0.0;
        for (auto& v : w) {
            v = g(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (auto& v : w) v /= norm;
        bool in_k = true;
        for (const auto& L : leaves) {
            const ExtReal hv = L.H.eval(w);
            if (hv.is_inf() || hv.value() > 1e-12) {
                in_k = false;
                break;
            }
        }
        if (!in_k) continue;
        ++candidates;
        if (verify_witness(leaves, w, exact)) {
            rep.verdict = Verdict::Fails;
            rep.kind = ConeKind::Unknown;
            rep.witness = p.unstack(normalized(w));
            rep.trace.push_back("sampled sphere: witness found at sample " + std::to_string(k) + ", verified");
            return rep;
        }
    }
    rep.verdict = Verdict::Undecided;
    rep.trace.push_back("sampled " + std::to_string(kSphereSamples) + " unit directions, " + std::to_string(candidates) +
                        " unverified candidates; no witness");
    return rep;
}

}  // namespace

std::string to_string(ConeKind k) {
    switch (k) {
        case ConeKind::Trivial: return "trivial";
        case ConeKind::Linear: return "linear";
        case ConeKind::Cone: return "cone";
        case ConeKind::Unknown: return "unknown";
    }
    return "unknown";
}

nlohmann::json CheckReport::to_json(const tree::ScenarioTree& tree) const {
    nlohmann::json j{{"verdict", market::to_string(verdict)}, {"kind", to_string(kind)}, {"trace", trace}};
    if (witness) {
        nlohmann::json w = nlohmann::json::object();
        for (NodeIndex v = 0; v < witness->x.size(); ++v) {
            if (!witness->x[v].empty()) w[tree.node(v).id] = witness->x[v];
        }
        j["witness"] = w;
    }
    j["lineality"] = lineality;
    return j;
}

CheckReport check_horizon_positivity(const dp::Problem& p) {
    CheckReport rep;
    const std::size_t n = p.total_decision_dim();
    std::vector<LeafData> leaves;
    bool exact = true;
    bool polyhedral = true;
    try {
        for (NodeIndex leaf : p.tree->leaves()) {
            LeafData L;
            L.leaf = leaf;
            L.f = p.path_function(leaf);
            auto hz = efun::horizon(L.f);
            exact = exact && hz.exact;
            for (auto& note : hz.notes) rep.trace.push_back(p.tree->node(leaf).id + ": " + note);
            L.H = hz.fn;
            L.poly = efun::polyhedral_form(L.H);
            if (L.poly) {
                efun::Matrix neg(n, std::vector<double>(n, 0.0));
                for (std::size_t i = 0; i < n; ++i) neg[i][i] = -1.0;
                L.poly_neg = efun::polyhedral_form(efun::precompose(L.H, neg, std::vector<double>(n, 0.0)));
            }
            polyhedral = polyhedral && L.poly && L.poly_neg;
            leaves.push_back(std::move(L));
        }
    } catch (const UnsupportedStructure& e) {
        rep.trace.push_back(std::string("no path representation: ") + e.what());
        return rep;
    } catch (const HorizonConditionViolated& e) {
        rep.trace.push_back(std::string("horizon rules failed: ") + e.what());
        return rep;
    }
    if (n == 0) {
        rep.verdict = Verdict::Holds;
        rep.kind = ConeKind::Trivial;
        rep.trace.push_back("no decisions");
        return rep;
    }
    if (!polyhedral) {
        rep.trace.push_back("some leaf horizon is not polyhedral; sampling the unit sphere");
        return sampled_check(p, leaves, exact, std::move(rep));
    }

    efun::PolyhedralSystem K(n);
    for (const auto& L : leaves) K.add_bound(*L.poly, Rational(0));
    rep.trace.push_back("polyhedral: K = {x : H_leaf(x) <= 0 for " + std::to_string(leaves.size()) + " leaves} over " +
                        std::to_string(n) + " decision coordinates");
    const auto first = nonzero_point(K, n);
    if (!first) {
        rep.verdict = Verdict::Holds;
        rep.kind = ConeKind::Trivial;
        rep.trace.push_back("all " + std::to_string(2 * n) + " normalized LPs infeasible: K = {0}");
        return rep;
    }

    // Lineality space, one orthogonal direction at a time.
    efun::PolyhedralSystem Lsys = K;
    for (const auto& L : leaves) Lsys.add_bound(*L.poly_neg, Rational(0));
    RMat basis;
    for (;;) {
        efun::PolyhedralSystem sys = Lsys;
        for (const auto& b : basis) sys.add_row(b, Relation::Equal, Rational(0));
        auto x = nonzero_point(sys, n);
        if (!x) break;
        basis.push_back(std::move(*x));
    }
    for (const auto& b : basis) rep.lineality.push_back(normalized(linalg::to_double(b)));
    rep.trace.push_back("lineality space of K has dimension " + std::to_string(basis.size()));

    efun::PolyhedralSystem rest = K;
    for (const auto& b : basis) rest.add_row(b, Relation::Equal, Rational(0));
    const auto ray = nonzero_point(rest, n);
    std::vector<double> w;
    if (ray) {
        rep.kind = ConeKind::Cone;
        w = normalized(linalg::to_double(*ray));
        rep.trace.push_back("K is not a linear space: a direction orthogonal to its lineality survives");
    } else {
        rep.kind = ConeKind::Linear;
        w = rep.lineality.front();
        rep.trace.push_back("K is a linear space");
    }
    if (!verify_witness(leaves, w, exact)) {
        rep.verdict = Verdict::Undecided;
        rep.trace.push_back("LP witness failed numerical re-verification");
        return rep;
    }
    rep.verdict = Verdict::Fails;
    rep.witness = p.unstack(w);
    rep.trace.push_back("witness re-verified: H_leaf(witness) <= 0 at every leaf");
    return rep;
}

CheckReport check_horizon_positivity(const market::MarketModel& m) {
    dp::Problem s;
    try {
        s = market::horizon_surrogate(m);
    } catch (const UnsupportedStructure& e) {
        CheckReport rep;
        rep.trace.push_back(std::string("no horizon surrogate: ") + e.what());
        return rep;
    }
    auto rep = check_horizon_positivity(s);
    rep.trace.insert(rep.trace.begin(), "market model: cash form with superlinear costs replaced by their horizon");
    return rep;
}

bool DirectionSet::trivial() const {
    return kind == Kind::Exact && std::all_of(basis.begin(), basis.end(), [](const RMat& b) { return b.empty(); });
}

nlohmann::json DirectionSet::to_json(const tree::ScenarioTree& tree) const {
    nlohmann::json nodes = nlohmann::json::object();
    for (NodeIndex v = 0; v < basis.size(); ++v) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : basis[v]) rows.push_back(linalg::to_double(r));
        nodes[tree.node(v).id] = rows;
    }
    return {{"kind", kind == Kind::Exact ? "exact" : "undecided"}, {"basis", nodes}, {"note", note}};
}

namespace {

DirectionSet null_space_from(const dp::Problem& p, const CheckReport& rep) {
    DirectionSet N;
    const std::size_t nodes = p.tree->size();
    N.basis.assign(nodes, {});
    if (rep.verdict == Verdict::Holds) {
        N.note = "K = {0}";
        return N;
    }
    if (rep.verdict == Verdict::Undecided || rep.kind == ConeKind::Unknown) {
        N.kind = DirectionSet::Kind::Undecided;
        N.note = "horizon cone not decided exactly";
        return N;
    }
    if (rep.kind == ConeKind::Cone) {
        throw NotASubspace("the null directions form a cone that is not a linear space (for example a "
                           "one-sided arbitrage); existence is not guaranteed");
    }
    const auto off = p.decision_offsets();
    RMat B;
    for (const auto& b : rep.lineality) B.push_back(linalg::to_rational(b));
    const std::size_t k = B.size();
    for (NodeIndex v = 0; v < nodes; ++v) {
        const std::size_t nv = p.n(v);
        if (nv == 0) continue;
        const int t = p.tree->node(v).time;
        // Coefficients c with sum_k c_k B_k vanishing at every earlier-time coordinate.
        RMat A;
        for (NodeIndex u = 0; u < nodes; ++u) {
            if (p.tree->node(u).time >= t) continue;
            for (std::size_t i = 0; i < p.n(u); ++i) {
                RVec row(k);
                for (std::size_t j = 0; j < k; ++j) row[j] = B[j][off[u] + i];
                A.push_back(std::move(row));
            }
        }
        RMat C;
        if (A.empty()) {
            for (std::size_t j = 0; j < k; ++j) C.push_back(unit(k, j, 1));
        } else {
            C = linalg::null_space(A, k);
        }
        RMat rows;
        for (const auto& c : C) {
            RVec r(nv);
            for (std::size_t j = 0; j < k; ++j) {
                for (std::size_t i = 0; i < nv; ++i) r[i] += c[j] * B[j][off[v] + i];
            }
            rows.push_back(std::move(r));
        }
        linalg::rref(rows, nv);
        for (auto& r : rows) {
            if (std::any_of(r.begin(), r.end(), [](const Rational& x) { return sgn(x) != 0; })) {
                N.basis[v].push_back(std::move(r));
            }
        }
    }
    N.note = "lineality space of K split by stage";
    return N;
}

}  // namespace

DirectionSet null_space(const dp::Problem& p) { return null_space_from(p, check_horizon_positivity(p)); }

DirectionSet null_space(const market::MarketModel& m) {
    const auto s = market::horizon_surrogate(m);
    return null_space_from(s, check_horizon_positivity(s));
}

dp::Problem project_problem(const dp::Problem& p, const DirectionSet& N) {
    if (N.kind != DirectionSet::Kind::Exact) throw InexactNullSpace("null space undecided: " + N.note);
    if (N.basis.size() != p.tree->size()) throw InexactNullSpace("direction set does not match the tree");
    dp::Problem out = p;
    for (NodeIndex v = 0; v < N.basis.size(); ++v) {
        if (N.basis[v].empty()) continue;
        efun::Matrix normals;
        for (const auto& r : N.basis[v]) {
            const auto d = linalg::to_double(r);
            if (linalg::to_rational(d) != r) {
                throw InexactNullSpace("basis at node " + p.tree->node(v).id + " is not representable in doubles");
            }
            normals.push_back(d);
            std::vector<double> neg = d;
            for (auto& x : neg) x = -x;
            normals.push_back(std::move(neg));
        }
        auto gamma = efun::indicator_polycone(std::move(normals), p.n(v));
        out.decision_cost[v] = out.decision_cost[v] ? efun::sum({*out.decision_cost[v], gamma}) : gamma;
    }
    out.validate();
    return out;
}

ArbitrageResult no_arbitrage_lp(const tree::ScenarioTree& tree, const std::vector<std::vector<double>>& Z) {
    if (Z.size() != tree.size() || Z.empty()) throw InvalidModel("no_arbitrage_lp: need prices at every node");
    const std::size_t J = Z.front().size();
    std::vector<std::size_t> slot(tree.size(), 0);
    std::size_t M = 0;
    for (NodeIndex v = 0; v < tree.size(); ++v) {
        if (!tree.is_leaf(v)) slot[v] = M++;
    }
    const std::size_t nvar = 2 * M * J;  // holdings, then their absolute-value bounds
    linalg::LinearProgram lp;
    lp.dim = nvar;
    RVec objective(nvar);
    for (NodeIndex leaf : tree.leaves()) {
        RVec gain(nvar);
        const auto path = tree.path(leaf);
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            const NodeIndex v = path[k], next = path[k + 1];
            for (std::size_t i = 0; i < J; ++i) {
                gain[slot[v] * J + i] += linalg::to_rational(Z[next][i]) - linalg::to_rational(Z[v][i]);
            }
        }
        const Rational w = linalg::to_rational(tree.path_prob(leaf));
        for (std::size_t i = 0; i < nvar; ++i) objective[i] += w * gain[i];
        lp.add(std::move(gain), Relation::GreaterEq, Rational(0));
    }
    RVec l1(nvar);
    for (std::size_t i = 0; i < M * J; ++i) {
        RVec a(nvar), b(nvar);
        a[i] = 1;
        a[M * J + i] = -1;
        b[i] = -1;
        b[M * J + i] = -1;
        lp.add(std::move(a), Relation::LessEq, Rational(0));
        lp.add(std::move(b), Relation::LessEq, Rational(0));
        l1[M * J + i] = 1;
    }
    lp.add(std::move(l1), Relation::LessEq, Rational(1));
    const auto res = linalg::maximize(lp, objective);
    ArbitrageResult out;
    out.holdings.x.assign(tree.size(), {});
    if (res.status != linalg::LpStatus::Optimal || sgn(res.value) <= 0) return out;
    out.arbitrage = true;
    out.expected_gain = res.value.get_d();
    std::vector<double> flat(M * J);
    for (std::size_t i = 0; i < M * J; ++i) flat[i] = res.x[i].get_d();
    flat = normalized(flat);
    for (NodeIndex v = 0; v < tree.size(); ++v) {
        if (tree.is_leaf(v)) continue;
        out.holdings.x[v].assign(flat.begin() + static_cast<std::ptrdiff_t>(slot[v] * J),
                                 flat.begin() + static_cast<std::ptrdiff_t>((slot[v] + 1) * J));
    }
    return out;
}

ArbitrageResult no_arbitrage_lp(const market::MarketModel& m) {
    if (!m.frictionless()) throw ModelNotFrictionless("no_arbitrage_lp needs a frictionless model");
    return no_arbitrage_lp(*m.tree, m.Z);
}

}  // namespace ncdp::cones
