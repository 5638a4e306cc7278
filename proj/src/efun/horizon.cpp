#include "ncdp/efun/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ncdp/errors.hpp"

namespace ncdp::efun {

using linalg::Rational;
using linalg::Relation;
using linalg::RMat;
using linalg::RVec;

namespace {

ExtFun box_cone(const IndicatorBox& b) {
    std::vector<double> lo(b.lower.size()), hi(b.upper.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] = std::isfinite(b.lower[i]) ? 0.0 : -kInf;
        hi[i] = std::isfinite(b.upper[i]) ? 0.0 : kInf;
    }
    return indicator_box(std::move(lo), std::move(hi));
}

// Asymptotic slopes of a 1-D sampled function.
ExtFun ray_1d(double left_slope, double right_slope) { return sampled1d({0.0}, {0.0}, left_slope, right_slope); }

Horizon merge(ExtFun fn, std::initializer_list<const Horizon*> parts) {
    Horizon h{std::move(fn), true, {}};
    for (const auto* p : parts) {
        h.exact = h.exact && p->exact;
        h.notes.insert(h.notes.end(), p->notes.begin(), p->notes.end());
    }
    return h;
}

}  // namespace

Horizon horizon(const ExtFun& f) {
    return std::visit(
        [&](const auto& v) -> Horizon {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return {affine(v.a, 0.0), true, {}};
            } else if constexpr (std::is_same_v<T, PowerCost>) {
                if (v.p > 1.0) {
                    return {indicator_box(std::vector<double>(v.dim, 0.0), std::vector<double>(v.dim, 0.0)), true, {}};
                }
                return {f, true, {}};  // p == 1 is already positively homogeneous
            } else if constexpr (std::is_same_v<T, IndicatorBox>) {
                return {box_cone(v), true, {}};
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                return {f, true, {}};
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                return {ray_1d(v.left_slope, v.right_slope), true, {}};
            } else if constexpr (std::is_same_v<T, SShapedDisutility>) {
                // Bounded on the loss side, linear with slope beta on the gain side.
                return {ray_1d(0.0, v.beta), true, {}};
            } else if constexpr (std::is_same_v<T, Sum>) {
                Horizon out;
                std::vector<ExtFun> parts;
                for (const auto& t : v.terms) {
                    Horizon h = horizon(t);
                    out.exact = out.exact && h.exact;
                    out.notes.insert(out.notes.end(), h.notes.begin(), h.notes.end());
                    parts.push_back(std::move(h.fn));
                }
                std::string why;
                if (!sum_rule_exact(f, &why)) {
                    out.exact = false;
                    out.notes.push_back("sum rule is a lower bound: " + why);
                }
                out.fn = sum(std::move(parts));
                return out;
            } else if constexpr (std::is_same_v<T, Scaled>) {
                Horizon h = horizon(*v.f);
                return merge(scaled(v.factor, h.fn), {&h});
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                Horizon h = horizon(*v.f);
                return merge(precompose(h.fn, v.A, std::vector<double>(v.b.size(), 0.0)), {&h});
            } else {
                Horizon h = horizon(*v.f);
                // Recession condition: h_inf(0, u) > 0 for every dropped direction u != 0.
                std::vector<std::size_t> drop;
                for (std::size_t i = 0; i < v.f->dim(); ++i) {
                    if (std::find(v.keep.begin(), v.keep.end(), i) == v.keep.end()) drop.push_back(i);
                }
                Matrix A(v.f->dim(), std::vector<double>(drop.size(), 0.0));
                for (std::size_t k = 0; k < drop.size(); ++k) A[drop[k]][k] = 1.0;
                ExtFun restricted = precompose(h.fn, std::move(A), std::vector<double>(v.f->dim(), 0.0));
                SignCheck chk = is_positive_off(restricted, {}, {});
                if (chk.verdict == SignVerdict::Violated) {
                    std::string dir;
                    for (double d : chk.counterexample) dir += (dir.empty() ? "" : ",") + std::to_string(d);
                    throw HorizonConditionViolated("partial minimization: horizon is not positive along dropped "
                                                   "direction (" + dir + ")");
                }
                Horizon out = merge(partial_min(h.fn, v.keep), {&h});
                if (chk.verdict == SignVerdict::SampledNoViolation) {
                    out.notes.push_back("recession condition of partial minimization checked by sampling only");
                }
                return out;
            }
        },
        f.expr());
}

NumericHorizon horizon_numeric(const ExtFun& f, std::span<const double> w, std::span<const double> wbar,
                               bool subtract_base, int rungs) {
    if (w.size() != f.dim() || wbar.size() != f.dim()) {
        throw std::invalid_argument("horizon_numeric: direction dimension mismatch");
    }
    return horizon_numeric([&f](std::span<const double> x) { return f.eval(x); }, w, wbar, subtract_base, rungs);
}

NumericHorizon horizon_numeric(const std::function<ExtReal(std::span<const double>)>& f, std::span<const double> w,
                               std::span<const double> wbar, bool subtract_base, int rungs) {
    if (w.size() != wbar.size()) throw std::invalid_argument("horizon_numeric: direction dimension mismatch");
    NumericHorizon out;
    double base = 0.0;
    if (subtract_base) {
        const ExtReal b = f(wbar);
        if (b.is_inf()) throw std::invalid_argument("horizon_numeric: base point outside the domain");
        base = b.value();
    }
    std::vector<double> x(w.size());
    for (int k = 0; k < rungs; ++k) {
        const double alpha = std::ldexp(1.0, k);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = alpha * w[i] + wbar[i];
        const ExtReal v = f(x);
        out.ladder.push_back(v.is_inf() ? kInf : (v.value() - base) / alpha);
    }
    const auto& L = out.ladder;
    const std::size_t n = L.size();
    if (n < 3) {
        out.value = L.empty() ? ExtReal::inf() : ExtReal(L.back());
        return out;
    }
    // Tail infimum over the last quarter of the ladder (at least 3 rungs).
    const std::size_t tail = std::max<std::size_t>(3, n / 4);
    double tail_min = kInf;
    for (std::size_t k = n - tail; k < n; ++k) tail_min = std::min(tail_min, L[k]);
    const double a = L[n - 1], b = L[n - 2], c = L[n - 3];
    if (std::isinf(a) && std::isinf(b)) {
        out.diverged = true;
        out.converged = true;
        out.value = ExtReal::inf();
        return out;
    }
    if (std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a))) {
        out.converged = true;
        out.value = ExtReal(a);
        return out;
    }
    if (a > b && b > c) {
        out.diverged = true;
        out.value = ExtReal::inf();
        return out;
    }
    out.value = std::isinf(tail_min) ? ExtReal::inf() : ExtReal(tail_min);
    return out;
}

// ---------------------------------------------------------------------------
// Polyhedral forms

namespace {

RVec zeros(std::size_t n) { return RVec(n); }

// Embed a form of size (dim + aux_old) into (dim + aux_new) with aux offset.
RVec shift(const RVec& v, std::size_t dim, std::size_t aux_total, std::size_t aux_offset) {
    RVec out(dim + aux_total);
    for (std::size_t i = 0; i < dim; ++i) out[i] = v[i];
    for (std::size_t i = dim; i < v.size(); ++i) out[aux_offset + i] = v[i];
    return out;
}

void add_axis_constraint(PolyhedralForm& P, std::size_t i, int sign_le_zero) {
    RVec r = zeros(P.dim + P.aux);
    r[i] = sign_le_zero;
    P.cone.push_back(std::move(r));
}

}  // namespace

std::optional<PolyhedralForm> polyhedral_form(const ExtFun& h) {
    const std::size_t n = h.dim();
    return std::visit(
        [&](const auto& v) -> std::optional<PolyhedralForm> {
            using T = std::decay_t<decltype(v)>;
            PolyhedralForm P;
            P.dim = n;
            P.linear = zeros(n);
            if constexpr (std::is_same_v<T, Affine>) {
                if (v.b != 0.0) return std::nullopt;
                P.linear = linalg::to_rational(v.a);
                return P;
            } else if constexpr (std::is_same_v<T, PowerCost>) {
                if (v.p != 1.0) return std::nullopt;
                for (std::size_t i = 0; i < n; ++i) {
                    RVec pos = zeros(n), neg = zeros(n);
                    pos[i] = linalg::to_rational(v.lambda);
                    neg[i] = -linalg::to_rational(v.lambda);
                    P.max_terms.push_back({pos, neg});
                }
                return P;
            } else if constexpr (std::is_same_v<T, IndicatorBox>) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double l = v.lower[i], u = v.upper[i];
                    if ((l != 0.0 && l != -kInf) || (u != 0.0 && u != kInf)) return std::nullopt;
                    if (l == 0.0) add_axis_constraint(P, i, -1);
                    if (u == 0.0) add_axis_constraint(P, i, 1);
                }
                return P;
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                for (const auto& r : v.normals) P.cone.push_back(linalg::to_rational(r));
                return P;
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                if (v.x.size() != 1 || v.x[0] != 0.0 || v.y[0] != 0.0) return std::nullopt;
                const double sl = v.left_slope, sr = v.right_slope;
                if (std::isfinite(sl) && std::isfinite(sr)) {
                    if (sl > sr) return std::nullopt;  // min of two forms: not convex
                    P.max_terms.push_back({RVec{linalg::to_rational(sl)}, RVec{linalg::to_rational(sr)}});
                    return P;
                }
                if (sr == kInf) add_axis_constraint(P, 0, 1);   // x <= 0
                if (sl == -kInf) add_axis_constraint(P, 0, -1); // x >= 0
                if (std::isfinite(sl)) P.linear = RVec{linalg::to_rational(sl)};
                if (std::isfinite(sr)) P.linear = RVec{linalg::to_rational(sr)};
                return P;
            } else if constexpr (std::is_same_v<T, SShapedDisutility>) {
                return std::nullopt;
            } else if constexpr (std::is_same_v<T, Scaled>) {
                auto Q = polyhedral_form(*v.f);
                if (!Q) return std::nullopt;
                const Rational c = linalg::to_rational(v.factor);
                for (auto& x : Q->linear) x *= c;
                for (auto& g : Q->max_terms) {
                    for (auto& r : g) {
                        for (auto& x : r) x *= c;
                    }
                }
                return Q;
            } else if constexpr (std::is_same_v<T, Sum>) {
                std::vector<PolyhedralForm> parts;
                std::size_t aux = 0;
                for (const auto& t : v.terms) {
                    auto Q = polyhedral_form(t);
                    if (!Q) return std::nullopt;
                    aux += Q->aux;
                    parts.push_back(std::move(*Q));
                }
                P.aux = aux;
                P.linear = zeros(n + aux);
                std::size_t off = 0;
                for (const auto& Q : parts) {
                    const RVec lin = shift(Q.linear, n, aux, off);
                    for (std::size_t i = 0; i < lin.size(); ++i) P.linear[i] += lin[i];
                    for (const auto& g : Q.max_terms) {
                        RMat gg;
                        for (const auto& r : g) gg.push_back(shift(r, n, aux, off));
                        P.max_terms.push_back(std::move(gg));
                    }
                    for (const auto& r : Q.cone) P.cone.push_back(shift(r, n, aux, off));
                    for (const auto& r : Q.eq) P.eq.push_back(shift(r, n, aux, off));
                    off += Q.aux;
                }
                return P;
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                for (double b : v.b) {
                    if (b != 0.0) return std::nullopt;
                }
                auto Q = polyhedral_form(*v.f);
                if (!Q) return std::nullopt;
                const std::size_t m = Q->dim;
                RMat A;
                for (const auto& r : v.A) A.push_back(linalg::to_rational(r));
                // Row r over (y, u) with y = A x becomes (r_y^T A, r_u) over (x, u).
                auto sub = [&](const RVec& r) {
                    RVec out(n + Q->aux);
                    for (std::size_t k = 0; k < m; ++k) {
                        if (sgn(r[k]) == 0) continue;
                        for (std::size_t i = 0; i < n; ++i) out[i] += r[k] * A[k][i];
                    }
                    for (std::size_t a = 0; a < Q->aux; ++a) out[n + a] = r[m + a];
                    return out;
                };
                P.aux = Q->aux;
                P.linear = sub(Q->linear);
                for (const auto& g : Q->max_terms) {
                    RMat gg;
                    for (const auto& r : g) gg.push_back(sub(r));
                    P.max_terms.push_back(std::move(gg));
                }
                for (const auto& r : Q->cone) P.cone.push_back(sub(r));
                for (const auto& r : Q->eq) P.eq.push_back(sub(r));
                return P;
            } else {
                auto Q = polyhedral_form(*v.f);
                if (!Q) return std::nullopt;
                // Kept coordinates become x (in keep order); dropped ones join the auxiliaries.
                const std::size_t m = Q->dim;
                std::vector<std::size_t> pos(m);
                std::size_t next_aux = 0;
                std::vector<bool> kept(m, false);
                for (std::size_t i = 0; i < v.keep.size(); ++i) {
                    pos[v.keep[i]] = i;
                    kept[v.keep[i]] = true;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    if (!kept[i]) pos[i] = n + next_aux++;
                }
                P.aux = next_aux + Q->aux;
                auto remap = [&](const RVec& r) {
                    RVec out(n + P.aux);
                    for (std::size_t i = 0; i < m; ++i) out[pos[i]] += r[i];
                    for (std::size_t a = 0; a < Q->aux; ++a) out[n + next_aux + a] = r[m + a];
                    return out;
                };
                P.linear = remap(Q->linear);
                for (const auto& g : Q->max_terms) {
                    RMat gg;
                    for (const auto& r : g) gg.push_back(remap(r));
                    P.max_terms.push_back(std::move(gg));
                }
                for (const auto& r : Q->cone) P.cone.push_back(remap(r));
                for (const auto& r : Q->eq) P.eq.push_back(remap(r));
                return P;
            }
        },
        h.expr());
}

void PolyhedralSystem::add_bound(const PolyhedralForm& h, const Rational& rhs) {
    if (h.dim != dim_) throw std::invalid_argument("PolyhedralSystem: dimension mismatch");
    // Variables: x (dim_), then this form's aux, then one epigraph variable per max term.
    const std::size_t aux0 = dim_ + vars_;
    const std::size_t t0 = aux0 + h.aux;
    vars_ += h.aux + h.max_terms.size();
    auto map_row = [&](const RVec& r) {
        Row row;
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (sgn(r[i]) == 0) continue;
            row.terms.emplace_back(i < dim_ ? i : aux0 + (i - dim_), r[i]);
        }
        return row;
    };
    for (const auto& r : h.cone) {
        Row row = map_row(r);
        row.rel = Relation::LessEq;
        rows_.push_back(std::move(row));
    }
    for (const auto& r : h.eq) {
        Row row = map_row(r);
        row.rel = Relation::Equal;
        rows_.push_back(std::move(row));
    }
    // f.(x,u) - t_k <= 0 for each form of max term k.
    for (std::size_t k = 0; k < h.max_terms.size(); ++k) {
        for (const auto& f : h.max_terms[k]) {
            Row row = map_row(f);
            row.terms.emplace_back(t0 + k, Rational(-1));
            row.rel = Relation::LessEq;
            rows_.push_back(std::move(row));
        }
    }
    Row obj = map_row(h.linear);
    for (std::size_t k = 0; k < h.max_terms.size(); ++k) obj.terms.emplace_back(t0 + k, Rational(1));
    obj.rel = Relation::LessEq;
    obj.b = rhs;
    rows_.push_back(std::move(obj));
}

void PolyhedralSystem::add_row(const RVec& a, Relation rel, const Rational& b) {
    Row row;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i]) != 0) row.terms.emplace_back(i, a[i]);
    }
    row.rel = rel;
    row.b = b;
    rows_.push_back(std::move(row));
}

std::optional<RVec> PolyhedralSystem::feasible_x() const {
    linalg::LinearProgram lp;
    lp.dim = dim_ + vars_;
    for (const auto& r : rows_) {
        RVec a(lp.dim);
        for (const auto& [i, c] : r.terms) a[i] += c;
        lp.add(std::move(a), r.rel, r.b);
    }
    auto sol = linalg::find_feasible(lp);
    if (!sol) return std::nullopt;
    sol->resize(dim_);
    return sol;
}

// ---------------------------------------------------------------------------
// Sign checks

namespace {

// Deterministic unit-sphere sample set for dimension n.
std::vector<std::vector<double>> sphere_samples(std::size_t n) {
    std::vector<std::vector<double>> out;
    if (n == 1) return {{1.0}, {-1.0}};
    if (n == 2) {
        const int m = static_cast<int>(std::ceil(2.0 * std::numbers::pi / 1e-2));
        for (int k = 0; k < m; ++k) {
            const double th = 2.0 * std::numbers::pi * k / m;
            out.push_back({std::cos(th), std::sin(th)});
        }
        return out;
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g;
    const std::size_t count = 20000;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> v(n);
        double s = 0.0;
        for (auto& x : v) {
            x = g(rng);
            s += x * x;
        }
        s = std::sqrt(s);
        for (auto& x : v) x /= s;
        out.push_back(std::move(v));
    }
    // Coordinate directions and their negatives, which sampling tends to miss.
    for (std::size_t i = 0; i < n; ++i) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> v(n, 0.0);
            v[i] = s;
            out.push_back(std::move(v));
        }
    }
    return out;
}

bool in_cone(const ConeRegion& r, const std::vector<double>& x, double tol = 1e-12) {
    for (const auto& row : r.rows) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += row[i] * x[i];
        if (s > tol) return false;
    }
    return true;
}

void add_region(PolyhedralSystem& sys, const ConeRegion& region) {
    for (const auto& r : region.rows) sys.add_row(linalg::to_rational(r), Relation::LessEq, 0);
}

}  // namespace

SignCheck is_nonnegative_on(const ExtFun& H, const ConeRegion& region) {
    const std::size_t n = H.dim();
    SignCheck out;
    if (auto P = polyhedral_form(H)) {
        // H positively homogeneous: some x in region with H(x) < 0 iff one with H(x) <= -1.
        PolyhedralSystem sys(n);
        sys.add_bound(*P, Rational(-1));
        add_region(sys, region);
        out.method = "exact LP on polyhedral form";
        if (auto x = sys.feasible_x()) {
            out.verdict = SignVerdict::Violated;
            out.counterexample = linalg::to_double(*x);
        } else {
            out.verdict = SignVerdict::Certified;
        }
        return out;
    }
    out.method = "unit-sphere sampling";
    out.verdict = SignVerdict::SampledNoViolation;
    for (const auto& w : sphere_samples(n)) {
        if (!in_cone(region, w)) continue;
        const ExtReal v = H.eval(w);
        if (v.is_finite() && v.value() < -1e-12) {
            out.verdict = SignVerdict::Violated;
            out.counterexample = w;
            return out;
        }
    }
    return out;
}

SignCheck is_positive_off(const ExtFun& H, const ConeRegion& region, const ConeRegion& zero_cone) {
    const std::size_t n = H.dim();
    SignCheck out;
    // Normalizations selecting points outside the excluded cone.
    std::vector<RVec> norms;
    if (zero_cone.rows.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            for (int s : {1, -1}) {
                RVec a(n);
                a[i] = s;
                norms.push_back(std::move(a));
            }
        }
    } else {
        for (const auto& r : zero_cone.rows) norms.push_back(linalg::to_rational(r));
    }
    if (auto P = polyhedral_form(H)) {
        out.method = "exact LP on polyhedral form";
        for (const auto& a : norms) {
            PolyhedralSystem sys(n);
            sys.add_bound(*P, Rational(0));
            add_region(sys, region);
            sys.add_row(a, Relation::GreaterEq, 1);
            if (auto x = sys.feasible_x()) {
                out.verdict = SignVerdict::Violated;
                out.counterexample = linalg::to_double(*x);
                return out;
            }
        }
        out.verdict = SignVerdict::Certified;
        return out;
    }
    out.method = "unit-sphere sampling";
    out.verdict = SignVerdict::SampledNoViolation;
    for (const auto& w : sphere_samples(n)) {
        if (!in_cone(region, w)) continue;
        if (!zero_cone.rows.empty() && in_cone(zero_cone, w, 1e-9)) continue;
        const ExtReal v = H.eval(w);
        if (v.is_finite() && v.value() <= 1e-12) {
            out.verdict = SignVerdict::Violated;
            out.counterexample = w;
            return out;
        }
    }
    return out;
}

}  // namespace ncdp::efun
