#include "ncdp/efun/ext_fun.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/container/small_vector.hpp>

#include "ncdp/dp/minimize.hpp"
#include "ncdp/errors.hpp"
#include "ncdp/linalg/affine_solver.hpp"

namespace ncdp::efun {

namespace detail {

// Precomputed data for evaluating a partial minimization.
struct PartialMinPlan {
    std::vector<std::size_t> drop;            // minimized coordinates of the child
    std::vector<std::vector<double>> a_keep;  // equality rows restricted to kept coords
    std::vector<double> rhs;
    linalg::AffineSolver solver;              // on the dropped coordinates
};

}  // namespace detail

namespace {

using Buf = boost::container::small_vector<double, 16>;

// Indicator feasibility slack, relative to the magnitudes involved.
constexpr double kFeasTol = 1e-12;

bool finite_all(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

[[noreturn]] void bad(const std::string& msg) { throw InvalidModel("efun: " + msg); }

bool sampled_convex(const Sampled1D& s) {
    double prev = s.left_slope;
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i) {
        const double slope = (s.y[i + 1] - s.y[i]) / (s.x[i + 1] - s.x[i]);
        if (slope < prev - 1e-12 * std::max(1.0, std::abs(prev))) return false;
        prev = slope;
    }
    return !(s.right_slope < prev - 1e-12 * std::max(1.0, std::abs(prev)));
}

ExtReal eval_sampled(const Sampled1D& s, double x) {
    const auto& xs = s.x;
    const auto& ys = s.y;
    if (x < xs.front()) {
        if (s.left_slope == -kInf) return ExtReal::inf();
        return ExtReal(ys.front() + s.left_slope * (x - xs.front()));
    }
    if (x > xs.back()) {
        if (s.right_slope == kInf) return ExtReal::inf();
        return ExtReal(ys.back() + s.right_slope * (x - xs.back()));
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return ExtReal(ys.back());
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const std::size_t i = j - 1;
    const double t = (x - xs[i]) / (xs[j] - xs[i]);
    return ExtReal(ys[i] + t * (ys[j] - ys[i]));
}

double sshaped_value(const SShapedDisutility& s, double c) {
    if (c >= 0.0) return s.beta * c;
    const double a = std::pow(-c, s.gamma);
    if (!std::isfinite(a)) return -s.kappa;
    return -s.kappa * a / (1.0 + a);
}

std::string fmt(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string fmt(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s + "]";
}

}  // namespace

const ExtFun::Node& ExtFun::node() const {
    if (!n_) throw std::logic_error("ExtFun: use of empty function");
    return *n_;
}

ExtFun make(Expr e) {
    auto n = std::make_shared<ExtFun::Node>();
    std::visit(
        [&](auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Affine>) {
                if (v.a.empty() || !finite_all(v.a) || !std::isfinite(v.b)) bad("affine needs finite a (nonempty), b");
                n->dim = v.a.size();
                n->convex = true;
            } else if constexpr (std::is_same_v<T, PowerCost>) {
                if (!(v.lambda >= 0.0) || !std::isfinite(v.lambda)) bad("power cost needs lambda >= 0");
                if (!(v.p >= 1.0) || !std::isfinite(v.p)) bad("power cost needs p >= 1");
                if (v.dim == 0) bad("power cost needs dim >= 1");
                n->dim = v.dim;
                n->convex = true;
            } else if constexpr (std::is_same_v<T, IndicatorBox>) {
                if (v.lower.empty() || v.lower.size() != v.upper.size()) bad("box bounds size mismatch");
                for (std::size_t i = 0; i < v.lower.size(); ++i) {
                    const double l = v.lower[i], u = v.upper[i];
                    if (l != l || u != u || l == kInf || u == -kInf || l > u) bad("box needs lower <= upper");
                }
                n->dim = v.lower.size();
                n->convex = true;
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                if (v.dim == 0) bad("polycone needs dim >= 1");
                for (const auto& r : v.normals) {
                    if (r.size() != v.dim || !finite_all(r)) bad("polycone normal has wrong size");
                }
                n->dim = v.dim;
                n->convex = true;
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                if (v.x.empty() || v.x.size() != v.y.size()) bad("sampled1d needs matching nonempty x, y");
                if (!finite_all(v.x) || !finite_all(v.y)) bad("sampled1d values must be finite");
                for (std::size_t i = 1; i < v.x.size(); ++i) {
                    if (!(v.x[i] > v.x[i - 1])) bad("sampled1d grid must be strictly increasing");
                }
                if (v.left_slope != v.left_slope || v.right_slope != v.right_slope) bad("sampled1d slope is NaN");
                if (v.right_slope == -kInf || v.left_slope == kInf) {
                    bad("sampled1d slopes would produce -inf (right slope -inf or left slope +inf)");
                }
                n->dim = 1;
                n->convex = sampled_convex(v);
            } else if constexpr (std::is_same_v<T, SShapedDisutility>) {
                if (!(v.gamma > 0.0) || !(v.kappa >= 0.0) || !(v.beta >= 0.0) || !std::isfinite(v.gamma) ||
                    !std::isfinite(v.kappa) || !std::isfinite(v.beta)) {
                    bad("sshaped needs gamma > 0, kappa >= 0, beta >= 0");
                }
                n->dim = 1;
                n->convex = v.kappa == 0.0;
            } else if constexpr (std::is_same_v<T, Sum>) {
                if (v.terms.empty()) bad("sum needs at least one term");
                n->dim = v.terms.front().dim();
                n->convex = true;
                for (const auto& t : v.terms) {
                    if (t.dim() != n->dim) bad("sum terms have different dimensions");
                    n->convex = n->convex && t.is_convex();
                }
            } else if constexpr (std::is_same_v<T, Scaled>) {
                if (!v.f || !(v.factor > 0.0) || !std::isfinite(v.factor)) bad("scaled needs a finite factor > 0");
                n->dim = v.f->dim();
                n->convex = v.f->is_convex();
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                if (!v.f) bad("precompose needs a function");
                if (v.A.size() != v.f->dim() || v.b.size() != v.f->dim()) bad("precompose A/b rows must match f dim");
                const std::size_t cols = v.A.front().size();
                if (cols == 0) bad("precompose needs at least one input");
                for (const auto& r : v.A) {
                    if (r.size() != cols || !finite_all(r)) bad("precompose A is ragged or non-finite");
                }
                if (!finite_all(v.b)) bad("precompose b must be finite");
                n->dim = cols;
                n->convex = v.f->is_convex();
            } else if constexpr (std::is_same_v<T, PartialMin>) {
                if (!v.f) bad("partial_min needs a function");
                std::set<std::size_t> seen;
                for (auto k : v.keep) {
                    if (k >= v.f->dim() || !seen.insert(k).second) bad("partial_min keep indices invalid");
                }
                if (v.keep.empty() || v.keep.size() >= v.f->dim()) bad("partial_min must keep and drop coordinates");
                n->dim = v.keep.size();
                n->convex = v.f->is_convex();
                auto plan = std::make_shared<detail::PartialMinPlan>();
                for (std::size_t i = 0; i < v.f->dim(); ++i) {
                    if (!seen.count(i)) plan->drop.push_back(i);
                }
                std::vector<std::vector<double>> a_drop;
                for (const auto& eq : v.f->equalities()) {
                    std::vector<double> ak, ad;
                    for (auto k : v.keep) ak.push_back(eq.a[k]);
                    for (auto d : plan->drop) ad.push_back(eq.a[d]);
                    plan->a_keep.push_back(std::move(ak));
                    a_drop.push_back(std::move(ad));
                    plan->rhs.push_back(eq.rhs);
                }
                plan->solver = linalg::AffineSolver(a_drop, plan->drop.size());
                n->plan = std::move(plan);
            }
        },
        e);
    n->expr = std::move(e);
    ExtFun f;
    f.n_ = std::move(n);
    return f;
}

ExtFun affine(std::vector<double> a, double b) { return make(Affine{std::move(a), b}); }
ExtFun power_cost(double lambda, double p, std::size_t dim) { return make(PowerCost{lambda, p, dim}); }
ExtFun indicator_box(std::vector<double> lower, std::vector<double> upper) {
    return make(IndicatorBox{std::move(lower), std::move(upper)});
}
ExtFun indicator_polycone(Matrix normals, std::size_t dim) { return make(IndicatorPolyCone{std::move(normals), dim}); }
ExtFun sampled1d(std::vector<double> x, std::vector<double> y, double left_slope, double right_slope) {
    return make(Sampled1D{std::move(x), std::move(y), left_slope, right_slope});
}
ExtFun sshaped(double gamma, double kappa, double beta) { return make(SShapedDisutility{gamma, kappa, beta}); }
ExtFun sum(std::vector<ExtFun> terms) {
    if (terms.size() == 1) return terms.front();
    return make(Sum{std::move(terms)});
}
ExtFun scaled(double factor, ExtFun f) { return make(Scaled{factor, std::make_shared<const ExtFun>(std::move(f))}); }
ExtFun precompose(ExtFun f, Matrix A, std::vector<double> b) {
    return make(AffinePrecompose{std::make_shared<const ExtFun>(std::move(f)), std::move(A), std::move(b)});
}
ExtFun partial_min(ExtFun f, std::vector<std::size_t> keep) {
    return make(PartialMin{std::make_shared<const ExtFun>(std::move(f)), std::move(keep)});
}

Matrix selection(std::span<const std::size_t> idx, std::size_t dim) {
    Matrix A(idx.size(), std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < idx.size(); ++i) A[i].at(idx[i]) = 1.0;
    return A;
}

ExtReal ExtFun::eval(std::span<const double> x) const {
    const Node& nd = node();
    if (x.size() != nd.dim) {
        throw std::invalid_argument("ExtFun::eval: expected dimension " + std::to_string(nd.dim) + ", got " +
                                    std::to_string(x.size()));
    }
    return std::visit(
        [&](const auto& v) -> ExtReal {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Affine>) {
                double s = v.b;
                for (std::size_t i = 0; i < x.size(); ++i) s += v.a[i] * x[i];
                return ExtReal(s);
            } else if constexpr (std::is_same_v<T, PowerCost>) {
                double s = 0.0;
                for (double xi : x) s += v.p == 2.0 ? xi * xi : std::pow(std::abs(xi), v.p);
                return ExtReal(v.lambda * s);
            } else if constexpr (std::is_same_v<T, IndicatorBox>) {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x[i] < v.lower[i] - kFeasTol * (1.0 + std::abs(v.lower[i]))) return ExtReal::inf();
                    if (x[i] > v.upper[i] + kFeasTol * (1.0 + std::abs(v.upper[i]))) return ExtReal::inf();
                }
                return ExtReal(0.0);
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                for (const auto& r : v.normals) {
                    double s = 0.0, mag = 0.0;
                    for (std::size_t i = 0; i < x.size(); ++i) {
                        s += r[i] * x[i];
                        mag += std::abs(r[i] * x[i]);
                    }
                    if (s > kFeasTol * (1.0 + mag)) return ExtReal::inf();
                }
                return ExtReal(0.0);
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                return eval_sampled(v, x[0]);
            } else if constexpr (std::is_same_v<T, SShapedDisutility>) {
                return ExtReal(sshaped_value(v, x[0]));
            } else if constexpr (std::is_same_v<T, Sum>) {
                ExtReal acc(0.0);
                for (const auto& t : v.terms) {
                    acc += t.eval(x);
                    if (acc.is_inf()) return acc;
                }
                return acc;
            } else if constexpr (std::is_same_v<T, Scaled>) {
                return v.f->eval(x).scaled(v.factor);
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                Buf y(v.A.size());
                for (std::size_t r = 0; r < v.A.size(); ++r) {
                    double s = v.b[r];
                    const auto& row = v.A[r];
                    for (std::size_t i = 0; i < x.size(); ++i) s += row[i] * x[i];
                    y[r] = s;
                }
                return v.f->eval(std::span<const double>(y.data(), y.size()));
            } else if constexpr (std::is_same_v<T, PartialMin>) {
                const auto& plan = *nd.plan;
                std::vector<double> rhs(plan.rhs);
                for (std::size_t k = 0; k < rhs.size(); ++k) {
                    for (std::size_t i = 0; i < x.size(); ++i) rhs[k] -= plan.a_keep[k][i] * x[i];
                }
                dp::AffineParam param;
                if (!rhs.empty()) {
                    auto origin = plan.solver.solve(rhs);
                    if (!origin) return ExtReal::inf();
                    param.origin = std::move(*origin);
                    param.basis = plan.solver.null_basis();
                } else {
                    param.origin.assign(plan.drop.size(), 0.0);
                    for (std::size_t d = 0; d < plan.drop.size(); ++d) {
                        std::vector<double> e(plan.drop.size(), 0.0);
                        e[d] = 1.0;
                        param.basis.push_back(std::move(e));
                    }
                }
                std::vector<double> full(v.f->dim(), 0.0);
                for (std::size_t i = 0; i < v.keep.size(); ++i) full[v.keep[i]] = x[i];
                const ExtFun& inner = *v.f;
                const auto& drop = plan.drop;
                std::vector<double> buf = full;
                dp::Objective obj = [&](std::span<const double> z) {
                    for (std::size_t d = 0; d < drop.size(); ++d) buf[drop[d]] = z[d];
                    return inner.eval(buf);
                };
                dp::SearchConfig cfg;
                cfg.box_max = std::ldexp(1.0, 40);
                return dp::minimize_section(obj, drop.size(), cfg, nullptr, &param).value;
            }
        },
        nd.expr);
}

std::vector<Equality> ExtFun::equalities() const {
    std::vector<Equality> out;
    const std::size_t n = dim();
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, IndicatorBox>) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (v.lower[i] == v.upper[i]) {
                        std::vector<double> a(n, 0.0);
                        a[i] = 1.0;
                        out.push_back({std::move(a), v.lower[i]});
                    }
                }
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                for (std::size_t i = 0; i < v.normals.size(); ++i) {
                    for (std::size_t j = i + 1; j < v.normals.size(); ++j) {
                        bool opposite = true;
                        for (std::size_t k = 0; k < n && opposite; ++k) {
                            opposite = v.normals[i][k] == -v.normals[j][k];
                        }
                        if (opposite) out.push_back({v.normals[i], 0.0});
                    }
                }
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                if (v.x.size() == 1 && v.left_slope == -kInf && v.right_slope == kInf) {
                    out.push_back({{1.0}, v.x[0]});
                }
            } else if constexpr (std::is_same_v<T, Sum>) {
                for (const auto& t : v.terms) {
                    auto e = t.equalities();
                    out.insert(out.end(), e.begin(), e.end());
                }
            } else if constexpr (std::is_same_v<T, Scaled>) {
                out = v.f->equalities();
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                // c.(A x + b) = r  <=>  (A^T c).x = r - c.b
                for (const auto& e : v.f->equalities()) {
                    std::vector<double> a(n, 0.0);
                    double rhs = e.rhs;
                    for (std::size_t r = 0; r < v.A.size(); ++r) {
                        if (e.a[r] == 0.0) continue;
                        for (std::size_t i = 0; i < n; ++i) a[i] += e.a[r] * v.A[r][i];
                        rhs -= e.a[r] * v.b[r];
                    }
                    out.push_back({std::move(a), rhs});
                }
            }
        },
        expr());
    return out;
}

std::string ExtFun::describe() const {
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Affine>) {
                return "affine(a=" + fmt(v.a) + ", b=" + fmt(v.b) + ")";
            } else if constexpr (std::is_same_v<T, PowerCost>) {
                return "power(lambda=" + fmt(v.lambda) + ", p=" + fmt(v.p) + ", dim=" + std::to_string(v.dim) + ")";
            } else if constexpr (std::is_same_v<T, IndicatorBox>) {
                return "box(" + fmt(v.lower) + ", " + fmt(v.upper) + ")";
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                std::string s = "polycone(";
                for (const auto& r : v.normals) s += fmt(r);
                return s + ")";
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                return "sampled1d(" + std::to_string(v.x.size()) + " pts, slopes " + fmt(v.left_slope) + "/" +
                       fmt(v.right_slope) + ")";
            } else if constexpr (std::is_same_v<T, SShapedDisutility>) {
                return "sshaped(" + fmt(v.gamma) + "," + fmt(v.kappa) + "," + fmt(v.beta) + ")";
            } else if constexpr (std::is_same_v<T, Sum>) {
                std::string s = "sum(";
                for (std::size_t i = 0; i < v.terms.size(); ++i) s += (i ? ", " : "") + v.terms[i].describe();
                return s + ")";
            } else if constexpr (std::is_same_v<T, Scaled>) {
                return fmt(v.factor) + "*" + v.f->describe();
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                return v.f->describe() + " o affine(" + std::to_string(v.A.size()) + "x" +
                       std::to_string(v.A.front().size()) + ")";
            } else {
                std::string s = "partial_min(" + v.f->describe() + ", keep=[";
                for (std::size_t i = 0; i < v.keep.size(); ++i) s += (i ? "," : "") + std::to_string(v.keep[i]);
                return s + "])";
            }
        },
        expr());
}

bool satisfies_ray_formula(const ExtFun& f) {
    if (f.is_convex()) return true;
    return std::visit(
        [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Sampled1D> || std::is_same_v<T, SShapedDisutility>) {
                return true;
            } else if constexpr (std::is_same_v<T, Scaled>) {
                return satisfies_ray_formula(*v.f);
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                // A one-dimensional function of an affine form inherits the formula.
                return v.f->dim() == 1 && satisfies_ray_formula(*v.f);
            } else if constexpr (std::is_same_v<T, Sum>) {
                return sum_rule_exact(f);
            } else {
                return false;
            }
        },
        f.expr());
}

bool sum_rule_exact(const ExtFun& f, std::string* reason) {
    const auto* s = std::get_if<Sum>(&f.expr());
    if (s == nullptr) return true;
    std::size_t nonconvex = 0;
    for (const auto& t : s->terms) {
        if (t.is_convex()) continue;
        ++nonconvex;
        if (!satisfies_ray_formula(t)) {
            if (reason) *reason = "nonconvex summand without ray formula: " + t.describe();
            return false;
        }
    }
    if (nonconvex > 1) {
        if (reason) *reason = "more than one nonconvex summand";
        return false;
    }
    if (!find_domain_point(f)) {
        if (reason) *reason = "no common domain point found";
        return false;
    }
    return true;
}

namespace {

// Move x toward the domain of f: exact for boxes and 1-D intervals, propagated
// through affine precompositions, sequential over sums.
std::vector<double> repair(const ExtFun& f, std::vector<double> x) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, IndicatorBox>) {
                for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], v.lower[i], v.upper[i]);
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                if (v.left_slope == -kInf) x[0] = std::max(x[0], v.x.front());
                if (v.right_slope == kInf) x[0] = std::min(x[0], v.x.back());
            } else if constexpr (std::is_same_v<T, Scaled>) {
                x = repair(*v.f, std::move(x));
            } else if constexpr (std::is_same_v<T, Sum>) {
                for (const auto& t : v.terms) x = repair(t, std::move(x));
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                std::vector<double> y(v.A.size());
                for (std::size_t r = 0; r < y.size(); ++r) {
                    y[r] = v.b[r];
                    for (std::size_t i = 0; i < x.size(); ++i) y[r] += v.A[r][i] * x[i];
                }
                std::vector<double> y2 = repair(*v.f, y);
                std::vector<double> dy(y.size());
                bool moved = false;
                for (std::size_t r = 0; r < y.size(); ++r) {
                    dy[r] = y2[r] - y[r];
                    moved = moved || dy[r] != 0.0;
                }
                if (moved) {
                    linalg::AffineSolver sol(v.A, x.size());
                    if (auto d = sol.solve(dy)) {
                        for (std::size_t i = 0; i < x.size(); ++i) x[i] += (*d)[i];
                    }
                }
            }
        },
        f.expr());
    return x;
}

}  // namespace

std::optional<std::vector<double>> find_domain_point(const ExtFun& f) {
    const std::size_t n = f.dim();
    auto ok = [&](const std::vector<double>& x) { return f.eval(x).is_finite(); };
    std::vector<std::vector<double>> cands;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, IndicatorBox>) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(0.0, v.lower[i], v.upper[i]);
                cands.push_back(std::move(x));
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                cands.push_back({std::clamp(0.0, v.x.front(), v.x.back())});
                cands.push_back({0.0});
            } else if constexpr (std::is_same_v<T, Sum>) {
                for (const auto& t : v.terms) {
                    if (auto p = find_domain_point(t)) cands.push_back(*p);
                }
                const std::size_t m = cands.size();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = i + 1; j < m; ++j) {
                        std::vector<double> mid(n);
                        for (std::size_t k = 0; k < n; ++k) mid[k] = 0.5 * (cands[i][k] + cands[j][k]);
                        cands.push_back(std::move(mid));
                    }
                }
            } else if constexpr (std::is_same_v<T, Scaled>) {
                if (auto p = find_domain_point(*v.f)) cands.push_back(*p);
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                if (auto y = find_domain_point(*v.f)) {
                    std::vector<double> rhs(v.b.size());
                    for (std::size_t r = 0; r < rhs.size(); ++r) rhs[r] = (*y)[r] - v.b[r];
                    linalg::AffineSolver sol(v.A, n);
                    if (auto x = sol.solve(rhs)) cands.push_back(*x);
                }
            } else if constexpr (std::is_same_v<T, PartialMin>) {
                if (auto p = find_domain_point(*v.f)) {
                    std::vector<double> x;
                    for (auto k : v.keep) x.push_back((*p)[k]);
                    cands.push_back(std::move(x));
                }
            }
        },
        f.expr());
    cands.emplace_back(n, 0.0);
    for (const auto& c : cands) {
        if (c.size() == n && ok(c)) return c;
    }
    for (auto c : cands) {
        if (c.size() != n) continue;
        for (int round = 0; round < 10; ++round) {
            c = repair(f, std::move(c));
            if (ok(c)) return c;
        }
    }
    return std::nullopt;
}

namespace {

double num(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        bad("unrecognized number string '" + s + "'");
    }
    if (!j.is_number()) bad("expected a number");
    return j.get<double>();
}

std::vector<double> nums(const nlohmann::json& j) {
    if (!j.is_array()) bad("expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : j) out.push_back(num(e));
    return out;
}

Matrix mat(const nlohmann::json& j) {
    if (!j.is_array()) bad("expected a matrix (array of rows)");
    Matrix out;
    for (const auto& r : j) out.push_back(nums(r));
    return out;
}

nlohmann::json jnum(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

nlohmann::json jnums(const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) a.push_back(jnum(x));
    return a;
}

nlohmann::json jmat(const Matrix& m) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : m) a.push_back(jnums(r));
    return a;
}

}  // namespace

ExtFun from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) bad("function spec needs a 'kind'");
    const auto kind = j.at("kind").get<std::string>();
    const nlohmann::json p = j.value("params", nlohmann::json::object());
    std::vector<ExtFun> ch;
    if (j.contains("children")) {
        for (const auto& c : j.at("children")) ch.push_back(from_json(c));
    }
    auto one_child = [&]() -> ExtFun {
        if (ch.size() != 1) bad("'" + kind + "' needs exactly one child");
        return ch.front();
    };
    if (kind == "affine") return affine(nums(p.at("a")), p.contains("b") ? num(p.at("b")) : 0.0);
    if (kind == "power") {
        return power_cost(num(p.at("lambda")), num(p.at("p")), p.value("dim", std::size_t{1}));
    }
    if (kind == "box") return indicator_box(nums(p.at("lower")), nums(p.at("upper")));
    if (kind == "polycone") return indicator_polycone(mat(p.at("normals")), p.at("dim").get<std::size_t>());
    if (kind == "sampled1d") {
        return sampled1d(nums(p.at("x")), nums(p.at("y")), num(p.value("left_slope", nlohmann::json(0.0))),
                         num(p.value("right_slope", nlohmann::json(0.0))));
    }
    if (kind == "sshaped") return sshaped(num(p.at("gamma")), num(p.at("kappa")), num(p.at("beta")));
    if (kind == "sum") {
        if (ch.empty()) bad("sum needs children");
        return make(Sum{std::move(ch)});
    }
    if (kind == "scaled") return scaled(num(p.at("factor")), one_child());
    if (kind == "precompose") {
        ExtFun f = one_child();
        std::vector<double> b = p.contains("b") ? nums(p.at("b")) : std::vector<double>(f.dim(), 0.0);
        return precompose(std::move(f), mat(p.at("A")), std::move(b));
    }
    if (kind == "partial_min") return partial_min(one_child(), p.at("keep").get<std::vector<std::size_t>>());
    bad("unknown function kind '" + kind + "'");
}

nlohmann::json to_json(const ExtFun& f) {
    return std::visit(
        [&](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            using nlohmann::json;
            if constexpr (std::is_same_v<T, Affine>) {
                return json{{"kind", "affine"}, {"params", {{"a", jnums(v.a)}, {"b", jnum(v.b)}}}};
            } else if constexpr (std::is_same_v<T, PowerCost>) {
                return json{{"kind", "power"}, {"params", {{"lambda", v.lambda}, {"p", v.p}, {"dim", v.dim}}}};
            } else if constexpr (std::is_same_v<T, IndicatorBox>) {
                return json{{"kind", "box"}, {"params", {{"lower", jnums(v.lower)}, {"upper", jnums(v.upper)}}}};
            } else if constexpr (std::is_same_v<T, IndicatorPolyCone>) {
                return json{{"kind", "polycone"}, {"params", {{"normals", jmat(v.normals)}, {"dim", v.dim}}}};
            } else if constexpr (std::is_same_v<T, Sampled1D>) {
                return json{{"kind", "sampled1d"},
                            {"params",
                             {{"x", jnums(v.x)},
                              {"y", jnums(v.y)},
                              {"left_slope", jnum(v.left_slope)},
                              {"right_slope", jnum(v.right_slope)}}}};
            } else if constexpr (std::is_same_v<T, SShapedDisutility>) {
                return json{{"kind", "sshaped"}, {"params", {{"gamma", v.gamma}, {"kappa", v.kappa}, {"beta", v.beta}}}};
            } else if constexpr (std::is_same_v<T, Sum>) {
                json c = json::array();
                for (const auto& t : v.terms) c.push_back(to_json(t));
                return json{{"kind", "sum"}, {"children", c}};
            } else if constexpr (std::is_same_v<T, Scaled>) {
                return json{{"kind", "scaled"}, {"params", {{"factor", v.factor}}}, {"children", {to_json(*v.f)}}};
            } else if constexpr (std::is_same_v<T, AffinePrecompose>) {
                return json{{"kind", "precompose"},
                            {"params", {{"A", jmat(v.A)}, {"b", jnums(v.b)}}},
                            {"children", {to_json(*v.f)}}};
            } else {
                return json{{"kind", "partial_min"}, {"params", {{"keep", v.keep}}}, {"children", {to_json(*v.f)}}};
            }
        },
        f.expr());
}

}  // namespace ncdp::efun
