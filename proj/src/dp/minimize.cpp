#include "ncdp/dp/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include <boost/container/small_vector.hpp>

#include "ncdp/errors.hpp"

namespace ncdp::dp {

namespace {

using Point = boost::container::small_vector<double, 8>;

class Counted {
public:
    Counted(const Objective& f, const AffineParam* param, long max_evals)
        : f_(f), param_(param), max_(max_evals) {}

    ExtReal operator()(std::span<const double> y) {
        if (++evals_ > max_) throw BudgetExceeded("minimize_section: evaluation budget exhausted");
        if (param_ == nullptr) return f_(y);
        x_.assign(param_->origin.begin(), param_->origin.end());
        for (std::size_t k = 0; k < y.size(); ++k) {
            const auto& b = param_->basis[k];
            for (std::size_t i = 0; i < x_.size(); ++i) x_[i] += y[k] * b[i];
        }
        return f_(std::span<const double>(x_.data(), x_.size()));
    }
    ExtReal operator()(const Point& y) { return (*this)(std::span<const double>(y.data(), y.size())); }

    [[nodiscard]] long evaluations() const { return evals_; }

private:
    const Objective& f_;
    const AffineParam* param_;
    long max_;
    long evals_ = 0;
    Point x_;
};

struct Level {
    double box = 0.0;
    double step = 0.0;
    std::vector<double> values;
    std::size_t best = 0;
    bool any_finite = false;
};

void unravel(std::size_t idx, std::size_t k, int K, Point& digits) {
    digits.resize(k);
    for (std::size_t d = k; d-- > 0;) {
        digits[d] = static_cast<double>(idx % static_cast<std::size_t>(K));
        idx /= static_cast<std::size_t>(K);
    }
}

Level grid_level(Counted& F, std::size_t k, int K, double B) {
    Level lv;
    lv.box = B;
    lv.step = 2.0 * B / (K - 1);
    std::size_t total = 1;
    for (std::size_t d = 0; d < k; ++d) total *= static_cast<std::size_t>(K);
    lv.values.resize(total);
    Point digits, y(k);
    double best = kInf;
    for (std::size_t idx = 0; idx < total; ++idx) {
        unravel(idx, k, K, digits);
        for (std::size_t d = 0; d < k; ++d) y[d] = -B + lv.step * digits[d];
        const double v = F(y).value();
        lv.values[idx] = v;
        if (v < best) {
            best = v;
            lv.best = idx;
        }
    }
    lv.any_finite = std::isfinite(best);
    return lv;
}

bool boundary_dominated(const Level& lv, std::size_t k, int K, double margin) {
    const double best = lv.values[lv.best];
    Point digits;
    for (std::size_t idx = 0; idx < lv.values.size(); ++idx) {
        unravel(idx, k, K, digits);
        bool on_boundary = false;
        for (std::size_t d = 0; d < k; ++d) {
            if (digits[d] == 0 || digits[d] == K - 1) on_boundary = true;
        }
        if (on_boundary && !(lv.values[idx] > best + margin)) return false;
    }
    return true;
}

Level grid_search(Counted& F, std::size_t k, const SearchConfig& cfg, bool& exhausted) {
    exhausted = false;
    Level lv;
    for (double B = cfg.box_start; B <= cfg.box_max * (1 + 1e-12); B *= 2.0) {
        lv = grid_level(F, k, cfg.grid_points, B);
        if (lv.any_finite && boundary_dominated(lv, k, cfg.grid_points, cfg.dominance_margin)) {
            return lv;
        }
    }
    exhausted = lv.any_finite;
    return lv;
}

// Grid local minima, best first, ties by grid index (lexicographic order).
std::vector<std::size_t> local_minima(const Level& lv, std::size_t k, int K, int count) {
    std::vector<std::size_t> cands;
    Point digits;
    std::size_t stride_last = 1;
    std::vector<std::size_t> stride(k);
    for (std::size_t d = k; d-- > 0;) {
        stride[d] = stride_last;
        stride_last *= static_cast<std::size_t>(K);
    }
    for (std::size_t idx = 0; idx < lv.values.size(); ++idx) {
        const double v = lv.values[idx];
        if (!std::isfinite(v)) continue;
        unravel(idx, k, K, digits);
        bool is_min = true;
        for (std::size_t d = 0; d < k && is_min; ++d) {
            if (digits[d] > 0 && lv.values[idx - stride[d]] < v) is_min = false;
            if (digits[d] < K - 1 && lv.values[idx + stride[d]] < v) is_min = false;
        }
        if (is_min) cands.push_back(idx);
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [&](std::size_t a, std::size_t b) { return lv.values[a] < lv.values[b]; });
    if (std::find(cands.begin(), cands.end(), lv.best) == cands.end()) cands.insert(cands.begin(), lv.best);
    if (cands.size() > static_cast<std::size_t>(count)) cands.resize(static_cast<std::size_t>(count));
    return cands;
}

// Along direction sign*e_j from infeasible y, find the nearest feasible point.
bool restore(Counted& F, Point& y, std::size_t j, double sign, double step, double& fy) {
    const double y0 = y[j];
    double lo = 0.0;
    double hi = -1.0;
    for (double t = step / 16.0; t <= step * 256.0; t *= 2.0) {
        y[j] = y0 + sign * t;
        if (F(y).is_finite()) {
            hi = t;
            break;
        }
        lo = t;
    }
    if (hi < 0.0) {
        y[j] = y0;
        return false;
    }
    for (int it = 0; it < 40 && hi - lo > 1e-3 * step; ++it) {
        const double mid = 0.5 * (lo + hi);
        y[j] = y0 + sign * mid;
        if (F(y).is_finite()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    y[j] = y0 + sign * hi;
    fy = F(y).value();
    return true;
}

void pattern_search(Counted& F, Point& y, double& fy, double step, double tol) {
    const std::size_t k = y.size();
    Point trial;
    while (step >= tol) {
        bool improved = false;
        for (std::size_t i = 0; i < k && !improved; ++i) {
            for (double s : {1.0, -1.0}) {
                trial = y;
                trial[i] += s * step;
                const double v = F(trial).value();
                if (v < fy) {
                    y = trial;
                    fy = v;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved && k >= 2) {
            for (std::size_t i = 0; i < k && !improved; ++i) {
                for (double s : {1.0, -1.0}) {
                    if (improved) break;
                    trial = y;
                    trial[i] += s * step;
                    if (F(trial).is_finite()) continue;
                    for (std::size_t j = 0; j < k && !improved; ++j) {
                        if (j == i) continue;
                        for (double sj : {1.0, -1.0}) {
                            Point r = trial;
                            double v = kInf;
                            if (restore(F, r, j, sj, step, v) && v < fy) {
                                y = r;
                                fy = v;
                                improved = true;
                                break;
                            }
                        }
                    }
                }
            }
        }
        if (!improved) step *= 0.5;
    }
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

SearchResult minimize_section(const Objective& f, std::size_t dim, const SearchConfig& cfg,
                              const Objective* guide, const AffineParam* param) {
    if (cfg.grid_points < 3 || cfg.grid_points % 2 == 0) {
        throw std::invalid_argument("minimize_section: grid_points must be odd and >= 3");
    }
    const std::size_t k = param ? param->basis.size() : dim;
    Counted F(f, param, cfg.max_evaluations);
    SearchResult res;

    auto to_x = [&](const Point& y) {
        std::vector<double> x;
        if (param == nullptr) return std::vector<double>(y.begin(), y.end());
        x = param->origin;
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[j] * param->basis[j][i];
        }
        return x;
    };

    if (k == 0) {
        Point y;
        const ExtReal v = F(y);
        res.evaluations = F.evaluations();
        if (v.is_finite()) {
            res.value = v;
            res.argmin = to_x(y);
        }
        return res;
    }

    const int K = cfg.grid_points;
    Level lv;
    bool exhausted = false;
    bool guided = false;
    std::optional<Counted> G;
    if (guide != nullptr) {
        G.emplace(*guide, param, cfg.max_evaluations);
        lv = grid_search(*G, k, cfg, exhausted);
        guided = lv.any_finite;
    }
    if (!guided) {
        lv = grid_search(F, k, cfg, exhausted);
    }
    res.box = lv.box;
    if (!lv.any_finite) {
        res.evaluations = F.evaluations();
        return res;
    }
    if (exhausted) {
        throw SearchBoxExhausted("minimize_section: boundary never dominated up to B = " +
                                 std::to_string(cfg.box_max));
    }

    auto starts = local_minima(lv, k, K, std::max(1, cfg.refine_starts));
    std::vector<double> best_x;
    double best_v = kInf;
    Point digits, y(k);
    auto refine_from = [&](std::size_t idx) {
        unravel(idx, k, K, digits);
        for (std::size_t d = 0; d < k; ++d) y[d] = -lv.box + lv.step * digits[d];
        double step = lv.step;
        if (guided) {
            // Descend on the guide first; the exact polish then starts close by.
            double gy = (*G)(y).value();
            if (std::isfinite(gy)) {
                pattern_search(*G, y, gy, step, std::max(cfg.refine_tol, step / 64.0));
                step /= 8.0;
            }
        }
        double fy = F(y).value();
        if (!std::isfinite(fy)) {
            if (step == lv.step) return;
            unravel(idx, k, K, digits);
            for (std::size_t d = 0; d < k; ++d) y[d] = -lv.box + lv.step * digits[d];
            step = lv.step;
            fy = F(y).value();
            if (!std::isfinite(fy)) return;
        }
        pattern_search(F, y, fy, step, cfg.refine_tol);
        std::vector<double> x = to_x(y);
        if (fy < best_v || (fy == best_v && lex_less(x, best_x))) {
            best_v = fy;
            best_x = std::move(x);
        }
    };
    for (std::size_t idx : starts) refine_from(idx);

    if (!std::isfinite(best_v) && guided) {
        // Guide was finite where f is not; fall back to searching f directly.
        guided = false;
        lv = grid_search(F, k, cfg, exhausted);
        res.box = lv.box;
        if (exhausted) {
            throw SearchBoxExhausted("minimize_section: boundary never dominated up to B = " +
                                     std::to_string(cfg.box_max));
        }
        if (lv.any_finite) {
            for (std::size_t idx : local_minima(lv, k, K, std::max(1, cfg.refine_starts))) refine_from(idx);
        }
    }
    res.evaluations = F.evaluations();
    if (std::isfinite(best_v)) {
        res.value = ExtReal(best_v);
        res.argmin = std::move(best_x);
    }
    return res;
}

}  // namespace ncdp::dp
