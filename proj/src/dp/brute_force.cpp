#include "ncdp/dp/brute_force.hpp"

#include <limits>

#include <omp.h>

#include "ncdp/errors.hpp"

namespace ncdp::dp {

std::vector<DecisionGrid> uniform_decision_grids(const Problem& p, double lo, double hi, std::size_t m) {
    std::vector<double> axis(m);
    for (std::size_t i = 0; i < m; ++i) {
        axis[i] = m == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m - 1);
    }
    std::vector<DecisionGrid> g(p.tree->size());
    for (NodeIndex v = 0; v < p.tree->size(); ++v) g[v].axes.assign(p.n(v), axis);
    return g;
}

namespace {

struct Digit {
    NodeIndex node;
    std::size_t coord;
    const std::vector<double>* axis;
};

struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();
};

class Enumerator {
public:
    Enumerator(const Problem& p, const std::vector<DecisionGrid>& grids) : p_(p) {
        x_.x.resize(p.tree->size());
        for (NodeIndex v = 0; v < p.tree->size(); ++v) {
            x_.x[v].assign(p.n(v), 0.0);
            for (std::size_t d = 0; d < p.n(v); ++d) digits_.push_back({v, d, &grids[v].axes[d]});
        }
        states_.resize(p.tree->size());
        for (NodeIndex v = 0; v < p.tree->size(); ++v) {
            states_[v].assign(p.state_dims[static_cast<std::size_t>(p.tree->node(v).time)], 0.0);
        }
    }

    void decode(std::size_t idx) {
        for (std::size_t k = digits_.size(); k-- > 0;) {
            const auto& d = digits_[k];
            const std::size_t m = d.axis->size();
            x_.x[d.node][d.coord] = (*d.axis)[idx % m];
            idx /= m;
        }
    }

    // E h with stage costs accumulated along the tree; parents precede children.
    double value() {
        const auto& tree = *p_.tree;
        acc_.assign(tree.size(), 0.0);
        double total = 0.0;
        for (NodeIndex v = 0; v < tree.size(); ++v) {
            const auto& node = tree.node(v);
            const bool root = node.parent == tree::kNoParent;
            const std::vector<double>& prev = root ? p_.initial_state : states_[node.parent];
            const double before = root ? 0.0 : acc_[node.parent];
            if (before == std::numeric_limits<double>::infinity()) {
                acc_[v] = before;
            } else {
                acc_[v] = before + p_.stage(v, prev, x_.x[v], states_[v]).value();
            }
            if (tree.is_leaf(v)) {
                total += ExtReal(acc_[v]).scaled(tree.path_prob(v)).value();
            }
        }
        return total;
    }

    [[nodiscard]] const AdaptedSequence& x() const { return x_; }

private:
    const Problem& p_;
    std::vector<Digit> digits_;
    AdaptedSequence x_;
    std::vector<std::vector<double>> states_;
    std::vector<double> acc_;
};

}  // namespace

BruteForceResult brute_force(const Problem& p, const std::vector<DecisionGrid>& grids, bool parallel, int threads,
                             std::size_t budget) {
    p.validate();
    if (grids.size() != p.tree->size()) throw InvalidModel("brute_force: one decision grid per node required");
    std::size_t total = 1;
    for (NodeIndex v = 0; v < p.tree->size(); ++v) {
        if (grids[v].axes.size() != p.n(v)) throw InvalidModel("brute_force: grid dimension mismatch");
        for (const auto& a : grids[v].axes) {
            if (a.empty()) throw InvalidModel("brute_force: empty grid axis");
            if (total > budget / a.size()) {
                throw BudgetExceeded("brute_force: grid product exceeds budget " + std::to_string(budget));
            }
            total *= a.size();
        }
    }

    auto scan = [&](std::size_t begin, std::size_t end) {
        Enumerator e(p, grids);
        Best b;
        for (std::size_t i = begin; i < end; ++i) {
            e.decode(i);
            const double v = e.value();
            if (v < b.value) {
                b.value = v;
                b.index = i;
            }
        }
        return b;
    };

    Best best;
    if (parallel && total > 1) {
        const int nt = threads > 0 ? threads : omp_get_max_threads();
        // Fixed chunking independent of the thread count; merge in chunk order.
        const std::size_t chunks = std::min<std::size_t>(total, 256);
        std::vector<Best> part(chunks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
        for (long c = 0; c < static_cast<long>(chunks); ++c) {
            const auto k = static_cast<std::size_t>(c);
            part[k] = scan(total * k / chunks, total * (k + 1) / chunks);
        }
        for (const auto& b : part) {
            if (b.value < best.value) best = b;
        }
    } else {
        best = scan(0, total);
    }

    BruteForceResult res;
    res.combinations = total;
    if (best.index == std::numeric_limits<std::size_t>::max()) return res;
    Enumerator e(p, grids);
    e.decode(best.index);
    res.value = ExtReal(best.value);
    res.argmin = e.x();
    return res;
}

}  // namespace ncdp::dp
