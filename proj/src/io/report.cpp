#include "ncdp/io/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "ncdp/errors.hpp"

namespace ncdp::io {

namespace {

// Shortest round-trip decimal form, identical to the JSON writer's.
std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return nlohmann::json(v).dump();
}

}  // namespace

nlohmann::json ext_to_json(ExtReal v) {
    if (v.is_inf()) return "inf";
    return v.value();
}

nlohmann::json sequence_to_json(const tree::ScenarioTree& tree, const dp::AdaptedSequence& x) {
    nlohmann::json j = nlohmann::json::object();
    for (tree::NodeIndex v = 0; v < x.x.size() && v < tree.size(); ++v) {
        if (!x.x[v].empty()) j[tree.node(v).id] = x.x[v];
    }
    return j;
}

nlohmann::json solution_to_json(const dp::Problem& p, const dp::Solution& s) {
    const auto& tree = *p.tree;
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : s.tables) {
        if (t.values.empty()) continue;
        tables.push_back({{"node", tree.node(t.node).id},
                          {"grid", t.grid},
                          {"points", t.values.size()},
                          {"evaluations", t.evaluations},
                          {"max_box", t.max_box}});
    }
    double gap = 0.0;
    if (s.value.is_finite() && s.forward_value.is_finite()) gap = std::abs(s.forward_value.value() - s.value.value());
    return {{"value", ext_to_json(s.value)},
            {"table_value", ext_to_json(s.table_value)},
            {"forward_value", ext_to_json(s.forward_value)},
            {"forward_gap", gap},
            {"policy", sequence_to_json(tree, s.policy)},
            {"diagnostics",
             {{"tables", tables},
              {"table_evaluations", s.table_evaluations},
              {"exact_evaluations", s.exact_evaluations}}}};
}

nlohmann::json verify_to_json(const tree::ScenarioTree& tree, const dp::VerifyReport& r) {
    nlohmann::json chain = nlohmann::json::array();
    for (const auto& c : r.chain) chain.push_back(ext_to_json(c));
    nlohmann::json gaps = nlohmann::json::object();
    for (tree::NodeIndex v = 0; v < r.node_gap.size(); ++v) {
        gaps[tree.node(v).id] = ext_to_json(ExtReal(r.node_gap[v]));
    }
    return {{"chain", chain},
            {"root_value", ext_to_json(r.root_value)},
            {"node_gap", gaps},
            {"max_chain_gap", r.max_chain_gap},
            {"max_node_gap", r.max_node_gap},
            {"optimal", r.optimal}};
}

nlohmann::json brute_force_to_json(const tree::ScenarioTree& tree, const dp::BruteForceResult& r) {
    return {{"value", ext_to_json(r.value)},
            {"argmin", sequence_to_json(tree, r.argmin)},
            {"combinations", r.combinations}};
}

std::string sequence_csv(const dp::Problem& p, const dp::AdaptedSequence& x) {
    std::size_t width = 0;
    for (const auto& d : x.x) width = std::max(width, d.size());
    std::ostringstream out;
    out << "node,time,prob";
    for (std::size_t i = 0; i < width; ++i) out << ",x" << i;
    out << '\n';
    for (tree::NodeIndex v = 0; v < x.x.size(); ++v) {
        if (x.x[v].empty()) continue;
        const auto& n = p.tree->node(v);
        out << n.id << ',' << n.time << ',' << num(p.tree->path_prob(v));
        for (double d : x.x[v]) out << ',' << num(d);
        out << '\n';
    }
    return out.str();
}

std::string value_tables_csv(const dp::Problem& p, const dp::Solution& s) {
    std::size_t sdim = 0, xdim = 0;
    for (const auto& t : s.tables) {
        if (t.values.empty()) continue;
        sdim = std::max(sdim, p.grids[static_cast<std::size_t>(t.grid)].dim());
        for (const auto& a : t.argmin) xdim = std::max(xdim, a.size());
    }
    std::ostringstream out;
    out << "node,point";
    for (std::size_t i = 0; i < sdim; ++i) out << ",s" << i;
    out << ",value";
    for (std::size_t i = 0; i < xdim; ++i) out << ",a" << i;
    out << '\n';
    for (const auto& t : s.tables) {
        if (t.values.empty()) continue;
        const auto& grid = p.grids[static_cast<std::size_t>(t.grid)];
        const auto& id = p.tree->node(t.node).id;
        for (std::size_t k = 0; k < t.values.size(); ++k) {
            out << id << ',' << k;
            const auto pt = grid.point(k);
            for (std::size_t i = 0; i < sdim; ++i) out << ',' << (i < pt.size() ? num(pt[i]) : "");
            out << ',' << num(t.values[k]);
            for (std::size_t i = 0; i < xdim; ++i) {
                out << ',' << (k < t.argmin.size() && i < t.argmin[k].size() ? num(t.argmin[k][i]) : "");
            }
            out << '\n';
        }
    }
    return out.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidModel("cannot write '" + path + "'");
    f << text;
}

}  // namespace ncdp::io
