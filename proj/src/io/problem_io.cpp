#include "ncdp/io/problem_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ncdp/efun/ext_fun.hpp"
#include "ncdp/errors.hpp"

namespace ncdp::io {

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidModel("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Translate the byte offset into line:column.
        std::size_t line = 1, col = 1;
        const std::size_t end = e.byte > 0 ? std::min<std::size_t>(e.byte - 1, text.size()) : 0;
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InvalidModel(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
}

dp::StateGrid grid_from_json(const nlohmann::json& j) {
    try {
        const auto lo = j.at("lo").get<std::vector<double>>();
        const auto hi = j.at("hi").get<std::vector<double>>();
        const auto n = j.at("n").get<std::vector<std::size_t>>();
        if (lo.size() != hi.size() || lo.size() != n.size()) throw InvalidModel("grid: lo/hi/n sizes differ");
        for (std::size_t d = 0; d < lo.size(); ++d) {
            if (n[d] == 0 || (n[d] > 1 && !(hi[d] > lo[d]))) throw InvalidModel("grid: need n >= 1 and hi > lo");
        }
        return dp::StateGrid::uniform(lo, hi, n);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidModel(std::string("grid: ") + e.what());
    }
}

nlohmann::json grid_to_json(const dp::StateGrid& g) {
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array(), n = nlohmann::json::array();
    for (const auto& a : g.axes) {
        lo.push_back(a.front());
        hi.push_back(a.back());
        n.push_back(a.size());
    }
    return {{"lo", lo}, {"hi", hi}, {"n", n}};
}

dp::Problem problem_from_json(const nlohmann::json& j) {
    std::string field = "tree";
    try {
        auto tree = std::make_shared<const tree::ScenarioTree>(tree::tree_from_json(j.at("tree")));
        field = "decision_dims";
        auto dims = j.at("decision_dims").get<std::vector<std::size_t>>();
        if (dims.size() != static_cast<std::size_t>(tree->horizon()) + 1) {
            throw InvalidModel("decision_dims: need one entry per stage");
        }
        dp::Problem p = dp::Problem::history(tree, std::move(dims));
        field = "objective";
        const auto& obj = j.at("objective");
        for (tree::NodeIndex leaf : tree->leaves()) {
            const auto& id = tree->node(leaf).id;
            if (!obj.contains(id)) throw InvalidModel("objective: missing leaf '" + id + "'");
            field = "objective." + id;
            auto f = efun::from_json(obj.at(id));
            if (f.dim() != p.state_dims.back()) {
                throw InvalidModel(field + ": dimension " + std::to_string(f.dim()) + ", expected " +
                                   std::to_string(p.state_dims.back()));
            }
            p.state_cost[leaf] = std::move(f);
        }
        if (j.contains("lower_bound")) {
            field = "lower_bound";
            for (const auto& [id, m] : j.at("lower_bound").items()) p.lower_bound[tree->find(id)] = m.get<double>();
        }
        field = "grids";
        if (j.contains("grids")) {
            for (const auto& g : j.at("grids")) p.grids.push_back(grid_from_json(g));
        }
        p.validate();
        return p;
    } catch (const InvalidModel& e) {
        throw InvalidModel(field + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidModel(field + ": " + e.what());
    }
}

}  // namespace ncdp::io
