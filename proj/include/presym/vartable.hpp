#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "presym/expr.hpp"

namespace presym {

/// Coordinate/parameter/function registry for one system of dimension N.
/// Coordinates are interned in the interleaved order q1, v1, p1, q2, ... so
/// that the kernel's atom order (and hence printed constraint signs and the
/// deterministic choice of solve variables) follows the coordinate layout.
struct VarTable {
    int dim = 0;
    std::vector<AtomId> q, v, p;
    std::vector<std::pair<std::string, AtomId>> params;
    std::vector<std::string> functions;

    static VarTable make(int n) {
        if (n < 1) throw InputError("dimension must be >= 1");
        VarTable t;
        t.dim = n;
        for (int i = 1; i <= n; ++i) {
            std::string k = std::to_string(i);
            t.q.push_back(intern_symbol("q" + k));
            t.v.push_back(intern_symbol("v" + k));
            t.p.push_back(intern_symbol("p" + k));
        }
        return t;
    }

    AtomId add_param(const std::string& name) {
        AtomId id = intern_symbol(name);
        for (auto& [n, i] : params)
            if (i == id) return id;
        params.emplace_back(name, id);
        return id;
    }

    void add_function(const std::string& name) {
        if (std::find(functions.begin(), functions.end(), name) == functions.end())
            functions.push_back(name);
    }

    bool has_function(const std::string& name) const {
        return std::find(functions.begin(), functions.end(), name) != functions.end();
    }

    bool is_param(AtomId id) const {
        for (auto& [n, i] : params)
            if (i == id) return true;
        return false;
    }

    int index_in(const std::vector<AtomId>& list, AtomId id) const {
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i] == id) return int(i);
        return -1;
    }

    bool is_q(AtomId id) const { return index_in(q, id) >= 0; }
    bool is_v(AtomId id) const { return index_in(v, id) >= 0; }
    bool is_p(AtomId id) const { return index_in(p, id) >= 0; }
    bool is_coord(AtomId id) const { return is_q(id) || is_v(id) || is_p(id); }

    /// All coordinates in interleaved order q1, v1, p1, q2, ...
    std::vector<AtomId> coords() const {
        std::vector<AtomId> out;
        for (int i = 0; i < dim; ++i) {
            out.push_back(q[i]);
            out.push_back(v[i]);
            out.push_back(p[i]);
        }
        return out;
    }

    /// Resolver for the parser: returns true iff `name` names a known
    /// symbol (coordinate or parameter) and stores its id.
    bool lookup_symbol(const std::string& name, AtomId& out) const {
        for (int i = 0; i < dim; ++i) {
            std::string k = std::to_string(i + 1);
            if (name == "q" + k) { out = q[i]; return true; }
            if (name == "v" + k) { out = v[i]; return true; }
            if (name == "p" + k) { out = p[i]; return true; }
        }
        for (auto& [n, id] : params)
            if (n == name) { out = id; return true; }
        return false;
    }
};

} // namespace presym
