#pragma once

// Generators and small oracles shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoforge/constructor.hpp"
#include "geoforge/geometry.hpp"
#include "geoforge/reasoner.hpp"
#include "geoforge/rng.hpp"
#include "geoforge/sampler.hpp"
#include "geoforge/statement.hpp"

namespace gftest {

using namespace geoforge;

inline PointId P(char c) { return PointId(static_cast<std::uint16_t>(c - 'A')); }

// Distinct point ids drawn from [0, limit).
inline std::vector<PointId> distinct_points(Rng& rng, std::size_t n, std::size_t limit = 12) {
    std::vector<std::uint16_t> pool(limit);
    for (std::size_t i = 0; i < limit; ++i) pool[i] = static_cast<std::uint16_t>(i);
    for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.index(limit - i)]);
    std::vector<PointId> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(pool[i]);
    return out;
}

inline Rational random_value(Rng& rng, ValueUnit unit) {
    auto den = rng.uniform_int(1, 6);
    if (unit == ValueUnit::Degrees) return Rational(rng.uniform_int(1, 180 * den - 1), den);
    return Rational(rng.uniform_int(1, 60), den);
}

// A well-formed statement over distinct points, not canonicalized.
inline Statement random_statement(Rng& rng) {
    auto pred = static_cast<Predicate>(rng.index(kPredicateCount));
    const auto& info = predicate_info(pred);
    auto pts = distinct_points(rng, info.point_count);
    std::optional<Rational> value;
    if (info.unit != ValueUnit::None) value = random_value(rng, info.unit);
    return Statement(pred, pts, value);
}

inline Coord random_coord(Rng& rng) { return {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)}; }

// Random valid scene: base generator picked by the seed plus a few constructions.
inline Scene random_scene(std::uint64_t seed, int steps = 3) {
    const auto& gens = generator_catalog();
    Rng rng(seed);
    auto base = generate_base_scene(gens[rng.index(gens.size())], mix_seed(seed, 1));
    return extend_scene(base, steps, mix_seed(seed, 2));
}

// Affine map applied to every point.
inline SceneGeometry transform(const SceneGeometry& g, double scale, double degrees, Coord shift) {
    std::vector<Coord> pts;
    for (const auto& c : g.points()) pts.push_back(scale * rotate(c, degrees) + shift);
    return SceneGeometry(pts, g.tolerances());
}

// Every complete backward option assignment for `target`: one incoming
// transition per needed derived statement. Returned as sorted transition sets.
inline std::set<std::vector<Transition>> brute_force_paths(const ReasoningGraph& g, StatementId target) {
    std::set<std::vector<Transition>> out;
    std::map<StatementId, std::size_t> choice;
    std::function<void(std::vector<StatementId>)> go = [&](std::vector<StatementId> todo) {
        // drop resolved and initial statements
        todo.erase(std::remove_if(todo.begin(), todo.end(),
                                  [&](StatementId s) { return g.is_initial(s) || choice.count(s); }),
                   todo.end());
        if (todo.empty()) {
            // keep only statements actually reachable from the target under this choice
            std::set<Transition> used;
            std::vector<StatementId> stack{target};
            std::set<StatementId> seen{target};
            while (!stack.empty()) {
                auto s = stack.back();
                stack.pop_back();
                if (g.is_initial(s)) continue;
                const auto& t = g.transitions()[choice.at(s)];
                used.insert(t);
                for (auto p : t.premises) {
                    if (seen.insert(p).second) stack.push_back(p);
                }
            }
            out.insert(std::vector<Transition>(used.begin(), used.end()));
            return;
        }
        auto s = todo.back();
        todo.pop_back();
        for (auto idx : g.incoming(s)) {
            choice[s] = idx;
            auto next = todo;
            for (auto p : g.transitions()[idx].premises) next.push_back(p);
            go(next);
            choice.erase(s);
        }
    };
    go({target});
    return out;
}

// Backward reachability by plain recursion over all incoming transitions.
inline std::set<StatementId> upstream_oracle(const ReasoningGraph& g, StatementId s) {
    std::set<StatementId> out;
    std::function<void(StatementId)> visit = [&](StatementId x) {
        if (!out.insert(x).second) return;
        for (auto idx : g.incoming(x)) {
            for (auto p : g.transitions()[idx].premises) visit(p);
        }
    };
    visit(s);
    return out;
}

inline std::vector<Transition> sorted_transitions(std::vector<Transition> ts) {
    std::sort(ts.begin(), ts.end());
    return ts;
}

// Abstract hypergraph over placeholder statements: statement k is
// seg_len(A, point k+1; k+1). Rules are irrelevant to the explorers.
struct HandGraph {
    std::size_t initial;
    std::size_t total;
    std::vector<std::pair<std::vector<StatementId>, StatementId>> edges;

    ReasoningGraph build(ReasonMode mode) const {
        StatementSet s0;
        for (std::size_t k = 0; k < initial; ++k) s0.insert(stmt(k));
        ReasoningGraph g(s0, mode);
        for (std::size_t k = initial; k < total; ++k) g.add_statement(stmt(k));
        for (const auto& [premises, conclusion] : edges) {
            if (!g.add_transition({premises, 0, conclusion})) throw std::logic_error("bad hand-built edge");
        }
        return g;
    }

    static Statement stmt(std::size_t k) {
        return st::seg_len(P('A'), PointId(static_cast<std::uint16_t>(k + 1)), Rational(static_cast<std::int64_t>(k + 1)));
    }
};

// Targets are the last statement; path counts 2, 3, 4, 3, 4.
inline const std::vector<HandGraph>& oracle_graphs() {
    static const std::vector<HandGraph> graphs = {
        // diamond: two derivations of 6
        {3, 7, {{{0}, 3}, {{1}, 4}, {{2}, 5}, {{3}, 6}, {{4, 5}, 6}}},
        // three derivations through a branching premise
        {3, 5, {{{0}, 3}, {{1}, 3}, {{3, 2}, 4}, {{2}, 4}}},
        // independent choices multiply
        {2, 5, {{{0}, 2}, {{1}, 2}, {{0}, 3}, {{1}, 3}, {{2, 3}, 4}}},
        // reconvergent premise keeps one choice per statement
        {3, 7, {{{0}, 3}, {{1}, 3}, {{3}, 4}, {{3, 2}, 5}, {{4, 5}, 6}, {{2}, 6}}},
        // ten statements, four derivations
        {4, 10, {{{0}, 4}, {{1}, 5}, {{4, 5}, 6}, {{2}, 6}, {{6}, 7}, {{3, 4}, 7}, {{7, 4}, 8}, {{8}, 9}, {{3}, 9}}},
    };
    return graphs;
}

// Premises of every transition are initial or concluded earlier in the path.
inline bool well_ordered(const ReasoningGraph& g, const ReasoningPath& p) {
    std::set<StatementId> have;
    std::set<Transition> seen;
    for (const auto& t : p.transitions) {
        if (!seen.insert(t).second) return false;
        for (auto s : t.premises) {
            if (!g.is_initial(s) && !have.count(s)) return false;
        }
        have.insert(t.conclusion);
    }
    return !p.transitions.empty() && p.transitions.back().conclusion == p.target;
}

}  // namespace gftest
