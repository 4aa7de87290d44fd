#pragma once

// Brute-force reference evaluator for policy configs. Works directly on the
// JSON config and a flattened context; shares no code with the engine.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace pktest::oracle {

using json = nlohmann::json;

struct Context {
    std::set<std::string> plate_conditions;
    std::int64_t cumulative_cost = 0;
    std::vector<std::string> history_dates;
    std::string proposal_date;
};

struct Verdict {
    bool allow = true;
    std::string code;  // empty when allowed
    bool operator==(const Verdict& o) const { return allow == o.allow && code == o.code; }
};

inline Verdict evaluate(const json& node, const Context& ctx) {
    const std::string type = node.at("type");
    if (type == "same_date") {
        for (const auto& d : ctx.history_dates) {
            if (d == ctx.proposal_date) return {false, "SAME_DATE"};
        }
        return {};
    }
    if (type == "critical_point") {
        return ctx.cumulative_cost >= node.at("max_cost").get<std::int64_t>() ? Verdict{false, "CRITICAL_POINT"}
                                                                               : Verdict{};
    }
    if (type == "condition_block") {
        return ctx.plate_conditions.count(node.at("tag")) ? Verdict{false, "CONDITION_BLOCKED"} : Verdict{};
    }
    if (type == "condition_exception") {
        if (ctx.plate_conditions.count(node.at("tag"))) return {};
        return evaluate(node.at("child"), ctx);
    }
    // Composites: evaluate every child first, then combine.
    std::vector<Verdict> results;
    for (const auto& c : node.at("children")) results.push_back(evaluate(c, ctx));
    if (type == "all_of") {
        bool all_allow = true;
        for (const auto& r : results) all_allow = all_allow && r.allow;
        if (all_allow) return {};
        for (const auto& r : results) {
            if (!r.allow) return r;
        }
    }
    if (type == "any_of") {
        for (const auto& r : results) {
            if (r.allow) return {};
        }
        return results.front();
    }
    throw std::logic_error("oracle: unknown node type " + type);
}

}  // namespace pktest::oracle
