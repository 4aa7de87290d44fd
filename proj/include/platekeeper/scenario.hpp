#pragma once

// Offline policy inspection: evaluate a policy tree against hand-written
// plate/proposal/history scenarios.
//
// Scenario file: JSON array of
//   {"name": "...", "plate": <plate>, "proposal": <maintenance>, "history": [<maintenance>, ...]}

#include <algorithm>
#include <string>
#include <vector>

#include "platekeeper/codec.hpp"
#include "platekeeper/policy.hpp"

namespace platekeeper::policy {

struct Scenario {
    std::string name;
    Plate plate;
    MaintenanceRecord proposal;
    std::vector<MaintenanceRecord> history;  // oldest first
};

struct ScenarioResult {
    std::string name;
    Verdict verdict;
};

inline std::vector<Scenario> parse_scenarios(const json& doc) {
    if (!doc.is_array()) throw Error(ErrorCode::SchemaViolation, "scenario file must hold a JSON array");
    std::vector<Scenario> out;
    for (const auto& s : doc) {
        Scenario sc{platekeeper::detail::require_string(s, "name"),
                    plate_from_json(platekeeper::detail::require(s, "plate")),
                    maintenance_from_json(platekeeper::detail::require(s, "proposal")),
                    {}};
        if (auto h = s.find("history"); h != s.end()) {
            if (!h->is_array()) throw Error(ErrorCode::SchemaViolation, "history must be an array");
            for (const auto& rec : *h) sc.history.push_back(maintenance_from_json(rec));
        }
        auto foreign = [&](const MaintenanceRecord& m) { return m.plate_id != sc.plate.id; };
        if (foreign(sc.proposal) || std::any_of(sc.history.begin(), sc.history.end(), foreign)) {
            throw Error(ErrorCode::SchemaViolation, "scenario '" + sc.name + "' mixes records of other plates");
        }
        std::stable_sort(sc.history.begin(), sc.history.end(),
                         [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
        out.push_back(std::move(sc));
    }
    return out;
}

inline std::vector<Scenario> parse_scenarios(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("scenario file is not valid JSON: ") + e.what());
    }
    return parse_scenarios(doc);
}

inline std::vector<ScenarioResult> run_scenarios(const PolicyNode& root, const std::vector<Scenario>& scenarios) {
    std::vector<ScenarioResult> out;
    out.reserve(scenarios.size());
    for (const auto& sc : scenarios) {
        out.push_back({sc.name, root.evaluate({sc.plate, sc.proposal, sc.history})});
    }
    return out;
}

inline std::string verdict_label(const Verdict& v) { return v.allowed() ? "ALLOW" : "DENY " + *v.deny_code; }

}  // namespace platekeeper::policy
