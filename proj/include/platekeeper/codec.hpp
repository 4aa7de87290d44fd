#pragma once

// Canonical JSON field names for domain entities. Used by the journal
// mappers and reused verbatim by the HTTP API.

#include <json.hpp>

#include "platekeeper/domain.hpp"

namespace platekeeper {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void schema_error(const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, what);
}

inline const json& require(const json& obj, const char* field) {
    if (!obj.is_object()) schema_error(std::string("expected object holding '") + field + "'");
    auto it = obj.find(field);
    if (it == obj.end()) schema_error(std::string("missing field '") + field + "'");
    return *it;
}

inline std::string require_string(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_string()) schema_error(std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

inline std::int64_t require_int(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_number_integer()) schema_error(std::string("field '") + field + "' must be an integer");
    return v.get<std::int64_t>();
}

inline Money require_money(const json& obj, const char* field) {
    auto v = require_int(obj, field);
    if (v < 0) schema_error(std::string("field '") + field + "' must be non-negative");
    return Money{v};
}

inline ConditionSet require_string_set(const json& obj, const char* field) {
    const auto& v = require(obj, field);
    if (!v.is_array()) schema_error(std::string("field '") + field + "' must be an array");
    ConditionSet out;
    for (const auto& item : v) {
        if (!item.is_string()) schema_error(std::string("field '") + field + "' must hold strings");
        out.insert(item.get<std::string>());
    }
    return out;
}

}  // namespace detail

inline json to_json(const Position& p) {
    return json{{"bank", p.bank}, {"cell", p.cell}, {"slot", p.slot}};
}

inline Position position_from_json(const json& j) {
    return Position::make(detail::require_int(j, "bank"), detail::require_int(j, "cell"),
                          detail::require_int(j, "slot"));
}

inline json to_json(const Plate& p) {
    return json{{"id", p.id.str()},
                {"position", to_json(p.position)},
                {"status", std::string(to_string(p.status))},
                {"conditions", p.conditions},
                {"cumulative_cost", p.cumulative_cost.amount()},
                {"registered_on", p.registered_on.to_string()}};
}

inline Plate plate_from_json(const json& j) {
    return Plate{PlateId{detail::require_string(j, "id")},
                 position_from_json(detail::require(j, "position")),
                 parse_status(detail::require_string(j, "status")),
                 detail::require_string_set(j, "conditions"),
                 detail::require_money(j, "cumulative_cost"),
                 CalendarDate::parse(detail::require_string(j, "registered_on"))};
}

inline json to_json(const TaskEntry& t) {
    return json{{"task_code", t.task_code}, {"cost", t.cost.amount()}};
}

inline json to_json(const MaintenanceRecord& m) {
    json tasks = json::array();
    for (const auto& t : m.tasks) tasks.push_back(to_json(t));
    return json{{"id", m.id},
                {"plate_id", m.plate_id.str()},
                {"date", m.date.to_string()},
                {"timestamp", format_timestamp(m.timestamp)},
                {"company_id", m.company_id},
                {"operator_id", m.operator_id},
                {"arrival_conditions", m.arrival_conditions},
                {"tasks", std::move(tasks)},
                {"kind", std::string(to_string(m.kind))},
                {"total_cost", m.total_cost.amount()}};
}

inline MaintenanceRecord maintenance_from_json(const json& j) {
    MaintenanceRecord m{detail::require_string(j, "id"),
                        PlateId{detail::require_string(j, "plate_id")},
                        CalendarDate::parse(detail::require_string(j, "date")),
                        parse_timestamp(detail::require_string(j, "timestamp")),
                        detail::require_string(j, "company_id"),
                        detail::require_string(j, "operator_id"),
                        detail::require_string_set(j, "arrival_conditions"),
                        {},
                        parse_kind(detail::require_string(j, "kind")),
                        detail::require_money(j, "total_cost")};
    const auto& tasks = detail::require(j, "tasks");
    if (!tasks.is_array()) detail::schema_error("field 'tasks' must be an array");
    for (const auto& t : tasks) {
        m.tasks.push_back({detail::require_string(t, "task_code"), detail::require_money(t, "cost")});
    }
    if (m.tasks.empty()) throw Error(ErrorCode::EmptyTaskList, "maintenance has no tasks");
    if (sum_task_costs(m.tasks) != m.total_cost) detail::schema_error("total_cost does not match task costs");
    if (CalendarDate::of(m.timestamp) != m.date) detail::schema_error("date does not match timestamp");
    return m;
}

inline json to_json(const Company& c) { return json{{"id", c.id}, {"name", c.name}}; }

inline Company company_from_json(const json& j) {
    return Company{detail::require_string(j, "id"), detail::require_string(j, "name")};
}

inline json to_json(const TaskType& t) {
    return json{{"code", t.code}, {"label", t.label}, {"default_cost", t.default_cost.amount()}};
}

inline TaskType task_type_from_json(const json& j) {
    TaskType t{detail::require_string(j, "code"), detail::require_string(j, "label"),
               detail::require_money(j, "default_cost")};
    if (!is_catalog_code(t.code)) detail::schema_error("task code must be lowercase: '" + t.code + "'");
    return t;
}

inline json to_json(const ConditionTag& c) { return json{{"code", c.code}, {"label", c.label}}; }

inline ConditionTag condition_from_json(const json& j) {
    ConditionTag c{detail::require_string(j, "code"), detail::require_string(j, "label")};
    if (!is_catalog_code(c.code)) detail::schema_error("condition code must be lowercase: '" + c.code + "'");
    return c;
}

}  // namespace platekeeper
