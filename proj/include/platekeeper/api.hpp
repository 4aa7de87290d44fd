#pragma once

// Transport-independent request handlers for the v1 JSON API. Each handler
// takes the already-routed request pieces and returns status + body; the
// HTTP binding in http_server.hpp only does routing.

#include <charconv>
#include <map>
#include <string>
#include <string_view>

#include "platekeeper/service.hpp"

namespace platekeeper::api {

struct ApiResponse {
    int status = 200;
    std::string body;
};

inline constexpr const char* kContentType = "application/json; charset=utf-8";

/// HTTP status for every error code the API can emit.
inline const std::map<std::string, int, std::less<>>& error_table() {
    static const std::map<std::string, int, std::less<>> table{
        {"MALFORMED_JSON", 400},
        {"SCHEMA_VIOLATION", 422},
        {"EMPTY_TASKS", 422},
        {"MALFORMED_ID", 422},
        {"MALFORMED_VALUE", 422},
        {"INVALID_PARAMS", 422},
        {"INVALID_RANGE", 422},
        {"OVERFLOW", 422},
        {"NOT_FOUND", 404},
        {"UNKNOWN_COMPANY", 404},
        {"UNKNOWN_TASK", 404},
        {"UNKNOWN_CONDITION", 404},
        {"UNKNOWN_CATALOG", 404},
        {"UNKNOWN_REPORT", 404},
        {policy::deny_code::kSameDate, 409},
        {policy::deny_code::kCriticalPoint, 409},
        {policy::deny_code::kConditionBlocked, 409},
        {outcome_code::kDuplicatePlate, 409},
        {"PLATE_DECOMMISSIONED", 409},
        {outcome_code::kAlreadyDecommissioned, 409},
        {"STORAGE_FAILURE", 503},
        {"INTERNAL", 500},
    };
    return table;
}

inline ApiResponse error_response(std::string_view code, const std::string& message) {
    auto it = error_table().find(code);
    int status = it == error_table().end() ? 500 : it->second;
    return {status, json{{"code", std::string(code)}, {"message", message}}.dump()};
}

inline ApiResponse ok(int status, const json& body) { return {status, body.dump()}; }

namespace detail {

inline std::optional<json> parse_body(std::string_view body, ApiResponse& failure) {
    try {
        return json::parse(body);
    } catch (const json::parse_error&) {
        failure = error_response("MALFORMED_JSON", "request body is not valid JSON");
        return std::nullopt;
    }
}

inline void reject_unknown_fields(const json& obj, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(ErrorCode::SchemaViolation, "unexpected field '" + key + "'");
        }
    }
}

inline std::optional<std::int64_t> parse_non_negative(std::string_view text) {
    std::int64_t v = 0;
    if (text.empty()) return std::nullopt;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || v < 0) return std::nullopt;
    return v;
}

}  // namespace detail

/// Validates a capture body against the submission schema.
inline CaptureSubmission parse_capture_submission(const json& j) {
    using platekeeper::detail::require;
    using platekeeper::detail::require_string;
    if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "submission must be a JSON object");
    detail::reject_unknown_fields(
        j, {"plate_id", "company_id", "arrival_conditions", "tasks", "kind", "date", "operator_id"});

    CaptureSubmission sub;
    sub.plate_id = require_string(j, "plate_id");
    sub.company_id = require_string(j, "company_id");
    const auto& conditions = require(j, "arrival_conditions");
    if (!conditions.is_array()) throw Error(ErrorCode::SchemaViolation, "arrival_conditions must be an array");
    for (const auto& c : conditions) {
        if (!c.is_string()) throw Error(ErrorCode::SchemaViolation, "arrival_conditions must hold strings");
        sub.arrival_conditions.push_back(c.get<std::string>());
    }
    const auto& tasks = require(j, "tasks");
    if (!tasks.is_array()) throw Error(ErrorCode::SchemaViolation, "tasks must be an array");
    if (tasks.empty()) throw Error(ErrorCode::EmptyTaskList, "tasks must not be empty");
    for (const auto& t : tasks) {
        if (!t.is_object()) throw Error(ErrorCode::SchemaViolation, "each task must be an object");
        detail::reject_unknown_fields(t, {"task_code", "cost"});
        SubmittedTask st{require_string(t, "task_code"), std::nullopt};
        if (auto c = t.find("cost"); c != t.end()) {
            if (!c->is_number_integer() || c->get<std::int64_t>() < 0) {
                throw Error(ErrorCode::SchemaViolation, "task cost must be a non-negative integer");
            }
            st.cost = c->get<std::int64_t>();
        }
        sub.tasks.push_back(std::move(st));
    }
    try {
        sub.kind = parse_kind(require_string(j, "kind"));
        sub.date = CalendarDate::parse(require_string(j, "date"));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaViolation) throw;
        throw Error(ErrorCode::SchemaViolation, e.what());
    }
    sub.operator_id = require_string(j, "operator_id");
    if (sub.operator_id.empty()) throw Error(ErrorCode::SchemaViolation, "operator_id must be non-empty");
    if (!PlateId::well_formed(sub.plate_id)) throw Error(ErrorCode::MalformedId, "malformed plate id");
    return sub;
}

inline json submission_to_json(const CaptureSubmission& sub) {
    json tasks = json::array();
    for (const auto& t : sub.tasks) {
        json jt{{"task_code", t.task_code}};
        if (t.cost) jt["cost"] = *t.cost;
        tasks.push_back(std::move(jt));
    }
    return json{{"plate_id", sub.plate_id},
                {"company_id", sub.company_id},
                {"arrival_conditions", sub.arrival_conditions},
                {"tasks", std::move(tasks)},
                {"kind", std::string(to_string(sub.kind))},
                {"date", sub.date.to_string()},
                {"operator_id", sub.operator_id}};
}

class Api {
public:
    explicit Api(MaintenanceService& service, std::function<Timestamp()> clock = utc_now)
        : service_(service), clock_(std::move(clock)) {}

    ApiResponse register_plate(std::string_view body) {
        return with_json(body, [&](const json& j) {
            detail::reject_unknown_fields(j, {"id", "position", "registered_on", "operator_id"});
            auto id = platekeeper::detail::require_string(j, "id");
            auto position = position_from_json(platekeeper::detail::require(j, "position"));
            auto date = j.contains("registered_on")
                            ? CalendarDate::parse(platekeeper::detail::require_string(j, "registered_on"))
                            : CalendarDate::of(clock_());
            OperatorId op{platekeeper::detail::require_string(j, "operator_id")};
            auto out = service_.register_new_plate(id, position, date, op);
            return outcome_response(out, 201, [&] { return json{{"plate_id", id}, {"version", *out.new_version}}; });
        });
    }

    ApiResponse change_position(const std::string& plate_id, std::string_view body) {
        return with_json(body, [&](const json& j) {
            detail::reject_unknown_fields(j, {"position"});
            auto position = position_from_json(platekeeper::detail::require(j, "position"));
            auto out = service_.change_plate_position(plate_id, position);
            return outcome_response(out, 200,
                                    [&] { return json{{"plate_id", plate_id}, {"version", *out.new_version}}; });
        });
    }

    ApiResponse decommission(const std::string& plate_id) {
        auto out = service_.decommission_plate(plate_id);
        return outcome_response(out, 200, [&] { return json{{"plate_id", plate_id}, {"version", *out.new_version}}; });
    }

    ApiResponse plate_lookup(const std::string& plate_id) const {
        auto snap = service_.plate_snapshot(plate_id);
        if (!snap) return error_response("NOT_FOUND", "plate '" + plate_id + "' not found");
        json body = to_json(snap->plate);
        json recent = json::array();
        for (const auto& m : snap->recent) recent.push_back(to_json(m));
        body["recent_maintenances"] = std::move(recent);
        return ok(200, body);
    }

    ApiResponse capture_submission(std::string_view body) {
        return with_json(body, [&](const json& j) {
            auto out = service_.create_maintenance(parse_capture_submission(j));
            return outcome_response(out, 201, [&] {
                return json{{"maintenance_id", *out.entity_id},
                            {"plate_cumulative_cost", out.cumulative_cost->amount()}};
            });
        });
    }

    ApiResponse delete_maintenance(const std::string& maintenance_id) {
        auto out = service_.delete_maintenance(maintenance_id);
        return outcome_response(out, 200, [&] {
            return json{{"maintenance_id", maintenance_id}, {"plate_cumulative_cost", out.cumulative_cost->amount()}};
        });
    }

    ApiResponse report(std::string_view kind, const std::map<std::string, std::string>& params) const {
        auto param = [&](const char* name) -> std::optional<std::string> {
            auto it = params.find(name);
            if (it == params.end()) return std::nullopt;
            return it->second;
        };
        auto bad = [](const std::string& msg) { return error_response("INVALID_PARAMS", msg); };
        try {
            if (kind == "top-cost") {
                std::int64_t limit = 10;
                if (auto raw = param("limit")) {
                    auto v = detail::parse_non_negative(*raw);
                    if (!v) return bad("limit must be a non-negative integer");
                    limit = *v;
                }
                return ok(200, report_json::top_cost(service_.report_top_cost(static_cast<std::size_t>(limit))));
            }
            if (kind == "period-comparison") {
                CalendarDate d[4];
                const char* names[4] = {"a_start", "a_end", "b_start", "b_end"};
                for (int i = 0; i < 4; ++i) {
                    auto raw = param(names[i]);
                    if (!raw) return bad(std::string("missing parameter '") + names[i] + "'");
                    d[i] = CalendarDate::parse(*raw);
                }
                return ok(200, report_json::period_comparison(service_.report_period_comparison(d[0], d[1], d[2], d[3])));
            }
            if (kind == "replacement") {
                auto raw = param("critical_point");
                if (!raw) return bad("missing parameter 'critical_point'");
                auto v = detail::parse_non_negative(*raw);
                if (!v) return bad("critical_point must be a non-negative integer");
                return ok(200, report_json::replacement(service_.recommend_replacement(Money{*v})));
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::MalformedValue) return bad(e.what());
            return error_response(e.code_name(), e.what());
        }
        return error_response("UNKNOWN_REPORT", "unknown report '" + std::string(kind) + "'");
    }

    ApiResponse catalog(std::string_view kind) const {
        auto cat = service_.catalog();
        json arr = json::array();
        if (kind == "tasks") {
            for (const auto& [_, t] : cat.tasks) arr.push_back(to_json(t));
        } else if (kind == "companies") {
            for (const auto& [_, c] : cat.companies) arr.push_back(to_json(c));
        } else if (kind == "conditions") {
            for (const auto& [_, c] : cat.conditions) arr.push_back(to_json(c));
        } else {
            return error_response("UNKNOWN_CATALOG", "unknown catalog '" + std::string(kind) + "'");
        }
        return ok(200, arr);
    }

private:
    template <class F>
    ApiResponse with_json(std::string_view body, F&& handler) {
        ApiResponse failure;
        auto parsed = detail::parse_body(body, failure);
        if (!parsed) return failure;
        if (!parsed->is_object()) return error_response("SCHEMA_VIOLATION", "request body must be a JSON object");
        try {
            return handler(*parsed);
        } catch (const Error& e) {
            auto code = e.code() == ErrorCode::MalformedValue ? std::string_view("SCHEMA_VIOLATION") : e.code_name();
            return error_response(code, e.what());
        }
    }

    template <class F>
    static ApiResponse outcome_response(const CommandOutcome& out, int status, F&& body) {
        if (!out.accepted()) return error_response(*out.deny_code, out.message);
        return ok(status, body());
    }

    MaintenanceService& service_;
    std::function<Timestamp()> clock_;
};

}  // namespace platekeeper::api
