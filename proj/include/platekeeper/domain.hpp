#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "platekeeper/error.hpp"
#include "platekeeper/time.hpp"

namespace platekeeper {

/// Whole Chilean pesos. Never negative; addition past INT64_MAX is an error.
class Money {
public:
    constexpr Money() = default;
    constexpr explicit Money(std::int64_t amount) : amount_(amount) {
        if (amount < 0) throw Error(ErrorCode::MalformedValue, "money amount must be non-negative");
    }

    constexpr std::int64_t amount() const { return amount_; }

    friend constexpr Money operator+(Money a, Money b) {
        if (b.amount_ > std::numeric_limits<std::int64_t>::max() - a.amount_) {
            throw Error(ErrorCode::Overflow, "money addition overflows");
        }
        return Money(a.amount_ + b.amount_);
    }
    Money& operator+=(Money other) { return *this = *this + other; }

    // Saturates at zero; cost reversal never goes negative.
    friend constexpr Money operator-(Money a, Money b) {
        return Money(a.amount_ > b.amount_ ? a.amount_ - b.amount_ : 0);
    }

    friend constexpr bool operator==(Money, Money) = default;
    friend constexpr auto operator<=>(Money, Money) = default;

private:
    std::int64_t amount_ = 0;
};

class PlateId {
public:
    static constexpr std::size_t kMaxLength = 32;

    explicit PlateId(std::string value) : value_(std::move(value)) {
        if (!well_formed(value_)) {
            throw Error(ErrorCode::MalformedId, "malformed plate id '" + value_ + "'");
        }
    }

    static bool well_formed(std::string_view v) {
        if (v.empty() || v.size() > kMaxLength) return false;
        return std::all_of(v.begin(), v.end(), [](char c) {
            return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
        });
    }

    const std::string& str() const { return value_; }

    friend bool operator==(const PlateId&, const PlateId&) = default;
    friend auto operator<=>(const PlateId&, const PlateId&) = default;

private:
    std::string value_;
};

struct Position {
    std::int64_t bank = 1;
    std::int64_t cell = 1;
    std::int64_t slot = 1;

    static Position make(std::int64_t bank, std::int64_t cell, std::int64_t slot) {
        if (bank < 1 || cell < 1 || slot < 1) {
            throw Error(ErrorCode::MalformedValue, "position components must be >= 1");
        }
        return {bank, cell, slot};
    }

    friend bool operator==(const Position&, const Position&) = default;
};

enum class LifecycleStatus { InProduction, InMaintenance, InStock, Decommissioned };

constexpr std::string_view to_string(LifecycleStatus s) {
    switch (s) {
    case LifecycleStatus::InProduction: return "in_production";
    case LifecycleStatus::InMaintenance: return "in_maintenance";
    case LifecycleStatus::InStock: return "in_stock";
    case LifecycleStatus::Decommissioned: return "decommissioned";
    }
    return "";
}

inline LifecycleStatus parse_status(std::string_view s) {
    for (auto v : {LifecycleStatus::InProduction, LifecycleStatus::InMaintenance, LifecycleStatus::InStock,
                   LifecycleStatus::Decommissioned}) {
        if (to_string(v) == s) return v;
    }
    throw Error(ErrorCode::MalformedValue, "unknown lifecycle status '" + std::string(s) + "'");
}

/// Catalog keys (condition codes, task codes): lowercase ascii, digits, underscore.
inline bool is_catalog_code(std::string_view code) {
    return !code.empty() && std::all_of(code.begin(), code.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

struct ConditionTag {
    std::string code;
    std::string label;
    friend bool operator==(const ConditionTag&, const ConditionTag&) = default;
};

// Catalog entry for a maintenance task; default_cost fills in omitted costs.
struct TaskType {
    std::string code;
    std::string label;
    Money default_cost;
    friend bool operator==(const TaskType&, const TaskType&) = default;
};

struct Company {
    std::string id;
    std::string name;
    friend bool operator==(const Company&, const Company&) = default;
};

class OperatorId {
public:
    explicit OperatorId(std::string value) : value_(std::move(value)) {
        if (value_.empty()) throw Error(ErrorCode::MalformedValue, "operator id must be non-empty");
    }
    const std::string& str() const { return value_; }
    friend bool operator==(const OperatorId&, const OperatorId&) = default;

private:
    std::string value_;
};

using ConditionSet = std::set<std::string>;

struct Plate {
    PlateId id;
    Position position;
    LifecycleStatus status = LifecycleStatus::InStock;
    ConditionSet conditions;
    Money cumulative_cost;
    CalendarDate registered_on;

    friend bool operator==(const Plate&, const Plate&) = default;
};

struct TaskEntry {
    std::string task_code;
    Money cost;
    friend bool operator==(const TaskEntry&, const TaskEntry&) = default;
};

enum class MaintenanceKind { Major, Minor };

constexpr std::string_view to_string(MaintenanceKind k) {
    return k == MaintenanceKind::Major ? "major" : "minor";
}

inline MaintenanceKind parse_kind(std::string_view s) {
    if (s == "major") return MaintenanceKind::Major;
    if (s == "minor") return MaintenanceKind::Minor;
    throw Error(ErrorCode::MalformedValue, "maintenance kind must be 'major' or 'minor'");
}

struct MaintenanceRecord {
    std::string id;
    PlateId plate_id;
    CalendarDate date;
    Timestamp timestamp;
    std::string company_id;
    std::string operator_id;
    ConditionSet arrival_conditions;
    std::vector<TaskEntry> tasks;
    MaintenanceKind kind = MaintenanceKind::Minor;
    Money total_cost;

    friend bool operator==(const MaintenanceRecord&, const MaintenanceRecord&) = default;
};

/// Reference data consulted when commands are validated.
struct Catalog {
    std::map<std::string, ConditionTag> conditions;
    std::map<std::string, TaskType> tasks;
    std::map<std::string, Company> companies;

    bool has_condition(const std::string& code) const { return conditions.count(code) != 0; }
    bool has_task(const std::string& code) const { return tasks.count(code) != 0; }
    bool has_company(const std::string& id) const { return companies.count(id) != 0; }
};

// ---------------------------------------------------------------------------
// Value-level operations

inline Plate new_plate(PlateId id, Position position, CalendarDate registered_on) {
    return Plate{std::move(id), position, LifecycleStatus::InStock, {}, Money{0}, registered_on};
}

inline Money sum_task_costs(std::span<const TaskEntry> tasks) {
    if (tasks.empty()) throw Error(ErrorCode::EmptyTaskList, "a maintenance needs at least one task");
    Money total;
    for (const auto& t : tasks) total += t.cost;
    return total;
}

inline Plate transition_status(Plate plate, LifecycleStatus next) {
    if (plate.status == LifecycleStatus::Decommissioned) {
        throw Error(ErrorCode::TransitionFromDecommissioned,
                    "plate " + plate.id.str() + " is decommissioned and cannot change status");
    }
    plate.status = next;
    return plate;
}

inline Plate set_conditions(Plate plate, const ConditionSet& tags, const Catalog& catalog) {
    if (plate.status == LifecycleStatus::Decommissioned) {
        throw Error(ErrorCode::PlateDecommissioned, "plate " + plate.id.str() + " is decommissioned");
    }
    for (const auto& tag : tags) {
        if (!catalog.has_condition(tag)) {
            throw Error(ErrorCode::UnknownConditionTag, "unknown condition '" + tag + "'");
        }
    }
    plate.conditions = tags;
    return plate;
}

inline Plate change_position(Plate plate, Position position) {
    if (plate.status == LifecycleStatus::Decommissioned) {
        throw Error(ErrorCode::PlateDecommissioned, "plate " + plate.id.str() + " is decommissioned");
    }
    plate.position = position;
    return plate;
}

}  // namespace platekeeper
