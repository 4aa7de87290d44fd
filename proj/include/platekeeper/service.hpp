#pragma once

// OperadorPlaca-style facade: the system operations, policy enforcement,
// cost bookkeeping, and the cost reports. Mutating commands are linearized
// through one exclusive lock; reports share it.

#include <algorithm>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "platekeeper/policy.hpp"
#include "platekeeper/store.hpp"

namespace platekeeper {

namespace outcome_code {
inline constexpr const char* kDuplicatePlate = "DUPLICATE_PLATE";
inline constexpr const char* kAlreadyDecommissioned = "ALREADY_DECOMMISSIONED";
}  // namespace outcome_code

struct CommandOutcome {
    enum class Result { Accepted, Rejected };

    Result result = Result::Accepted;
    std::optional<std::string> deny_code;
    std::optional<std::string> entity_id;
    std::optional<std::uint64_t> new_version;
    std::optional<Money> cumulative_cost;
    std::string message;

    bool accepted() const { return result == Result::Accepted; }

    static CommandOutcome accept(std::string id, std::uint64_t version) {
        CommandOutcome o;
        o.entity_id = std::move(id);
        o.new_version = version;
        return o;
    }
    static CommandOutcome reject(std::string code, std::string message) {
        CommandOutcome o;
        o.result = Result::Rejected;
        o.deny_code = std::move(code);
        o.message = std::move(message);
        return o;
    }
    static CommandOutcome reject(const Error& e) { return reject(std::string(e.code_name()), e.what()); }
};

struct SubmittedTask {
    std::string task_code;
    std::optional<std::int64_t> cost;  // catalog default when absent
};

/// A maintenance as captured at the terminal, before catalog resolution.
struct CaptureSubmission {
    std::string plate_id;
    std::string company_id;
    std::vector<std::string> arrival_conditions;
    std::vector<SubmittedTask> tasks;
    MaintenanceKind kind = MaintenanceKind::Minor;
    CalendarDate date;
    std::string operator_id;
};

/// Builds the proposal record: resolves tasks and conditions against the
/// catalog and owns the TaskEntry list it creates.
inline MaintenanceRecord assemble_maintenance(const CaptureSubmission& sub, const Catalog& catalog, std::string id,
                                              Timestamp timestamp) {
    if (!catalog.has_company(sub.company_id)) {
        throw Error(ErrorCode::UnknownCompany, "unknown company '" + sub.company_id + "'");
    }
    if (sub.tasks.empty()) throw Error(ErrorCode::EmptyTaskList, "a maintenance needs at least one task");
    std::vector<TaskEntry> tasks;
    tasks.reserve(sub.tasks.size());
    for (const auto& t : sub.tasks) {
        auto it = catalog.tasks.find(t.task_code);
        if (it == catalog.tasks.end()) throw Error(ErrorCode::UnknownTask, "unknown task '" + t.task_code + "'");
        tasks.push_back({t.task_code, t.cost ? Money{*t.cost} : it->second.default_cost});
    }
    ConditionSet conditions;
    for (const auto& c : sub.arrival_conditions) {
        if (!catalog.has_condition(c)) throw Error(ErrorCode::UnknownConditionTag, "unknown condition '" + c + "'");
        conditions.insert(c);
    }
    if (sub.operator_id.empty()) throw Error(ErrorCode::MalformedValue, "operator_id must be non-empty");
    Money total = sum_task_costs(tasks);
    return MaintenanceRecord{std::move(id),       PlateId{sub.plate_id}, sub.date,         timestamp,
                             sub.company_id,      sub.operator_id,       std::move(conditions),
                             std::move(tasks),    sub.kind,              total};
}

struct TopCostRow {
    PlateId plate_id;
    Money cumulative_cost;
    std::uint64_t maintenance_count = 0;
    friend bool operator==(const TopCostRow&, const TopCostRow&) = default;
};

struct PeriodComparison {
    Money period_a_total;
    Money period_b_total;
    // Tenths of a percent; empty when period A has no cost (zero baseline).
    std::optional<std::int64_t> reduction_tenths;

    bool zero_baseline() const { return !reduction_tenths.has_value(); }
    double reduction_pct() const { return reduction_tenths ? static_cast<double>(*reduction_tenths) / 10.0 : 0.0; }
};

/// round(100 * (a - b) / a) to one decimal, half away from zero, in tenths.
inline std::optional<std::int64_t> reduction_tenths(Money a, Money b) {
    if (a.amount() == 0) return std::nullopt;
    __int128 num = static_cast<__int128>(1000) * (static_cast<__int128>(a.amount()) - b.amount());
    __int128 den = a.amount();
    __int128 twice = 2 * num + (num >= 0 ? den : -den);
    return static_cast<std::int64_t>(twice / (2 * den));
}

struct PlateSnapshot {
    Plate plate;
    std::vector<MaintenanceRecord> recent;  // newest first
};

class MaintenanceService {
public:
    static constexpr std::size_t kRecentMaintenances = 10;

    MaintenanceService(Store& store, policy::NodePtr policy, std::function<Timestamp()> clock = utc_now)
        : store_(store), policy_(std::move(policy)), clock_(std::move(clock)) {
        if (!policy_) throw Error(ErrorCode::SchemaViolation, "service needs a policy tree");
        reload();
    }

    // -- catalog maintenance (seeding / admin) --------------------------------

    void add_company(const Company& c) {
        std::unique_lock lock(mutex_);
        store_.put(c);
        catalog_.companies[c.id] = c;
    }
    void add_task_type(const TaskType& t) {
        std::unique_lock lock(mutex_);
        store_.put(t);
        catalog_.tasks[t.code] = t;
    }
    void add_condition(const ConditionTag& c) {
        std::unique_lock lock(mutex_);
        store_.put(c);
        catalog_.conditions[c.code] = c;
    }

    Catalog catalog() const {
        std::shared_lock lock(mutex_);
        return catalog_;
    }

    const policy::PolicyNode& active_policy() const { return *policy_; }

    // -- system operations -------------------------------------------------------

    CommandOutcome register_new_plate(const std::string& id, Position position, CalendarDate date,
                                      const OperatorId& /*operator_id*/) {
        std::unique_lock lock(mutex_);
        return guarded([&] {
            Plate plate = new_plate(PlateId{id}, position, date);
            if (store_.contains(kind::kPlate, id)) {
                return CommandOutcome::reject(outcome_code::kDuplicatePlate, "plate '" + id + "' already exists");
            }
            return CommandOutcome::accept(id, store_.put(plate));
        });
    }

    /// Overwrites plate attributes wholesale; used by seeding.
    CommandOutcome restore_plate(const Plate& plate) {
        std::unique_lock lock(mutex_);
        return guarded([&] { return CommandOutcome::accept(plate.id.str(), store_.put(plate)); });
    }

    CommandOutcome change_plate_position(const std::string& id, Position position) {
        std::unique_lock lock(mutex_);
        return guarded([&] {
            Plate plate = change_position(store_.get_as<Plate>(id), position);
            return CommandOutcome::accept(id, store_.put(plate));
        });
    }

    CommandOutcome decommission_plate(const std::string& id) {
        std::unique_lock lock(mutex_);
        return guarded([&] {
            Plate plate = store_.get_as<Plate>(id);
            if (plate.status == LifecycleStatus::Decommissioned) {
                return CommandOutcome::reject(outcome_code::kAlreadyDecommissioned,
                                              "plate '" + id + "' is already decommissioned");
            }
            return CommandOutcome::accept(id, store_.put(transition_status(plate, LifecycleStatus::Decommissioned)));
        });
    }

    CommandOutcome create_maintenance(const CaptureSubmission& submission) {
        std::unique_lock lock(mutex_);
        return guarded([&] {
            if (!PlateId::well_formed(submission.plate_id)) {
                throw Error(ErrorCode::MalformedId, "malformed plate id '" + submission.plate_id + "'");
            }
            Plate plate = store_.get_as<Plate>(submission.plate_id);
            if (plate.status == LifecycleStatus::Decommissioned) {
                throw Error(ErrorCode::PlateDecommissioned, "plate '" + plate.id.str() + "' is decommissioned");
            }
            // Keep the submitted calendar date; take the time of day from the clock.
            Timestamp now = clock_();
            Timestamp ts = submission.date.midnight() + (now - std::chrono::floor<std::chrono::days>(now));
            MaintenanceRecord proposal = assemble_maintenance(submission, catalog_, peek_maintenance_id(), ts);

            auto history = history_locked(plate.id.str());
            auto verdict = policy_->evaluate({plate, proposal, history});
            if (!verdict.allowed()) {
                return CommandOutcome::reject(*verdict.deny_code, verdict.message.value_or(""));
            }

            Plate updated = set_conditions(plate, proposal.arrival_conditions, catalog_);
            updated.cumulative_cost += proposal.total_cost;
            updated = transition_status(updated, LifecycleStatus::InStock);

            auto version = store_.put(proposal);
            ++next_maintenance_number_;
            plate_records_[plate.id.str()].insert(proposal.id);
            store_.put(updated);

            auto out = CommandOutcome::accept(proposal.id, version);
            out.cumulative_cost = updated.cumulative_cost;
            return out;
        });
    }

    CommandOutcome delete_maintenance(const std::string& maintenance_id) {
        std::unique_lock lock(mutex_);
        return guarded([&] {
            auto record = store_.get_as<MaintenanceRecord>(maintenance_id);
            Plate plate = store_.get_as<Plate>(record.plate_id.str());
            plate.cumulative_cost = plate.cumulative_cost - record.total_cost;
            store_.remove(kind::kMaintenance, maintenance_id);
            plate_records_[plate.id.str()].erase(maintenance_id);
            auto version = store_.put(plate);
            auto out = CommandOutcome::accept(maintenance_id, version);
            out.cumulative_cost = plate.cumulative_cost;
            return out;
        });
    }

    // -- queries ------------------------------------------------------------------

    std::optional<PlateSnapshot> plate_snapshot(const std::string& id) const {
        std::shared_lock lock(mutex_);
        if (!PlateId::well_formed(id) || !store_.contains(kind::kPlate, id)) return std::nullopt;
        PlateSnapshot snap{store_.get_as<Plate>(id), history_locked(id)};
        std::reverse(snap.recent.begin(), snap.recent.end());
        if (snap.recent.size() > kRecentMaintenances) snap.recent.erase(snap.recent.begin() + kRecentMaintenances, snap.recent.end());
        return snap;
    }

    /// Live records for one plate, oldest first.
    std::vector<MaintenanceRecord> history(const std::string& plate_id) const {
        std::shared_lock lock(mutex_);
        return history_locked(plate_id);
    }

    std::vector<TopCostRow> report_top_cost(std::size_t limit) const {
        std::shared_lock lock(mutex_);
        std::map<std::string, std::pair<Money, std::uint64_t>> totals;
        for (const auto& [plate_id, ids] : plate_records_) {
            for (const auto& mid : ids) {
                auto rec = store_.get_as<MaintenanceRecord>(mid);
                auto& [sum, count] = totals[plate_id];
                sum += rec.total_cost;
                ++count;
            }
        }
        std::vector<TopCostRow> rows;
        rows.reserve(totals.size());
        for (const auto& [id, t] : totals) rows.push_back({PlateId{id}, t.first, t.second});
        std::sort(rows.begin(), rows.end(), [](const TopCostRow& a, const TopCostRow& b) {
            if (a.cumulative_cost != b.cumulative_cost) return a.cumulative_cost > b.cumulative_cost;
            return a.plate_id < b.plate_id;
        });
        if (rows.size() > limit) rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(limit), rows.end());
        return rows;
    }

    PeriodComparison report_period_comparison(CalendarDate a_start, CalendarDate a_end, CalendarDate b_start,
                                              CalendarDate b_end) const {
        if (a_end < a_start || b_end < b_start) {
            throw Error(ErrorCode::InvalidRange, "period start must not be after its end");
        }
        std::shared_lock lock(mutex_);
        Money a, b;
        for (const auto& [plate_id, ids] : plate_records_) {
            for (const auto& mid : ids) {
                auto rec = store_.get_as<MaintenanceRecord>(mid);
                if (rec.date >= a_start && rec.date <= a_end) a += rec.total_cost;
                if (rec.date >= b_start && rec.date <= b_end) b += rec.total_cost;
            }
        }
        return {a, b, reduction_tenths(a, b)};
    }

    std::vector<PlateId> recommend_replacement(Money critical_point) const {
        std::shared_lock lock(mutex_);
        std::vector<Plate> candidates;
        for (const auto& id : store_.live_ids(kind::kPlate)) {
            auto p = store_.get_as<Plate>(id);
            if (p.status != LifecycleStatus::Decommissioned && p.cumulative_cost >= critical_point) {
                candidates.push_back(std::move(p));
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Plate& a, const Plate& b) {
            if (a.cumulative_cost != b.cumulative_cost) return a.cumulative_cost > b.cumulative_cost;
            return a.id < b.id;
        });
        std::vector<PlateId> out;
        out.reserve(candidates.size());
        for (auto& p : candidates) out.push_back(std::move(p.id));
        return out;
    }

    std::vector<std::string> plate_ids() const {
        std::shared_lock lock(mutex_);
        return store_.live_ids(kind::kPlate);
    }

private:
    template <class F>
    CommandOutcome guarded(F&& body) {
        try {
            return body();
        } catch (const Error& e) {
            if (e.code() == ErrorCode::StorageFailure) throw;
            return CommandOutcome::reject(e);
        }
    }

    void reload() {
        catalog_ = {};
        for (auto& c : store_.load_all<Company>()) catalog_.companies.emplace(c.id, c);
        for (auto& t : store_.load_all<TaskType>()) catalog_.tasks.emplace(t.code, t);
        for (auto& c : store_.load_all<ConditionTag>()) catalog_.conditions.emplace(c.code, c);
        plate_records_.clear();
        for (const auto& rec : store_.load_all<MaintenanceRecord>()) plate_records_[rec.plate_id.str()].insert(rec.id);
        next_maintenance_number_ = 1;
        for (const auto& id : store_.all_ids(kind::kMaintenance)) {
            unsigned long long n = 0;
            if (std::sscanf(id.c_str(), "M-%llu", &n) == 1 && n >= next_maintenance_number_) {
                next_maintenance_number_ = n + 1;
            }
        }
    }

    std::string peek_maintenance_id() const {
        char buf[32];
        std::snprintf(buf, sizeof buf, "M-%08llu", static_cast<unsigned long long>(next_maintenance_number_));
        return buf;
    }

    std::vector<MaintenanceRecord> history_locked(const std::string& plate_id) const {
        std::vector<MaintenanceRecord> out;
        auto it = plate_records_.find(plate_id);
        if (it == plate_records_.end()) return out;
        for (const auto& mid : it->second) out.push_back(store_.get_as<MaintenanceRecord>(mid));
        std::sort(out.begin(), out.end(), [](const MaintenanceRecord& a, const MaintenanceRecord& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.id < b.id;
        });
        return out;
    }

    Store& store_;
    policy::NodePtr policy_;
    std::function<Timestamp()> clock_;

    mutable std::shared_mutex mutex_;
    Catalog catalog_;
    std::map<std::string, std::set<std::string>> plate_records_;
    std::uint64_t next_maintenance_number_ = 1;
};

// ---------------------------------------------------------------------------
// Report bodies. The HTTP API and `platekeeper report --json` both emit these.

namespace report_json {

inline json top_cost(const std::vector<TopCostRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"plate_id", r.plate_id.str()},
                       {"cumulative_cost", r.cumulative_cost.amount()},
                       {"maintenance_count", r.maintenance_count}});
    }
    return json{{"rows", std::move(arr)}};
}

inline json period_comparison(const PeriodComparison& p) {
    json out{{"period_a_total", p.period_a_total.amount()},
             {"period_b_total", p.period_b_total.amount()},
             {"zero_baseline", p.zero_baseline()}};
    out["reduction_pct"] = p.zero_baseline() ? json(nullptr) : json(p.reduction_pct());
    return out;
}

inline json replacement(const std::vector<PlateId>& ids) {
    json arr = json::array();
    for (const auto& id : ids) arr.push_back(id.str());
    return json{{"plate_ids", std::move(arr)}};
}

}  // namespace report_json

}  // namespace platekeeper
