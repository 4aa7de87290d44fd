#pragma once

// Deterministic store seeding and day simulation.

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "platekeeper/api.hpp"
#include "platekeeper/rng.hpp"

namespace platekeeper::workload {

// The plant's plate population.
inline constexpr std::uint64_t kDefaultPlateCount = 16000;
// Daily maintenance volume band.
inline constexpr std::uint64_t kMinDailyMaintenances = 200;
inline constexpr std::uint64_t kMaxDailyMaintenances = 250;
// Critical point used when no policy file is given. Not a plant figure.
inline constexpr std::int64_t kFallbackCriticalPoint = 1'000'000;

struct SeedSpec {
    std::uint64_t plate_count = kDefaultPlateCount;
    std::uint64_t companies = 3;
    std::uint64_t rng_seed = 0;
    CalendarDate date{2024, 1, 1};
};

struct SeedSummary {
    std::uint64_t plates = 0;
    std::uint64_t companies = 0;
    std::uint64_t tasks = 0;
    std::uint64_t conditions = 0;

    std::string to_text() const {
        std::ostringstream out;
        out << "plates: " << plates << "\ncompanies: " << companies << "\ntasks: " << tasks
            << "\nconditions: " << conditions << "\n";
        return out.str();
    }
};

inline std::vector<TaskType> seed_tasks() {
    return {
        {"pulido", "Pulido", Money{1200}},
        {"limpieza", "Limpieza", Money{800}},
        {"enderezado", "Enderezado", Money{2500}},
        {"reparacion_bordes", "Reparación de bordes", Money{3500}},
        {"cambio_barra", "Cambio de barra", Money{9000}},
    };
}

inline std::vector<ConditionTag> seed_conditions() {
    return {
        {"pandeada", "Pandeada"},
        {"corrosion", "Corrosión"},
        {"bordes_danados", "Bordes dañados"},
        {"rayada", "Superficie rayada"},
    };
}

inline std::string plate_id_for(std::uint64_t index, std::uint64_t total) {
    int width = std::max<int>(5, static_cast<int>(std::to_string(total).size()));
    char buf[40];
    std::snprintf(buf, sizeof buf, "P-%0*llu", width, static_cast<unsigned long long>(index));
    return buf;
}

inline bool store_has_data(const std::filesystem::path& dir) {
    auto path = dir / Store::kJournalFile;
    std::error_code ec;
    return std::filesystem::exists(path, ec) && std::filesystem::file_size(path, ec) > 0;
}

/// Populates an empty store. Journal timestamps are pinned to spec.date so
/// identical specs give identical journals.
inline SeedSummary seed_store(const std::filesystem::path& dir, const SeedSpec& spec) {
    if (store_has_data(dir)) {
        throw Error(ErrorCode::StoreNotEmpty, "refusing to seed non-empty store " + dir.string());
    }
    if (spec.plate_count == 0) throw Error(ErrorCode::MalformedValue, "plate count must be positive");
    const Timestamp fixed = spec.date.midnight();
    StoreOptions options;
    options.clock = [fixed] { return fixed; };
    Store store(dir, options);
    MaintenanceService service(store, policy::default_policy(Money{kFallbackCriticalPoint}), options.clock);

    SeedSummary summary;
    for (const auto& c : seed_conditions()) {
        service.add_condition(c);
        ++summary.conditions;
    }
    for (const auto& t : seed_tasks()) {
        service.add_task_type(t);
        ++summary.tasks;
    }
    for (std::uint64_t i = 1; i <= spec.companies; ++i) {
        char id[16], name[32];
        std::snprintf(id, sizeof id, "EMP-%02llu", static_cast<unsigned long long>(i));
        std::snprintf(name, sizeof name, "Contratista %02llu", static_cast<unsigned long long>(i));
        service.add_company({id, name});
        ++summary.companies;
    }

    SplitMix64 rng(spec.rng_seed);
    const auto catalog = service.catalog();
    constexpr std::int64_t kSlotsPerCell = 50;
    constexpr std::int64_t kCellsPerBank = 20;
    for (std::uint64_t i = 0; i < spec.plate_count; ++i) {
        auto n = static_cast<std::int64_t>(i);
        auto pos = Position::make(1 + n / (kSlotsPerCell * kCellsPerBank), 1 + (n / kSlotsPerCell) % kCellsPerBank,
                                  1 + n % kSlotsPerCell);
        Plate plate = new_plate(PlateId{plate_id_for(i + 1, spec.plate_count)}, pos, spec.date);
        // about 9 in 10 plates start in the cells, the rest in stock
        if (rng.uniform(10) != 0) plate = transition_status(plate, LifecycleStatus::InProduction);
        ConditionSet tags;
        if (rng.uniform(100) < 8) tags.insert("pandeada");
        if (rng.uniform(100) < 5) tags.insert("corrosion");
        plate = set_conditions(plate, tags, catalog);
        auto out = service.restore_plate(plate);
        if (!out.accepted()) throw Error(ErrorCode::StorageFailure, out.message);
        ++summary.plates;
    }
    return summary;
}

struct SimulationSpec {
    std::uint64_t count = 225;
    bool sample = false;  // draw count from the daily band instead
    CalendarDate date{2024, 1, 2};
    std::uint64_t rng_seed = 0;
    std::optional<std::string> plate;  // target one plate for every submission
};

struct SimulationSummary {
    CalendarDate date;
    std::uint64_t submitted = 0;
    std::uint64_t accepted = 0;
    std::map<std::string, std::uint64_t> rejected_by_code;

    std::uint64_t rejected() const {
        std::uint64_t n = 0;
        for (const auto& [_, c] : rejected_by_code) n += c;
        return n;
    }

    std::string to_text() const {
        std::ostringstream out;
        out << "date: " << date.to_string() << "\nsubmitted: " << submitted << "\naccepted: " << accepted
            << "\nrejected: " << rejected() << "\n";
        for (const auto& [code, n] : rejected_by_code) out << "rejected " << code << ": " << n << "\n";
        return out.str();
    }

    friend bool operator==(const SimulationSummary& a, const SimulationSummary& b) {
        return a.date == b.date && a.submitted == b.submitted && a.accepted == b.accepted &&
               a.rejected_by_code == b.rejected_by_code;
    }
};

/// Clock that starts at 08:00 UTC on `date` and ticks one second per call.
inline std::function<Timestamp()> shift_clock(CalendarDate date) {
    auto next = std::make_shared<Timestamp>(date.midnight() + std::chrono::hours{8});
    return [next] {
        auto now = *next;
        *next += std::chrono::seconds{1};
        return now;
    };
}

/// Drives capture submissions through the same handler the HTTP route uses.
inline SimulationSummary simulate_day(api::Api& api, const MaintenanceService& service, const SimulationSpec& spec) {
    SplitMix64 rng(spec.rng_seed);
    const std::uint64_t count =
        spec.sample ? rng.between(kMinDailyMaintenances, kMaxDailyMaintenances) : spec.count;

    const auto plates = service.plate_ids();
    const auto catalog = service.catalog();
    if (plates.empty() || catalog.tasks.empty() || catalog.companies.empty()) {
        throw Error(ErrorCode::NotFound, "store is not seeded");
    }
    std::vector<std::string> task_codes, companies, conditions;
    for (const auto& [code, _] : catalog.tasks) task_codes.push_back(code);
    for (const auto& [id, _] : catalog.companies) companies.push_back(id);
    for (const auto& [code, _] : catalog.conditions) conditions.push_back(code);

    SimulationSummary summary;
    summary.date = spec.date;
    for (std::uint64_t i = 0; i < count; ++i) {
        CaptureSubmission sub;
        sub.plate_id = spec.plate ? *spec.plate : plates[rng.uniform(plates.size())];
        sub.company_id = companies[rng.uniform(companies.size())];
        // 1-3 distinct tasks, partial Fisher-Yates over the catalog
        auto picks = task_codes;
        auto k = std::min<std::uint64_t>(1 + rng.uniform(3), picks.size());
        for (std::uint64_t t = 0; t < k; ++t) {
            std::swap(picks[t], picks[t + rng.uniform(picks.size() - t)]);
            sub.tasks.push_back({picks[t], std::nullopt});
        }
        if (!conditions.empty() && rng.uniform(10) == 0) {
            sub.arrival_conditions.push_back(conditions[rng.uniform(conditions.size())]);
        }
        sub.kind = rng.uniform(4) == 0 ? MaintenanceKind::Major : MaintenanceKind::Minor;
        sub.date = spec.date;
        sub.operator_id = "OP-SIM";

        auto res = api.capture_submission(api::submission_to_json(sub).dump());
        ++summary.submitted;
        if (res.status == 201) {
            ++summary.accepted;
        } else {
            auto body = json::parse(res.body, nullptr, false);
            auto code = body.is_object() && body.contains("code") ? body["code"].get<std::string>() : "UNKNOWN";
            ++summary.rejected_by_code[code];
        }
    }
    return summary;
}

}  // namespace platekeeper::workload
