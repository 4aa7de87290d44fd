#pragma once

// Data-mapper persistence over the append-only journal.
//
// Store::get is the fixed algorithm shared by every entity kind: identity
// cache lookup, index fetch on a miss, the kind's materialize hook, cache
// fill. Mappers only supply the hooks.

#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include <unistd.h>

#include "platekeeper/codec.hpp"
#include "platekeeper/journal.hpp"

namespace platekeeper {

using Entity = std::variant<Plate, MaintenanceRecord, Company, TaskType, ConditionTag>;

namespace kind {
inline constexpr const char* kPlate = "plate";
inline constexpr const char* kMaintenance = "maintenance";
inline constexpr const char* kCompany = "company";
inline constexpr const char* kTask = "task";
inline constexpr const char* kCondition = "condition";
}  // namespace kind

template <class T> struct EntityTraits;
template <> struct EntityTraits<Plate> {
    static constexpr const char* kind = kind::kPlate;
    static std::string id_of(const Plate& p) { return p.id.str(); }
    static Plate from_json(const json& j) { return plate_from_json(j); }
};
template <> struct EntityTraits<MaintenanceRecord> {
    static constexpr const char* kind = kind::kMaintenance;
    static std::string id_of(const MaintenanceRecord& m) { return m.id; }
    static MaintenanceRecord from_json(const json& j) { return maintenance_from_json(j); }
};
template <> struct EntityTraits<Company> {
    static constexpr const char* kind = kind::kCompany;
    static std::string id_of(const Company& c) { return c.id; }
    static Company from_json(const json& j) { return company_from_json(j); }
};
template <> struct EntityTraits<TaskType> {
    static constexpr const char* kind = kind::kTask;
    static std::string id_of(const TaskType& t) { return t.code; }
    static TaskType from_json(const json& j) { return task_type_from_json(j); }
};
template <> struct EntityTraits<ConditionTag> {
    static constexpr const char* kind = kind::kCondition;
    static std::string id_of(const ConditionTag& c) { return c.code; }
    static ConditionTag from_json(const json& j) { return condition_from_json(j); }
};

/// Per-kind hook set.
class Mapper {
public:
    virtual ~Mapper() = default;

    virtual std::string kind_tag() const = 0;
    virtual Entity materialize(const json& payload) const = 0;
    virtual json serialize(const Entity& entity) const = 0;
    virtual std::string id_of(const Entity& entity) const = 0;
};

template <class T>
class TypedMapper final : public Mapper {
public:
    std::string kind_tag() const override { return EntityTraits<T>::kind; }

    Entity materialize(const json& payload) const override { return EntityTraits<T>::from_json(payload); }

    json serialize(const Entity& entity) const override { return to_json(checked(entity)); }

    std::string id_of(const Entity& entity) const override { return EntityTraits<T>::id_of(checked(entity)); }

private:
    const T& checked(const Entity& entity) const {
        const T* typed = std::get_if<T>(&entity);
        if (!typed) throw Error(ErrorCode::SchemaViolation, "entity does not belong to kind '" + kind_tag() + "'");
        return *typed;
    }
};

inline std::map<std::string, std::shared_ptr<const Mapper>> default_mappers() {
    std::map<std::string, std::shared_ptr<const Mapper>> m;
    auto add = [&](std::shared_ptr<const Mapper> mapper) { m.emplace(mapper->kind_tag(), std::move(mapper)); };
    add(std::make_shared<TypedMapper<Plate>>());
    add(std::make_shared<TypedMapper<MaintenanceRecord>>());
    add(std::make_shared<TypedMapper<Company>>());
    add(std::make_shared<TypedMapper<TaskType>>());
    add(std::make_shared<TypedMapper<ConditionTag>>());
    return m;
}

/// Where journal lines go. The store treats any false return as fatal.
class JournalSink {
public:
    virtual ~JournalSink() = default;
    virtual bool append(std::string_view line) = 0;
};

class FileSink final : public JournalSink {
public:
    FileSink(const std::filesystem::path& path, bool sync) : sync_(sync) {
        file_ = std::fopen(path.c_str(), "ab");
        if (!file_) {
            throw Error(ErrorCode::StorageFailure,
                        "cannot open journal " + path.string() + ": " + std::strerror(errno));
        }
    }
    ~FileSink() override {
        if (file_) std::fclose(file_);
    }
    FileSink(const FileSink&) = delete;
    FileSink& operator=(const FileSink&) = delete;

    bool append(std::string_view line) override {
        if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) return false;
        if (std::fputc('\n', file_) == EOF) return false;
        if (std::fflush(file_) != 0) return false;
        return !sync_ || ::fsync(fileno(file_)) == 0;
    }

private:
    std::FILE* file_ = nullptr;
    bool sync_;
};

struct StoreOptions {
    std::function<Timestamp()> clock = utc_now;
    bool fsync = false;  // fflush always happens; fsync additionally on request
    // Overrides the journal file sink; used for fault injection.
    std::function<std::unique_ptr<JournalSink>(const std::filesystem::path&)> sink_factory;
};

class Store {
public:
    static constexpr const char* kJournalFile = "journal.jsonl";

    explicit Store(std::filesystem::path dir, StoreOptions options = {})
        : dir_(std::move(dir)), options_(std::move(options)), mappers_(default_mappers()) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorCode::StorageFailure, "cannot create store directory " + dir_.string());
        index_ = journal::replay(journal::read_file(journal_path().string()));
        next_seq_ = index_.last_seq() + 1;
        sink_ = options_.sink_factory ? options_.sink_factory(journal_path())
                                      : std::make_unique<FileSink>(journal_path(), options_.fsync);
    }

    std::filesystem::path journal_path() const { return dir_ / kJournalFile; }
    const std::filesystem::path& dir() const { return dir_; }

    Entity get(const std::string& kind, const std::string& id) const {
        const Mapper& mapper = mapper_for(kind);
        std::shared_lock index_lock(index_mutex_);
        journal::RecordKey key{kind, id};
        {
            std::lock_guard cache_lock(cache_mutex_);
            if (auto hit = cache_.find(key); hit != cache_.end()) return hit->second.entity;
        }
        index_reads_.fetch_add(1, std::memory_order_relaxed);
        const auto* entry = index_.find(key);
        if (!entry || !entry->live()) throw Error(ErrorCode::NotFound, kind + " '" + id + "' not found");
        Entity entity = mapper.materialize(*entry->payload);
        std::lock_guard cache_lock(cache_mutex_);
        cache_.insert_or_assign(key, CacheEntry{entity, entry->version});
        return entity;
    }

    template <class T>
    T get_as(const std::string& id) const {
        return std::get<T>(get(EntityTraits<T>::kind, id));
    }

    std::uint64_t put(const std::string& kind, const Entity& entity) {
        const Mapper& mapper = mapper_for(kind);
        json payload = mapper.serialize(entity);
        std::string id = mapper.id_of(entity);
        std::unique_lock lock(index_mutex_);
        journal::RecordKey key{kind, id};
        const auto* prev = index_.find(key);
        std::uint64_t version = prev ? prev->version + 1 : 1;
        journal::JournalEvent ev{next_seq_, options_.clock(), journal::Op::Put, key, version, std::move(payload)};
        append_locked(ev);
        std::lock_guard cache_lock(cache_mutex_);
        cache_.insert_or_assign(key, CacheEntry{entity, version});
        return version;
    }

    template <class T>
    std::uint64_t put(const T& entity) {
        return put(EntityTraits<T>::kind, Entity{entity});
    }

    void remove(const std::string& kind, const std::string& id) {
        mapper_for(kind);
        std::unique_lock lock(index_mutex_);
        journal::RecordKey key{kind, id};
        const auto* prev = index_.find(key);
        if (!prev || !prev->live()) throw Error(ErrorCode::NotFound, kind + " '" + id + "' not found");
        journal::JournalEvent ev{next_seq_, options_.clock(), journal::Op::Delete, key, prev->version + 1, nullptr};
        append_locked(ev);
        std::lock_guard cache_lock(cache_mutex_);
        cache_.erase(key);
    }

    bool contains(const std::string& kind, const std::string& id) const {
        std::shared_lock lock(index_mutex_);
        const auto* e = index_.find({kind, id});
        return e && e->live();
    }

    /// Highest journaled version, including tombstones.
    std::optional<std::uint64_t> version(const std::string& kind, const std::string& id) const {
        std::shared_lock lock(index_mutex_);
        const auto* e = index_.find({kind, id});
        if (!e) return std::nullopt;
        return e->version;
    }

    std::optional<std::uint64_t> cached_version(const std::string& kind, const std::string& id) const {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find({kind, id});
        if (it == cache_.end()) return std::nullopt;
        return it->second.version;
    }

    /// Live ids of one kind, ascending.
    std::vector<std::string> live_ids(const std::string& kind) const {
        std::shared_lock lock(index_mutex_);
        std::vector<std::string> ids;
        const auto& entries = index_.entries();
        for (auto it = entries.lower_bound({kind, ""}); it != entries.end() && it->first.kind == kind; ++it) {
            if (it->second.live()) ids.push_back(it->first.id);
        }
        return ids;
    }

    /// Every id of one kind ever written, tombstones included.
    std::vector<std::string> all_ids(const std::string& kind) const {
        std::shared_lock lock(index_mutex_);
        std::vector<std::string> ids;
        const auto& entries = index_.entries();
        for (auto it = entries.lower_bound({kind, ""}); it != entries.end() && it->first.kind == kind; ++it) {
            ids.push_back(it->first.id);
        }
        return ids;
    }

    template <class T>
    std::vector<T> load_all() const {
        std::vector<T> out;
        for (const auto& id : live_ids(EntityTraits<T>::kind)) out.push_back(get_as<T>(id));
        return out;
    }

    bool empty() const {
        std::shared_lock lock(index_mutex_);
        return index_.entries().empty();
    }

    bool read_only() const { return read_only_.load(); }
    std::size_t index_reads() const { return index_reads_.load(); }
    const StoreOptions& options() const { return options_; }

    bool has_mapper(const std::string& kind) const { return mappers_.count(kind) != 0; }

private:
    struct CacheEntry {
        Entity entity;
        std::uint64_t version;
    };

    const Mapper& mapper_for(const std::string& kind) const {
        auto it = mappers_.find(kind);
        if (it == mappers_.end()) throw Error(ErrorCode::UnknownKind, "no mapper registered for kind '" + kind + "'");
        return *it->second;
    }

    // Caller holds index_mutex_ exclusively.
    void append_locked(const journal::JournalEvent& ev) {
        if (read_only_) throw Error(ErrorCode::StorageFailure, "store is read-only after an earlier write failure");
        if (!sink_->append(journal::format_line(ev))) {
            read_only_ = true;
            throw Error(ErrorCode::StorageFailure, "journal append failed; store is now read-only");
        }
        index_.apply(ev, 0);
        ++next_seq_;
    }

    std::filesystem::path dir_;
    StoreOptions options_;
    std::map<std::string, std::shared_ptr<const Mapper>> mappers_;

    mutable std::shared_mutex index_mutex_;
    journal::ReplayIndex index_;
    std::uint64_t next_seq_ = 1;
    std::unique_ptr<JournalSink> sink_;
    std::atomic<bool> read_only_{false};

    mutable std::mutex cache_mutex_;
    mutable std::map<journal::RecordKey, CacheEntry> cache_;
    mutable std::atomic<std::size_t> index_reads_{0};
};

/// Rewrites the store's journal in compacted form. The store must not be open.
inline std::size_t compact_store(const std::filesystem::path& dir) {
    auto path = dir / Store::kJournalFile;
    auto events = journal::compact(journal::read_file(path.string()));
    auto tmp = path;
    tmp += ".compact";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << journal::serialize(events);
        out.flush();
        if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    return events.size();
}

}  // namespace platekeeper
