#pragma once

// Append-only JSON-lines journal: event encoding, replay, and compaction.
//
// Line layout (fields in this exact order, payload absent for deletes):
//   {"seq":1,"ts":"2024-01-01T00:00:00Z","op":"put","kind":"plate","id":"P-1","version":1,"payload":{...}}

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "platekeeper/error.hpp"
#include "platekeeper/time.hpp"

namespace platekeeper::journal {

using json = nlohmann::json;

enum class Op { Put, Delete };

struct RecordKey {
    std::string kind;
    std::string id;
    friend bool operator==(const RecordKey&, const RecordKey&) = default;
    friend auto operator<=>(const RecordKey&, const RecordKey&) = default;
};

struct JournalEvent {
    std::uint64_t seq = 0;
    Timestamp ts;
    Op op = Op::Put;
    RecordKey key;
    std::uint64_t version = 0;
    json payload;  // null for deletes

    friend bool operator==(const JournalEvent&, const JournalEvent&) = default;
};

inline std::string format_line(const JournalEvent& ev) {
    std::string line;
    line.reserve(128);
    line += "{\"seq\":" + std::to_string(ev.seq);
    line += ",\"ts\":\"" + format_timestamp(ev.ts) + "\"";
    line += ev.op == Op::Put ? ",\"op\":\"put\"" : ",\"op\":\"delete\"";
    line += ",\"kind\":" + json(ev.key.kind).dump();
    line += ",\"id\":" + json(ev.key.id).dump();
    line += ",\"version\":" + std::to_string(ev.version);
    if (ev.op == Op::Put) line += ",\"payload\":" + ev.payload.dump();
    line += "}";
    return line;
}

inline JournalEvent parse_line(std::string_view line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error&) {
        throw CorruptJournalError(line_no, "not a JSON object");
    }
    if (!j.is_object()) throw CorruptJournalError(line_no, "not a JSON object");

    auto uint_field = [&](const char* name) -> std::uint64_t {
        auto it = j.find(name);
        if (it == j.end() || !it->is_number_integer() || it->get<std::int64_t>() < 1) {
            throw CorruptJournalError(line_no, std::string("field '") + name + "' must be a positive integer");
        }
        return it->get<std::uint64_t>();
    };
    auto string_field = [&](const char* name) -> std::string {
        auto it = j.find(name);
        if (it == j.end() || !it->is_string()) {
            throw CorruptJournalError(line_no, std::string("field '") + name + "' must be a string");
        }
        return it->get<std::string>();
    };

    JournalEvent ev;
    ev.seq = uint_field("seq");
    try {
        ev.ts = parse_timestamp(string_field("ts"));
    } catch (const CorruptJournalError&) {
        throw;
    } catch (const Error&) {
        throw CorruptJournalError(line_no, "bad timestamp");
    }
    auto op = string_field("op");
    if (op == "put") {
        ev.op = Op::Put;
    } else if (op == "delete") {
        ev.op = Op::Delete;
    } else {
        throw CorruptJournalError(line_no, "unknown op '" + op + "'");
    }
    ev.key = {string_field("kind"), string_field("id")};
    ev.version = uint_field("version");
    auto payload = j.find("payload");
    if (ev.op == Op::Put) {
        if (payload == j.end() || !payload->is_object()) {
            throw CorruptJournalError(line_no, "put event needs an object payload");
        }
        ev.payload = std::move(*payload);
    } else if (payload != j.end()) {
        throw CorruptJournalError(line_no, "delete event carries a payload");
    }
    return ev;
}

// Latest state of one (kind, id). A tombstone keeps its version so a later
// re-creation continues the sequence.
struct IndexEntry {
    std::uint64_t version = 0;
    Timestamp ts;
    std::optional<json> payload;

    bool live() const { return payload.has_value(); }
    friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct LiveRecord {
    std::uint64_t version = 0;
    json payload;
    friend bool operator==(const LiveRecord&, const LiveRecord&) = default;
};

using LiveView = std::map<RecordKey, LiveRecord>;

class ReplayIndex {
public:
    /// Applies one event; throws CorruptJournalError if it breaks ordering.
    void apply(const JournalEvent& ev, std::size_t line_no) {
        if (ev.seq <= last_seq_) throw CorruptJournalError(line_no, "non-monotonic seq " + std::to_string(ev.seq));
        auto it = entries_.find(ev.key);
        if (it != entries_.end() && ev.version <= it->second.version) {
            throw CorruptJournalError(line_no, "version " + std::to_string(ev.version) + " does not advance");
        }
        if (ev.op == Op::Delete && (it == entries_.end() || !it->second.live())) {
            throw CorruptJournalError(line_no, "delete of a record that is not live");
        }
        last_seq_ = ev.seq;
        IndexEntry entry{ev.version, ev.ts, std::nullopt};
        if (ev.op == Op::Put) entry.payload = ev.payload;
        entries_[ev.key] = std::move(entry);
    }

    const IndexEntry* find(const RecordKey& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::uint64_t last_seq() const { return last_seq_; }
    const std::map<RecordKey, IndexEntry>& entries() const { return entries_; }

    LiveView live_view() const {
        LiveView out;
        for (const auto& [key, e] : entries_) {
            if (e.live()) out.emplace(key, LiveRecord{e.version, *e.payload});
        }
        return out;
    }

private:
    std::map<RecordKey, IndexEntry> entries_;
    std::uint64_t last_seq_ = 0;
};

/// Splits journal bytes into lines. A trailing newline is optional on the last line.
inline std::vector<std::string_view> split_lines(std::string_view bytes) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < bytes.size()) {
        auto nl = bytes.find('\n', start);
        if (nl == std::string_view::npos) nl = bytes.size();
        lines.push_back(bytes.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

inline std::vector<JournalEvent> parse_events(std::string_view bytes) {
    std::vector<JournalEvent> events;
    std::size_t line_no = 0;
    for (auto line : split_lines(bytes)) {
        ++line_no;
        events.push_back(parse_line(line, line_no));
    }
    return events;
}

inline ReplayIndex replay(std::string_view bytes) {
    ReplayIndex index;
    std::size_t line_no = 0;
    for (auto line : split_lines(bytes)) {
        ++line_no;
        index.apply(parse_line(line, line_no), line_no);
    }
    return index;
}

/// One put per live record, latest payload and version kept, seq renumbered from 1.
inline std::vector<JournalEvent> compact(std::string_view bytes) {
    auto index = replay(bytes);
    std::vector<JournalEvent> out;
    std::uint64_t seq = 0;
    for (const auto& [key, e] : index.entries()) {
        if (!e.live()) continue;
        out.push_back(JournalEvent{++seq, e.ts, Op::Put, key, e.version, *e.payload});
    }
    return out;
}

inline std::string serialize(const std::vector<JournalEvent>& events) {
    std::string out;
    for (const auto& ev : events) {
        out += format_line(ev);
        out += '\n';
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace platekeeper::journal
