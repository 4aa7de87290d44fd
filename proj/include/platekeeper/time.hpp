#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "platekeeper/error.hpp"

namespace platekeeper {

using Timestamp = std::chrono::sys_seconds;

/// Proleptic-Gregorian calendar date, formatted as YYYY-MM-DD.
class CalendarDate {
public:
    CalendarDate() = default;

    CalendarDate(int year, unsigned month, unsigned day)
        : ymd_{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}} {
        if (!ymd_.ok() || year < 1 || year > 9999) {
            throw Error(ErrorCode::MalformedValue, "invalid calendar date");
        }
    }

    static CalendarDate parse(std::string_view text) {
        // strict YYYY-MM-DD
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
            throw Error(ErrorCode::MalformedValue, "date must be YYYY-MM-DD: '" + std::string(text) + "'");
        }
        auto digits = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i) {
                if (text[i] < '0' || text[i] > '9') {
                    throw Error(ErrorCode::MalformedValue, "date must be YYYY-MM-DD: '" + std::string(text) + "'");
                }
                v = v * 10 + (text[i] - '0');
            }
            return v;
        };
        return CalendarDate(digits(0, 4), static_cast<unsigned>(digits(5, 2)),
                            static_cast<unsigned>(digits(8, 2)));
    }

    static CalendarDate of(Timestamp ts) {
        CalendarDate d;
        d.ymd_ = std::chrono::year_month_day{std::chrono::floor<std::chrono::days>(ts)};
        return d;
    }

    int year() const { return static_cast<int>(ymd_.year()); }
    unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
    unsigned day() const { return static_cast<unsigned>(ymd_.day()); }

    Timestamp midnight() const { return Timestamp{std::chrono::sys_days{ymd_}}; }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
        return buf;
    }

    friend bool operator==(const CalendarDate&, const CalendarDate&) = default;
    friend auto operator<=>(const CalendarDate& a, const CalendarDate& b) {
        return std::chrono::sys_days{a.ymd_} <=> std::chrono::sys_days{b.ymd_};
    }

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::January, std::chrono::day{1}};
};

/// RFC 3339 UTC form, second precision: 2024-03-05T08:00:00Z
inline std::string format_timestamp(Timestamp ts) {
    auto day = std::chrono::floor<std::chrono::days>(ts);
    std::chrono::hh_mm_ss tod{ts - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", CalendarDate::of(ts).to_string().c_str(),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

inline Timestamp parse_timestamp(std::string_view text) {
    if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        throw Error(ErrorCode::MalformedValue, "timestamp must be YYYY-MM-DDTHH:MM:SSZ: '" + std::string(text) + "'");
    }
    auto date = CalendarDate::parse(text.substr(0, 10));
    auto field = [&](std::size_t pos, int max) {
        char hi = text[pos], lo = text[pos + 1];
        if (hi < '0' || hi > '9' || lo < '0' || lo > '9') {
            throw Error(ErrorCode::MalformedValue, "bad timestamp: '" + std::string(text) + "'");
        }
        int v = (hi - '0') * 10 + (lo - '0');
        if (v > max) throw Error(ErrorCode::MalformedValue, "bad timestamp: '" + std::string(text) + "'");
        return v;
    };
    return date.midnight() + std::chrono::hours{field(11, 23)} + std::chrono::minutes{field(14, 59)} +
           std::chrono::seconds{field(17, 59)};
}

inline Timestamp utc_now() {
    return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

}  // namespace platekeeper
