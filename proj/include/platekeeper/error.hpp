#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace platekeeper {

// Machine-readable failure categories shared by every layer. The string form
// (see code_name) is what surfaces in API error bodies and CLI output.
enum class ErrorCode {
    MalformedId,
    MalformedValue,
    EmptyTaskList,
    Overflow,
    TransitionFromDecommissioned,
    PlateDecommissioned,
    UnknownConditionTag,
    UnknownTask,
    UnknownCompany,
    UnknownPolicyType,
    SchemaViolation,
    DepthExceeded,
    EmptyComposite,
    NotFound,
    UnknownKind,
    StorageFailure,
    CorruptJournal,
    InvalidRange,
    StoreNotEmpty,
};

constexpr std::string_view code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedId: return "MALFORMED_ID";
    case ErrorCode::MalformedValue: return "MALFORMED_VALUE";
    case ErrorCode::EmptyTaskList: return "EMPTY_TASKS";
    case ErrorCode::Overflow: return "OVERFLOW";
    case ErrorCode::TransitionFromDecommissioned: return "TRANSITION_FROM_DECOMMISSIONED";
    case ErrorCode::PlateDecommissioned: return "PLATE_DECOMMISSIONED";
    case ErrorCode::UnknownConditionTag: return "UNKNOWN_CONDITION";
    case ErrorCode::UnknownTask: return "UNKNOWN_TASK";
    case ErrorCode::UnknownCompany: return "UNKNOWN_COMPANY";
    case ErrorCode::UnknownPolicyType: return "UNKNOWN_POLICY_TYPE";
    case ErrorCode::SchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::DepthExceeded: return "DEPTH_EXCEEDED";
    case ErrorCode::EmptyComposite: return "EMPTY_COMPOSITE";
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::UnknownKind: return "UNKNOWN_KIND";
    case ErrorCode::StorageFailure: return "STORAGE_FAILURE";
    case ErrorCode::CorruptJournal: return "CORRUPT_JOURNAL";
    case ErrorCode::InvalidRange: return "INVALID_RANGE";
    case ErrorCode::StoreNotEmpty: return "STORE_NOT_EMPTY";
    }
    return "UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return platekeeper::code_name(code_); }

private:
    ErrorCode code_;
};

// Raised by replay when a journal line cannot be accepted.
class CorruptJournalError : public Error {
public:
    CorruptJournalError(std::size_t line, const std::string& reason)
        : Error(ErrorCode::CorruptJournal,
                "corrupt journal at line " + std::to_string(line) + ": " + reason),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace platekeeper
