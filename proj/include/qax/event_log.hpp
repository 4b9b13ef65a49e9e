#pragma once

#include "qax/money.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qax {

enum class EventKind {
    Registered,
    Funded,
    QuestionCreated,
    QuestionPosted,
    Accepted,
    Answered,
    EvidenceSubmitted,
    Adjudicated,
    Settled,
    TimeAdvanced,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

struct Event {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::TimeAdvanced;
    nlohmann::json payload;
    Timestamp recorded_at = 0;

    bool operator==(const Event&) const = default;
};

std::string event_to_line(const Event& e);
/// Throws CorruptEvent.
Event event_from_line(std::string_view line);

/// Append-only log. With a path, every append is written as one LF-terminated
/// JSON line and fsync'd before append() returns.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(const std::filesystem::path& path);
    ~EventLog();

    EventLog(EventLog&& other) noexcept;
    EventLog& operator=(EventLog&& other) noexcept;
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Events already on disk. Must be called before the first append.
    void adopt(std::vector<Event> existing);

    /// Throws SequenceGap unless e.seq == size() + 1; StorageFailure on I/O error.
    std::uint64_t append(const Event& e);

    std::uint64_t size() const { return events_.size(); }
    const std::vector<Event>& events() const { return events_; }
    bool durable() const { return fd_ >= 0; }

private:
    int fd_ = -1;
    std::vector<Event> events_;
};

struct LoadedLog {
    std::vector<Event> events;
    /// Bytes after the last LF: a write torn by a crash, never acknowledged.
    std::size_t torn_tail_bytes = 0;
};

/// Reads a log file. A trailing partial line is reported, not parsed; a
/// complete line that fails to parse throws CorruptEvent. A missing file is
/// an empty log.
LoadedLog load_event_log(const std::filesystem::path& path);

/// Drops a torn trailing line so the file ends on an event boundary.
void truncate_torn_tail(const std::filesystem::path& path);

} // namespace qax
