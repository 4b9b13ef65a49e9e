#include "qax/event_log.hpp"

#include "qax/error.hpp"

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <utility>

#include <fcntl.h>
#include <unistd.h>

namespace qax {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 10> kKindNames{{
    {EventKind::Registered, "Registered"},
    {EventKind::Funded, "Funded"},
    {EventKind::QuestionCreated, "QuestionCreated"},
    {EventKind::QuestionPosted, "QuestionPosted"},
    {EventKind::Accepted, "Accepted"},
    {EventKind::Answered, "Answered"},
    {EventKind::EvidenceSubmitted, "EvidenceSubmitted"},
    {EventKind::Adjudicated, "Adjudicated"},
    {EventKind::Settled, "Settled"},
    {EventKind::TimeAdvanced, "TimeAdvanced"},
}};

std::string errno_message(const std::string& what)
{
    return what + ": " + std::strerror(errno);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

std::string_view to_string(EventKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "Unknown";
}

EventKind event_kind_from_string(std::string_view s)
{
    for (const auto& [k, name] : kKindNames)
        if (name == s)
            return k;
    throw Error(ErrorCode::CorruptEvent, "unknown event kind '" + std::string(s) + "'");
}

std::string event_to_line(const Event& e)
{
    nlohmann::json j{
        {"seq", e.seq},
        {"kind", to_string(e.kind)},
        {"payload", e.payload},
        {"recorded_at", e.recorded_at},
    };
    return j.dump() + "\n";
}

Event event_from_line(std::string_view line)
{
    if (!line.empty() && line.back() == '\n')
        line.remove_suffix(1);
    auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::CorruptEvent, "event line is not a JSON object");
    try {
        Event e;
        e.seq = j.at("seq").get<std::uint64_t>();
        e.kind = event_kind_from_string(j.at("kind").get<std::string>());
        e.payload = j.at("payload");
        e.recorded_at = j.at("recorded_at").get<Timestamp>();
        if (!e.payload.is_object())
            throw Error(ErrorCode::CorruptEvent, "payload is not an object");
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::CorruptEvent, ex.what());
    }
}

EventLog::EventLog(const std::filesystem::path& path)
{
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0)
        throw Error(ErrorCode::StorageFailure, errno_message("open " + path.string()));
}

EventLog::~EventLog()
{
    if (fd_ >= 0)
        ::close(fd_);
}

EventLog::EventLog(EventLog&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), events_(std::move(other.events_))
{
}

EventLog& EventLog::operator=(EventLog&& other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
        events_ = std::move(other.events_);
    }
    return *this;
}

void EventLog::adopt(std::vector<Event> existing)
{
    if (!events_.empty())
        throw Error(ErrorCode::SequenceGap, "log already has events");
    events_ = std::move(existing);
}

std::uint64_t EventLog::append(const Event& e)
{
    if (e.seq != events_.size() + 1)
        throw Error(ErrorCode::SequenceGap,
                    "expected seq " + std::to_string(events_.size() + 1) + ", got " + std::to_string(e.seq));
    if (fd_ >= 0) {
        std::string line = event_to_line(e);
        std::string_view rest = line;
        while (!rest.empty()) {
            ssize_t n = ::write(fd_, rest.data(), rest.size());
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw Error(ErrorCode::StorageFailure, errno_message("write"));
            }
            rest.remove_prefix(static_cast<std::size_t>(n));
        }
        if (::fsync(fd_) != 0)
            throw Error(ErrorCode::StorageFailure, errno_message("fsync"));
    }
    events_.push_back(e);
    return e.seq;
}

LoadedLog load_event_log(const std::filesystem::path& path)
{
    LoadedLog loaded;
    if (!std::filesystem::exists(path))
        return loaded;
    std::string text = read_file(path);
    std::string_view rest = text;
    while (!rest.empty()) {
        auto eol = rest.find('\n');
        if (eol == std::string_view::npos) {
            loaded.torn_tail_bytes = rest.size();
            break;
        }
        loaded.events.push_back(event_from_line(rest.substr(0, eol)));
        rest.remove_prefix(eol + 1);
    }
    return loaded;
}

void truncate_torn_tail(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path))
        return;
    std::string text = read_file(path);
    auto last = text.rfind('\n');
    std::size_t keep = last == std::string::npos ? 0 : last + 1;
    if (keep == text.size())
        return;
    if (::truncate(path.c_str(), static_cast<off_t>(keep)) != 0)
        throw Error(ErrorCode::StorageFailure, errno_message("truncate " + path.string()));
}

} // namespace qax
