#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "qppm/eventlog.hpp"

namespace qppm::io {

/// Parses an XES document. Only `concept:name`, `time:timestamp` and
/// `org:resource` are read on events; trace-level string attributes other
/// than `concept:name` become case attributes. Everything else is ignored.
///
/// Throws ParseError (with line) on malformed XML and RecordError naming the
/// trace when an event lacks its activity or timestamp.
[[nodiscard]] eventlog::EventLog parse_xes(std::string_view document);

/// Column names used to map a CSV header onto event fields.
struct ColumnMap {
    std::string case_id = "case_id";
    std::string activity = "activity";
    std::string timestamp = "timestamp";
    /// Optional; when the column is absent the log has no resources.
    std::string resource = "resource";
    /// Columns starting with this prefix become case attributes.
    std::string case_attribute_prefix = "case:";
};

/// Parses a header-first CSV (RFC 4180 quoting). Throws ConfigError when a
/// mapped column is missing and RecordError (row number) on bad rows.
[[nodiscard]] eventlog::EventLog parse_csv(std::string_view document, const ColumnMap &columns = {});

/// Writes the log in the layout `parse_csv` reads with the default ColumnMap.
void write_csv(std::ostream &out, const eventlog::EventLog &log);

enum class LogFormat { Xes, Csv };

/// Guesses the format from the file extension (`.xes`, `.xes.gz`, `.csv`).
[[nodiscard]] std::optional<LogFormat> guess_format(const std::filesystem::path &path);

/// Reads a whole file; transparently inflates gzip input.
[[nodiscard]] std::string read_file(const std::filesystem::path &path);

[[nodiscard]] eventlog::EventLog load_log(const std::filesystem::path &path,
                                          std::optional<LogFormat> format = std::nullopt,
                                          const ColumnMap &columns = {});

} // namespace qppm::io
