#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <zlib.h>

#include "qppm/error.hpp"
#include "qppm/io.hpp"

namespace qppm::io {
namespace {

using eventlog::Event;

/// RFC 4180 record reader. Tracks the physical line where each record starts.
class CsvReader {
  public:
    explicit CsvReader(std::string_view doc) : doc_(doc) {
        // UTF-8 byte order mark
        if (doc_.substr(0, 3) == "\xEF\xBB\xBF") {
            pos_ = 3;
        }
    }

    bool next(std::vector<std::string> &fields, std::size_t &line) {
        fields.clear();
        if (pos_ >= doc_.size()) {
            return false;
        }
        line = line_;
        std::string cur;
        bool quoted = false;
        for (;;) {
            if (pos_ >= doc_.size()) {
                if (quoted) {
                    throw ParseError("unterminated quoted field", line);
                }
                fields.push_back(std::move(cur));
                return true;
            }
            const char c = doc_[pos_++];
            if (quoted) {
                if (c == '"') {
                    if (pos_ < doc_.size() && doc_[pos_] == '"') {
                        cur += '"';
                        ++pos_;
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') {
                        ++line_;
                    }
                    cur += c;
                }
            } else if (c == '"' && cur.empty()) {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
            } else if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ < doc_.size() && doc_[pos_] == '\n') {
                    ++pos_;
                }
                ++line_;
                fields.push_back(std::move(cur));
                return true;
            } else {
                cur += c;
            }
        }
    }

  private:
    std::string_view doc_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

std::string quote(const std::string &s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

bool is_blank(const std::vector<std::string> &row) {
    return std::all_of(row.begin(), row.end(), [](const std::string &f) { return f.empty(); });
}

} // namespace

eventlog::EventLog parse_csv(std::string_view document, const ColumnMap &columns) {
    CsvReader reader(document);
    std::vector<std::string> row;
    std::size_t line = 0;
    if (!reader.next(row, line)) {
        throw ConfigError("CSV input has no header row");
    }
    const std::vector<std::string> header = row;
    auto find_col = [&](const std::string &name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    auto require = [&](const std::string &name) {
        auto c = find_col(name);
        if (!c) {
            throw ConfigError("CSV header lacks mapped column '" + name + "'");
        }
        return *c;
    };
    const std::size_t c_case = require(columns.case_id);
    const std::size_t c_act = require(columns.activity);
    const std::size_t c_ts = require(columns.timestamp);
    const auto c_res = find_col(columns.resource);
    std::vector<std::pair<std::size_t, std::string>> attr_cols;
    if (!columns.case_attribute_prefix.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i].rfind(columns.case_attribute_prefix, 0) == 0 && i != c_case) {
                attr_cols.emplace_back(i, header[i].substr(columns.case_attribute_prefix.size()));
            }
        }
    }

    struct Pending {
        std::string id;
        std::vector<Event> events;
        std::map<std::string, std::string> attrs;
    };
    std::vector<Pending> cases;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t row_no = 0;
    while (reader.next(row, line)) {
        ++row_no;
        if (is_blank(row)) {
            continue;
        }
        const std::string where = "row " + std::to_string(row_no) + ", line " + std::to_string(line);
        if (row.size() != header.size()) {
            throw RecordError("expected " + std::to_string(header.size()) + " fields, found " +
                                  std::to_string(row.size()),
                              where);
        }
        const std::string &id = row[c_case];
        if (id.empty()) {
            throw RecordError("empty case id", where);
        }
        if (row[c_act].empty()) {
            throw RecordError("empty activity", where);
        }
        auto ts = parse_iso8601(row[c_ts]);
        if (!ts) {
            throw RecordError("unparseable timestamp '" + row[c_ts] + "'", where);
        }
        auto [it, fresh] = index.emplace(id, cases.size());
        if (fresh) {
            cases.push_back(Pending{id, {}, {}});
        }
        auto &dst = cases[it->second];
        for (const auto &[col, key] : attr_cols) {
            if (!row[col].empty()) {
                dst.attrs.emplace(key, row[col]);
            }
        }
        std::optional<std::string> res;
        if (c_res && !row[*c_res].empty()) {
            res = row[*c_res];
        }
        dst.events.push_back(Event{id, row[c_act], *ts, std::move(res)});
    }
    std::vector<eventlog::TracePtr> traces;
    traces.reserve(cases.size());
    for (auto &c : cases) {
        traces.push_back(eventlog::make_trace(std::move(c.id), std::move(c.events), std::move(c.attrs)));
    }
    return eventlog::EventLog(std::move(traces));
}

void write_csv(std::ostream &out, const eventlog::EventLog &log) {
    std::vector<std::string> attr_keys;
    for (const auto &t : log.traces()) {
        for (const auto &[k, v] : t->attributes) {
            if (std::find(attr_keys.begin(), attr_keys.end(), k) == attr_keys.end()) {
                attr_keys.push_back(k);
            }
        }
    }
    std::sort(attr_keys.begin(), attr_keys.end());
    const ColumnMap cols;
    out << cols.case_id << ',' << cols.activity << ',' << cols.timestamp << ',' << cols.resource;
    for (const auto &k : attr_keys) {
        out << ',' << quote(cols.case_attribute_prefix + k);
    }
    out << '\n';
    for (const auto &t : log.traces()) {
        for (const auto &e : t->events) {
            out << quote(t->case_id) << ',' << quote(e.activity) << ','
                << format_iso8601(e.timestamp) << ',' << quote(e.resource.value_or(""));
            for (const auto &k : attr_keys) {
                const auto it = t->attributes.find(k);
                out << ',' << (it == t->attributes.end() ? std::string() : quote(it->second));
            }
            out << '\n';
        }
    }
}

std::optional<LogFormat> guess_format(const std::filesystem::path &path) {
    std::string name = path.filename().string();
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    auto ends_with = [&](std::string_view s) {
        return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".xes") || ends_with(".xes.gz")) {
        return LogFormat::Xes;
    }
    if (ends_with(".csv") || ends_with(".csv.gz")) {
        return LogFormat::Csv;
    }
    return std::nullopt;
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string raw = ss.str();
    if (raw.size() < 2 || static_cast<unsigned char>(raw[0]) != 0x1f ||
        static_cast<unsigned char>(raw[1]) != 0x8b) {
        return raw;
    }
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) {
        throw Error("zlib initialisation failed");
    }
    std::string out;
    std::vector<char> buf(1 << 20);
    zs.next_in = reinterpret_cast<Bytef *>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = reinterpret_cast<Bytef *>(buf.data());
        zs.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ParseError("corrupt gzip stream in '" + path.string() + "'", 0);
        }
        out.append(buf.data(), buf.size() - zs.avail_out);
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw ParseError("truncated gzip stream in '" + path.string() + "'", 0);
        }
    }
    inflateEnd(&zs);
    return out;
}

eventlog::EventLog load_log(const std::filesystem::path &path, std::optional<LogFormat> format,
                            const ColumnMap &columns) {
    if (!format) {
        format = guess_format(path);
    }
    if (!format) {
        throw ConfigError("cannot infer log format of '" + path.string() + "'; pass it explicitly");
    }
    const std::string doc = read_file(path);
    return *format == LogFormat::Xes ? parse_xes(doc) : parse_csv(doc, columns);
}

} // namespace qppm::io
