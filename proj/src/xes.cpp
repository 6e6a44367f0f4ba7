#include <cctype>
#include <cstring>
#include <map>
#include <unordered_map>
#include <vector>

#include "qppm/error.hpp"
#include "qppm/io.hpp"

namespace qppm::io {
namespace {

using eventlog::Event;
using eventlog::TracePtr;

struct Attr {
    std::string_view name;
    std::string value;
};

struct Tag {
    enum Kind { Open, Close, SelfClose } kind = Open;
    std::string_view name;
    std::vector<Attr> attrs;
    std::size_t line = 0;

    [[nodiscard]] const std::string *get(std::string_view key) const {
        for (const auto &a : attrs) {
            if (a.name == key) {
                return &a.value;
            }
        }
        return nullptr;
    }
};

/// Minimal pull parser over an in-memory XML document. Produces element
/// tags only; text, comments, processing instructions and doctype are skipped.
class XmlReader {
  public:
    explicit XmlReader(std::string_view doc) : doc_(doc) {}

    /// Returns false at end of input.
    bool next(Tag &tag) {
        for (;;) {
            skip_text();
            if (pos_ >= doc_.size()) {
                return false;
            }
            // at '<'
            if (starts_with("<?")) {
                skip_past("?>", "unterminated processing instruction");
            } else if (starts_with("<!--")) {
                skip_past("-->", "unterminated comment");
            } else if (starts_with("<![CDATA[")) {
                skip_past("]]>", "unterminated CDATA section");
            } else if (starts_with("<!")) {
                skip_past(">", "unterminated declaration");
            } else {
                read_tag(tag);
                return true;
            }
        }
    }

    [[nodiscard]] std::size_t line() const { return line_; }

  private:
    [[noreturn]] void fail(const std::string &what) const { throw ParseError(what, line_); }

    bool starts_with(std::string_view s) const { return doc_.substr(pos_, s.size()) == s; }

    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < doc_.size(); ++i) {
            if (doc_[pos_++] == '\n') {
                ++line_;
            }
        }
    }

    void skip_text() {
        while (pos_ < doc_.size() && doc_[pos_] != '<') {
            if (doc_[pos_] == '\n') {
                ++line_;
            }
            ++pos_;
        }
    }

    void skip_past(std::string_view terminator, const char *err) {
        const auto end = doc_.find(terminator, pos_);
        if (end == std::string_view::npos) {
            fail(err);
        }
        advance(end + terminator.size() - pos_);
    }

    void skip_ws() {
        while (pos_ < doc_.size() && std::strchr(" \t\r\n", doc_[pos_]) != nullptr) {
            advance(1);
        }
    }

    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == ':' || c == '_' || c == '-' ||
               c == '.' || static_cast<unsigned char>(c) >= 0x80;
    }

    std::string_view read_name() {
        const std::size_t start = pos_;
        while (pos_ < doc_.size() && name_char(doc_[pos_])) {
            ++pos_;
        }
        if (pos_ == start) {
            fail("expected a name");
        }
        return doc_.substr(start, pos_ - start);
    }

    std::string decode(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            const auto semi = raw.find(';', i);
            if (semi == std::string_view::npos) {
                fail("unterminated entity reference");
            }
            const auto ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") {
                out += '&';
            } else if (ent == "lt") {
                out += '<';
            } else if (ent == "gt") {
                out += '>';
            } else if (ent == "quot") {
                out += '"';
            } else if (ent == "apos") {
                out += '\'';
            } else if (!ent.empty() && ent[0] == '#') {
                unsigned long cp = 0;
                try {
                    cp = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X')
                             ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                             : std::stoul(std::string(ent.substr(1)), nullptr, 10);
                } catch (const std::exception &) {
                    fail("bad character reference");
                }
                append_utf8(out, cp);
            } else {
                fail("unknown entity '&" + std::string(ent) + ";'");
            }
            i = semi;
        }
        return out;
    }

    static void append_utf8(std::string &out, unsigned long cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    void read_tag(Tag &tag) {
        tag.attrs.clear();
        tag.line = line_;
        advance(1); // '<'
        if (pos_ < doc_.size() && doc_[pos_] == '/') {
            advance(1);
            tag.kind = Tag::Close;
            tag.name = read_name();
            skip_ws();
            if (pos_ >= doc_.size() || doc_[pos_] != '>') {
                fail("malformed end tag </" + std::string(tag.name) + ">");
            }
            advance(1);
            return;
        }
        tag.kind = Tag::Open;
        tag.name = read_name();
        for (;;) {
            skip_ws();
            if (pos_ >= doc_.size()) {
                fail("unterminated start tag <" + std::string(tag.name) + ">");
            }
            if (doc_[pos_] == '>') {
                advance(1);
                return;
            }
            if (starts_with("/>")) {
                advance(2);
                tag.kind = Tag::SelfClose;
                return;
            }
            const auto name = read_name();
            skip_ws();
            if (pos_ >= doc_.size() || doc_[pos_] != '=') {
                fail("expected '=' after attribute " + std::string(name));
            }
            advance(1);
            skip_ws();
            if (pos_ >= doc_.size() || (doc_[pos_] != '"' && doc_[pos_] != '\'')) {
                fail("expected quoted value for attribute " + std::string(name));
            }
            const char quote = doc_[pos_];
            const auto end = doc_.find(quote, pos_ + 1);
            if (end == std::string_view::npos) {
                fail("unterminated attribute value");
            }
            const auto raw = doc_.substr(pos_ + 1, end - pos_ - 1);
            if (raw.find('<') != std::string_view::npos) {
                fail("'<' in attribute value");
            }
            advance(end + 1 - pos_);
            tag.attrs.push_back(Attr{name, decode(raw)});
        }
    }

    std::string_view doc_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

struct PendingTrace {
    std::string case_id;
    std::vector<Event> events;
    std::map<std::string, std::string> attributes;
};

} // namespace

eventlog::EventLog parse_xes(std::string_view document) {
    XmlReader reader(document);
    Tag tag;
    std::vector<std::string> stack;

    std::vector<PendingTrace> traces;
    std::unordered_map<std::string, std::size_t> trace_index;
    std::size_t trace_counter = 0;

    // Parsing state for the element currently open at depth 'trace' / 'event'.
    bool in_trace = false;
    bool in_event = false;
    std::size_t trace_depth = 0;
    std::size_t event_depth = 0;
    std::string cur_case;
    std::map<std::string, std::string> cur_attrs;
    std::vector<Event> cur_events;
    std::optional<std::string> ev_activity;
    std::optional<ZonedInstant> ev_time;
    std::optional<std::string> ev_resource;
    std::size_t ev_line = 0;
    bool saw_log = false;

    auto trace_label = [&]() {
        return cur_case.empty() ? "trace #" + std::to_string(trace_counter)
                                : "trace '" + cur_case + "'";
    };

    while (reader.next(tag)) {
        if (tag.kind == Tag::Close) {
            if (stack.empty() || stack.back() != tag.name) {
                throw ParseError("mismatched end tag </" + std::string(tag.name) + ">", tag.line);
            }
            stack.pop_back();
            if (in_event && stack.size() == event_depth) {
                if (!ev_activity || ev_activity->empty()) {
                    throw RecordError("event without concept:name (line " +
                                          std::to_string(ev_line) + ")",
                                      trace_label());
                }
                if (!ev_time) {
                    throw RecordError("event without time:timestamp (line " +
                                          std::to_string(ev_line) + ")",
                                      trace_label());
                }
                cur_events.push_back(Event{{}, std::move(*ev_activity), *ev_time,
                                           ev_resource && !ev_resource->empty()
                                               ? std::move(ev_resource)
                                               : std::nullopt});
                in_event = false;
            } else if (in_trace && stack.size() == trace_depth) {
                if (cur_case.empty()) {
                    cur_case = "trace_" + std::to_string(trace_counter);
                }
                for (auto &e : cur_events) {
                    e.case_id = cur_case;
                }
                auto [it, fresh] = trace_index.emplace(cur_case, traces.size());
                if (fresh) {
                    traces.push_back(PendingTrace{cur_case, std::move(cur_events), std::move(cur_attrs)});
                } else {
                    auto &dst = traces[it->second];
                    dst.events.insert(dst.events.end(), std::make_move_iterator(cur_events.begin()),
                                      std::make_move_iterator(cur_events.end()));
                }
                cur_events.clear();
                cur_attrs.clear();
                in_trace = false;
            }
            continue;
        }

        const std::size_t depth = stack.size(); // depth of this element's parent chain
        if (depth == 0) {
            if (tag.name != "log") {
                throw ParseError("root element must be <log>, found <" + std::string(tag.name) + ">",
                                 tag.line);
            }
            saw_log = true;
        } else if (tag.name == "trace" && depth == 1) {
            in_trace = true;
            trace_depth = depth;
            ++trace_counter;
            cur_case.clear();
        } else if (tag.name == "event" && in_trace && depth == trace_depth + 1) {
            in_event = true;
            event_depth = depth;
            ev_activity.reset();
            ev_time.reset();
            ev_resource.reset();
            ev_line = tag.line;
        } else if (in_event && depth == event_depth + 1) {
            const std::string *key = tag.get("key");
            const std::string *value = tag.get("value");
            if (key != nullptr && value != nullptr) {
                if (*key == "concept:name") {
                    ev_activity = *value;
                } else if (*key == "time:timestamp") {
                    ev_time = parse_iso8601(*value);
                    if (!ev_time) {
                        throw RecordError("unparseable timestamp '" + *value + "' (line " +
                                              std::to_string(tag.line) + ")",
                                          trace_label());
                    }
                } else if (*key == "org:resource") {
                    ev_resource = *value;
                }
            }
        } else if (in_trace && !in_event && depth == trace_depth + 1) {
            const std::string *key = tag.get("key");
            const std::string *value = tag.get("value");
            if (key != nullptr && value != nullptr) {
                if (*key == "concept:name") {
                    cur_case = *value;
                } else if (tag.name == "string") {
                    cur_attrs[*key] = *value;
                }
            }
        }

        if (tag.kind == Tag::Open) {
            stack.emplace_back(tag.name);
        } else if (in_event && depth == event_depth && tag.name == "event") {
            // <event/> with no attributes
            throw RecordError("event without concept:name (line " + std::to_string(tag.line) + ")",
                              trace_label());
        } else if (in_trace && depth == trace_depth && tag.name == "trace") {
            in_trace = false; // empty <trace/>: contributes nothing
        }
    }
    if (!stack.empty()) {
        throw ParseError("unexpected end of document inside <" + stack.back() + ">", reader.line());
    }
    if (!saw_log) {
        throw ParseError("document has no <log> element", reader.line());
    }

    std::vector<TracePtr> out;
    out.reserve(traces.size());
    for (auto &t : traces) {
        out.push_back(eventlog::make_trace(std::move(t.case_id), std::move(t.events),
                                           std::move(t.attributes)));
    }
    return eventlog::EventLog(std::move(out));
}

} // namespace qppm::io
