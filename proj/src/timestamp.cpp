#include "qppm/timestamp.hpp"

#include <cctype>
#include <cstdio>

namespace qppm {
namespace {

class Cursor {
  public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool digits(std::size_t count, int &out) {
        if (pos_ + count > s_.size()) {
            return false;
        }
        int v = 0;
        for (std::size_t i = 0; i < count; ++i) {
            char c = s_[pos_ + i];
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                return false;
            }
            v = v * 10 + (c - '0');
        }
        out = v;
        pos_ += count;
        return true;
    }
    bool accept(char c) {
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[nodiscard]] bool done() const { return pos_ == s_.size(); }
    [[nodiscard]] char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    void skip() { ++pos_; }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::optional<std::chrono::sys_days> make_day(int y, int m, int d) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return sys_days{ymd};
}

} // namespace

std::optional<ZonedInstant> parse_iso8601(std::string_view text) {
    using namespace std::chrono;
    Cursor c{trim(text)};
    int y = 0, mo = 0, d = 0;
    if (!c.digits(4, y) || !c.accept('-') || !c.digits(2, mo) || !c.accept('-') || !c.digits(2, d)) {
        return std::nullopt;
    }
    auto day = make_day(y, mo, d);
    if (!day) {
        return std::nullopt;
    }
    int hh = 0, mm = 0, ss = 0;
    long long millis = 0;
    if (c.accept('T') || c.accept(' ')) {
        if (!c.digits(2, hh) || !c.accept(':') || !c.digits(2, mm)) {
            return std::nullopt;
        }
        if (c.accept(':')) {
            if (!c.digits(2, ss)) {
                return std::nullopt;
            }
            if (c.accept('.') || c.accept(',')) {
                int scale = 100;
                bool any = false;
                while (std::isdigit(static_cast<unsigned char>(c.peek()))) {
                    millis += (c.peek() - '0') * scale;
                    scale /= 10;
                    c.skip();
                    any = true;
                }
                if (!any) {
                    return std::nullopt;
                }
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) {
            return std::nullopt;
        }
    }
    minutes offset{0};
    if (c.accept('Z') || c.accept('z')) {
    } else if (c.peek() == '+' || c.peek() == '-') {
        const int sign = c.peek() == '-' ? -1 : 1;
        c.skip();
        int oh = 0, om = 0;
        if (!c.digits(2, oh)) {
            return std::nullopt;
        }
        c.accept(':');
        if (!c.done() && !c.digits(2, om)) {
            return std::nullopt;
        }
        offset = minutes{sign * (oh * 60 + om)};
    }
    if (!c.done()) {
        return std::nullopt;
    }
    Instant local = time_point_cast<Duration>(*day) + hours{hh} + minutes{mm} + seconds{ss} +
                    milliseconds{millis};
    return ZonedInstant{local - offset, offset};
}

std::optional<std::chrono::sys_days> parse_date(std::string_view text) {
    text = trim(text);
    Cursor c{text};
    int y = 0, m = 0, d = 0;
    if (text.size() == 8) {
        if (!c.digits(4, y) || !c.digits(2, m) || !c.digits(2, d)) {
            return std::nullopt;
        }
    } else if (!c.digits(4, y) || !c.accept('-') || !c.digits(2, m) || !c.accept('-') ||
               !c.digits(2, d)) {
        return std::nullopt;
    }
    if (!c.done()) {
        return std::nullopt;
    }
    return make_day(y, m, d);
}

std::string format_iso8601(const ZonedInstant &ts) {
    using namespace std::chrono;
    const Instant local = ts.utc + ts.offset;
    const auto day = floor<days>(local);
    const year_month_day ymd{day};
    const auto tod = local - day;
    const auto h = duration_cast<hours>(tod);
    const auto m = duration_cast<minutes>(tod - h);
    const auto s = duration_cast<seconds>(tod - h - m);
    const auto ms = duration_cast<milliseconds>(tod - h - m - s);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(h.count()), static_cast<int>(m.count()),
                  static_cast<int>(s.count()), static_cast<int>(ms.count()));
    std::string out = buf;
    if (ts.offset.count() == 0) {
        out += 'Z';
    } else {
        const long off = ts.offset.count();
        const long a = off < 0 ? -off : off;
        std::snprintf(buf, sizeof buf, "%c%02ld:%02ld", off < 0 ? '-' : '+', a / 60, a % 60);
        out += buf;
    }
    return out;
}

std::chrono::sys_days local_day(const ZonedInstant &ts) {
    return std::chrono::floor<std::chrono::days>(ts.utc + ts.offset);
}

} // namespace qppm
