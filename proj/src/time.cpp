#include "bigthick/time.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>

#include <fmt/format.h>

#include "bigthick/error.hpp"

namespace bigthick {
namespace {

namespace chr = std::chrono;

constexpr std::array<std::string_view, 7> kWeekdays{"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                    "Friday", "Saturday", "Sunday"};

std::int64_t day_of_year(unsigned month, unsigned day) {
  const chr::year_month_day ymd{chr::year{kAnchorYear}, chr::month{month}, chr::day{day}};
  if (!ymd.ok()) return -1;
  const chr::year_month_day jan1{chr::year{kAnchorYear}, chr::January, chr::day{1}};
  return (chr::sys_days{ymd} - chr::sys_days{jan1}).count();
}

bool read_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<Timestamp> try_parse_timestamp(std::string_view text) {
  // mm-dd hh:mm:ss
  if (text.size() != 14 || text[2] != '-' || text[5] != ' ' || text[8] != ':' || text[11] != ':') {
    return std::nullopt;
  }
  int mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_int(text.substr(0, 2), mo) || !read_int(text.substr(3, 2), d) || !read_int(text.substr(6, 2), h) ||
      !read_int(text.substr(9, 2), mi) || !read_int(text.substr(12, 2), s)) {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0 || d < 1) return std::nullopt;
  const auto doy = day_of_year(static_cast<unsigned>(mo), static_cast<unsigned>(d));
  if (doy < 0) return std::nullopt;
  return Timestamp{doy * kDay + h * kHour + mi * kMinute + s};
}

Timestamp parse_timestamp(std::string_view text) {
  if (auto t = try_parse_timestamp(text)) return *t;
  throw ValidationError(fmt::format("malformed timestamp '{}' (expected mm-dd hh:mm:ss)", text));
}

std::string format_timestamp(Timestamp t) {
  const chr::sys_days jan1{chr::year_month_day{chr::year{kAnchorYear}, chr::January, chr::day{1}}};
  std::int64_t days = t.seconds / kDay;
  std::int64_t rem = t.seconds % kDay;
  if (rem < 0) {
    rem += kDay;
    --days;
  }
  const chr::year_month_day ymd{jan1 + chr::days{days}};
  return fmt::format("{:02}-{:02} {:02}:{:02}:{:02}", static_cast<unsigned>(ymd.month()),
                     static_cast<unsigned>(ymd.day()), rem / kHour, (rem % kHour) / kMinute, rem % kMinute);
}

int weekday(Timestamp t) {
  const chr::sys_days jan1{chr::year_month_day{chr::year{kAnchorYear}, chr::January, chr::day{1}}};
  std::int64_t days = t.seconds / kDay;
  if (t.seconds % kDay < 0) --days;
  const chr::weekday wd{jan1 + chr::days{days}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

std::string_view weekday_name(Timestamp t) { return kWeekdays[static_cast<std::size_t>(weekday(t))]; }

std::string_view time_of_day(Timestamp t) {
  std::int64_t rem = t.seconds % kDay;
  if (rem < 0) rem += kDay;
  const auto hour = rem / kHour;
  if (hour < 6) return "night";
  if (hour < 12) return "morning";
  if (hour < 18) return "afternoon";
  return "evening";
}

Interval Interval::intersect(const Interval& o) const { return {std::max(start, o.start), std::min(end, o.end)}; }

std::string format_interval(const Interval& i) {
  return format_timestamp(i.start) + "/" + format_timestamp(i.end);
}

Interval parse_interval(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw ValidationError(fmt::format("malformed interval '{}' (expected start/end)", text));
  }
  Interval i{parse_timestamp(text.substr(0, slash)), parse_timestamp(text.substr(slash + 1))};
  if (!i.well_formed()) throw ValidationError(fmt::format("interval '{}' ends before it starts", text));
  return i;
}

Interval default_reference_period() {
  return {parse_timestamp("05-08 22:02:19"), parse_timestamp("06-06 21:51:22")};
}

}  // namespace bigthick
