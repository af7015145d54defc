#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bigthick {

/// Seconds since 01-01 00:00:00 of the anchor year. Source timestamps carry no
/// year ("mm-dd hh:mm:ss"); they are placed in a fixed non-leap year so that
/// weekdays and durations are well defined.
struct Timestamp {
  std::int64_t seconds = 0;

  auto operator<=>(const Timestamp&) const = default;
  Timestamp operator+(std::int64_t s) const { return {seconds + s}; }
  Timestamp operator-(std::int64_t s) const { return {seconds - s}; }
  std::int64_t operator-(Timestamp o) const { return seconds - o.seconds; }
};

inline constexpr int kAnchorYear = 2021;
inline constexpr std::int64_t kMinute = 60;
inline constexpr std::int64_t kHour = 3600;
inline constexpr std::int64_t kDay = 86400;
inline constexpr std::int64_t kWeek = 7 * kDay;

/// Parses "mm-dd hh:mm:ss". Throws ValidationError on malformed input.
Timestamp parse_timestamp(std::string_view text);
std::optional<Timestamp> try_parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

/// 0 = Monday ... 6 = Sunday.
int weekday(Timestamp t);
std::string_view weekday_name(Timestamp t);
/// night [00,06), morning [06,12), afternoon [12,18), evening [18,24).
std::string_view time_of_day(Timestamp t);

/// Closed interval [start, end].
struct Interval {
  Timestamp start;
  Timestamp end;

  bool well_formed() const { return start <= end; }
  std::int64_t length() const { return end - start; }
  bool contains(Timestamp t) const { return start <= t && t <= end; }
  bool contains(const Interval& o) const { return start <= o.start && o.end <= end; }
  /// Closed overlap: touching endpoints count.
  bool overlaps(const Interval& o) const { return start <= o.end && o.start <= end; }
  /// Overlap of positive length.
  bool overlaps_strictly(const Interval& o) const { return start < o.end && o.start < end; }
  Interval intersect(const Interval& o) const;

  auto operator<=>(const Interval&) const = default;
};

/// "mm-dd hh:mm:ss/mm-dd hh:mm:ss"
std::string format_interval(const Interval& i);
Interval parse_interval(std::string_view text);

/// Default observation period of the diary collection.
Interval default_reference_period();

}  // namespace bigthick
