#include <gtest/gtest.h>

#include "bigthick/error.hpp"
#include "bigthick/time.hpp"

using namespace bigthick;

TEST(Timestamp, ParseFormatRoundTrip) {
  for (const char* t : {"01-01 00:00:00", "05-08 22:02:19", "06-06 21:51:22", "12-31 23:59:59"}) {
    EXPECT_EQ(format_timestamp(parse_timestamp(t)), t);
  }
  EXPECT_EQ(parse_timestamp("01-02 00:00:01").seconds, kDay + 1);
}

TEST(Timestamp, RejectsMalformedText) {
  for (const char* t : {"", "5-8 22:02:19", "02-30 10:00:00", "13-01 00:00:00", "05-08 24:00:00", "05-08 22:02",
                        "05-08T22:02:19"}) {
    EXPECT_THROW(parse_timestamp(t), ValidationError) << t;
    EXPECT_FALSE(try_parse_timestamp(t)) << t;
  }
}

TEST(Timestamp, WeekdaysOfTheAnchorYear) {
  EXPECT_EQ(weekday(parse_timestamp("01-01 12:00:00")), 4);  // Friday
  EXPECT_EQ(weekday(parse_timestamp("05-08 22:02:19")), 5);  // Saturday
  EXPECT_EQ(weekday(parse_timestamp("05-10 00:00:00")), 0);  // Monday
  EXPECT_EQ(weekday_name(parse_timestamp("05-09 08:00:00")), "Sunday");
}

TEST(Timestamp, TimeOfDayBins) {
  EXPECT_EQ(time_of_day(parse_timestamp("05-10 00:00:00")), "night");
  EXPECT_EQ(time_of_day(parse_timestamp("05-10 05:59:59")), "night");
  EXPECT_EQ(time_of_day(parse_timestamp("05-10 06:00:00")), "morning");
  EXPECT_EQ(time_of_day(parse_timestamp("05-10 12:00:00")), "afternoon");
  EXPECT_EQ(time_of_day(parse_timestamp("05-10 18:00:00")), "evening");
  EXPECT_EQ(time_of_day(parse_timestamp("05-10 23:59:59")), "evening");
}

TEST(Interval, ClosedAndStrictOverlap) {
  const Interval a{Timestamp{0}, Timestamp{10}}, b{Timestamp{10}, Timestamp{20}}, c{Timestamp{5}, Timestamp{6}};
  EXPECT_TRUE(a.overlaps(b));
  EXPECT_FALSE(a.overlaps_strictly(b));
  EXPECT_TRUE(a.overlaps_strictly(c));
  EXPECT_TRUE(a.contains(c));
  EXPECT_FALSE(c.contains(a));
  EXPECT_EQ(a.intersect(c), c);
}

TEST(Interval, TextRoundTrip) {
  const Interval p = default_reference_period();
  EXPECT_EQ(format_interval(p), "05-08 22:02:19/06-06 21:51:22");
  EXPECT_EQ(parse_interval(format_interval(p)), p);
  EXPECT_THROW(parse_interval("05-08 22:02:19"), ValidationError);
}
