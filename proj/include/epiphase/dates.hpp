#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "epiphase/errors.hpp"

namespace epiphase {

using Date = std::chrono::year_month_day;

inline Date make_date(int year, unsigned month, unsigned day) {
    Date d{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!d.ok())
        raise(Errc::invalid_argument, "invalid calendar date " + std::to_string(year) + "-" +
                                          std::to_string(month) + "-" + std::to_string(day));
    return d;
}

// Strict ISO-8601 date, "YYYY-MM-DD".
inline Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        raise(Errc::parse_error, "expected YYYY-MM-DD, got '" + text + "'");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (text[i] < '0' || text[i] > '9')
            raise(Errc::parse_error, "expected YYYY-MM-DD, got '" + text + "'");
    int y = std::stoi(text.substr(0, 4));
    unsigned m = static_cast<unsigned>(std::stoi(text.substr(5, 2)));
    unsigned d = static_cast<unsigned>(std::stoi(text.substr(8, 2)));
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) raise(Errc::parse_error, "nonexistent date '" + text + "'");
    return date;
}

inline std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

inline Date shift(const Date& d, int days) {
    return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

// Signed day count b - a.
inline int days_between(const Date& a, const Date& b) {
    return static_cast<int>((std::chrono::sys_days{b} - std::chrono::sys_days{a}).count());
}

// 0 = Monday .. 6 = Sunday.
inline int weekday_index(const Date& d) {
    return static_cast<int>(std::chrono::weekday{std::chrono::sys_days{d}}.iso_encoding()) - 1;
}

inline bool is_weekend(const Date& d) { return weekday_index(d) >= 5; }

// One public holiday of the study year paired with the holiday playing the
// same role in the baseline year.  Weekday alignment does not hold for these
// days, so the pairing is explicit.
struct HolidayPair {
    Date study;     // date in the analysis window
    Date baseline;  // date its traffic should be compared against
};

// Korean public holidays falling inside the 2020 window, paired with their
// 2019 counterparts.  The Lunar New Year block is matched day by role (eve,
// holiday, following days); fixed-date holidays map to the same month/day;
// Buddha's Birthday follows the lunisolar calendar and moves.  The shipped
// data/holidays.csv carries the same table for pipeline runs, where it can be
// edited without rebuilding.
inline std::vector<HolidayPair> default_holidays() {
    return {
        {make_date(2020, 1, 24), make_date(2019, 2, 4)},
        {make_date(2020, 1, 25), make_date(2019, 2, 5)},
        {make_date(2020, 1, 26), make_date(2019, 2, 6)},
        {make_date(2020, 1, 27), make_date(2019, 2, 7)},
        {make_date(2020, 3, 1), make_date(2019, 3, 1)},
        {make_date(2020, 4, 30), make_date(2019, 5, 12)},
        {make_date(2020, 5, 1), make_date(2019, 5, 1)},
        {make_date(2020, 5, 5), make_date(2019, 5, 5)},
        {make_date(2020, 6, 6), make_date(2019, 6, 6)},
    };
}

// The study clock: day 1 is the first day of the analysis window, days count
// up from there, and dates before the window get indices <= 0 (the baseline
// year lands around -364).  Also owns the holiday table used when matching a
// study date to its baseline-year counterpart.
class StudyCalendar {
  public:
    StudyCalendar() : StudyCalendar(make_date(2020, 1, 20), 189) {}

    StudyCalendar(Date origin, int horizon)
        : origin_(origin), horizon_(horizon), holidays_(default_holidays()) {
        if (horizon < 1) raise(Errc::invalid_argument, "horizon must be positive");
    }

    int day_index(const Date& d) const { return days_between(origin_, d) + 1; }

    Date date_of(int day) const { return shift(origin_, day - 1); }

    bool in_window(const Date& d) const {
        int i = day_index(d);
        return i >= 1 && i <= horizon_;
    }

    int horizon() const { return horizon_; }
    const Date& origin() const { return origin_; }

    void set_holidays(std::vector<HolidayPair> table) { holidays_ = std::move(table); }
    const std::vector<HolidayPair>& holidays() const { return holidays_; }

    // Baseline-year date a study date is compared against.  Holidays use the
    // explicit table; every other date takes the unique date with the same
    // weekday within three days of the 364-day shift (364 = 52 weeks keeps
    // the weekday, so the shift itself is that date).
    Date match_day(const Date& d) const {
        if (!in_window(d))
            raise(Errc::out_of_range, "date " + format_date(d) + " outside the analysis window");
        for (const auto& h : holidays_)
            if (h.study == d) return h.baseline;
        Date base = shift(d, -364);
        int want = weekday_index(d);
        for (int off : {0, -1, 1, -2, 2, -3, 3}) {
            Date c = shift(base, off);
            if (weekday_index(c) == want) return c;
        }
        raise(Errc::out_of_range, "no weekday match near " + format_date(base));
    }

  private:
    Date origin_;
    int horizon_;
    std::vector<HolidayPair> holidays_;
};

}  // namespace epiphase
