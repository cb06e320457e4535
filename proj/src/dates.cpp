#include "npisim/dates.hpp"

#include <cstdio>

#include "npisim/errors.hpp"

namespace npisim {

// Howard Hinnant's civil-date algorithms.
int days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(int z, int& y, int& m, int& d) {
    z += 719468;
    const int era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y += m <= 2;
}

int parse_iso_date(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3 ||
        m < 1 || m > 12 || d < 1 || d > 31)
        throw DataError("malformed date '" + text + "', expected YYYY-MM-DD");
    return days_from_civil(y, m, d);
}

std::string format_iso_date(int days) {
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

int scenario_anchor_day() { return days_from_civil(2021, 3, 1); }

DateRange parse_date_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw DataError("malformed date range '" + text +
                        "', expected YYYY-MM-DD:YYYY-MM-DD");
    DateRange range;
    range.first = parse_iso_date(text.substr(0, colon));
    range.last = parse_iso_date(text.substr(colon + 1));
    if (range.last < range.first)
        throw DataError("date range ends before it starts: " + text);
    return range;
}

} // namespace npisim
