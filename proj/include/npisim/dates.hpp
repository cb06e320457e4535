#pragma once

#include <string>

namespace npisim {

/// Calendar dates are handled as day counts since 1970-01-01 (no time
/// zones). Scenario day 0 corresponds to 2021-03-01.

int days_from_civil(int year, int month, int day);
void civil_from_days(int days, int& year, int& month, int& day);

/// Parses "YYYY-MM-DD"; throws DataError on malformed input.
int parse_iso_date(const std::string& text);
std::string format_iso_date(int days);

/// Day 0 of every scenario timeline: 2021-03-01.
int scenario_anchor_day();

/// Inclusive date range "YYYY-MM-DD:YYYY-MM-DD".
struct DateRange {
    int first = 0;
    int last = 0;
    bool contains(int day) const { return day >= first && day <= last; }
};

DateRange parse_date_range(const std::string& text);

} // namespace npisim
