#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heattrack/errors.hpp"

namespace heat {

// Daily grain everywhere; a Date is a day count on the civil calendar.
using Date = std::chrono::sys_days;

std::optional<Date> parse_date(std::string_view iso);
std::string date_to_string(Date d);
inline Date make_date(int y, unsigned m, unsigned d) {
    return std::chrono::sys_days(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d});
}
inline int month_of(Date d) {
    return static_cast<int>(unsigned(std::chrono::year_month_day(d).month()));
}
inline int year_of(Date d) {
    return int(std::chrono::year_month_day(d).year());
}

// One daily-average telemetry sample. Any measurement may be missing; in the
// CSV representation a missing value is an empty cell.
struct BuildingRecord {
    Date date{};
    std::optional<double> q_tot;    // total heating power, kW (daily mean)
    std::optional<double> t_sup;    // secondary-side supply temperature, degC
    std::optional<double> t_ret;    // return temperature, degC
    std::optional<double> t_in;     // indoor temperature, degC (absent before IC installation)
    std::optional<double> rh_in;    // indoor relative humidity, %
    std::optional<double> t_out;    // outdoor temperature, degC
    std::optional<double> rh_out;   // outdoor relative humidity, %
    std::optional<double> phi_rad;  // solar radiation intensity, W/m2 (24 h daily mean)
};

enum class Field { q_tot, t_sup, t_ret, t_in, rh_in, t_out, rh_out, phi_rad };

const char* field_name(Field f);
std::optional<double> field_value(const BuildingRecord& r, Field f);

struct SeriesMeta {
    std::string building_id;
    std::string location_id;
    std::optional<double> floor_area_m2;
};

// Ordered day series. Records are sorted by date on construction; duplicate
// dates are kept so that validate_series can report them. Gaps are represented
// by absent rows and are never interpolated.
class DailySeries {
public:
    DailySeries() = default;
    DailySeries(std::vector<BuildingRecord> records, SeriesMeta meta = {});

    const std::vector<BuildingRecord>& records() const { return records_; }
    const SeriesMeta& meta() const { return meta_; }
    SeriesMeta& meta() { return meta_; }

    bool empty() const { return records_.empty(); }
    std::size_t size() const { return records_.size(); }
    const BuildingRecord& operator[](std::size_t i) const { return records_[i]; }

    Date first_date() const;
    Date last_date() const;

    // Subset within [start, end] inclusive.
    DailySeries slice(Date start, Date end) const;
    // Rows that carry every listed field.
    DailySeries with_fields(const std::vector<Field>& required) const;
    std::size_t count_with_fields(const std::vector<Field>& required) const;

private:
    std::vector<BuildingRecord> records_;
    SeriesMeta meta_;
};

// Open-loop rule mapping outdoor temperature to supply temperature.
// Breakpoints are (t_out, t_sup) pairs with strictly increasing t_out and
// non-increasing t_sup; evaluation clamps to the endpoint values.
struct HeatingCurve {
    std::vector<std::pair<double, double>> breakpoints;

    void validate() const;
    double supply_at(double t_out) const;
};

struct CalibrationWindows {
    Date pre_start{}, pre_end{};
    Date post_start{}, post_end{};
    Date activation{};

    void validate() const;  // ordering only; data sufficiency is checked at calibration
};

struct SeasonPolicy {
    double spring_cutoff_c = 10.0;  // Jan-Jun, Motiva
    double autumn_cutoff_c = 12.0;  // Jul-Dec, Motiva
};

// Motiva-style heating-season mask: Jan-Jun days with t_out above the spring
// cutoff and Jul-Dec days above the autumn cutoff are dropped. Days with no
// t_out reading are kept; coverage accounting is the caller's concern.
DailySeries mask_heating_season(const DailySeries& series, const SeasonPolicy& policy = {});

struct GapInfo {
    Date start;   // first missing day
    int length;   // consecutive missing days
};

struct ValidationReport {
    std::size_t n_records = 0;
    std::size_t n_duplicate_dates = 0;
    std::size_t n_supply_below_return = 0;  // t_sup < t_ret, flagged not rejected
    std::map<std::string, std::size_t> field_violations;
    std::vector<GapInfo> gaps;
    double completeness = 0.0;  // complete days / span days

    std::size_t total_violations() const;
    std::string to_json() const;
};

ValidationReport validate_series(const DailySeries& series);

} // namespace heat
