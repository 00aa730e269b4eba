#pragma once

#include <iosfwd>
#include <string>

#include "heattrack/series.hpp"

namespace heat {

// Telemetry CSV schema. One row per day, empty cell = missing value.
inline constexpr const char* kTelemetryHeader =
    "date,q_tot_kw,t_sup_c,t_ret_c,t_in_c,rh_in_pct,t_out_c,rh_out_pct,phi_rad_wm2";

DailySeries read_series_csv(std::istream& in, const std::string& origin = "<stream>");
DailySeries read_series_csv_file(const std::string& path);
void write_series_csv(const DailySeries& series, std::ostream& out);
void write_series_csv_file(const DailySeries& series, const std::string& path);

// Building metadata sidecar (id, area, calibration windows).
struct BuildingMeta {
    SeriesMeta series;
    std::optional<CalibrationWindows> windows;
};

BuildingMeta read_building_meta(const std::string& path);
void write_building_meta(const BuildingMeta& meta, const std::string& path);

// Shortest exact decimal representation; parses back to the same double.
std::string format_double(double v);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace heat
