#include "heattrack/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace heat {

std::string format_double(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::optional<double> parse_cell(const std::string& cell, const std::string& origin, int line_no) {
    if (cell.empty()) return std::nullopt;
    double v{};
    auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (r.ec != std::errc{} || r.ptr != cell.data() + cell.size())
        throw IoError(origin + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
    return v;
}

} // namespace

DailySeries read_series_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(origin + ": empty input");
    // tolerate a UTF-8 BOM and trailing CR
    if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != kTelemetryHeader)
        throw IoError(origin + ": unexpected header, want '" + std::string(kTelemetryHeader) + "'");

    std::vector<BuildingRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 9)
            throw IoError(origin + ":" + std::to_string(line_no) + ": expected 9 columns, got " +
                          std::to_string(cells.size()));
        auto date = parse_date(cells[0]);
        if (!date) throw IoError(origin + ":" + std::to_string(line_no) + ": bad date '" + cells[0] + "'");
        BuildingRecord r;
        r.date = *date;
        r.q_tot = parse_cell(cells[1], origin, line_no);
        r.t_sup = parse_cell(cells[2], origin, line_no);
        r.t_ret = parse_cell(cells[3], origin, line_no);
        r.t_in = parse_cell(cells[4], origin, line_no);
        r.rh_in = parse_cell(cells[5], origin, line_no);
        r.t_out = parse_cell(cells[6], origin, line_no);
        r.rh_out = parse_cell(cells[7], origin, line_no);
        r.phi_rad = parse_cell(cells[8], origin, line_no);
        records.push_back(r);
    }
    return DailySeries(std::move(records));
}

DailySeries read_series_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_series_csv(in, path);
}

void write_series_csv(const DailySeries& series, std::ostream& out) {
    out << kTelemetryHeader << "\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : series.records()) {
        out << date_to_string(r.date) << ',' << cell(r.q_tot) << ',' << cell(r.t_sup) << ','
            << cell(r.t_ret) << ',' << cell(r.t_in) << ',' << cell(r.rh_in) << ',' << cell(r.t_out)
            << ',' << cell(r.rh_out) << ',' << cell(r.phi_rad) << "\n";
    }
}

void write_series_csv_file(const DailySeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_series_csv(series, out);
    if (!out) throw IoError("write failed for " + path);
}

BuildingMeta read_building_meta(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    BuildingMeta m;
    m.series.building_id = j.value("building_id", "");
    m.series.location_id = j.value("location_id", "");
    if (j.contains("floor_area_m2") && !j["floor_area_m2"].is_null())
        m.series.floor_area_m2 = j["floor_area_m2"].get<double>();
    if (j.contains("windows") && !j["windows"].is_null()) {
        const auto& w = j["windows"];
        CalibrationWindows cw;
        auto get_date = [&](const char* key) {
            auto d = parse_date(w.at(key).get<std::string>());
            if (!d) throw IoError(path + ": bad date in windows." + key);
            return *d;
        };
        cw.pre_start = get_date("pre_start");
        cw.pre_end = get_date("pre_end");
        cw.post_start = get_date("post_start");
        cw.post_end = get_date("post_end");
        cw.activation = get_date("activation");
        m.windows = cw;
    }
    return m;
}

void write_building_meta(const BuildingMeta& meta, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["building_id"] = meta.series.building_id;
    j["location_id"] = meta.series.location_id;
    if (meta.series.floor_area_m2) j["floor_area_m2"] = *meta.series.floor_area_m2;
    if (meta.windows) {
        j["windows"] = {{"pre_start", date_to_string(meta.windows->pre_start)},
                        {"pre_end", date_to_string(meta.windows->pre_end)},
                        {"post_start", date_to_string(meta.windows->post_start)},
                        {"post_end", date_to_string(meta.windows->post_end)},
                        {"activation", date_to_string(meta.windows->activation)}};
    }
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace heat
