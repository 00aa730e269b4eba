#include "heattrack/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace heat {

std::optional<Date> parse_date(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    auto digits = [](std::string_view s) {
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    if (!digits(iso.substr(0, 4)) || !digits(iso.substr(5, 2)) || !digits(iso.substr(8, 2)))
        return std::nullopt;
    int y = std::stoi(std::string(iso.substr(0, 4)));
    unsigned m = unsigned(std::stoi(std::string(iso.substr(5, 2))));
    unsigned d = unsigned(std::stoi(std::string(iso.substr(8, 2))));
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days(ymd);
}

std::string date_to_string(Date d) {
    std::chrono::year_month_day ymd(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

const char* field_name(Field f) {
    switch (f) {
        case Field::q_tot: return "q_tot";
        case Field::t_sup: return "t_sup";
        case Field::t_ret: return "t_ret";
        case Field::t_in: return "t_in";
        case Field::rh_in: return "rh_in";
        case Field::t_out: return "t_out";
        case Field::rh_out: return "rh_out";
        case Field::phi_rad: return "phi_rad";
    }
    return "?";
}

std::optional<double> field_value(const BuildingRecord& r, Field f) {
    switch (f) {
        case Field::q_tot: return r.q_tot;
        case Field::t_sup: return r.t_sup;
        case Field::t_ret: return r.t_ret;
        case Field::t_in: return r.t_in;
        case Field::rh_in: return r.rh_in;
        case Field::t_out: return r.t_out;
        case Field::rh_out: return r.rh_out;
        case Field::phi_rad: return r.phi_rad;
    }
    return std::nullopt;
}

DailySeries::DailySeries(std::vector<BuildingRecord> records, SeriesMeta meta)
    : records_(std::move(records)), meta_(std::move(meta)) {
    std::stable_sort(records_.begin(), records_.end(),
                     [](const BuildingRecord& a, const BuildingRecord& b) { return a.date < b.date; });
}

Date DailySeries::first_date() const {
    if (records_.empty()) throw ValidationError("first_date on empty series");
    return records_.front().date;
}

Date DailySeries::last_date() const {
    if (records_.empty()) throw ValidationError("last_date on empty series");
    return records_.back().date;
}

DailySeries DailySeries::slice(Date start, Date end) const {
    std::vector<BuildingRecord> out;
    for (const auto& r : records_)
        if (r.date >= start && r.date <= end) out.push_back(r);
    return DailySeries(std::move(out), meta_);
}

DailySeries DailySeries::with_fields(const std::vector<Field>& required) const {
    std::vector<BuildingRecord> out;
    for (const auto& r : records_) {
        bool ok = true;
        for (Field f : required)
            if (!field_value(r, f)) { ok = false; break; }
        if (ok) out.push_back(r);
    }
    return DailySeries(std::move(out), meta_);
}

std::size_t DailySeries::count_with_fields(const std::vector<Field>& required) const {
    std::size_t n = 0;
    for (const auto& r : records_) {
        bool ok = true;
        for (Field f : required)
            if (!field_value(r, f)) { ok = false; break; }
        if (ok) ++n;
    }
    return n;
}

void HeatingCurve::validate() const {
    if (breakpoints.size() < 2) throw ValidationError("heating curve needs >=2 breakpoints");
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i].first > breakpoints[i - 1].first))
            throw ValidationError("heating curve t_out breakpoints must be strictly increasing");
        if (breakpoints[i].second > breakpoints[i - 1].second)
            throw ValidationError("heating curve t_sup must be non-increasing in t_out");
    }
}

double HeatingCurve::supply_at(double t_out) const {
    const auto& bp = breakpoints;
    if (bp.empty()) throw ValidationError("empty heating curve");
    if (t_out <= bp.front().first) return bp.front().second;
    if (t_out >= bp.back().first) return bp.back().second;
    for (std::size_t i = 1; i < bp.size(); ++i) {
        if (t_out <= bp[i].first) {
            double w = (t_out - bp[i - 1].first) / (bp[i].first - bp[i - 1].first);
            return bp[i - 1].second + w * (bp[i].second - bp[i - 1].second);
        }
    }
    return bp.back().second;
}

void CalibrationWindows::validate() const {
    if (!(pre_start <= pre_end)) throw ValidationError("pre window start after end");
    if (!(post_start <= post_end)) throw ValidationError("post window start after end");
    if (!(pre_end <= activation)) throw ValidationError("pre window must end at or before activation");
    if (!(activation <= post_start)) throw ValidationError("post window must start at or after activation");
}

DailySeries mask_heating_season(const DailySeries& series, const SeasonPolicy& policy) {
    std::vector<BuildingRecord> out;
    for (const auto& r : series.records()) {
        if (r.t_out) {
            double cutoff = month_of(r.date) <= 6 ? policy.spring_cutoff_c : policy.autumn_cutoff_c;
            if (*r.t_out > cutoff) continue;
        }
        out.push_back(r);
    }
    return DailySeries(std::move(out), series.meta());
}

std::size_t ValidationReport::total_violations() const {
    std::size_t n = n_duplicate_dates + n_supply_below_return;
    for (const auto& [k, v] : field_violations) n += v;
    return n;
}

std::string ValidationReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_records"] = n_records;
    j["n_duplicate_dates"] = n_duplicate_dates;
    j["n_supply_below_return"] = n_supply_below_return;
    j["field_violations"] = field_violations;
    j["completeness"] = completeness;
    j["gaps"] = nlohmann::json::array();
    for (const auto& g : gaps)
        j["gaps"].push_back({{"start", date_to_string(g.start)}, {"length", g.length}});
    j["total_violations"] = total_violations();
    return j.dump(2);
}

ValidationReport validate_series(const DailySeries& series) {
    ValidationReport rep;
    rep.n_records = series.size();
    if (series.empty()) return rep;

    auto violate = [&rep](const char* key) { rep.field_violations[key] += 1; };

    std::size_t complete_days = 0;
    const auto& rs = series.records();
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        if (i > 0 && r.date == rs[i - 1].date) rep.n_duplicate_dates++;
        if (i > 0) {
            auto gap = (r.date - rs[i - 1].date).count();
            if (gap > 1)
                rep.gaps.push_back({rs[i - 1].date + std::chrono::days{1}, int(gap - 1)});
        }
        if (r.q_tot && *r.q_tot < 0) violate("q_tot_negative");
        if (r.phi_rad && *r.phi_rad < 0) violate("phi_rad_negative");
        if (r.rh_in && (*r.rh_in < 0 || *r.rh_in > 100)) violate("rh_in_range");
        if (r.rh_out && (*r.rh_out < 0 || *r.rh_out > 100)) violate("rh_out_range");
        if (r.t_sup && r.t_ret && *r.t_sup < *r.t_ret) rep.n_supply_below_return++;
        for (Field f : {Field::q_tot, Field::t_sup, Field::t_ret, Field::t_in, Field::t_out}) {
            auto v = field_value(r, f);
            if (v && !std::isfinite(*v)) violate("non_finite");
        }
        if (r.q_tot && r.t_out && r.phi_rad && (i == 0 || r.date != rs[i - 1].date)) complete_days++;
    }
    auto span = (rs.back().date - rs.front().date).count() + 1;
    rep.completeness = span > 0 ? double(complete_days) / double(span) : 0.0;
    return rep;
}

} // namespace heat
