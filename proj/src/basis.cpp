#include "heattrack/basis.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace heat {

const char* basis_family_name(BasisFamily f) {
    switch (f) {
        case BasisFamily::hinge: return "hinge";
        case BasisFamily::ramp_step: return "ramp_step";
        case BasisFamily::constant: return "constant";
    }
    return "?";
}

BasisFamily basis_family_from_name(const std::string& name) {
    if (name == "hinge") return BasisFamily::hinge;
    if (name == "ramp_step") return BasisFamily::ramp_step;
    if (name == "constant") return BasisFamily::constant;
    throw ValidationError("unknown basis family '" + name + "'");
}

namespace {

void check_knots(const std::vector<double>& knots, std::size_t min_count, const char* family) {
    if (knots.size() < min_count)
        throw ValidationError(std::string(family) + " basis needs >=" + std::to_string(min_count) +
                              " knots");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (!(knots[i] > knots[i - 1]))
            throw ValidationError(std::string(family) + " knots must be strictly increasing");
    for (double k : knots)
        if (!std::isfinite(k)) throw ValidationError("non-finite knot");
}

std::vector<double> apply_refinement(std::vector<double> knots, const std::optional<GridRefinement>& r) {
    if (!r) return knots;
    if (!(r->step > 0) || !(r->hi > r->lo)) throw ValidationError("bad grid refinement");
    for (double x = r->lo; x <= r->hi + 1e-12; x += r->step) knots.push_back(x);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                knots.end());
    return knots;
}

} // namespace

std::size_t BasisSpec::size() const {
    switch (family) {
        case BasisFamily::hinge: return knots.size();
        case BasisFamily::ramp_step: return knots.size() < 2 ? 0 : knots.size() - 1;
        case BasisFamily::constant: return 1;
    }
    return 0;
}

double BasisSpec::eval(double x, std::size_t k) const {
    switch (family) {
        case BasisFamily::hinge:
            return x > knots[k] ? x - knots[k] : 0.0;
        case BasisFamily::ramp_step: {
            double a = knots[k], b = knots[k + 1];
            if (x <= a) return 1.0;
            if (x >= b) return 0.0;
            return (b - x) / (b - a);
        }
        case BasisFamily::constant:
            return 1.0;
    }
    return 0.0;
}

void BasisSpec::eval_row(double x, std::span<double> out) const {
    const std::size_t n = size();
    if (out.size() != n) throw ValidationError("eval_row span size mismatch");
    for (std::size_t k = 0; k < n; ++k) out[k] = eval(x, k);
}

std::string BasisSpec::to_json() const {
    nlohmann::json j;
    j["family"] = basis_family_name(family);
    j["knots"] = knots;
    return j.dump();
}

BasisSpec BasisSpec::from_json(const std::string& json) {
    auto j = nlohmann::json::parse(json);
    BasisSpec s;
    s.family = basis_family_from_name(j.at("family").get<std::string>());
    s.knots = j.at("knots").get<std::vector<double>>();
    if (s.family == BasisFamily::hinge) check_knots(s.knots, 1, "hinge");
    if (s.family == BasisFamily::ramp_step) check_knots(s.knots, 2, "ramp_step");
    return s;
}

BasisSpec make_hinge_basis(std::vector<double> knots, std::optional<GridRefinement> refine) {
    knots = apply_refinement(std::move(knots), refine);
    check_knots(knots, 1, "hinge");
    return BasisSpec{BasisFamily::hinge, std::move(knots)};
}

BasisSpec make_ramp_step_basis(std::vector<double> knots, std::optional<GridRefinement> refine) {
    knots = apply_refinement(std::move(knots), refine);
    check_knots(knots, 2, "ramp_step");
    return BasisSpec{BasisFamily::ramp_step, std::move(knots)};
}

BasisSpec default_f1_basis() {
    return make_hinge_basis({0, 2, 4, 6, 10, 15, 20, 30, 45});
}

BasisSpec default_f2_basis() {
    return make_ramp_step_basis({-20, -10, 0, 5, 10, 15, 20});
}

const DesignMatrix::Block& DesignMatrix::block(std::string_view name) const {
    for (const auto& b : blocks)
        if (b.name == name) return b;
    throw ValidationError("no design block '" + std::string(name) + "'");
}

bool DesignMatrix::has_block(std::string_view name) const {
    for (const auto& b : blocks)
        if (b.name == name) return true;
    return false;
}

Eigen::RowVectorXd design_row(const BasisSpec& f1, const BasisSpec& f2, const TBasePolicy& policy,
                              bool include_storage, double t_out, double phi_rad,
                              std::optional<double> t_in, double dtin_dt) {
    const std::size_t k1 = f1.size(), k2 = f2.size();
    Eigen::RowVectorXd row(Eigen::Index(k1 + k2 + 1 + (include_storage ? 1 : 0)));
    double base = policy.use_measured ? (t_in ? *t_in : throw ValidationError("t_in required by policy"))
                                      : policy.fixed_value;
    double dT = base - t_out;
    for (std::size_t k = 0; k < k1; ++k) row(Eigen::Index(k)) = f1.eval(dT, k);
    for (std::size_t k = 0; k < k2; ++k) row(Eigen::Index(k1 + k)) = f2.eval(t_out, k) * phi_rad;
    row(Eigen::Index(k1 + k2)) = 1.0;
    if (include_storage) row(Eigen::Index(k1 + k2 + 1)) = dtin_dt;
    return row;
}

std::vector<Field> design_required_fields(const TBasePolicy& policy, bool include_storage,
                                          bool need_q_tot) {
    std::vector<Field> fields{Field::t_out, Field::phi_rad};
    if (policy.use_measured || include_storage) fields.push_back(Field::t_in);
    if (need_q_tot) fields.push_back(Field::q_tot);
    return fields;
}

namespace {

// Gap-aware dT_in/dt in K/day: central difference over actual date distances,
// one-sided at the ends, 0 for an isolated row.
std::vector<double> indoor_temp_rate(const DailySeries& series) {
    const auto& rs = series.records();
    std::vector<double> rate(rs.size(), 0.0);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const bool has_prev = i > 0 && rs[i - 1].t_in && rs[i].t_in;
        const bool has_next = i + 1 < rs.size() && rs[i + 1].t_in && rs[i].t_in;
        if (i > 0 && i + 1 < rs.size() && rs[i - 1].t_in && rs[i + 1].t_in) {
            double dt = double((rs[i + 1].date - rs[i - 1].date).count());
            rate[i] = (*rs[i + 1].t_in - *rs[i - 1].t_in) / dt;
        } else if (has_next) {
            double dt = double((rs[i + 1].date - rs[i].date).count());
            rate[i] = (*rs[i + 1].t_in - *rs[i].t_in) / dt;
        } else if (has_prev) {
            double dt = double((rs[i].date - rs[i - 1].date).count());
            rate[i] = (*rs[i].t_in - *rs[i - 1].t_in) / dt;
        }
    }
    return rate;
}

} // namespace

DesignMatrix build_design_matrix(const DailySeries& series, const BasisSpec& f1, const BasisSpec& f2,
                                 const TBasePolicy& policy, bool include_storage) {
    for (const auto& r : series.records()) {
        for (Field f : design_required_fields(policy, include_storage, false))
            if (!field_value(r, f))
                throw ValidationError("design matrix: " + std::string(field_name(f)) +
                                      " missing on " + date_to_string(r.date));
    }
    std::vector<double> rate;
    if (include_storage) rate = indoor_temp_rate(series);

    DesignMatrix d;
    const std::size_t k1 = f1.size(), k2 = f2.size();
    const std::size_t p = k1 + k2 + 1 + (include_storage ? 1 : 0);
    d.X.resize(Eigen::Index(series.size()), Eigen::Index(p));
    d.dates.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& r = series[i];
        d.X.row(Eigen::Index(i)) = design_row(f1, f2, policy, include_storage, *r.t_out, *r.phi_rad,
                                              r.t_in, include_storage ? rate[i] : 0.0);
        d.dates.push_back(r.date);
    }
    if (!d.X.allFinite()) throw NumericError("non-finite entries in design matrix");
    d.blocks = {{"f1", 0, k1}, {"f2", k1, k2}, {"intercept", k1 + k2, 1}};
    if (include_storage) d.blocks.push_back({"storage", k1 + k2 + 1, 1});
    return d;
}

GamProblem make_gam_problem(const DailySeries& series, const BasisSpec& f1, const BasisSpec& f2,
                            const TBasePolicy& policy, bool include_storage) {
    DailySeries usable = series.with_fields(design_required_fields(policy, include_storage, true));
    GamProblem prob;
    prob.design = build_design_matrix(usable, f1, f2, policy, include_storage);
    prob.y.resize(Eigen::Index(usable.size()));
    for (std::size_t i = 0; i < usable.size(); ++i) prob.y(Eigen::Index(i)) = *usable[i].q_tot;
    return prob;
}

} // namespace heat
