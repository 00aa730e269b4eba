#include "heattrack/gam.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "heattrack/io.hpp"

namespace heat {

void PriorSpec::validate() const {
    auto pos = [](double v, const char* what) {
        if (!(v > 0) || !std::isfinite(v))
            throw ValidationError(std::string("prior ") + what + " must be positive and finite");
    };
    pos(f1.smoothness_weight, "f1.smoothness_weight");
    pos(f1.coeff_std, "f1.coeff_std");
    pos(f2.smoothness_weight, "f2.smoothness_weight");
    pos(f2.coeff_std, "f2.coeff_std");
    pos(intercept_std, "intercept_std");
    pos(storage_std, "storage_std");
    if (cold_anchor) pos(cold_anchor->std, "cold_anchor.std");
    if (noise_policy == NoisePolicy::fixed) pos(fixed_noise_std, "fixed_noise_std");
}

namespace {

struct PriorRowBuffer {
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> mus;
    std::vector<double> stds;

    void add(Eigen::RowVectorXd row, double mu, double std) {
        rows.push_back(std::move(row));
        mus.push_back(mu);
        stds.push_back(std);
    }
};

void add_block_rows(PriorRowBuffer& buf, std::size_t p, const DesignMatrix::Block& blk,
                    const BlockPrior& bp) {
    // second differences of adjacent weights
    for (std::size_t j = 0; j + 2 < blk.size; ++j) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(Eigen::Index(p));
        row(Eigen::Index(blk.offset + j)) = 1.0;
        row(Eigen::Index(blk.offset + j + 1)) = -2.0;
        row(Eigen::Index(blk.offset + j + 2)) = 1.0;
        buf.add(std::move(row), 0.0, 1.0 / bp.smoothness_weight);
    }
    // coefficient variance
    for (std::size_t j = 0; j < blk.size; ++j) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(Eigen::Index(p));
        row(Eigen::Index(blk.offset + j)) = 1.0;
        buf.add(std::move(row), 0.0, bp.coeff_std);
    }
}

} // namespace

PriorSystem build_prior_system(const DesignMatrix& design, const PriorSpec& prior) {
    prior.validate();
    const std::size_t p = design.cols();
    PriorRowBuffer buf;

    add_block_rows(buf, p, design.block("f1"), prior.f1);
    add_block_rows(buf, p, design.block("f2"), prior.f2);

    {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(Eigen::Index(p));
        row(Eigen::Index(design.block("intercept").offset)) = 1.0;
        buf.add(std::move(row), 0.0, prior.intercept_std);
    }
    if (design.has_block("storage")) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(Eigen::Index(p));
        row(Eigen::Index(design.block("storage").offset)) = 1.0;
        buf.add(std::move(row), 0.0, prior.storage_std);
    }
    if (prior.cold_anchor) {
        // physical f2(t) = -sum_k w_k s_k(t); anchor f2(t_a) to the target
        const auto& blk = design.block("f2");
        if (blk.size == 0) throw ValidationError("cold anchor on empty f2 block");
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(Eigen::Index(p));
        // the anchor needs the basis itself; the caller guarantees the spec used
        // to build `design` matches, so we recover the step values from X only
        // when possible. The basis is re-evaluated in calibrate_gam instead.
        throw ValidationError("cold anchor rows are added in calibrate_gam");
    }

    PriorSystem sys;
    const std::size_t m = buf.rows.size();
    sys.B.resize(Eigen::Index(m), Eigen::Index(p));
    sys.mu.resize(Eigen::Index(m));
    sys.row_std.resize(Eigen::Index(m));
    for (std::size_t i = 0; i < m; ++i) {
        sys.B.row(Eigen::Index(i)) = buf.rows[i];
        sys.mu(Eigen::Index(i)) = buf.mus[i];
        sys.row_std(Eigen::Index(i)) = buf.stds[i];
    }
    return sys;
}

namespace {

PriorSystem prior_system_with_anchor(const DesignMatrix& design, const GamModelSpec& spec,
                                     const PriorSpec& prior) {
    PriorSpec no_anchor = prior;
    no_anchor.cold_anchor.reset();
    PriorSystem sys = build_prior_system(design, no_anchor);
    if (!prior.cold_anchor) return sys;

    const auto& anchor = *prior.cold_anchor;
    if (!spec.f2.knots.empty() && anchor.t_out_c > spec.f2.knots.front() + 1e-9)
        throw ValidationError("cold anchor t_out must be at or below the smallest f2 knot");

    const auto& blk = design.block("f2");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(sys.B.cols());
    for (std::size_t k = 0; k < blk.size; ++k)
        row(Eigen::Index(blk.offset + k)) = -spec.f2.eval(anchor.t_out_c, k);

    PriorSystem out;
    out.B.resize(sys.B.rows() + 1, sys.B.cols());
    out.B << sys.B, row;
    out.mu.resize(sys.mu.size() + 1);
    out.mu << sys.mu, anchor.target;
    out.row_std.resize(sys.row_std.size() + 1);
    out.row_std << sys.row_std, anchor.std;
    return out;
}

struct Solution {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double condition = 0.0;
};

Solution solve_posterior(const DesignMatrix& design, const Eigen::VectorXd& y,
                         const PriorSystem& sys, double noise_std) {
    const Eigen::Index p = design.X.cols();
    const double inv_var = 1.0 / (noise_std * noise_std);

    Eigen::VectorXd gamma_inv = sys.row_std.array().square().inverse();
    Eigen::MatrixXd M = design.X.transpose() * design.X * inv_var +
                        sys.B.transpose() * gamma_inv.asDiagonal() * sys.B;
    Eigen::VectorXd rhs = design.X.transpose() * y * inv_var +
                          sys.B.transpose() * (gamma_inv.asDiagonal() * sys.mu);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition of normal matrix failed");
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (!(lmin > 0))
        throw NumericError("normal matrix not positive definite after priors");

    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success) throw NumericError("LDLT factorization failed");

    Solution s;
    s.mean = ldlt.solve(rhs);
    s.cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    s.cov = 0.5 * (s.cov + s.cov.transpose().eval());  // keep symmetric to rounding
    s.condition = lmax / lmin;
    return s;
}

} // namespace

GamPosterior calibrate_gam(const DesignMatrix& design, const Eigen::VectorXd& y,
                           const GamModelSpec& spec, const PriorSpec& prior) {
    prior.validate();
    if (design.X.rows() != y.size()) throw ValidationError("design/response size mismatch");
    if (design.rows() == 0) throw ValidationError("cannot calibrate on empty design");
    if (!y.allFinite()) throw ValidationError("NaN in response vector");

    GamPosterior post;
    post.f1 = spec.f1;
    post.f2 = spec.f2;
    post.t_base = spec.t_base;
    post.include_storage = spec.include_storage;
    if (!design.dates.empty()) {
        post.train_start = design.dates.front();
        post.train_end = design.dates.back();
    }

    PriorSystem sys = prior_system_with_anchor(design, spec, prior);

    double sigma = prior.fixed_noise_std;
    if (prior.noise_policy == NoisePolicy::estimate) {
        if (design.rows() < 10)
            throw ValidationError("noise estimation needs >=10 rows; use a fixed noise std");
        Solution first = solve_posterior(design, y, sys, 1.0);
        double rms = std::sqrt((y - design.X * first.mean).squaredNorm() / double(y.size()));
        sigma = std::max(rms, 1e-12);
    }

    Solution sol = solve_posterior(design, y, sys, sigma);
    post.theta_mean = sol.mean;
    post.theta_cov = sol.cov;
    post.noise_std = sigma;

    post.fit.n_rows = design.rows();
    post.fit.resid_rms = std::sqrt((y - design.X * sol.mean).squaredNorm() / double(y.size()));
    post.fit.condition = sol.condition;
    if (design.rows() < design.cols())
        post.fit.warnings.push_back("fewer rows than columns; posterior driven by priors");
    if (sol.condition > 1e10)
        post.fit.warnings.push_back("normal matrix condition above 1e10");

    // training t_out range, recovered from the f1 block argument
    // (dates alone do not carry it); kept for extrapolation warnings
    post.train_t_out_min = 0.0;
    post.train_t_out_max = 0.0;
    return post;
}

GamPosterior calibrate_gam(const DailySeries& series, const GamModelSpec& spec,
                           const PriorSpec& prior) {
    GamProblem prob = make_gam_problem(series, spec.f1, spec.f2, spec.t_base, spec.include_storage);
    GamPosterior post = calibrate_gam(prob.design, prob.y, spec, prior);
    DailySeries usable =
        series.with_fields(design_required_fields(spec.t_base, spec.include_storage, true));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : usable.records()) {
        lo = std::min(lo, *r.t_out);
        hi = std::max(hi, *r.t_out);
    }
    post.train_t_out_min = usable.empty() ? 0.0 : lo;
    post.train_t_out_max = usable.empty() ? 0.0 : hi;
    return post;
}

double estimate_noise_std(const DesignMatrix& design, const Eigen::VectorXd& y,
                          const GamModelSpec& spec, const PriorSpec& prior) {
    if (design.rows() < 10) throw ValidationError("noise estimation needs >=10 rows");
    PriorSpec p = prior;
    p.noise_policy = NoisePolicy::estimate;
    return calibrate_gam(design, y, spec, p).noise_std;
}

GamPosterior::Prediction GamPosterior::predict(double t_out, double phi_rad,
                                               std::optional<double> t_in) const {
    if (t_base.use_measured && !t_in)
        throw ValidationError("model was calibrated on measured t_in; t_in required");
    Eigen::RowVectorXd row =
        design_row(f1, f2, t_base, include_storage, t_out, phi_rad, t_in, 0.0);
    double mean = row.dot(theta_mean);
    double var = row * theta_cov * row.transpose();
    return {mean, std::sqrt(std::max(var, 0.0) + noise_std * noise_std)};
}

double GamPosterior::intercept() const {
    return theta_mean(Eigen::Index(f1.size() + f2.size()));
}

double GamPosterior::f2_value(double t_out) const {
    const std::size_t k1 = f1.size(), k2 = f2.size();
    double v = 0.0;
    for (std::size_t k = 0; k < k2; ++k) v -= theta_mean(Eigen::Index(k1 + k)) * f2.eval(t_out, k);
    return v;
}

std::string GamPosterior::to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["type"] = "gam_posterior";
    j["f1"] = nlohmann::json::parse(f1.to_json());
    j["f2"] = nlohmann::json::parse(f2.to_json());
    j["t_base"] = {{"use_measured", t_base.use_measured}, {"fixed_value", t_base.fixed_value}};
    j["include_storage"] = include_storage;
    j["noise_std"] = noise_std;
    j["theta_mean"] = std::vector<double>(theta_mean.data(), theta_mean.data() + theta_mean.size());
    std::vector<double> cov;
    cov.reserve(std::size_t(theta_cov.size()));
    for (Eigen::Index r = 0; r < theta_cov.rows(); ++r)
        for (Eigen::Index c = 0; c < theta_cov.cols(); ++c) cov.push_back(theta_cov(r, c));
    j["theta_cov_row_major"] = cov;
    j["train_start"] = date_to_string(train_start);
    j["train_end"] = date_to_string(train_end);
    j["train_t_out_min"] = train_t_out_min;
    j["train_t_out_max"] = train_t_out_max;
    j["fit"] = {{"n_rows", fit.n_rows},
                {"resid_rms", fit.resid_rms},
                {"condition", fit.condition},
                {"warnings", fit.warnings}};
    return j.dump(2);
}

GamPosterior GamPosterior::from_json(const std::string& json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model json: ") + e.what());
    }
    if (j.value("type", "") != "gam_posterior") throw IoError("not a gam_posterior bundle");
    GamPosterior m;
    m.f1 = BasisSpec::from_json(j.at("f1").dump());
    m.f2 = BasisSpec::from_json(j.at("f2").dump());
    m.t_base.use_measured = j.at("t_base").at("use_measured").get<bool>();
    m.t_base.fixed_value = j.at("t_base").at("fixed_value").get<double>();
    m.include_storage = j.at("include_storage").get<bool>();
    m.noise_std = j.at("noise_std").get<double>();
    auto mean = j.at("theta_mean").get<std::vector<double>>();
    m.theta_mean = Eigen::Map<Eigen::VectorXd>(mean.data(), Eigen::Index(mean.size()));
    auto cov = j.at("theta_cov_row_major").get<std::vector<double>>();
    const auto p = Eigen::Index(mean.size());
    if (Eigen::Index(cov.size()) != p * p) throw IoError("theta_cov size mismatch");
    m.theta_cov.resize(p, p);
    for (Eigen::Index r = 0; r < p; ++r)
        for (Eigen::Index c = 0; c < p; ++c) m.theta_cov(r, c) = cov[std::size_t(r * p + c)];
    auto ts = parse_date(j.at("train_start").get<std::string>());
    auto te = parse_date(j.at("train_end").get<std::string>());
    if (!ts || !te) throw IoError("bad training span dates");
    m.train_start = *ts;
    m.train_end = *te;
    m.train_t_out_min = j.value("train_t_out_min", 0.0);
    m.train_t_out_max = j.value("train_t_out_max", 0.0);
    if (j.contains("fit")) {
        m.fit.n_rows = j["fit"].value("n_rows", std::size_t(0));
        m.fit.resid_rms = j["fit"].value("resid_rms", 0.0);
        m.fit.condition = j["fit"].value("condition", 0.0);
        m.fit.warnings = j["fit"].value("warnings", std::vector<std::string>{});
    }
    return m;
}

} // namespace heat
