#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heattrack/series.hpp"

namespace heat {

enum class BasisFamily { hinge, ramp_step, constant };

const char* basis_family_name(BasisFamily f);
BasisFamily basis_family_from_name(const std::string& name);

// Optional finer sub-grid: extra knots every `step` units inside [lo, hi],
// merged into the base grid.
struct GridRefinement {
    double lo, hi, step;
};

// A family of scalar basis functions over one input variable.
//
// hinge ("flipped ReLU" on the t_out axis, evaluated on dT = T_in - T_out):
//   one function per knot c_k, h_k(x) = max(0, x - c_k). Zero at and below
//   the knot, unit slope above: heating demand grows once dT exceeds c_k.
//
// ramp_step ("flipped step", evaluated on t_out): one function per knot
//   interval. Function k is 1 for t_out <= a_k, decays linearly to 0 across
//   [a_k, a_{k+1}] and stays 0 above. All functions vanish above the largest
//   knot, where heating demand is assumed gone.
struct BasisSpec {
    BasisFamily family = BasisFamily::constant;
    std::vector<double> knots;

    std::size_t size() const;
    double eval(double x, std::size_t k) const;
    void eval_row(double x, std::span<double> out) const;

    std::string to_json() const;
    static BasisSpec from_json(const std::string& json);
};

BasisSpec make_hinge_basis(std::vector<double> knots,
                           std::optional<GridRefinement> refine = std::nullopt);
BasisSpec make_ramp_step_basis(std::vector<double> knots,
                               std::optional<GridRefinement> refine = std::nullopt);

// Defaults; configurable everywhere they are used.
BasisSpec default_f1_basis();  // dT knots {0,2,4,6,10,15,20,30,45} K, finer near onset
BasisSpec default_f2_basis();  // t_out knots {-20,-10,0,5,10,15,20} degC

// How the dT = T_in - T_out argument of f1 is formed.
struct TBasePolicy {
    bool use_measured = false;  // measured t_in (post-activation model)
    double fixed_value = 21.0;  // fixed T_base (pre-activation model)
};

// Evaluated design matrix: [f1 block | f2 block | intercept | storage?].
// f2-block columns are the step basis at t_out multiplied elementwise by
// phi_rad; the fitted weights on that block therefore carry the sign of the
// radiation term (negative when radiation displaces heating power).
struct DesignMatrix {
    Eigen::MatrixXd X;
    std::vector<Date> dates;

    struct Block {
        std::string name;
        std::size_t offset = 0;
        std::size_t size = 0;
    };
    std::vector<Block> blocks;

    std::size_t rows() const { return std::size_t(X.rows()); }
    std::size_t cols() const { return std::size_t(X.cols()); }
    const Block& block(std::string_view name) const;
    bool has_block(std::string_view name) const;
};

// Single design row shared by matrix construction and model prediction.
Eigen::RowVectorXd design_row(const BasisSpec& f1, const BasisSpec& f2, const TBasePolicy& policy,
                              bool include_storage, double t_out, double phi_rad,
                              std::optional<double> t_in, double dtin_dt = 0.0);

DesignMatrix build_design_matrix(const DailySeries& series, const BasisSpec& f1, const BasisSpec& f2,
                                 const TBasePolicy& policy, bool include_storage = false);

// Design matrix plus the aligned response vector (q_tot), for calibration.
struct GamProblem {
    DesignMatrix design;
    Eigen::VectorXd y;
};

GamProblem make_gam_problem(const DailySeries& series, const BasisSpec& f1, const BasisSpec& f2,
                            const TBasePolicy& policy, bool include_storage = false);

// Fields a row must carry to enter the design matrix under the given policy.
std::vector<Field> design_required_fields(const TBasePolicy& policy, bool include_storage,
                                          bool need_q_tot);

} // namespace heat
