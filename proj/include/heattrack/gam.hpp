#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heattrack/basis.hpp"

namespace heat {

// Gaussian prior tying the physical f2 value at a cold outdoor temperature to
// a target (typically the reference model's estimate at the same point).
struct ColdAnchor {
    double t_out_c = -20.0;
    double target = 0.0;       // kW.m2/W
    double std = 1e-3;
};

struct BlockPrior {
    double smoothness_weight = 30.0;  // second differences get prior std 1/weight
    double coeff_std = 50.0;          // prior std on raw weights
};

enum class NoisePolicy { fixed, estimate };

struct PriorSpec {
    BlockPrior f1{};
    BlockPrior f2{30.0, 5.0};
    double intercept_std = 1e4;   // effectively flat
    double storage_std = 1e3;
    std::optional<ColdAnchor> cold_anchor;
    NoisePolicy noise_policy = NoisePolicy::estimate;
    double fixed_noise_std = 1.0;  // kW, used when noise_policy == fixed

    void validate() const;
};

// Stacked prior rows: (B theta - mu) has independent Gaussian entries with the
// given per-row stds.
struct PriorSystem {
    Eigen::MatrixXd B;
    Eigen::VectorXd mu;
    Eigen::VectorXd row_std;
};

struct GamModelSpec {
    BasisSpec f1 = default_f1_basis();
    BasisSpec f2 = default_f2_basis();
    TBasePolicy t_base{};
    bool include_storage = false;
};

PriorSystem build_prior_system(const DesignMatrix& design, const GamModelSpec& spec,
                               const PriorSpec& prior);

// Gaussian posterior over the stacked weights; self-contained for prediction.
class GamPosterior {
public:
    Eigen::VectorXd theta_mean;
    Eigen::MatrixXd theta_cov;
    double noise_std = 1.0;

    BasisSpec f1, f2;
    TBasePolicy t_base{};
    bool include_storage = false;

    Date train_start{}, train_end{};
    double train_t_out_min = 0.0, train_t_out_max = 0.0;

    struct FitInfo {
        std::size_t n_rows = 0;
        double resid_rms = 0.0;
        double condition = 0.0;
        std::vector<std::string> warnings;
    };
    FitInfo fit;

    struct Prediction {
        double mean;  // kW
        double std;   // kW, includes observation noise
    };
    Prediction predict(double t_out, double phi_rad, std::optional<double> t_in = std::nullopt) const;

    double intercept() const;
    // Physical radiation-coefficient function: f2(t_out) such that the model
    // radiation term is -f2(t_out) * phi_rad.
    double f2_value(double t_out) const;

    std::string to_json() const;
    static GamPosterior from_json(const std::string& json);
};

GamPosterior calibrate_gam(const DesignMatrix& design, const Eigen::VectorXd& y,
                           const GamModelSpec& spec, const PriorSpec& prior);
GamPosterior calibrate_gam(const DailySeries& series, const GamModelSpec& spec,
                           const PriorSpec& prior);

// One-pass residual-based noise scale: calibrate at unit sigma, take the RMS
// residual, recalibrate once. Needs >=10 rows.
double estimate_noise_std(const DesignMatrix& design, const Eigen::VectorXd& y,
                          const GamModelSpec& spec, const PriorSpec& prior);

} // namespace heat
