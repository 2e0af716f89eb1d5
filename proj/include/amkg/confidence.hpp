#pragma once
// Composite extrapolation-confidence scoring: range-normalized distance
// decay, fit quality, bootstrap prediction uncertainty, assumption and
// sign-consistency penalties, and the weighted total.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amkg/equation_engine.hpp"
#include "amkg/retrieval.hpp"

namespace amkg::confidence {

struct VarDomain {
    double min = 0.0;
    double max = 0.0;
};

struct TrainingDomain {
    std::map<std::string, VarDomain> ranges;  // per input variable
    double sigma_y = 0.0;                     // target standard deviation
};

TrainingDomain domain_from_dataset(const eqn::Dataset& data,
                                   const std::vector<std::string>& inputs,
                                   const std::string& target);

// Distance outside [min, max]; zero inside.
double extrapolation_distance(double x, const VarDomain& domain);

// Range-normalized Euclidean combination; zero-width ranges divide by 1 and
// are reported through `warnings`.
double normalized_distance(const std::map<std::string, double>& x, const TrainingDomain& domain,
                           std::vector<std::string>* warnings = nullptr);

double distance_confidence(double d_norm, double alpha_d);
double fit_confidence(double r_squared);

struct BootstrapResult {
    double s_uncertainty = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int dropped = 0;  // resamples whose refit failed
};

// B resamples with replacement, refit each, evaluate at x_star; the score is
// 1 - min(1, CI width / sigma_y). Throws UncertaintyError when sigma_y == 0
// and BootstrapError when more than 20% of refits fail.
BootstrapResult bootstrap_uncertainty(const eqn::Evaluator& model, const eqn::Dataset& data,
                                      const std::string& target_column,
                                      const std::map<std::string, double>& x_star, int B,
                                      std::uint64_t seed, double sigma_y);

double assumption_penalty(int n_assumptions);

struct InfluenceEntry {
    std::string input;  // model input symbol
    int sign = 0;       // expected sign, +1/-1/0
};
using InfluenceSpec = std::vector<InfluenceEntry>;

// Expected signs harvested from subgraph influences relations; a parameter
// maps onto a model symbol through corresponds_to or a name match.
InfluenceSpec harvest_influences(const retrieval::Subgraph& sg,
                                 const std::vector<std::string>& inputs,
                                 const std::string& target);

struct SignResult {
    double s_sign = 1.0;
    int matched = 0;
    int mismatched = 0;
    int excluded = 0;  // non-finite derivative at the centroid
};

// Compares the sign of the fitted model's derivative at the training-domain
// centroid with each expected influence sign. No matched pairs -> 1.
SignResult sign_consistency(const eqn::Evaluator& model, std::span<const double> theta,
                            const TrainingDomain& domain, const InfluenceSpec& spec);

double physics_confidence(double s_assumption, double s_sign);

struct ConfidenceWeights {
    double alpha = 0.4;   // distance
    double beta = 0.3;    // statistical
    double gamma = 0.2;   // physics
    double delta = 0.1;   // uncertainty
    double alpha_d = 2.0; // distance decay rate
    int bootstrap_b = 500;
    std::uint64_t seed = 42;
};

// Weighted linear combination, clamped to [0, 1].
double total_confidence(double s_dist, double s_stat, double s_phys, double s_uncertainty,
                        const ConfidenceWeights& weights);

struct ConfidenceReport {
    double d_norm = 0.0;
    double s_dist = 1.0;
    double s_fit = 0.0;
    double s_uncertainty = 0.0;
    double s_stat = 0.0;
    double s_assumption = 1.0;
    double s_sign = 1.0;
    double s_regime = 1.0;  // fixed at 1 pending regime validation logic
    double s_phys = 1.0;
    double c_total = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_assumptions = 0;
    std::vector<std::string> notes;
};

// Assembles the full report for one fitted model at one evaluation point.
ConfidenceReport score_model(const eqn::Evaluator& model, const eqn::FitResult& fit,
                             const eqn::Dataset& data, const std::string& target_column,
                             const std::map<std::string, double>& x_star,
                             const InfluenceSpec& influences, int n_assumptions,
                             const ConfidenceWeights& weights);

int count_subgraph_assumptions(const retrieval::Subgraph& sg);

}  // namespace amkg::confidence
