#pragma once
// Subgraph-conditioned candidate equation generation, CSV dataset ingest,
// and nonlinear least-squares fitting (damped Gauss-Newton with a
// finite-difference Jacobian) with R2/RMSE and t-based confidence intervals.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amkg/backend.hpp"
#include "amkg/expression.hpp"
#include "amkg/extraction.hpp"
#include "amkg/retrieval.hpp"

namespace amkg::eqn {

struct CandidateEquation {
    std::string latex;                    // normalized form
    std::string target;                   // LHS symbol
    std::vector<std::string> inputs;      // free variable symbols
    std::vector<std::string> parameters;  // k_1, k_2, ... in index order
    Expression rhs;
};

struct GenerateOptions {
    int m = 3;  // requested candidate count
};

extraction::Prompt build_candidate_prompt(const retrieval::Subgraph& sg,
                                          const std::vector<std::string>& inputs,
                                          const std::string& target, int m);

// Prompts the backend with the serialized subgraph under the four generation
// constraints, parses the JSON reply, and discards candidates using symbols
// outside the subgraph. Throws BackendError (transport/format after retry)
// and NoCandidateError when nothing survives.
std::vector<CandidateEquation> generate_candidates(const retrieval::Subgraph& sg,
                                                   const std::vector<std::string>& inputs,
                                                   const std::string& target, int m,
                                                   llm::GenerationBackend& backend);

// Parses one candidate LaTeX string and symbol-checks it against the allowed
// symbol set; nullopt when rejected.
std::optional<CandidateEquation> check_candidate(const std::string& latex,
                                                 const std::string& target,
                                                 const std::vector<std::string>& allowed_symbols);

struct Dataset {
    std::map<std::string, std::vector<double>> columns;
    std::map<std::string, std::string> units;
    std::size_t rows = 0;
};

// Header row names the symbols; an optional second line "unit:..." carries
// units; rows with non-finite or unparseable cells are filtered out.
Dataset load_csv(const std::string& path);
Dataset dataset_from_csv_text(const std::string& text);

struct FitOptions {
    int max_iterations = 200;
    double step_tol_abs = 1e-10;
    double step_tol_rel = 1e-8;
    std::uint64_t seed = 42;
};

struct FitResult {
    std::vector<double> theta;
    std::vector<std::vector<double>> covariance;
    bool covariance_ok = false;
    std::vector<double> std_errors;
    std::vector<std::pair<double, double>> ci95;
    double r_squared = 0.0;
    double rmse = 0.0;
    std::vector<double> residuals;
    std::size_t n_obs = 0;
    std::size_t n_params = 0;
    bool converged = false;
    int iterations = 0;
};

// theta0 defaults to all ones. Throws FitError when n_obs <= n_params or the
// model stays non-finite after a perturbed restart.
FitResult fit(const Evaluator& model, const Dataset& data, const std::string& target_column,
              std::vector<double> theta0 = {}, const FitOptions& options = {});

double predict(const Evaluator& model, std::span<const double> theta, std::span<const double> x);

// Central-difference Jacobian column step used by the fitter; exposed so a
// test can check it against an independent implementation.
double jacobian_step(double theta_j);

}  // namespace amkg::eqn
