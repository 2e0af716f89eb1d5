#include "amkg/equation_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "amkg/errors.hpp"
#include "amkg/extraction.hpp"
#include "amkg/util.hpp"

namespace amkg::eqn {

using nlohmann::json;

// ── Candidate generation ─────────────────────────────────────────────────

namespace {

const char* kCandidateSystemPrompt =
    "You compose governing equations for additive manufacturing processes. "
    "Constraints:\n"
    "1. Every candidate must express the target variable as a function of the "
    "specified input variables.\n"
    "2. Using variables, symbols or physical concepts that are not present in "
    "the given subgraph is prohibited.\n"
    "3. All free parameters must follow the naming convention k_1, k_2, ...\n"
    "4. Reply with JSON only: {\"candidates\": [\"<single-line LaTeX "
    "equation>\", ...]} restricted to standard operators (fractions, natural "
    "logarithms, exponentials, powers, products, sums).";

}  // namespace

extraction::Prompt build_candidate_prompt(const retrieval::Subgraph& sg,
                                          const std::vector<std::string>& inputs,
                                          const std::string& target, int m) {
    json task;
    task["target"] = target;
    task["inputs"] = inputs;
    task["m"] = m;

    extraction::Prompt p;
    p.schema_id = llm::kCandidateSchema;
    p.system = kCandidateSystemPrompt;
    p.user = std::string(llm::kSubgraphMarker) + "\n" + retrieval::serialize_subgraph(sg).dump(2) +
             "\n" + llm::kTaskMarker + "\n" + task.dump(2);
    return p;
}

std::optional<CandidateEquation> check_candidate(const std::string& latex,
                                                 const std::string& target,
                                                 const std::vector<std::string>& allowed_symbols) {
    ParsedEquation parsed;
    try {
        parsed = parse_latex(latex);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (parsed.target != target) return std::nullopt;

    std::set<std::string> allowed(allowed_symbols.begin(), allowed_symbols.end());
    CandidateEquation c;
    c.target = parsed.target;
    for (const auto& sym : variable_symbols(parsed.rhs)) {
        if (!allowed.count(sym)) return std::nullopt;  // anti-hallucination
        c.inputs.push_back(sym);
    }
    for (int idx : parameter_indices(parsed.rhs)) c.parameters.push_back("k_" + std::to_string(idx));
    c.rhs = std::move(parsed.rhs);
    c.latex = render_latex(ParsedEquation{c.target, c.rhs});
    return c;
}

std::vector<CandidateEquation> generate_candidates(const retrieval::Subgraph& sg,
                                                   const std::vector<std::string>& inputs,
                                                   const std::string& target, int m,
                                                   llm::GenerationBackend& backend) {
    if (m < 1) throw QueryError("candidate count must be at least 1");
    extraction::Prompt prompt = build_candidate_prompt(sg, inputs, target, m);

    auto request = [&]() {
        return backend.complete(prompt.system, prompt.user, prompt.schema_id);
    };
    std::string raw = request();
    json parsed = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) {
        raw = request();
        parsed = json::parse(raw, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded())
            throw BackendError("candidate generation returned malformed JSON: " + raw);
    }

    json list = json::array();
    if (parsed.is_array())
        list = parsed;
    else if (parsed.is_object() && parsed.contains("candidates"))
        list = parsed.at("candidates");

    std::vector<std::string> allowed = retrieval::subgraph_symbols(sg);
    allowed.insert(allowed.end(), inputs.begin(), inputs.end());
    allowed.push_back(target);

    std::vector<CandidateEquation> out;
    std::set<std::string> seen;
    for (const auto& item : list) {
        if (static_cast<int>(out.size()) >= m) break;
        std::string latex;
        if (item.is_string())
            latex = item.get<std::string>();
        else if (item.is_object() && item.contains("latex"))
            latex = item.at("latex").get<std::string>();
        else
            continue;
        auto candidate = check_candidate(latex, target, allowed);
        if (!candidate) continue;
        if (!seen.insert(candidate->latex).second) continue;
        out.push_back(std::move(*candidate));
    }
    if (out.empty())
        throw NoCandidateError("no candidate survived ontology checking; raw response: " + raw);
    return out;
}

// ── Dataset ──────────────────────────────────────────────────────────────

Dataset dataset_from_csv_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        for (char c : s + ",") {
            if (c == ',') {
                cells.push_back(util::trim(cell));
                cell.clear();
            } else {
                cell.push_back(c);
            }
        }
        return cells;
    };

    Dataset d;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (util::trim(line).empty()) continue;
        header = split(line);
        break;
    }
    if (header.empty()) throw IoError("CSV has no header row");
    for (const auto& h : header) d.columns[h] = {};

    while (std::getline(in, line)) {
        std::string trimmed = util::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.rfind("unit:", 0) == 0) {
            auto cells = split(trimmed.substr(5));
            for (std::size_t i = 0; i < cells.size() && i < header.size(); ++i)
                if (!cells[i].empty()) d.units[header[i]] = cells[i];
            continue;
        }
        auto cells = split(trimmed);
        if (cells.size() != header.size()) continue;
        std::vector<double> row(cells.size());
        bool ok = true;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            char* end = nullptr;
            row[i] = std::strtod(cells[i].c_str(), &end);
            if (end == cells[i].c_str() || *end != '\0' || !std::isfinite(row[i])) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;  // ingest filtering
        for (std::size_t i = 0; i < cells.size(); ++i) d.columns[header[i]].push_back(row[i]);
        ++d.rows;
    }
    return d;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read dataset " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return dataset_from_csv_text(buf.str());
}

// ── Fitting ──────────────────────────────────────────────────────────────

double jacobian_step(double theta_j) { return 1e-6 * std::max(1.0, std::abs(theta_j)); }

namespace {

constexpr double kNonFinitePenalty = 1e6;

struct Problem {
    const Evaluator& model;
    std::vector<const std::vector<double>*> inputs;
    const std::vector<double>& y;
    std::size_t n;

    // Residuals y - f with the non-finite penalty applied; reports whether
    // every prediction was finite.
    bool residuals(std::span<const double> theta, std::vector<double>& r) const {
        std::vector<double> x(inputs.size());
        bool all_finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < inputs.size(); ++c) x[c] = (*inputs[c])[i];
            double pred = model(x, theta);
            if (std::isfinite(pred)) {
                r[i] = y[i] - pred;
            } else {
                r[i] = kNonFinitePenalty;
                all_finite = false;
            }
        }
        return all_finite;
    }

    double sse(const std::vector<double>& r) const {
        double s = 0.0;
        for (double v : r) s += v * v;
        return s;
    }
};

// Solves (A + lambda*diag(A)) x = b in place; false when singular.
bool solve_damped(std::vector<std::vector<double>> a, std::vector<double> b, double lambda,
                  std::vector<double>& x) {
    std::size_t p = b.size();
    for (std::size_t i = 0; i < p; ++i) {
        double d = a[i][i];
        a[i][i] = d + lambda * std::max(d, 1e-12);
    }
    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < p; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t row = col + 1; row < p; ++row) {
            double factor = a[row][col] / a[col][col];
            for (std::size_t k = col; k < p; ++k) a[row][k] -= factor * a[col][k];
            b[row] -= factor * b[col];
        }
    }
    x.assign(p, 0.0);
    for (std::size_t i = p; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < p; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

// Central-difference Jacobian of the model predictions; non-finite entries
// become zero.
void numeric_jacobian(const Problem& prob, std::span<const double> theta,
                      std::vector<std::vector<double>>& jac) {
    std::size_t p = theta.size();
    std::vector<double> tp(theta.begin(), theta.end());
    std::vector<double> rp(prob.n), rm(prob.n);
    for (std::size_t j = 0; j < p; ++j) {
        double h = jacobian_step(theta[j]);
        tp[j] = theta[j] + h;
        prob.residuals(tp, rp);
        tp[j] = theta[j] - h;
        prob.residuals(tp, rm);
        tp[j] = theta[j];
        for (std::size_t i = 0; i < prob.n; ++i) {
            // d f / d theta = -(d r / d theta)
            double v = -(rp[i] - rm[i]) / (2.0 * h);
            jac[i][j] = std::isfinite(v) ? v : 0.0;
        }
    }
}

bool invert_matrix(std::vector<std::vector<double>> a, std::vector<std::vector<double>>& inv) {
    std::size_t p = a.size();
    inv.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) inv[i][i] = 1.0;
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < p; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        double d = a[col][col];
        for (std::size_t k = 0; k < p; ++k) {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for (std::size_t row = 0; row < p; ++row) {
            if (row == col) continue;
            double factor = a[row][col];
            for (std::size_t k = 0; k < p; ++k) {
                a[row][k] -= factor * a[col][k];
                inv[row][k] -= factor * inv[col][k];
            }
        }
    }
    return true;
}

}  // namespace

FitResult fit(const Evaluator& model, const Dataset& data, const std::string& target_column,
              std::vector<double> theta0, const FitOptions& options) {
    std::size_t p = model.parameters().size();
    auto yit = data.columns.find(target_column);
    if (yit == data.columns.end()) throw FitError("dataset lacks target column " + target_column);
    const std::vector<double>& y = yit->second;
    std::size_t n = y.size();
    if (n <= p)
        throw FitError("need more observations (" + std::to_string(n) + ") than parameters (" +
                       std::to_string(p) + ")");

    std::vector<const std::vector<double>*> inputs;
    for (const auto& name : model.inputs()) {
        auto it = data.columns.find(name);
        if (it == data.columns.end()) throw FitError("dataset lacks input column " + name);
        inputs.push_back(&it->second);
    }
    Problem prob{model, std::move(inputs), y, n};

    if (theta0.empty()) theta0.assign(p, 1.0);  // unity start
    if (theta0.size() != p) throw FitError("theta0 size does not match parameter count");

    std::vector<double> theta = theta0;
    std::vector<double> r(n);
    if (!prob.residuals(theta, r)) {
        // One retry from a perturbed start.
        util::DeterministicRng rng(options.seed);
        for (std::size_t j = 0; j < p; ++j)
            theta[j] = theta0[j] * (0.5 + rng.uniform()) + 0.1 * (rng.uniform() - 0.5);
        if (!prob.residuals(theta, r))
            throw FitError("model is non-finite at the start even after a perturbed restart",
                           theta);
    }

    double sse = prob.sse(r);
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;

    std::vector<std::vector<double>> jac(n, std::vector<double>(p, 0.0));
    std::vector<std::vector<double>> jtj(p, std::vector<double>(p, 0.0));
    std::vector<double> jtr(p, 0.0);
    std::vector<double> step, trial_r(n);

    for (; iter < options.max_iterations && !converged; ++iter) {
        numeric_jacobian(prob, theta, jac);
        for (std::size_t a = 0; a < p; ++a) {
            jtr[a] = 0.0;
            for (std::size_t b = a; b < p; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += jac[i][a] * jac[i][b];
                jtj[a][b] = jtj[b][a] = s;
            }
            for (std::size_t i = 0; i < n; ++i) jtr[a] += jac[i][a] * r[i];
        }

        bool stepped = false;
        while (lambda <= 1e12) {
            if (!solve_damped(jtj, jtr, lambda, step)) {
                lambda *= 10.0;
                continue;
            }
            std::vector<double> trial(p);
            for (std::size_t j = 0; j < p; ++j) trial[j] = theta[j] + step[j];
            prob.residuals(trial, trial_r);
            double trial_sse = prob.sse(trial_r);
            if (trial_sse < sse) {
                double step_norm = 0.0, theta_norm = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    step_norm += step[j] * step[j];
                    theta_norm += theta[j] * theta[j];
                }
                step_norm = std::sqrt(step_norm);
                theta_norm = std::sqrt(theta_norm);
                theta = std::move(trial);
                r = trial_r;
                sse = trial_sse;
                lambda = std::max(lambda / 10.0, 1e-12);
                stepped = true;
                if (step_norm <= options.step_tol_abs + options.step_tol_rel * theta_norm)
                    converged = true;
                break;
            }
            lambda *= 10.0;  // reject
        }
        if (!stepped) break;  // no acceptable step at any damping
    }

    FitResult result;
    result.theta = theta;
    result.n_obs = n;
    result.n_params = p;
    result.converged = converged;
    result.iterations = iter;

    prob.residuals(theta, r);
    result.residuals = r;
    double ssr = prob.sse(r);
    double mean_y = 0.0;
    for (double v : y) mean_y += v;
    mean_y /= static_cast<double>(n);
    double sst = 0.0;
    for (double v : y) sst += (v - mean_y) * (v - mean_y);
    result.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : 0.0);
    result.rmse = std::sqrt(ssr / static_cast<double>(n));

    numeric_jacobian(prob, theta, jac);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += jac[i][a] * jac[i][b];
            jtj[a][b] = jtj[b][a] = s;
        }
    std::vector<std::vector<double>> jtj_inv;
    double s2 = ssr / static_cast<double>(n - p);
    if (invert_matrix(jtj, jtj_inv)) {
        result.covariance_ok = true;
        result.covariance.assign(p, std::vector<double>(p, 0.0));
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b) result.covariance[a][b] = s2 * jtj_inv[a][b];
        boost::math::students_t tdist(static_cast<double>(n - p));
        double tq = boost::math::quantile(tdist, 0.975);
        for (std::size_t j = 0; j < p; ++j) {
            double se = std::sqrt(std::max(0.0, result.covariance[j][j]));
            result.std_errors.push_back(se);
            result.ci95.emplace_back(theta[j] - tq * se, theta[j] + tq * se);
        }
    } else {
        result.covariance_ok = false;
    }
    return result;
}

double predict(const Evaluator& model, std::span<const double> theta, std::span<const double> x) {
    return model(x, theta);
}

}  // namespace amkg::eqn
