#include "amkg/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "amkg/errors.hpp"
#include "amkg/util.hpp"

namespace amkg::confidence {

TrainingDomain domain_from_dataset(const eqn::Dataset& data,
                                   const std::vector<std::string>& inputs,
                                   const std::string& target) {
    TrainingDomain d;
    for (const auto& name : inputs) {
        auto it = data.columns.find(name);
        if (it == data.columns.end() || it->second.empty())
            throw UncertaintyError("dataset lacks input column " + name);
        auto [mn, mx] = std::minmax_element(it->second.begin(), it->second.end());
        d.ranges[name] = {*mn, *mx};
    }
    auto yit = data.columns.find(target);
    if (yit == data.columns.end() || yit->second.empty())
        throw UncertaintyError("dataset lacks target column " + target);
    const auto& y = yit->second;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    // Sample standard deviation; a single row degenerates to zero.
    d.sigma_y = y.size() > 1 ? std::sqrt(var / static_cast<double>(y.size() - 1)) : 0.0;
    return d;
}

double extrapolation_distance(double x, const VarDomain& domain) {
    if (x > domain.max) return x - domain.max;
    if (x < domain.min) return domain.min - x;
    return 0.0;
}

double normalized_distance(const std::map<std::string, double>& x, const TrainingDomain& domain,
                           std::vector<std::string>* warnings) {
    double sum = 0.0;
    for (const auto& [name, value] : x) {
        auto it = domain.ranges.find(name);
        if (it == domain.ranges.end()) continue;
        double width = it->second.max - it->second.min;
        if (width <= 0.0) {
            width = 1.0;
            if (warnings)
                warnings->push_back("zero-width training range for " + name + "; divisor 1 used");
        }
        double d = extrapolation_distance(value, it->second) / width;
        sum += d * d;
    }
    return std::sqrt(sum);
}

double distance_confidence(double d_norm, double alpha_d) {
    return std::exp(-alpha_d * d_norm);
}

double fit_confidence(double r_squared) { return std::clamp(r_squared, 0.0, 1.0); }

BootstrapResult bootstrap_uncertainty(const eqn::Evaluator& model, const eqn::Dataset& data,
                                      const std::string& target_column,
                                      const std::map<std::string, double>& x_star, int B,
                                      std::uint64_t seed, double sigma_y) {
    if (sigma_y == 0.0)
        throw UncertaintyError("sigma_y is zero; the uncertainty score is undefined");
    if (B < 50) throw BootstrapError("bootstrap needs at least 50 resamples");
    auto yit = data.columns.find(target_column);
    if (yit == data.columns.end()) throw BootstrapError("dataset lacks target " + target_column);
    std::size_t n = yit->second.size();
    if (n == 0) throw BootstrapError("empty dataset");

    std::vector<double> x_row;
    for (const auto& name : model.inputs()) {
        auto it = x_star.find(name);
        if (it == x_star.end()) throw BootstrapError("x_star lacks input " + name);
        x_row.push_back(it->second);
    }

    // The whole index sequence comes from the seed up front, so execution
    // order cannot change the percentiles.
    util::DeterministicRng rng(seed);
    std::vector<std::vector<std::size_t>> index_sets(B, std::vector<std::size_t>(n));
    for (int b = 0; b < B; ++b)
        for (std::size_t i = 0; i < n; ++i)
            index_sets[b][i] = static_cast<std::size_t>(rng.below(n));

    // Start every refit from the full-data fit.
    eqn::FitOptions fit_options;
    fit_options.seed = seed;
    eqn::FitResult full = eqn::fit(model, data, target_column, {}, fit_options);

    std::vector<double> predictions;
    predictions.reserve(B);
    int dropped = 0;
    for (int b = 0; b < B; ++b) {
        eqn::Dataset resample;
        for (const auto& [name, column] : data.columns) {
            auto& dst = resample.columns[name];
            dst.reserve(n);
            for (std::size_t idx : index_sets[b]) dst.push_back(column[idx]);
        }
        resample.rows = n;
        try {
            eqn::FitResult rf = eqn::fit(model, resample, target_column, full.theta, fit_options);
            double pred = model(x_row, rf.theta);
            if (!std::isfinite(pred)) {
                ++dropped;
                continue;
            }
            predictions.push_back(pred);
        } catch (const Error&) {
            ++dropped;
        }
    }
    if (dropped > B / 5)
        throw BootstrapError("more than 20% of bootstrap refits failed (" +
                             std::to_string(dropped) + "/" + std::to_string(B) + ")");

    BootstrapResult result;
    result.dropped = dropped;
    result.ci_low = util::percentile(predictions, 2.5);
    result.ci_high = util::percentile(predictions, 97.5);
    double width = result.ci_high - result.ci_low;
    result.s_uncertainty = 1.0 - std::min(1.0, width / sigma_y);
    return result;
}

double assumption_penalty(int n_assumptions) {
    return 1.0 - std::min(0.3, 0.05 * static_cast<double>(n_assumptions));
}

InfluenceSpec harvest_influences(const retrieval::Subgraph& sg,
                                 const std::vector<std::string>& inputs,
                                 const std::string& target) {
    // corresponds_to links plus name matches map graph-level parameters and
    // performances onto model symbols.
    auto symbol_aliases = [&](const std::string& symbol) {
        std::set<std::string> uris;
        for (const auto& e : sg.entities) {
            bool direct = (e.latex && *e.latex == symbol);
            try {
                direct = direct || e.name == ontology::normalize_entity_name(symbol);
            } catch (const Error&) {
            }
            if (direct) uris.insert(e.uri);
        }
        // Entities linked by corresponds_to to any alias count as well.
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& rel : sg.relations) {
                if (rel.predicate != ontology::RelationKind::CorrespondsTo) continue;
                if (uris.count(rel.object) && !uris.count(rel.subject)) {
                    uris.insert(rel.subject);
                    grew = true;
                }
                if (uris.count(rel.subject) && !uris.count(rel.object)) {
                    uris.insert(rel.object);
                    grew = true;
                }
            }
        }
        return uris;
    };

    std::set<std::string> target_uris = symbol_aliases(target);
    InfluenceSpec spec;
    for (const auto& x : inputs) {
        std::set<std::string> x_uris = symbol_aliases(x);
        std::optional<int> sign;
        for (const auto& rel : sg.relations) {
            if (rel.predicate != ontology::RelationKind::Influences || !rel.sign) continue;
            if (x_uris.count(rel.subject) && target_uris.count(rel.object)) {
                sign = *rel.sign;
                break;
            }
        }
        if (sign) spec.push_back({x, *sign});
    }
    return spec;
}

SignResult sign_consistency(const eqn::Evaluator& model, std::span<const double> theta,
                            const TrainingDomain& domain, const InfluenceSpec& spec) {
    SignResult result;
    const auto& inputs = model.inputs();
    std::vector<double> centroid(inputs.size(), 0.0);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto it = domain.ranges.find(inputs[i]);
        if (it != domain.ranges.end()) centroid[i] = 0.5 * (it->second.min + it->second.max);
    }

    for (const auto& entry : spec) {
        if (entry.sign == 0) continue;
        auto pos = std::find(inputs.begin(), inputs.end(), entry.input);
        if (pos == inputs.end()) continue;
        std::size_t idx = static_cast<std::size_t>(pos - inputs.begin());

        double h = 1e-6 * std::max(1.0, std::abs(centroid[idx]));
        std::vector<double> xp = centroid, xm = centroid;
        xp[idx] += h;
        xm[idx] -= h;
        double d = (model(xp, theta) - model(xm, theta)) / (2.0 * h);
        if (!std::isfinite(d)) {
            ++result.excluded;
            continue;
        }
        ++result.matched;
        int model_sign = d > 1e-12 ? 1 : (d < -1e-12 ? -1 : 0);
        if (model_sign != entry.sign) ++result.mismatched;
    }
    result.s_sign = result.matched == 0
                        ? 1.0
                        : 1.0 - static_cast<double>(result.mismatched) /
                                    static_cast<double>(result.matched);
    return result;
}

double physics_confidence(double s_assumption, double s_sign) {
    const double s_regime = 1.0;
    return s_regime * s_assumption * s_sign;
}

double total_confidence(double s_dist, double s_stat, double s_phys, double s_uncertainty,
                        const ConfidenceWeights& w) {
    double c = w.alpha * s_dist + w.beta * s_stat + w.gamma * s_phys + w.delta * s_uncertainty;
    return std::clamp(c, 0.0, 1.0);
}

ConfidenceReport score_model(const eqn::Evaluator& model, const eqn::FitResult& fit,
                             const eqn::Dataset& data, const std::string& target_column,
                             const std::map<std::string, double>& x_star,
                             const InfluenceSpec& influences, int n_assumptions,
                             const ConfidenceWeights& weights) {
    ConfidenceReport report;
    TrainingDomain domain = domain_from_dataset(data, model.inputs(), target_column);

    report.d_norm = normalized_distance(x_star, domain, &report.notes);
    report.s_dist = distance_confidence(report.d_norm, weights.alpha_d);
    report.s_fit = fit_confidence(fit.r_squared);

    BootstrapResult boot = bootstrap_uncertainty(model, data, target_column, x_star,
                                                 weights.bootstrap_b, weights.seed, domain.sigma_y);
    report.s_uncertainty = boot.s_uncertainty;
    report.ci_low = boot.ci_low;
    report.ci_high = boot.ci_high;
    if (boot.dropped > 0)
        report.notes.push_back(std::to_string(boot.dropped) + " bootstrap refits dropped");

    report.s_stat = (report.s_fit + report.s_uncertainty) / 2.0;
    report.n_assumptions = n_assumptions;
    report.s_assumption = assumption_penalty(n_assumptions);
    SignResult sign = sign_consistency(model, fit.theta, domain, influences);
    report.s_sign = sign.s_sign;
    if (sign.excluded > 0)
        report.notes.push_back(std::to_string(sign.excluded) +
                               " influence pairs excluded (non-finite derivative)");
    report.s_phys = physics_confidence(report.s_assumption, report.s_sign);
    report.c_total = total_confidence(report.s_dist, report.s_stat, report.s_phys,
                                      report.s_uncertainty, weights);
    return report;
}

int count_subgraph_assumptions(const retrieval::Subgraph& sg) {
    std::set<std::string> assumptions;
    for (const auto& rel : sg.relations) {
        if (rel.predicate != ontology::RelationKind::RequiresAssumption) continue;
        if (!sg.roles.count(rel.subject)) continue;  // only roled equations
        assumptions.insert(rel.object);
    }
    return static_cast<int>(assumptions.size());
}

}  // namespace amkg::confidence
