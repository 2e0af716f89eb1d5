#include "amkg/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "amkg/errors.hpp"
#include "amkg/expression.hpp"
#include "amkg/util.hpp"

namespace amkg::embed {

using nlohmann::json;

// ── Fixture embedder ─────────────────────────────────────────────────────

HashEmbeddingBackend::HashEmbeddingBackend(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {}

std::vector<double> HashEmbeddingBackend::embed(const std::string& text) {
    std::vector<double> acc(dim_, 0.0);
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        util::DeterministicRng rng(util::fnv1a64(token) ^ seed_);
        for (std::size_t i = 0; i < dim_; ++i) acc[i] += rng.normal();
        token.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return l2_normalize(std::move(acc));
}

// ── Descriptions ─────────────────────────────────────────────────────────

std::string latex_to_description(const std::string& latex) {
    try {
        return eqn::render_words(eqn::parse_latex(latex));
    } catch (const Error&) {
    }
    try {
        return eqn::render_words(eqn::parse_expression(latex));
    } catch (const Error&) {
    }
    // Fallback: strip formatting and backslash tokens.
    std::string out;
    out.reserve(latex.size());
    std::size_t i = 0;
    while (i < latex.size()) {
        char c = latex[i];
        if (c == '\\') {
            std::size_t start = ++i;
            while (i < latex.size() && std::isalpha(static_cast<unsigned char>(latex[i]))) ++i;
            std::string name = latex.substr(start, i - start);
            if (name != "left" && name != "right" && !name.empty()) {
                if (!out.empty() && out.back() != ' ') out.push_back(' ');
                out += name;
            }
            continue;
        }
        if (c == '{' || c == '}' || c == '$') {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
            ++i;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// ── Vector algebra ───────────────────────────────────────────────────────

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> l2_normalize(std::vector<double> v) {
    double n = l2_norm(v);
    if (n == 0.0) return v;
    for (double& x : v) x /= n;
    return v;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionError("vector dimensions differ: " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ── Entity embedding ─────────────────────────────────────────────────────

HybridVector embed_entity(const kg::Entity& entity, EmbeddingBackend& formula_backend,
                          EmbeddingBackend& text_backend) {
    HybridVector hv;
    std::string text_input = entity.name + "\n" + ontology::kind_name(entity.kind) + "\n" +
                             entity.description;
    if (entity.unit) text_input += "\nunit: " + *entity.unit;
    hv.text = l2_normalize(text_backend.embed(text_input));
    if (hv.text.size() != text_backend.dimension())
        throw BackendError("text backend returned wrong dimension");

    if (entity.latex) {
        hv.formula = l2_normalize(formula_backend.embed(latex_to_description(*entity.latex)));
        if (hv.formula.size() != formula_backend.dimension())
            throw BackendError("formula backend returned wrong dimension");
    } else {
        hv.formula.assign(formula_backend.dimension(), 0.0);
    }

    hv.fused.reserve(hv.formula.size() + hv.text.size());
    for (double x : hv.formula) hv.fused.push_back(kFormulaWeight * x);
    for (double x : hv.text) hv.fused.push_back(kTextWeight * x);
    return hv;
}

EmbeddingMap embed_graph(const kg::KnowledgeGraph& g, EmbeddingBackend& formula_backend,
                         EmbeddingBackend& text_backend, int jobs) {
    std::vector<const kg::Entity*> order;
    order.reserve(g.entities.size());
    for (const auto& [uri, e] : g.entities) order.push_back(&e);

    std::vector<std::vector<double>> fused(order.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            fused[i] = embed_entity(*order[i], formula_backend, text_backend).fused;
    };
    if (jobs <= 1 || order.size() < 2) {
        work(0, order.size());
    } else {
        std::size_t n = order.size();
        std::size_t workers = std::min<std::size_t>(jobs, n);
        std::vector<std::thread> threads;
        std::size_t per = (n + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t b = w * per, e = std::min(n, b + per);
            if (b >= e) break;
            threads.emplace_back(work, b, e);
        }
        for (auto& t : threads) t.join();
    }

    EmbeddingMap out;
    for (std::size_t i = 0; i < order.size(); ++i) out.emplace(order[i]->uri, std::move(fused[i]));
    return out;
}

void save_embeddings(const EmbeddingMap& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& [uri, vec] : m) {
        json j;
        j["uri"] = uri;
        j["fused"] = vec;
        out << j.dump() << "\n";
    }
}

EmbeddingMap load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    EmbeddingMap m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        m.emplace(j.at("uri").get<std::string>(), j.at("fused").get<std::vector<double>>());
    }
    return m;
}

}  // namespace amkg::embed
