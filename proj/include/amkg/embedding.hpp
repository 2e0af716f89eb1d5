#pragma once
// Hybrid formula+text vectorization. Formula LaTeX is rendered to English
// first, both segments are unit-normalized, and fusion is a weighted
// concatenation at a fixed 7:3 text:formula ratio. Fused vectors are not
// re-normalized, so the ratio survives into cosine comparisons.

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "amkg/kg_store.hpp"

namespace amkg::embed {

inline constexpr double kTextWeight = 0.7;
inline constexpr double kFormulaWeight = 0.3;
inline constexpr std::size_t kDefaultFormulaDim = 384;
inline constexpr std::size_t kDefaultTextDim = 1536;

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string kind() const = 0;  // "fixture" | "live"
};

// Deterministic token-bag embedder: each token hashes to a fixed pseudo-
// random direction and the token sum is unit-normalized. Texts sharing
// tokens are similar; unrelated texts are near-orthogonal.
class HashEmbeddingBackend : public EmbeddingBackend {
public:
    HashEmbeddingBackend(std::size_t dim, std::uint64_t seed);
    std::vector<double> embed(const std::string& text) override;
    std::size_t dimension() const override { return dim_; }
    std::string kind() const override { return "fixture"; }

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

// OpenAI-compatible POST /embeddings client.
class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    HttpEmbeddingBackend(std::string base_url, std::string api_key, std::string model,
                         std::size_t dim);
    std::vector<double> embed(const std::string& text) override;
    std::size_t dimension() const override { return dim_; }
    std::string kind() const override { return "live"; }

private:
    std::string base_url_, api_key_, model_;
    std::size_t dim_;
};

struct HybridVector {
    std::vector<double> formula;  // unit norm, or all-zero when no LaTeX
    std::vector<double> text;     // unit norm
    std::vector<double> fused;    // [0.3*formula ; 0.7*text]
};

// Operators and functions become words, formatting commands are stripped.
// Falls back to the raw string minus backslashes; never throws.
std::string latex_to_description(const std::string& latex);

HybridVector embed_entity(const kg::Entity& entity, EmbeddingBackend& formula_backend,
                          EmbeddingBackend& text_backend);

// Standard cosine; defined as 0 when either vector is zero. Throws
// DimensionError on length mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// In-place L2 normalization; the zero vector stays zero.
std::vector<double> l2_normalize(std::vector<double> v);
double l2_norm(std::span<const double> v);

using EmbeddingMap = std::map<std::string, std::vector<double>>;  // uri -> fused

EmbeddingMap embed_graph(const kg::KnowledgeGraph& g, EmbeddingBackend& formula_backend,
                         EmbeddingBackend& text_backend, int jobs = 1);

void save_embeddings(const EmbeddingMap& m, const std::string& path);
EmbeddingMap load_embeddings(const std::string& path);

}  // namespace amkg::embed
