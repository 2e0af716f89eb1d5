#pragma once
// Equation-centered chunking, rule-based ontology hints, two-stage
// entity/relation extraction against a generation backend, and Partial-F1
// evaluation against reference graphs.

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "amkg/backend.hpp"
#include "amkg/kg_store.hpp"

namespace amkg::extraction {

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Subword-style estimate: alnum runs count ceil(len/4), punctuation counts 1.
// Additive over whitespace-joined pieces.
std::size_t bpe_token_estimate(std::string_view text);
std::size_t whitespace_token_count(std::string_view text);

struct Chunk {
    std::string id;  // content hash, "chunk_" + 16 hex digits
    std::string text;
    std::vector<std::string> equations;  // LaTeX bodies found in the chunk
    std::size_t token_count = 0;
};

// Packs paragraphs and display equations into chunks of at most `max_tokens`,
// never splitting inside an equation; a display equation keeps its preceding
// paragraph as context (overlap allowed). Throws ChunkOverflowError when a
// single equation exceeds the budget.
std::vector<Chunk> chunk_document(const std::string& doc,
                                  const TokenCounter& tokenizer = bpe_token_estimate,
                                  std::size_t max_tokens = 1024);

struct VariableRole {
    std::string symbol;
    std::string role;  // input | output | constant | unknown
};

struct EquationHint {
    std::string latex;
    std::vector<VariableRole> variables;
};

struct HintSet {
    std::vector<EquationHint> equations;
    std::vector<std::string> process_parameters;
    std::vector<std::string> performance_metrics;
    std::vector<std::string> assumptions;
    std::vector<std::string> regimes;  // parameter_min_max_unit
    std::vector<std::string> materials;
};

// Rule-based, no LLM involved: LHS symbols get the output role, RHS symbols
// the input role; lexicon matches fill the other categories; numeric-range
// phrases become regime hints.
HintSet generate_hints(const Chunk& chunk);

// Serialized per-category hint payload is capped at this many tokens.
inline constexpr std::size_t kHintCategoryTokenCap = 2000;

struct Prompt {
    std::string system;
    std::string user;
    std::string schema_id;
};

Prompt build_entity_prompt(const Chunk& chunk, const HintSet& hints);
Prompt build_relation_prompt(const Chunk& chunk, const std::vector<kg::Entity>& entities);

struct EntityExtraction {
    std::vector<kg::Entity> entities;
    int dropped_records = 0;  // malformed or ontology-violating records
};

// Stage 1. One retry on unparseable output, then ExtractionError carrying
// the raw response. Invalid records are dropped and counted.
EntityExtraction extract_entities(const Chunk& chunk, const HintSet& hints,
                                  llm::GenerationBackend& backend);

// Stage 2: relations restricted to ontology predicates between the given
// entities; influences without a sign are dropped.
std::vector<kg::Relation> extract_relations(const Chunk& chunk,
                                            const std::vector<kg::Entity>& entities,
                                            llm::GenerationBackend& backend);

struct ExtractionMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double partial_f1 = 0.0;
    int matched = 0;
    int spurious = 0;
    int missed = 0;
};

// Triple matching under exact predicates and partial endpoint-name matching
// (exact after normalization, or token-set Jaccard >= 0.5 on underscore-split
// tokens), one-to-one via greedy highest-score-first assignment.
ExtractionMetrics partial_f1(const kg::KnowledgeGraph& predicted,
                             const kg::KnowledgeGraph& reference);

// Underscore-token Jaccard between two canonical names.
double name_jaccard(const std::string& a, const std::string& b);

}  // namespace amkg::extraction
