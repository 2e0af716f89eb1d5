#pragma once
// MKG-RAG: query templating, top-k hybrid retrieval with forced variable
// inclusion, LCA-guided expansion, equation role assignment and JSON
// subgraph serialization.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amkg/embedding.hpp"
#include "amkg/hierarchy.hpp"
#include "amkg/kg_store.hpp"

namespace amkg::retrieval {

struct Query {
    std::vector<std::string> inputs;          // X, nonempty
    std::optional<std::string> target;        // y
    std::optional<std::string> natural_text;  // used verbatim when present
};

// Deterministic template when no natural text is given. Throws QueryError
// on empty X.
std::string build_query(const Query& q);

struct Subgraph {
    std::vector<kg::Entity> entities;    // sorted by uri
    std::vector<kg::Relation> relations; // both endpoints inside
    std::map<std::string, std::string> roles;  // equation uri -> target|input_related|supporting
    std::vector<std::string> summaries;  // LCA + descendant cluster summaries
    std::map<std::string, int> kind_counts;
    std::map<std::string, int> role_counts;
    std::vector<std::string> warnings;  // e.g. unresolved query variables
    std::string lca_cluster;            // empty when virtual root
    int lca_layer = 0;
    bool truncated = false;

    const kg::Entity* find(const std::string& uri) const;
    bool contains(const std::string& uri) const;
};

struct RetrievalParams {
    int top_k = 10;
    std::size_t max_entities = 200;  // nearest-first truncation cap
};

// Seed set = top-k by cosine against the query text embedding, plus the
// forced X and y entities; expansion adds the LCA cluster descendants and
// 1-hop relation neighbors. Throws RetrievalError on an empty graph.
Subgraph retrieve(const kg::KnowledgeGraph& g, const hierarchy::Hierarchy& h,
                  const embed::EmbeddingMap& embeddings, const Query& query,
                  embed::EmbeddingBackend& text_backend, const RetrievalParams& params = {});

// target: has_output reaches y. input_related: has_input/influences touches
// some x. supporting: within 2 equation-to-equation hops (shared variables
// or derived_from) of the former.
std::map<std::string, std::string> assign_equation_roles(const Subgraph& sg,
                                                         const std::vector<std::string>& inputs,
                                                         const std::optional<std::string>& target);

nlohmann::json serialize_subgraph(const Subgraph& sg);
Subgraph subgraph_from_json(const nlohmann::json& j);

// Variable symbols usable inside candidate equations: variable latex symbols
// plus canonical names of everything in the subgraph.
std::vector<std::string> subgraph_symbols(const Subgraph& sg);

}  // namespace amkg::retrieval
