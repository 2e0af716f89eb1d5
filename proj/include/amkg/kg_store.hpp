#pragma once
// Entity/relation store with URI-keyed deduplication, weight accumulation,
// canonical-LaTeX selection and JSONL persistence.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>

#include <json.hpp>
#include <utility>
#include <vector>

#include "amkg/ontology.hpp"

namespace amkg::kg {

struct Entity {
    std::string uri;   // amkg://<kind>/<canonical_name>, derived
    std::string name;  // canonical lower_snake_case
    ontology::EntityKind kind = ontology::EntityKind::Variable;
    std::string description;
    std::optional<std::string> latex;  // full equation, or the bare symbol for variables
    std::optional<std::string> unit;
    std::vector<std::string> provenance;  // chunk ids, kept sorted unique
};

std::string make_uri(ontology::EntityKind kind, const std::string& canonical_name);

struct RelationKey {
    std::string subject;
    ontology::RelationKind predicate = ontology::RelationKind::HasInput;
    std::string object;

    auto tie() const { return std::tie(subject, predicate, object); }
    bool operator<(const RelationKey& o) const { return tie() < o.tie(); }
    bool operator==(const RelationKey& o) const { return tie() == o.tie(); }
    std::string to_string() const;
};

struct Relation {
    std::string subject;
    ontology::RelationKind predicate = ontology::RelationKind::HasInput;
    std::string object;
    std::optional<int> sign;  // -1, 0, +1; mandatory for influences
    std::int64_t weight = 1;  // number of merged observations
    std::string evidence;     // one representative sentence
    std::vector<std::string> provenance;

    RelationKey key() const { return {subject, predicate, object}; }
};

// Conflicting influence sign seen during merging; the first sign wins and
// the conflict is surfaced through validate_graph notes.
struct SignConflict {
    RelationKey key;
    int kept = 0;
    int rejected = 0;
};

struct KnowledgeGraph {
    std::map<std::string, Entity> entities;       // uri -> entity
    std::map<RelationKey, Relation> relations;
    std::vector<SignConflict> sign_conflicts;

    bool has_entity(const std::string& uri) const { return entities.count(uri) > 0; }
    const Entity* find_by_name(const std::string& canonical_name,
                               std::optional<ontology::EntityKind> kind = std::nullopt) const;

    // Merge an entity under the (kind, name) identity. Throws ValidationError
    // for equations with invalid LaTeX.
    void upsert_entity(Entity e);

    // Merge a relation under the (subject, predicate, object) key; weights
    // accumulate, the first evidence sentence is retained. Throws
    // EndpointError when an endpoint is not stored.
    void upsert_relation(Relation r);

    // All relations incident to `uri` (either direction), optionally filtered
    // by predicate, paired with the far entity. Sorted by (far uri, predicate).
    // Throws NotFoundError for unknown uris.
    std::vector<std::pair<Relation, Entity>> neighbors(
        const std::string& uri,
        const std::vector<ontology::RelationKind>& predicate_filter = {}) const;
};

// Drops every item violating R1-R5 until the graph re-validates clean;
// removed items are itemized in the report.
std::pair<KnowledgeGraph, ontology::ValidationReport> post_process(const KnowledgeGraph& g);

// Canonical-LaTeX completeness ordering: more distinct symbols, then longer
// string, then lexicographically smaller. True when `candidate` should
// replace `current`.
bool latex_more_complete(const std::string& candidate, const std::string& current);

// JSONL persistence: entities.jsonl + relations.jsonl under `dir`,
// sorted records, stable field order.
void save_graph(const KnowledgeGraph& g, const std::string& dir);
KnowledgeGraph load_graph(const std::string& dir);

nlohmann::json entity_to_json(const Entity& e);
Entity entity_from_json(const nlohmann::json& j);
nlohmann::json relation_to_json(const Relation& r);
Relation relation_from_json(const nlohmann::json& j);

}  // namespace amkg::kg
