#pragma once
// Minimal AM-KG schema: the closed sets of entity and relation kinds,
// name/LaTeX normalization rules, and the graph-level rules R1-R6.

#include <optional>
#include <string>
#include <vector>

namespace amkg::kg {
struct KnowledgeGraph;
}

namespace amkg::ontology {

enum class EntityKind {
    Equation,
    Variable,
    Assumption,
    ProcessParameter,
    Performance,
    Regime,
    Material,
    Phenomenon,
};

enum class RelationKind {
    HasInput,
    HasOutput,
    Influences,
    RequiresAssumption,
    ValidInRegime,
    CorrespondsTo,
    UsesMaterial,
    DerivedFrom,
};

// CamelCase form used in extraction payloads ("ProcessParameter").
std::string kind_name(EntityKind kind);
// snake_case form used inside URIs ("process_parameter").
std::string kind_slug(EntityKind kind);
// snake_case predicate name ("has_input").
std::string predicate_name(RelationKind kind);

// Closed enumerations: unknown strings are rejected with ValidationError.
EntityKind entity_kind_from(const std::string& name);
RelationKind relation_kind_from(const std::string& name);

std::vector<EntityKind> all_entity_kinds();
std::vector<RelationKind> all_relation_kinds();

// Only `influences` carries a directional sign.
bool carries_sign(RelationKind kind);

struct Violation {
    std::string item_id;  // entity uri or relation key
    std::string rule;     // R1..R6
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    // Surfaced-but-nonblocking findings (e.g. resolved sign conflicts).
    std::vector<Violation> notes;
    bool is_valid() const { return violations.empty(); }
};

// Canonical lower_snake_case form; Greek letters are transliterated to
// spelled names before case folding. Throws NameError when nothing is left.
std::string normalize_entity_name(const std::string& raw);

// True iff the string has an equality sign and at least one mathematical
// operator or function token. Total: never throws.
bool validate_equation_latex(const std::string& latex);

// Checks rules R1-R6 against a structurally well-formed graph.
ValidationReport validate_graph(const kg::KnowledgeGraph& graph);

}  // namespace amkg::ontology
