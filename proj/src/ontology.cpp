#include "amkg/ontology.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

#include "amkg/errors.hpp"
#include "amkg/kg_store.hpp"

namespace amkg::ontology {

namespace {

struct KindNames {
    EntityKind kind;
    const char* camel;
    const char* slug;
};

constexpr std::array<KindNames, 8> kEntityKinds{{
    {EntityKind::Equation, "Equation", "equation"},
    {EntityKind::Variable, "Variable", "variable"},
    {EntityKind::Assumption, "Assumption", "assumption"},
    {EntityKind::ProcessParameter, "ProcessParameter", "process_parameter"},
    {EntityKind::Performance, "Performance", "performance"},
    {EntityKind::Regime, "Regime", "regime"},
    {EntityKind::Material, "Material", "material"},
    {EntityKind::Phenomenon, "Phenomenon", "phenomenon"},
}};

struct RelNames {
    RelationKind kind;
    const char* name;
};

constexpr std::array<RelNames, 8> kRelationKinds{{
    {RelationKind::HasInput, "has_input"},
    {RelationKind::HasOutput, "has_output"},
    {RelationKind::Influences, "influences"},
    {RelationKind::RequiresAssumption, "requires_assumption"},
    {RelationKind::ValidInRegime, "valid_in_regime"},
    {RelationKind::CorrespondsTo, "corresponds_to"},
    {RelationKind::UsesMaterial, "uses_material"},
    {RelationKind::DerivedFrom, "derived_from"},
}};

// Greek codepoint -> spelled name, so canonical names stay ASCII.
const std::map<char32_t, std::string>& greek_table() {
    static const std::map<char32_t, std::string> table = {
        {0x0391, "alpha"},   {0x0392, "beta"},    {0x0393, "gamma"},
        {0x0394, "delta"},   {0x0395, "epsilon"}, {0x0396, "zeta"},
        {0x0397, "eta"},     {0x0398, "theta"},   {0x0399, "iota"},
        {0x039A, "kappa"},   {0x039B, "lambda"},  {0x039C, "mu"},
        {0x039D, "nu"},      {0x039E, "xi"},      {0x039F, "omicron"},
        {0x03A0, "pi"},      {0x03A1, "rho"},     {0x03A3, "sigma"},
        {0x03A4, "tau"},     {0x03A5, "upsilon"}, {0x03A6, "phi"},
        {0x03A7, "chi"},     {0x03A8, "psi"},     {0x03A9, "omega"},
        {0x03B1, "alpha"},   {0x03B2, "beta"},    {0x03B3, "gamma"},
        {0x03B4, "delta"},   {0x03B5, "epsilon"}, {0x03B6, "zeta"},
        {0x03B7, "eta"},     {0x03B8, "theta"},   {0x03B9, "iota"},
        {0x03BA, "kappa"},   {0x03BB, "lambda"},  {0x03BC, "mu"},
        {0x03BD, "nu"},      {0x03BE, "xi"},      {0x03BF, "omicron"},
        {0x03C0, "pi"},      {0x03C1, "rho"},     {0x03C2, "sigma"},
        {0x03C3, "sigma"},   {0x03C4, "tau"},     {0x03C5, "upsilon"},
        {0x03C6, "phi"},     {0x03C7, "chi"},     {0x03C8, "psi"},
        {0x03C9, "omega"},   {0x00B5, "mu"},
    };
    return table;
}

// Decodes one UTF-8 codepoint starting at i; advances i past it.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
        cp = c & 0x1F;
        extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
        cp = c & 0x0F;
        extra = 2;
    } else if ((c & 0xF8) == 0xF0) {
        cp = c & 0x07;
        extra = 3;
    } else {
        ++i;
        return 0xFFFD;
    }
    std::size_t end = i + 1 + extra;
    if (end > s.size()) {
        i = s.size();
        return 0xFFFD;
    }
    for (std::size_t k = i + 1; k < end; ++k)
        cp = (cp << 6) | (static_cast<unsigned char>(s[k]) & 0x3F);
    i = end;
    return cp;
}

}  // namespace

std::string kind_name(EntityKind kind) {
    for (const auto& k : kEntityKinds)
        if (k.kind == kind) return k.camel;
    return "Variable";
}

std::string kind_slug(EntityKind kind) {
    for (const auto& k : kEntityKinds)
        if (k.kind == kind) return k.slug;
    return "variable";
}

std::string predicate_name(RelationKind kind) {
    for (const auto& k : kRelationKinds)
        if (k.kind == kind) return k.name;
    return "has_input";
}

EntityKind entity_kind_from(const std::string& name) {
    for (const auto& k : kEntityKinds)
        if (name == k.camel || name == k.slug) return k.kind;
    throw ValidationError("unknown entity kind '" + name + "'");
}

RelationKind relation_kind_from(const std::string& name) {
    for (const auto& k : kRelationKinds)
        if (name == k.name) return k.kind;
    throw ValidationError("unknown relation kind '" + name + "'");
}

std::vector<EntityKind> all_entity_kinds() {
    std::vector<EntityKind> out;
    for (const auto& k : kEntityKinds) out.push_back(k.kind);
    return out;
}

std::vector<RelationKind> all_relation_kinds() {
    std::vector<RelationKind> out;
    for (const auto& k : kRelationKinds) out.push_back(k.kind);
    return out;
}

bool carries_sign(RelationKind kind) { return kind == RelationKind::Influences; }

std::string normalize_entity_name(const std::string& raw) {
    // Pass 1: transliterate, break camelCase, lowercase, map junk to '_'.
    std::string flat;
    flat.reserve(raw.size());
    char prev = '\0';
    std::size_t i = 0;
    while (i < raw.size()) {
        char32_t cp = decode_utf8(raw, i);
        if (cp < 0x80) {
            char c = static_cast<char>(cp);
            if (std::isupper(static_cast<unsigned char>(c))) {
                if (std::islower(static_cast<unsigned char>(prev)) ||
                    std::isdigit(static_cast<unsigned char>(prev)))
                    flat.push_back('_');
                flat.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            } else if (std::isalnum(static_cast<unsigned char>(c))) {
                flat.push_back(c);
            } else {
                flat.push_back('_');
            }
            prev = c;
        } else {
            auto it = greek_table().find(cp);
            if (it != greek_table().end()) {
                if (!flat.empty() && flat.back() != '_') flat.push_back('_');
                flat += it->second;
                prev = it->second.back();
            } else {
                flat.push_back('_');
                prev = '\0';
            }
        }
    }

    // Pass 2: collapse and trim underscores.
    std::string out;
    out.reserve(flat.size());
    for (char c : flat) {
        if (c == '_' && (out.empty() || out.back() == '_')) continue;
        out.push_back(c);
    }
    while (!out.empty() && out.back() == '_') out.pop_back();

    if (out.empty())
        throw NameError("name '" + raw + "' is empty after normalization");
    return out;
}

bool validate_equation_latex(const std::string& latex) {
    if (latex.find('=') == std::string::npos) return false;
    static const std::vector<std::string> kFunctionTokens = {
        "\\frac", "\\dfrac", "\\ln", "\\log", "\\exp", "\\sqrt",
        "\\cdot", "\\times", "\\sum", "\\int", "\\partial",
    };
    for (const auto& tok : kFunctionTokens)
        if (latex.find(tok) != std::string::npos) return true;
    for (char c : latex)
        if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') return true;
    return false;
}

namespace {

void check_r1(const kg::KnowledgeGraph& g, ValidationReport& report) {
    std::set<std::string> with_input, with_output;
    for (const auto& [key, rel] : g.relations) {
        if (rel.predicate == RelationKind::HasInput) with_input.insert(rel.subject);
        if (rel.predicate == RelationKind::HasOutput) with_output.insert(rel.subject);
    }
    for (const auto& [uri, e] : g.entities) {
        if (e.kind != EntityKind::Equation) continue;
        if (!with_input.count(uri))
            report.violations.push_back({uri, "R1", "equation has no has_input relation"});
        if (!with_output.count(uri))
            report.violations.push_back({uri, "R1", "equation has no has_output relation"});
    }
}

void check_r2(const kg::KnowledgeGraph& g, ValidationReport& report) {
    for (const auto& [key, rel] : g.relations) {
        if (rel.predicate == RelationKind::Influences && !rel.sign.has_value())
            report.violations.push_back({key.to_string(), "R2", "influences relation lacks a sign"});
    }
    for (const auto& conflict : g.sign_conflicts) {
        report.notes.push_back({conflict.key.to_string(), "R2",
                                "sign conflict: kept " + std::to_string(conflict.kept) +
                                    ", rejected " + std::to_string(conflict.rejected)});
    }
}

// One violation per nontrivial strongly connected component of derived_from.
void check_r3(const kg::KnowledgeGraph& g, ValidationReport& report) {
    std::map<std::string, std::vector<std::string>> next;
    std::set<std::string> nodes;
    for (const auto& [key, rel] : g.relations) {
        if (rel.predicate != RelationKind::DerivedFrom) continue;
        next[rel.subject].push_back(rel.object);
        nodes.insert(rel.subject);
        nodes.insert(rel.object);
    }
    // Tarjan SCC, iterative.
    std::map<std::string, int> index, low;
    std::vector<std::string> stack;
    std::set<std::string> on_stack;
    int counter = 0;

    struct Frame {
        std::string node;
        std::size_t child = 0;
    };
    for (const auto& start : nodes) {
        if (index.count(start)) continue;
        std::vector<Frame> frames{{start}};
        index[start] = low[start] = counter++;
        stack.push_back(start);
        on_stack.insert(start);
        while (!frames.empty()) {
            auto& fr = frames.back();
            const auto& succ = next[fr.node];
            if (fr.child < succ.size()) {
                const std::string& w = succ[fr.child++];
                if (!index.count(w)) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack.insert(w);
                    frames.push_back({w});
                } else if (on_stack.count(w)) {
                    low[fr.node] = std::min(low[fr.node], index[w]);
                }
            } else {
                if (low[fr.node] == index[fr.node]) {
                    std::vector<std::string> scc;
                    while (true) {
                        std::string w = stack.back();
                        stack.pop_back();
                        on_stack.erase(w);
                        scc.push_back(w);
                        if (w == fr.node) break;
                    }
                    bool self_loop = false;
                    for (const auto& s : next[fr.node])
                        if (s == fr.node) self_loop = true;
                    if (scc.size() > 1 || self_loop) {
                        std::sort(scc.begin(), scc.end());
                        std::string members;
                        for (const auto& m : scc) members += (members.empty() ? "" : ", ") + m;
                        report.violations.push_back(
                            {scc.front(), "R3", "derived_from cycle among: " + members});
                    }
                }
                std::string done = fr.node;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().node] = std::min(low[frames.back().node], low[done]);
            }
        }
    }
}

void check_r4(const kg::KnowledgeGraph& g, ValidationReport& report) {
    for (const auto& [key, rel] : g.relations) {
        if (rel.predicate != RelationKind::ValidInRegime) continue;
        auto subj = g.entities.find(rel.subject);
        auto obj = g.entities.find(rel.object);
        if (subj == g.entities.end() || obj == g.entities.end()) continue;  // R5's problem
        bool subj_ok = subj->second.kind == EntityKind::Equation ||
                       subj->second.kind == EntityKind::ProcessParameter;
        bool obj_ok = obj->second.kind == EntityKind::Regime;
        if (!subj_ok || !obj_ok)
            report.violations.push_back(
                {key.to_string(), "R4",
                 "valid_in_regime endpoints must be (Equation|ProcessParameter) -> Regime"});
    }
}

void check_r5(const kg::KnowledgeGraph& g, ValidationReport& report) {
    for (const auto& [key, rel] : g.relations) {
        if (!g.has_entity(rel.subject))
            report.violations.push_back({key.to_string(), "R5", "dangling subject " + rel.subject});
        if (!g.has_entity(rel.object))
            report.violations.push_back({key.to_string(), "R5", "dangling object " + rel.object});
    }
}

void check_r6(const kg::KnowledgeGraph& g, ValidationReport& report) {
    // Conflicts are detected through the explicit `not_` negation marker.
    std::map<std::string, std::set<std::string>> assumptions;  // equation -> assumption names
    for (const auto& [key, rel] : g.relations) {
        if (rel.predicate != RelationKind::RequiresAssumption) continue;
        auto obj = g.entities.find(rel.object);
        if (obj == g.entities.end()) continue;
        assumptions[rel.subject].insert(obj->second.name);
    }
    for (const auto& [eq, names] : assumptions) {
        for (const auto& name : names) {
            if (name.rfind("not_", 0) == 0 && names.count(name.substr(4))) {
                report.violations.push_back(
                    {eq, "R6",
                     "conflicting assumptions '" + name.substr(4) + "' and '" + name + "'"});
            }
        }
    }
}

}  // namespace

ValidationReport validate_graph(const kg::KnowledgeGraph& graph) {
    ValidationReport report;
    check_r1(graph, report);
    check_r2(graph, report);
    check_r3(graph, report);
    check_r4(graph, report);
    check_r5(graph, report);
    check_r6(graph, report);
    return report;
}

}  // namespace amkg::ontology
