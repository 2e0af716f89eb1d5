#include "amkg/retrieval.hpp"

#include <algorithm>
#include <set>

#include "amkg/errors.hpp"
#include "amkg/ontology.hpp"
#include "amkg/util.hpp"

namespace amkg::retrieval {

using nlohmann::json;

std::string build_query(const Query& q) {
    if (q.inputs.empty()) throw QueryError("query requires at least one input variable");
    if (q.natural_text && !q.natural_text->empty()) return *q.natural_text;
    std::string joined;
    for (const auto& x : q.inputs) joined += (joined.empty() ? "" : ", ") + x;
    if (q.target) joined += ", " + *q.target;
    return "equations and mechanisms " + joined + " in additive manufacturing";
}

const kg::Entity* Subgraph::find(const std::string& uri) const {
    for (const auto& e : entities)
        if (e.uri == uri) return &e;
    return nullptr;
}

bool Subgraph::contains(const std::string& uri) const { return find(uri) != nullptr; }

namespace {

// A query variable resolves to entities whose canonical name matches its
// normalized form or whose stored symbol matches it verbatim.
std::vector<std::string> resolve_name(const kg::KnowledgeGraph& g, const std::string& raw) {
    std::vector<std::string> out;
    std::string canonical;
    try {
        canonical = ontology::normalize_entity_name(raw);
    } catch (const Error&) {
        return out;
    }
    for (const auto& [uri, e] : g.entities) {
        if (e.name == canonical || (e.latex && *e.latex == raw)) out.push_back(uri);
    }
    return out;
}

std::vector<std::string> resolve_in_subgraph(const Subgraph& sg, const std::string& raw) {
    std::vector<std::string> out;
    std::string canonical;
    try {
        canonical = ontology::normalize_entity_name(raw);
    } catch (const Error&) {
        return out;
    }
    for (const auto& e : sg.entities)
        if (e.name == canonical || (e.latex && *e.latex == raw)) out.push_back(e.uri);
    return out;
}

}  // namespace

Subgraph retrieve(const kg::KnowledgeGraph& g, const hierarchy::Hierarchy& h,
                  const embed::EmbeddingMap& embeddings, const Query& query,
                  embed::EmbeddingBackend& text_backend, const RetrievalParams& params) {
    if (g.entities.empty()) throw RetrievalError("knowledge graph is empty");

    Subgraph sg;
    std::string qtext = build_query(query);

    // Query embedding: zero formula block + normalized text vector; cosine
    // is scale-invariant so the text weight drops out.
    std::size_t fused_dim = embeddings.empty() ? 0 : embeddings.begin()->second.size();
    if (fused_dim < text_backend.dimension())
        throw DimensionError("stored embeddings are smaller than the text backend dimension");
    std::vector<double> qvec(fused_dim - text_backend.dimension(), 0.0);
    {
        auto text = embed::l2_normalize(text_backend.embed(qtext));
        qvec.insert(qvec.end(), text.begin(), text.end());
    }

    std::map<std::string, double> score;
    std::vector<std::pair<double, std::string>> ranked;  // (-score, uri) ordering
    for (const auto& [uri, e] : g.entities) {
        auto it = embeddings.find(uri);
        if (it == embeddings.end()) throw MissingEmbeddingError("no embedding for " + uri);
        double s = embed::cosine_similarity(qvec, it->second);
        score[uri] = s;
        ranked.emplace_back(s, uri);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    std::set<std::string> seeds;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(params.top_k); ++i)
        seeds.insert(ranked[i].second);

    // Forced inclusion of every resolvable query variable.
    std::set<std::string> forced;
    std::vector<std::string> names = query.inputs;
    if (query.target) names.push_back(*query.target);
    for (const auto& name : names) {
        auto matches = resolve_name(g, name);
        if (matches.empty()) {
            sg.warnings.push_back("unresolved query variable '" + name + "'");
            continue;
        }
        for (const auto& uri : matches) {
            seeds.insert(uri);
            forced.insert(uri);
        }
    }

    // Hierarchy expansion: LCA descendants plus 1-hop neighbors of seeds.
    std::set<std::string> included = seeds;
    std::vector<std::string> seed_list(seeds.begin(), seeds.end());
    if (!h.layers.empty() && !seed_list.empty()) {
        auto anchor = hierarchy::lca(h, seed_list);
        sg.lca_cluster = anchor.cluster_id;
        sg.lca_layer = anchor.layer;
        if (anchor.virtual_root) {
            for (const auto& uri : h.layer0) included.insert(uri);
            for (const auto& c : h.layers.back()) sg.summaries.push_back(c.summary);
        } else {
            for (const auto& uri : h.descendants(anchor.cluster_id)) included.insert(uri);
            const hierarchy::Cluster* c = h.find_cluster(anchor.cluster_id);
            sg.summaries.push_back(c->summary);
            if (c->layer > 1) {
                for (const auto& child : c->members) {
                    const hierarchy::Cluster* cc = h.find_cluster(child);
                    if (cc) sg.summaries.push_back(cc->summary);
                }
            }
        }
    }
    for (const auto& seed : seed_list)
        for (const auto& [rel, other] : g.neighbors(seed)) included.insert(other.uri);

    // Nearest-first truncation, forced entities always kept.
    if (included.size() > params.max_entities) {
        std::vector<std::string> order(included.begin(), included.end());
        std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
            bool fa = forced.count(a), fb = forced.count(b);
            if (fa != fb) return fa;
            if (score[a] != score[b]) return score[a] > score[b];
            return a < b;
        });
        order.resize(params.max_entities);
        included = std::set<std::string>(order.begin(), order.end());
        sg.truncated = true;
    }

    for (const auto& uri : included) sg.entities.push_back(g.entities.at(uri));
    std::sort(sg.entities.begin(), sg.entities.end(),
              [](const kg::Entity& a, const kg::Entity& b) { return a.uri < b.uri; });
    for (const auto& [key, rel] : g.relations)
        if (included.count(rel.subject) && included.count(rel.object))
            sg.relations.push_back(rel);

    sg.roles = assign_equation_roles(sg, query.inputs, query.target);
    for (const auto& e : sg.entities) sg.kind_counts[ontology::kind_name(e.kind)] += 1;
    for (const auto& [uri, role] : sg.roles) sg.role_counts[role] += 1;
    return sg;
}

std::map<std::string, std::string> assign_equation_roles(const Subgraph& sg,
                                                         const std::vector<std::string>& inputs,
                                                         const std::optional<std::string>& target) {
    std::map<std::string, std::string> roles;

    std::set<std::string> target_uris;
    if (target)
        for (const auto& uri : resolve_in_subgraph(sg, *target)) target_uris.insert(uri);
    std::set<std::string> input_uris;
    for (const auto& x : inputs)
        for (const auto& uri : resolve_in_subgraph(sg, x)) input_uris.insert(uri);

    std::set<std::string> equations;
    for (const auto& e : sg.entities)
        if (e.kind == ontology::EntityKind::Equation) equations.insert(e.uri);

    for (const auto& rel : sg.relations) {
        if (!equations.count(rel.subject)) continue;
        if (rel.predicate == ontology::RelationKind::HasOutput && target_uris.count(rel.object))
            roles[rel.subject] = "target";
    }
    for (const auto& rel : sg.relations) {
        bool touches_eq_subject = equations.count(rel.subject) &&
                                  (rel.predicate == ontology::RelationKind::HasInput ||
                                   rel.predicate == ontology::RelationKind::Influences) &&
                                  input_uris.count(rel.object);
        bool touches_eq_object = equations.count(rel.object) &&
                                 rel.predicate == ontology::RelationKind::Influences &&
                                 input_uris.count(rel.subject);
        std::string eq = touches_eq_subject ? rel.subject : touches_eq_object ? rel.object : "";
        if (!eq.empty() && !roles.count(eq)) roles[eq] = "input_related";
    }

    // Equation-to-equation adjacency: a shared Variable endpoint or a
    // derived_from edge.
    std::map<std::string, std::set<std::string>> eq_of_var;  // variable uri -> equations
    std::map<std::string, std::set<std::string>> adjacency;
    for (const auto& rel : sg.relations) {
        if (equations.count(rel.subject) &&
            (rel.predicate == ontology::RelationKind::HasInput ||
             rel.predicate == ontology::RelationKind::HasOutput)) {
            const kg::Entity* v = sg.find(rel.object);
            if (v && v->kind == ontology::EntityKind::Variable)
                eq_of_var[rel.object].insert(rel.subject);
        }
        if (rel.predicate == ontology::RelationKind::DerivedFrom && equations.count(rel.subject) &&
            equations.count(rel.object)) {
            adjacency[rel.subject].insert(rel.object);
            adjacency[rel.object].insert(rel.subject);
        }
    }
    for (const auto& [var, eqs] : eq_of_var)
        for (const auto& a : eqs)
            for (const auto& b : eqs)
                if (a != b) adjacency[a].insert(b);

    // Up to two hops beyond the directly-roled equations.
    std::set<std::string> frontier;
    for (const auto& [eq, role] : roles) frontier.insert(eq);
    for (int hop = 0; hop < 2; ++hop) {
        std::set<std::string> next;
        for (const auto& eq : frontier)
            for (const auto& other : adjacency[eq])
                if (!roles.count(other)) {
                    roles[other] = "supporting";
                    next.insert(other);
                }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return roles;
}

// ── Serialization ────────────────────────────────────────────────────────

json serialize_subgraph(const Subgraph& sg) {
    json j;
    j["entities"] = json::array();
    for (const auto& e : sg.entities) j["entities"].push_back(kg::entity_to_json(e));
    j["relations"] = json::array();
    for (const auto& r : sg.relations) j["relations"].push_back(kg::relation_to_json(r));
    j["roles"] = json::object();
    for (const auto& [uri, role] : sg.roles) j["roles"][uri] = role;
    j["summaries"] = sg.summaries;
    json meta;
    meta["kind_counts"] = sg.kind_counts;
    meta["role_counts"] = sg.role_counts;
    meta["warnings"] = sg.warnings;
    meta["lca_cluster"] = sg.lca_cluster;
    meta["lca_layer"] = sg.lca_layer;
    meta["truncated"] = sg.truncated;
    j["metadata"] = std::move(meta);
    return j;
}

Subgraph subgraph_from_json(const json& j) {
    Subgraph sg;
    for (const auto& je : j.at("entities")) sg.entities.push_back(kg::entity_from_json(je));
    for (const auto& jr : j.at("relations")) sg.relations.push_back(kg::relation_from_json(jr));
    if (j.contains("roles"))
        for (const auto& [uri, role] : j.at("roles").items())
            sg.roles[uri] = role.get<std::string>();
    if (j.contains("summaries")) sg.summaries = j.at("summaries").get<std::vector<std::string>>();
    if (j.contains("metadata")) {
        const json& meta = j.at("metadata");
        if (meta.contains("kind_counts"))
            sg.kind_counts = meta.at("kind_counts").get<std::map<std::string, int>>();
        if (meta.contains("role_counts"))
            sg.role_counts = meta.at("role_counts").get<std::map<std::string, int>>();
        if (meta.contains("warnings"))
            sg.warnings = meta.at("warnings").get<std::vector<std::string>>();
        sg.lca_cluster = meta.value("lca_cluster", "");
        sg.lca_layer = meta.value("lca_layer", 0);
        sg.truncated = meta.value("truncated", false);
    }
    return sg;
}

std::vector<std::string> subgraph_symbols(const Subgraph& sg) {
    std::set<std::string> symbols;
    for (const auto& e : sg.entities) {
        symbols.insert(e.name);
        if (e.kind == ontology::EntityKind::Variable && e.latex) symbols.insert(*e.latex);
    }
    return {symbols.begin(), symbols.end()};
}

}  // namespace amkg::retrieval
