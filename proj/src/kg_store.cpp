#include "amkg/kg_store.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "amkg/errors.hpp"
#include "amkg/expression.hpp"

namespace amkg::kg {

using nlohmann::json;

std::string make_uri(ontology::EntityKind kind, const std::string& canonical_name) {
    return "amkg://" + ontology::kind_slug(kind) + "/" + canonical_name;
}

std::string RelationKey::to_string() const {
    return subject + " -" + ontology::predicate_name(predicate) + "-> " + object;
}

const Entity* KnowledgeGraph::find_by_name(const std::string& canonical_name,
                                           std::optional<ontology::EntityKind> kind) const {
    for (const auto& [uri, e] : entities) {
        if (e.name != canonical_name) continue;
        if (kind && e.kind != *kind) continue;
        return &e;
    }
    return nullptr;
}

namespace {

void merge_sorted_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& s : from) into.push_back(s);
    std::sort(into.begin(), into.end());
    into.erase(std::unique(into.begin(), into.end()), into.end());
}

}  // namespace

bool latex_more_complete(const std::string& candidate, const std::string& current) {
    auto cand_syms = eqn::extract_symbols(candidate).size();
    auto cur_syms = eqn::extract_symbols(current).size();
    if (cand_syms != cur_syms) return cand_syms > cur_syms;
    if (candidate.size() != current.size()) return candidate.size() > current.size();
    return candidate < current;
}

void KnowledgeGraph::upsert_entity(Entity e) {
    if (e.kind == ontology::EntityKind::Equation) {
        if (!e.latex || !ontology::validate_equation_latex(*e.latex))
            throw ValidationError("equation '" + e.name + "' has no valid latex");
    }
    e.uri = make_uri(e.kind, e.name);
    std::sort(e.provenance.begin(), e.provenance.end());
    e.provenance.erase(std::unique(e.provenance.begin(), e.provenance.end()), e.provenance.end());

    auto it = entities.find(e.uri);
    if (it == entities.end()) {
        entities.emplace(e.uri, std::move(e));
        return;
    }
    Entity& cur = it->second;
    if (!e.description.empty()) {
        if (cur.description.empty())
            cur.description = e.description;
        else if (cur.description.find(e.description) == std::string::npos)
            cur.description += "; " + e.description;
    }
    merge_sorted_unique(cur.provenance, e.provenance);
    if (e.latex) {
        if (!cur.latex)
            cur.latex = e.latex;
        else if (*e.latex != *cur.latex && latex_more_complete(*e.latex, *cur.latex))
            cur.latex = e.latex;
    }
    if (!cur.unit && e.unit) cur.unit = e.unit;
}

void KnowledgeGraph::upsert_relation(Relation r) {
    if (!has_entity(r.subject)) throw EndpointError("unknown subject " + r.subject);
    if (!has_entity(r.object)) throw EndpointError("unknown object " + r.object);
    if (r.weight < 1) r.weight = 1;
    std::sort(r.provenance.begin(), r.provenance.end());
    r.provenance.erase(std::unique(r.provenance.begin(), r.provenance.end()), r.provenance.end());

    auto key = r.key();
    auto it = relations.find(key);
    if (it == relations.end()) {
        relations.emplace(key, std::move(r));
        return;
    }
    Relation& cur = it->second;
    cur.weight += r.weight;
    merge_sorted_unique(cur.provenance, r.provenance);
    if (cur.evidence.empty()) cur.evidence = r.evidence;
    if (r.sign) {
        if (!cur.sign) {
            cur.sign = r.sign;
        } else if (*cur.sign != *r.sign) {
            // First-seen sign wins; surface the conflict.
            sign_conflicts.push_back({key, *cur.sign, *r.sign});
        }
    }
}

std::vector<std::pair<Relation, Entity>> KnowledgeGraph::neighbors(
    const std::string& uri, const std::vector<ontology::RelationKind>& predicate_filter) const {
    if (!has_entity(uri)) throw NotFoundError("unknown entity " + uri);
    std::vector<std::pair<Relation, Entity>> out;
    for (const auto& [key, rel] : relations) {
        std::string far;
        if (rel.subject == uri)
            far = rel.object;
        else if (rel.object == uri)
            far = rel.subject;
        else
            continue;
        if (!predicate_filter.empty() &&
            std::find(predicate_filter.begin(), predicate_filter.end(), rel.predicate) ==
                predicate_filter.end())
            continue;
        auto it = entities.find(far);
        if (it == entities.end()) continue;
        out.emplace_back(rel, it->second);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.second.uri, a.first.predicate) < std::tie(b.second.uri, b.first.predicate);
    });
    return out;
}

std::pair<KnowledgeGraph, ontology::ValidationReport> post_process(const KnowledgeGraph& g) {
    KnowledgeGraph out = g;
    ontology::ValidationReport removed;

    // Dropping an item can re-expose R1 violations, so iterate to fixpoint.
    while (true) {
        ontology::ValidationReport report = ontology::validate_graph(out);
        bool changed = false;
        std::set<std::string> drop_entities;
        std::map<RelationKey, std::string> drop_relations;  // key -> rule

        for (const auto& v : report.violations) {
            if (v.rule == "R6") continue;  // flagged, not excluded
            if (v.rule == "R1") {
                drop_entities.insert(v.item_id);
            } else if (v.rule == "R3") {
                // Break the cycle by removing its derived_from edges.
                std::set<std::string> members;
                auto pos = v.message.find(':');
                if (pos != std::string::npos) {
                    std::string list = v.message.substr(pos + 1);
                    std::size_t start = 0;
                    while (start < list.size()) {
                        auto comma = list.find(',', start);
                        std::string item = list.substr(
                            start, comma == std::string::npos ? std::string::npos : comma - start);
                        auto first = item.find_first_not_of(' ');
                        if (first != std::string::npos)
                            members.insert(item.substr(first));
                        if (comma == std::string::npos) break;
                        start = comma + 1;
                    }
                }
                for (const auto& [key, rel] : out.relations) {
                    if (rel.predicate == ontology::RelationKind::DerivedFrom &&
                        members.count(rel.subject) && members.count(rel.object))
                        drop_relations.emplace(key, "R3");
                }
            } else {
                // R2, R4, R5: the relation itself is the violator.
                for (const auto& [key, rel] : out.relations) {
                    if (key.to_string() == v.item_id) {
                        drop_relations.emplace(key, v.rule);
                        break;
                    }
                }
            }
        }

        for (const auto& uri : drop_entities) {
            if (!out.entities.count(uri)) continue;
            removed.violations.push_back({uri, "R1", "removed: equation lacking input/output"});
            out.entities.erase(uri);
            for (auto it = out.relations.begin(); it != out.relations.end();) {
                if (it->second.subject == uri || it->second.object == uri) {
                    removed.violations.push_back(
                        {it->first.to_string(), "R1", "removed: incident to dropped entity"});
                    it = out.relations.erase(it);
                } else {
                    ++it;
                }
            }
            changed = true;
        }
        for (const auto& [key, rule] : drop_relations) {
            auto it = out.relations.find(key);
            if (it == out.relations.end()) continue;
            removed.violations.push_back({key.to_string(), rule, "removed: rule violation"});
            out.relations.erase(it);
            changed = true;
        }
        if (!changed) break;
    }
    return {std::move(out), std::move(removed)};
}

// ── JSONL persistence ────────────────────────────────────────────────────

json entity_to_json(const Entity& e) {
    json j;
    j["uri"] = e.uri;
    j["name"] = e.name;
    j["kind"] = ontology::kind_name(e.kind);
    j["description"] = e.description;
    if (e.latex) j["latex"] = *e.latex;
    if (e.unit) j["unit"] = *e.unit;
    j["provenance"] = e.provenance;
    return j;
}

Entity entity_from_json(const json& j) {
    Entity e;
    e.name = j.at("name").get<std::string>();
    e.kind = ontology::entity_kind_from(j.at("kind").get<std::string>());
    e.description = j.value("description", "");
    if (j.contains("latex")) e.latex = j.at("latex").get<std::string>();
    if (j.contains("unit")) e.unit = j.at("unit").get<std::string>();
    if (j.contains("provenance")) e.provenance = j.at("provenance").get<std::vector<std::string>>();
    e.uri = make_uri(e.kind, e.name);
    return e;
}

json relation_to_json(const Relation& r) {
    json j;
    j["subject"] = r.subject;
    j["predicate"] = ontology::predicate_name(r.predicate);
    j["object"] = r.object;
    if (r.sign) j["sign"] = *r.sign;
    j["weight"] = r.weight;
    j["evidence"] = r.evidence;
    j["provenance"] = r.provenance;
    return j;
}

Relation relation_from_json(const json& j) {
    Relation r;
    r.subject = j.at("subject").get<std::string>();
    r.predicate = ontology::relation_kind_from(j.at("predicate").get<std::string>());
    r.object = j.at("object").get<std::string>();
    if (j.contains("sign") && !j.at("sign").is_null()) r.sign = j.at("sign").get<int>();
    r.weight = j.value("weight", std::int64_t{1});
    r.evidence = j.value("evidence", "");
    if (j.contains("provenance")) r.provenance = j.at("provenance").get<std::vector<std::string>>();
    return r;
}

void save_graph(const KnowledgeGraph& g, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out(fs::path(dir) / "entities.jsonl");
        if (!out) throw IoError("cannot write entities.jsonl under " + dir);
        for (const auto& [uri, e] : g.entities) out << entity_to_json(e).dump() << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "relations.jsonl");
        if (!out) throw IoError("cannot write relations.jsonl under " + dir);
        for (const auto& [key, r] : g.relations) out << relation_to_json(r).dump() << "\n";
    }
}

KnowledgeGraph load_graph(const std::string& dir) {
    namespace fs = std::filesystem;
    KnowledgeGraph g;
    std::ifstream ein(fs::path(dir) / "entities.jsonl");
    if (!ein) throw IoError("cannot read entities.jsonl under " + dir);
    std::string line;
    while (std::getline(ein, line)) {
        if (line.empty()) continue;
        Entity e = entity_from_json(json::parse(line));
        g.entities.emplace(e.uri, std::move(e));
    }
    std::ifstream rin(fs::path(dir) / "relations.jsonl");
    if (!rin) throw IoError("cannot read relations.jsonl under " + dir);
    while (std::getline(rin, line)) {
        if (line.empty()) continue;
        Relation r = relation_from_json(json::parse(line));
        g.relations.emplace(r.key(), std::move(r));
    }
    return g;
}

}  // namespace amkg::kg
