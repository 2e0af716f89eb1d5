#include "amkg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "amkg/errors.hpp"
#include "amkg/util.hpp"

namespace amkg::hierarchy {

using nlohmann::json;

// ── WeightedGraph ────────────────────────────────────────────────────────

void WeightedGraph::add_edge(std::size_t a, std::size_t b, double w) {
    if (a == b) {
        self_loop[a] += w;
        return;
    }
    adjacency[a].emplace_back(b, w);
    adjacency[b].emplace_back(a, w);
}

double WeightedGraph::strength(std::size_t i) const {
    double s = 2.0 * self_loop[i];
    for (const auto& [j, w] : adjacency[i]) s += w;
    return s;
}

double WeightedGraph::total_weight() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += strength(i);
    return s;
}

double modularity(const WeightedGraph& g, const std::vector<int>& community) {
    double two_m = g.total_weight();
    if (two_m == 0.0) return 0.0;
    int k = 0;
    for (int c : community) k = std::max(k, c + 1);
    std::vector<double> intra(k, 0.0), tot(k, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        tot[community[i]] += g.strength(i);
        intra[community[i]] += g.self_loop[i];
        for (const auto& [j, w] : g.adjacency[i])
            if (j > i && community[i] == community[j]) intra[community[i]] += w;
    }
    double q = 0.0;
    for (int c = 0; c < k; ++c)
        q += 2.0 * intra[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
    return q;
}

// ── Louvain ──────────────────────────────────────────────────────────────

namespace {

std::vector<int> renumber_dense(const std::vector<int>& community) {
    std::map<int, int> remap;
    std::vector<int> out(community.size());
    for (std::size_t i = 0; i < community.size(); ++i) {
        auto [it, inserted] = remap.emplace(community[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    return out;
}

// One complete local-moving phase; returns the dense partition and whether
// any node changed community.
std::pair<std::vector<int>, bool> local_move(const WeightedGraph& g, util::DeterministicRng& rng) {
    std::vector<int> community(g.n);
    for (std::size_t i = 0; i < g.n; ++i) community[i] = static_cast<int>(i);
    double two_m = g.total_weight();
    if (two_m == 0.0 || g.n == 0) return {community, false};

    std::vector<double> tot(g.n);
    std::vector<double> k(g.n);
    for (std::size_t i = 0; i < g.n; ++i) tot[i] = k[i] = g.strength(i);

    std::vector<std::size_t> order(g.n);
    for (std::size_t i = 0; i < g.n; ++i) order[i] = i;
    util::shuffle(order, rng);

    bool any_move = false;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i : order) {
            int ci = community[i];
            std::map<int, double> weight_to;  // community -> edge weight from i
            weight_to[ci] += 0.0;
            for (const auto& [j, w] : g.adjacency[i]) weight_to[community[j]] += w;

            tot[ci] -= k[i];
            int best = ci;
            double best_gain = weight_to[ci] - tot[ci] * k[i] / two_m;
            for (const auto& [c, w] : weight_to) {
                if (c == ci) continue;
                double gain = w - tot[c] * k[i] / two_m;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            tot[best] += k[i];
            community[i] = best;
            if (best != ci) {
                improved = true;
                any_move = true;
            }
        }
    }
    return {renumber_dense(community), any_move};
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& community) {
    int k = 0;
    for (int c : community) k = std::max(k, c + 1);
    WeightedGraph out(static_cast<std::size_t>(k));
    std::map<std::pair<int, int>, double> acc;
    for (std::size_t i = 0; i < g.n; ++i) {
        out.self_loop[community[i]] += g.self_loop[i];
        for (const auto& [j, w] : g.adjacency[i]) {
            if (j <= i) continue;
            int a = community[i], b = community[j];
            if (a == b)
                out.self_loop[a] += w;
            else
                acc[{std::min(a, b), std::max(a, b)}] += w;
        }
    }
    for (const auto& [key, w] : acc)
        out.add_edge(static_cast<std::size_t>(key.first), static_cast<std::size_t>(key.second), w);
    return out;
}

}  // namespace

LouvainResult louvain(const WeightedGraph& g, std::uint64_t seed) {
    LouvainResult result;
    result.community.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) result.community[i] = static_cast<int>(i);
    if (g.n == 0) return result;

    util::DeterministicRng rng(seed);
    WeightedGraph working = g;
    std::vector<int> assign = result.community;  // original node -> working node

    while (true) {
        auto [comm, moved] = local_move(working, rng);
        for (std::size_t i = 0; i < g.n; ++i) result.community[i] = comm[assign[i]];
        result.community = renumber_dense(result.community);
        result.pass_modularity.push_back(modularity(g, result.community));
        if (!moved) break;
        std::size_t before = working.n;
        working = aggregate(working, comm);
        for (std::size_t i = 0; i < g.n; ++i) assign[i] = comm[assign[i]];
        if (working.n == before) break;
    }
    return result;
}

// ── Hybrid graph ─────────────────────────────────────────────────────────

std::size_t HybridGraph::index_of(const std::string& uri) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), uri);
    if (it == nodes.end() || *it != uri) throw NotFoundError("node " + uri + " not in hybrid graph");
    return static_cast<std::size_t>(it - nodes.begin());
}

WeightedGraph HybridGraph::to_weighted() const {
    WeightedGraph g(nodes.size());
    for (const auto& [key, e] : edges) g.add_edge(key.first, key.second, e.weight);
    return g;
}

namespace {

// Similarity edges for one layer of units; shared by the entity-level and
// cluster-level constructions.
void add_similarity_edges(HybridGraph& graph, const std::vector<std::vector<double>>& vectors,
                          const HierarchyParams& params) {
    std::size_t n = graph.nodes.size();
    if (n < 2) return;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<double, std::size_t>> sims;
        sims.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sims.emplace_back(embed::cosine_similarity(vectors[i], vectors[j]), j);
        }
        std::sort(sims.begin(), sims.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return graph.nodes[a.second] < graph.nodes[b.second];  // lower uri wins
        });
        std::size_t limit = std::min<std::size_t>(params.knn, sims.size());
        for (std::size_t r = 0; r < limit; ++r) {
            auto [sim, j] = sims[r];
            if (sim < params.theta_sim) break;
            auto key = std::make_pair(std::min(i, j), std::max(i, j));
            if (graph.edges.count(key)) continue;  // relation edges take priority
            graph.edges[key] = {(1.0 - params.alpha) * sim, false};
        }
    }
}

}  // namespace

HybridGraph build_hybrid_graph(const kg::KnowledgeGraph& g, const embed::EmbeddingMap& embeddings,
                               const HierarchyParams& params) {
    HybridGraph graph;
    for (const auto& [uri, e] : g.entities) {
        if (!embeddings.count(uri)) throw MissingEmbeddingError("no embedding for " + uri);
        graph.nodes.push_back(uri);
    }

    // Relation edges: n_ij counts every observation regardless of kind.
    std::map<std::pair<std::size_t, std::size_t>, double> counts;
    for (const auto& [key, rel] : g.relations) {
        if (rel.subject == rel.object) continue;
        std::size_t i = graph.index_of(rel.subject);
        std::size_t j = graph.index_of(rel.object);
        counts[{std::min(i, j), std::max(i, j)}] += static_cast<double>(rel.weight);
    }
    for (const auto& [key, n_ij] : counts)
        graph.edges[key] = {n_ij * params.alpha, true};

    std::vector<std::vector<double>> vectors;
    vectors.reserve(graph.nodes.size());
    for (const auto& uri : graph.nodes) vectors.push_back(embeddings.at(uri));
    add_similarity_edges(graph, vectors, params);
    return graph;
}

// ── Equation-centric pre-clusters ────────────────────────────────────────

std::vector<Cluster> equation_centric_preclusters(const kg::KnowledgeGraph& g) {
    // Relation-record counts between each equation and adjacent Variable or
    // Assumption entities.
    std::map<std::string, std::map<std::string, int>> adj;  // member uri -> equation uri -> count
    std::vector<std::string> equations;
    for (const auto& [uri, e] : g.entities)
        if (e.kind == ontology::EntityKind::Equation) equations.push_back(uri);

    for (const auto& q : equations) {
        for (const auto& [rel, other] : g.neighbors(q)) {
            if (other.kind != ontology::EntityKind::Variable &&
                other.kind != ontology::EntityKind::Assumption)
                continue;
            adj[other.uri][q] += 1;
        }
    }

    // Shared members go to the equation with the most relations, ties to the
    // lower equation uri.
    std::map<std::string, std::vector<std::string>> members_of;  // equation -> members
    for (const auto& [member, eq_counts] : adj) {
        std::string best;
        int best_count = 0;
        for (const auto& [q, count] : eq_counts) {
            if (count > best_count || (count == best_count && (best.empty() || q < best))) {
                best = q;
                best_count = count;
            }
        }
        members_of[best].push_back(member);
    }

    std::vector<Cluster> out;
    for (const auto& q : equations) {
        auto it = members_of.find(q);
        std::size_t size = 1 + (it == members_of.end() ? 0 : it->second.size());
        if (size < 3) continue;
        Cluster c;
        c.layer = 1;
        c.kind = "equation_centric";
        c.id = "c1_eq_" + g.entities.at(q).name;
        c.members = it->second;
        c.members.push_back(q);
        std::sort(c.members.begin(), c.members.end());
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
    return out;
}

// ── Inter-cluster aggregation ────────────────────────────────────────────

std::vector<ClusterEdge> aggregate_inter_cluster_relations(
    const kg::KnowledgeGraph& g, const std::map<std::string, std::string>& cluster_of) {
    std::map<std::pair<std::string, std::string>, std::map<ontology::RelationKind, double>> acc;
    for (const auto& [key, rel] : g.relations) {
        auto si = cluster_of.find(rel.subject);
        auto oi = cluster_of.find(rel.object);
        if (si == cluster_of.end() || oi == cluster_of.end()) continue;
        if (si->second == oi->second) continue;
        auto pair = std::minmax(si->second, oi->second);
        acc[{pair.first, pair.second}][rel.predicate] += static_cast<double>(rel.weight);
    }

    auto precedence = [](ontology::RelationKind k) {
        switch (k) {
            case ontology::RelationKind::HasInput: return 0;
            case ontology::RelationKind::HasOutput: return 1;
            case ontology::RelationKind::Influences: return 2;
            case ontology::RelationKind::CorrespondsTo: return 3;
            case ontology::RelationKind::DerivedFrom: return 4;
            case ontology::RelationKind::RequiresAssumption: return 5;
            case ontology::RelationKind::UsesMaterial: return 6;
            case ontology::RelationKind::ValidInRegime: return 7;
        }
        return 8;
    };

    std::vector<ClusterEdge> out;
    for (const auto& [pair, kinds] : acc) {
        ClusterEdge e;
        e.a = pair.first;
        e.b = pair.second;
        double best = -1.0;
        for (const auto& [kind, freq] : kinds) {
            e.weight += freq;
            if (freq > best ||
                (freq == best && precedence(kind) < precedence(e.label))) {
                best = freq;
                e.label = kind;
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

// ── Hierarchy construction ───────────────────────────────────────────────

namespace {

std::string summarize(llm::GenerationBackend& backend,
                      const std::vector<std::pair<std::string, std::string>>& members,
                      std::size_t max_chars, bool& fallback) {
    json list = json::array();
    for (const auto& [name, description] : members)
        list.push_back(json{{"name", name}, {"description", description}});
    std::string system =
        "You are summarizing a cluster of additive manufacturing knowledge "
        "graph entities. Reply with exactly one sentence describing what the "
        "cluster covers.";
    std::string user = std::string(llm::kMembersMarker) + "\n" + list.dump(2);
    std::string summary;
    fallback = false;
    try {
        summary = backend.complete(system, user, llm::kSummarySchema);
    } catch (const Error&) {
        fallback = true;
        summary.clear();
        for (std::size_t i = 0; i < members.size() && i < 3; ++i)
            summary += (summary.empty() ? "" : ", ") + members[i].first;
    }
    if (summary.size() > max_chars) summary.resize(max_chars);
    return summary;
}

std::vector<double> mean_vector(const std::vector<const std::vector<double>*>& vecs) {
    if (vecs.empty()) return {};
    std::vector<double> out(vecs.front()->size(), 0.0);
    for (const auto* v : vecs)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += (*v)[i];
    for (double& x : out) x /= static_cast<double>(vecs.size());
    return out;
}

// Eq-style next-layer embedding: zero formula block + the summary text vector.
std::vector<double> summary_embedding(const std::string& summary, std::size_t formula_dim,
                                      embed::EmbeddingBackend& text_backend) {
    std::vector<double> text = embed::l2_normalize(text_backend.embed(summary));
    std::vector<double> out(formula_dim, 0.0);
    out.insert(out.end(), text.begin(), text.end());
    return out;
}

}  // namespace

Hierarchy build_hierarchy(const kg::KnowledgeGraph& g, const embed::EmbeddingMap& embeddings,
                          llm::GenerationBackend& backend, embed::EmbeddingBackend& text_backend,
                          const HierarchyParams& params) {
    Hierarchy h;
    h.params = params;
    for (const auto& [uri, e] : g.entities) h.layer0.push_back(uri);
    if (h.layer0.empty()) return h;

    std::size_t fused_dim = embeddings.begin()->second.size();
    std::size_t formula_dim = fused_dim - text_backend.dimension();

    // Layer 1: equation-centric pre-clusters, then Louvain over the rest.
    std::vector<Cluster> layer1 = equation_centric_preclusters(g);
    std::set<std::string> assigned;
    for (const auto& c : layer1)
        for (const auto& m : c.members) assigned.insert(m);

    std::vector<std::string> remaining;
    for (const auto& uri : h.layer0)
        if (!assigned.count(uri)) remaining.push_back(uri);

    if (!remaining.empty()) {
        HybridGraph full = build_hybrid_graph(g, embeddings, params);
        HybridGraph induced;
        induced.nodes = remaining;
        std::map<std::size_t, std::size_t> to_induced;
        for (std::size_t i = 0; i < remaining.size(); ++i)
            to_induced[full.index_of(remaining[i])] = i;
        for (const auto& [key, e] : full.edges) {
            auto a = to_induced.find(key.first);
            auto b = to_induced.find(key.second);
            if (a == to_induced.end() || b == to_induced.end()) continue;
            induced.edges[{std::min(a->second, b->second), std::max(a->second, b->second)}] = e;
        }
        LouvainResult part = louvain(induced.to_weighted(), params.seed);
        int k = 0;
        for (int c : part.community) k = std::max(k, c + 1);
        std::vector<Cluster> communities(k);
        for (std::size_t i = 0; i < remaining.size(); ++i)
            communities[part.community[i]].members.push_back(remaining[i]);
        // Deterministic ids by lowest member uri.
        std::sort(communities.begin(), communities.end(),
                  [](const Cluster& a, const Cluster& b) {
                      return a.members.front() < b.members.front();
                  });
        for (std::size_t i = 0; i < communities.size(); ++i) {
            communities[i].layer = 1;
            communities[i].kind = "community";
            communities[i].id = "c1_com_" + std::to_string(i);
            std::sort(communities[i].members.begin(), communities[i].members.end());
            layer1.push_back(std::move(communities[i]));
        }
    }

    auto leaf_name = [&](const std::string& uri) { return g.entities.at(uri).name; };
    for (auto& c : layer1) {
        std::vector<const std::vector<double>*> vecs;
        std::vector<std::pair<std::string, std::string>> members;
        for (const auto& uri : c.members) {
            vecs.push_back(&embeddings.at(uri));
            members.emplace_back(leaf_name(uri), g.entities.at(uri).description);
            h.parent_of[uri] = c.id;
        }
        c.centroid = mean_vector(vecs);
        c.summary = summarize(backend, members, params.summary_max_chars, c.summary_fallback);
        c.embedding = summary_embedding(c.summary, formula_dim, text_backend);
    }
    h.layers.push_back(layer1);

    // Higher layers: re-cluster previous-layer clusters until the stop
    // threshold (or no further reduction).
    std::map<std::string, std::string> entity_cluster;  // uri -> current top cluster
    for (const auto& uri : h.layer0) entity_cluster[uri] = h.parent_of.at(uri);

    int level = 2;
    while (static_cast<int>(h.layers.back().size()) >= params.theta_stop) {
        const std::vector<Cluster>& prev = h.layers.back();
        HybridGraph cg;
        for (const auto& c : prev) cg.nodes.push_back(c.id);
        std::sort(cg.nodes.begin(), cg.nodes.end());

        for (const auto& edge : aggregate_inter_cluster_relations(g, entity_cluster)) {
            std::size_t i = cg.index_of(edge.a);
            std::size_t j = cg.index_of(edge.b);
            cg.edges[{std::min(i, j), std::max(i, j)}] = {edge.weight * params.alpha, true};
        }
        std::vector<std::vector<double>> vectors(cg.nodes.size());
        std::map<std::string, const Cluster*> prev_by_id;
        for (const auto& c : prev) prev_by_id[c.id] = &c;
        for (std::size_t i = 0; i < cg.nodes.size(); ++i)
            vectors[i] = prev_by_id.at(cg.nodes[i])->embedding;
        add_similarity_edges(cg, vectors, params);

        LouvainResult part = louvain(cg.to_weighted(), params.seed ^ static_cast<std::uint64_t>(level));
        int k = 0;
        for (int c : part.community) k = std::max(k, c + 1);
        std::vector<Cluster> next(k);
        for (std::size_t i = 0; i < cg.nodes.size(); ++i)
            next[part.community[i]].members.push_back(cg.nodes[i]);
        std::sort(next.begin(), next.end(), [](const Cluster& a, const Cluster& b) {
            return a.members.front() < b.members.front();
        });

        for (std::size_t i = 0; i < next.size(); ++i) {
            Cluster& c = next[i];
            c.layer = level;
            c.kind = "community";
            c.id = "c" + std::to_string(level) + "_" + std::to_string(i);
            std::sort(c.members.begin(), c.members.end());
            std::vector<const std::vector<double>*> vecs;
            std::vector<std::pair<std::string, std::string>> members;
            for (const auto& child : c.members) {
                const Cluster* cc = prev_by_id.at(child);
                vecs.push_back(&cc->embedding);
                // A representative leaf name plus the child summary keeps the
                // payload readable.
                std::string rep = cc->layer == 1 ? leaf_name(cc->members.front())
                                                 : cc->members.front();
                members.emplace_back(rep, cc->summary);
                h.parent_of[child] = c.id;
            }
            c.centroid = mean_vector(vecs);
            c.summary = summarize(backend, members, params.summary_max_chars, c.summary_fallback);
            c.embedding = summary_embedding(c.summary, formula_dim, text_backend);
        }

        bool reduced = next.size() < prev.size();
        h.layers.push_back(std::move(next));
        for (auto& [uri, cluster] : entity_cluster) cluster = h.parent_of.at(cluster);
        ++level;
        if (!reduced) break;
    }
    return h;
}

// ── Queries ──────────────────────────────────────────────────────────────

const Cluster* Hierarchy::find_cluster(const std::string& id) const {
    for (const auto& layer : layers)
        for (const auto& c : layer)
            if (c.id == id) return &c;
    return nullptr;
}

std::vector<std::string> Hierarchy::descendants(const std::string& cluster_id) const {
    const Cluster* c = find_cluster(cluster_id);
    if (!c) throw NotFoundError("unknown cluster " + cluster_id);
    std::vector<std::string> out;
    if (c->layer == 1) {
        out = c->members;
        return out;
    }
    for (const auto& child : c->members) {
        auto sub = descendants(child);
        out.insert(out.end(), sub.begin(), sub.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

LcaResult lca(const Hierarchy& h, const std::vector<std::string>& uris) {
    if (uris.empty()) return {true, "", 0};
    // Ancestor chain per uri, one cluster per layer.
    std::vector<std::vector<std::string>> chains;
    for (const auto& uri : uris) {
        if (!std::binary_search(h.layer0.begin(), h.layer0.end(), uri))
            throw NotFoundError("uri " + uri + " is not in layer 0");
        std::vector<std::string> chain;
        auto it = h.parent_of.find(uri);
        while (it != h.parent_of.end()) {
            chain.push_back(it->second);
            it = h.parent_of.find(it->second);
        }
        chains.push_back(std::move(chain));
    }
    // Walk the first chain from the leaf upward; the first cluster present
    // in every other chain is the deepest common ancestor.
    for (std::size_t level = 0; level < chains.front().size(); ++level) {
        const std::string& candidate = chains.front()[level];
        const Cluster* cluster = h.find_cluster(candidate);
        if (!cluster) continue;
        bool all = true;
        for (const auto& chain : chains) {
            bool found = false;
            for (const auto& id : chain)
                if (id == candidate) found = true;
            if (!found) {
                all = false;
                break;
            }
        }
        if (all) return {false, candidate, cluster->layer};
    }
    return {true, "", 0};
}

// ── Persistence ──────────────────────────────────────────────────────────

void save_hierarchy(const Hierarchy& h, const std::string& path) {
    json j;
    j["layer0"] = h.layer0;
    j["params"] = json{{"alpha", h.params.alpha},
                       {"theta_sim", h.params.theta_sim},
                       {"knn", h.params.knn},
                       {"theta_stop", h.params.theta_stop},
                       {"seed", h.params.seed},
                       {"summary_max_chars", h.params.summary_max_chars}};
    j["layers"] = json::array();
    for (const auto& layer : h.layers) {
        json jl = json::array();
        for (const auto& c : layer) {
            jl.push_back(json{{"id", c.id},
                              {"layer", c.layer},
                              {"kind", c.kind},
                              {"members", c.members},
                              {"centroid", c.centroid},
                              {"summary", c.summary},
                              {"summary_fallback", c.summary_fallback},
                              {"embedding", c.embedding}});
        }
        j["layers"].push_back(std::move(jl));
    }
    json parents = json::object();
    for (const auto& [child, parent] : h.parent_of) parents[child] = parent;
    j["parent_of"] = std::move(parents);

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

Hierarchy load_hierarchy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    json j = json::parse(in);
    Hierarchy h;
    h.layer0 = j.at("layer0").get<std::vector<std::string>>();
    const json& p = j.at("params");
    h.params.alpha = p.at("alpha").get<double>();
    h.params.theta_sim = p.at("theta_sim").get<double>();
    h.params.knn = p.at("knn").get<int>();
    h.params.theta_stop = p.at("theta_stop").get<int>();
    h.params.seed = p.at("seed").get<std::uint64_t>();
    h.params.summary_max_chars = p.at("summary_max_chars").get<std::size_t>();
    for (const auto& jl : j.at("layers")) {
        std::vector<Cluster> layer;
        for (const auto& jc : jl) {
            Cluster c;
            c.id = jc.at("id").get<std::string>();
            c.layer = jc.at("layer").get<int>();
            c.kind = jc.at("kind").get<std::string>();
            c.members = jc.at("members").get<std::vector<std::string>>();
            c.centroid = jc.at("centroid").get<std::vector<double>>();
            c.summary = jc.at("summary").get<std::string>();
            c.summary_fallback = jc.at("summary_fallback").get<bool>();
            c.embedding = jc.at("embedding").get<std::vector<double>>();
            layer.push_back(std::move(c));
        }
        h.layers.push_back(std::move(layer));
    }
    for (const auto& [child, parent] : j.at("parent_of").items())
        h.parent_of[child] = parent.get<std::string>();
    return h;
}

}  // namespace amkg::hierarchy
