#pragma once
// Hybrid relation+similarity graph, equation-centric pre-clusters, Louvain
// community detection, and the iterative summarize-and-re-embed hierarchy
// with lowest-common-ancestor queries.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amkg/backend.hpp"
#include "amkg/embedding.hpp"
#include "amkg/kg_store.hpp"

namespace amkg::hierarchy {

struct HierarchyParams {
    double alpha = 0.6;      // relation-edge weight factor
    double theta_sim = 0.7;  // similarity threshold for kNN edges
    int knn = 10;
    int theta_stop = 20;  // stop when a layer has fewer clusters
    std::uint64_t seed = 42;
    std::size_t summary_max_chars = 200;
};

// Small weighted undirected graph used by Louvain. Self-loops are stored
// once; their weight counts twice toward node strength.
struct WeightedGraph {
    std::size_t n = 0;
    std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;
    std::vector<double> self_loop;

    explicit WeightedGraph(std::size_t nodes = 0)
        : n(nodes), adjacency(nodes), self_loop(nodes, 0.0) {}
    void add_edge(std::size_t a, std::size_t b, double w);
    double strength(std::size_t i) const;
    double total_weight() const;  // 2m
};

double modularity(const WeightedGraph& g, const std::vector<int>& community);

struct LouvainResult {
    std::vector<int> community;            // dense ids, deterministic numbering
    std::vector<double> pass_modularity;   // non-decreasing across passes
};

LouvainResult louvain(const WeightedGraph& g, std::uint64_t seed);

struct HybridEdge {
    double weight = 0.0;
    bool from_relation = false;
};

struct HybridGraph {
    std::vector<std::string> nodes;  // sorted entity uris
    std::map<std::pair<std::size_t, std::size_t>, HybridEdge> edges;  // i < j

    std::size_t index_of(const std::string& uri) const;
    WeightedGraph to_weighted() const;
};

// Relation edges weigh n_ij * alpha; similarity edges (1-alpha) * sim exist
// only outside relation pairs, inside the kNN of either endpoint, and above
// theta_sim. Throws MissingEmbeddingError when an entity has no embedding.
HybridGraph build_hybrid_graph(const kg::KnowledgeGraph& g, const embed::EmbeddingMap& embeddings,
                               const HierarchyParams& params = {});

struct Cluster {
    std::string id;
    int layer = 1;
    std::string kind;  // "equation_centric" | "community"
    std::vector<std::string> members;  // entity uris (layer 1) or child cluster ids
    std::vector<double> centroid;
    std::string summary;
    bool summary_fallback = false;
    std::vector<double> embedding;  // next-layer hybrid form: [0_F ; text(summary)]
};

// One cluster per equation with its relation-adjacent Variables/Assumptions,
// emitted when the cluster has at least 3 members. Entities adjacent to
// several equations go to the one with the most relations to them, ties to
// the lower equation uri.
std::vector<Cluster> equation_centric_preclusters(const kg::KnowledgeGraph& g);

struct ClusterEdge {
    std::string a, b;  // cluster ids, a < b
    double weight = 0.0;
    ontology::RelationKind label = ontology::RelationKind::HasInput;
};

// Cross-cluster relation frequencies with the modal kind as label
// (ties: has_input > has_output > influences > others alphabetical).
std::vector<ClusterEdge> aggregate_inter_cluster_relations(
    const kg::KnowledgeGraph& g, const std::map<std::string, std::string>& cluster_of);

struct Hierarchy {
    std::vector<std::string> layer0;               // all entity uris, sorted
    std::vector<std::vector<Cluster>> layers;      // layers[k] holds layer k+1
    std::map<std::string, std::string> parent_of;  // uri/cluster id -> parent cluster id
    HierarchyParams params;

    const Cluster* find_cluster(const std::string& id) const;
    // Layer-0 uris reachable below a cluster.
    std::vector<std::string> descendants(const std::string& cluster_id) const;
};

Hierarchy build_hierarchy(const kg::KnowledgeGraph& g, const embed::EmbeddingMap& embeddings,
                          llm::GenerationBackend& backend, embed::EmbeddingBackend& text_backend,
                          const HierarchyParams& params = {});

struct LcaResult {
    bool virtual_root = false;
    std::string cluster_id;  // empty when virtual_root
    int layer = 0;
};

// Deepest cluster containing every uri; virtual root when none exists.
// Throws NotFoundError for uris outside layer 0.
LcaResult lca(const Hierarchy& h, const std::vector<std::string>& uris);

void save_hierarchy(const Hierarchy& h, const std::string& path);
Hierarchy load_hierarchy(const std::string& path);

}  // namespace amkg::hierarchy
