#pragma once
// Run configuration: backend selection, hyperparameters and paths. Every
// hyperparameter defaults to the reported reference value; `config show`
// prints them all.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "amkg/backend.hpp"
#include "amkg/embedding.hpp"

namespace amkg::config {

struct Config {
    // Backends. Generation: live | fixture | synth. Embedding: fixture | live.
    std::string backend = "synth";
    std::string embedding_backend = "fixture";
    std::string fixture_dir;        // canned generation responses
    bool record_fixtures = false;   // tee completions into fixture_dir

    std::string llm_base_url;  // AMKG_LLM_BASE_URL
    std::string llm_api_key;   // AMKG_LLM_API_KEY
    std::string llm_model = "gpt-4o-mini";
    std::string embed_base_url;  // AMKG_EMBED_BASE_URL
    std::string embed_api_key;   // AMKG_EMBED_API_KEY
    std::string embed_model = "text-embedding-3-small";

    std::size_t formula_dim = 384;
    std::size_t text_dim = 1536;
    std::size_t max_tokens = 1024;  // chunk budget

    double alpha = 0.6;      // relation-edge weight factor in the hybrid graph
    double theta_sim = 0.7;  // similarity threshold for kNN edges
    int knn = 10;            // nearest neighbors for similarity edges
    int theta_stop = 20;     // hierarchy stopping threshold
    int top_k = 10;          // retrieval seed count
    std::size_t subgraph_cap = 200;

    double w_dist = 0.4;    // confidence weight: extrapolation distance
    double w_stat = 0.3;    // confidence weight: statistical quality
    double w_phys = 0.2;    // confidence weight: physics consistency
    double w_uncertainty = 0.1;
    double alpha_d = 2.0;   // distance decay rate
    int bootstrap_b = 500;
    int candidates_m = 3;

    std::uint64_t seed = 42;
    int jobs = 1;
};

// Reads key = value lines ('#' comments allowed), then applies env
// overrides for endpoint URLs and keys.
Config load_config(const std::optional<std::string>& path);
void apply_env(Config& cfg);

// Key, current value and a one-line description per setting.
std::string config_show(const Config& cfg);

std::unique_ptr<llm::GenerationBackend> make_generation_backend(const Config& cfg);
std::unique_ptr<embed::EmbeddingBackend> make_text_backend(const Config& cfg);
std::unique_ptr<embed::EmbeddingBackend> make_formula_backend(const Config& cfg);

}  // namespace amkg::config
