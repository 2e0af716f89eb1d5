#pragma once
// Pluggable text-generation seam. Three implementations: a canned-response
// fixture store keyed by prompt hash, a deterministic rule-based synthesizer
// (used to author fixtures and run offline), and an OpenAI-compatible HTTP
// client. Identical inputs always yield identical outputs for the first two.

#include <memory>
#include <string>

namespace amkg::llm {

// Output schema identifiers carried with every completion request.
inline constexpr const char* kEntitySchema = "entity_extraction.v1";
inline constexpr const char* kRelationSchema = "relation_extraction.v1";
inline constexpr const char* kSummarySchema = "cluster_summary.v1";
inline constexpr const char* kCandidateSchema = "candidate_equations.v1";

// Section markers inside user prompts; the synthesizer locates its inputs
// through these.
inline constexpr const char* kHintsMarker = "### HINTS";
inline constexpr const char* kEntitiesMarker = "### ENTITIES";
inline constexpr const char* kTextMarker = "### TEXT";
inline constexpr const char* kMembersMarker = "### MEMBERS";
inline constexpr const char* kSubgraphMarker = "### SUBGRAPH";
inline constexpr const char* kTaskMarker = "### TASK";

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual std::string complete(const std::string& system_prompt, const std::string& user_prompt,
                                 const std::string& output_schema_id) = 0;
    virtual std::string kind() const = 0;  // "fixture" | "synth" | "live"
};

// Filename stem for a canned response: fnv1a64 over the full request.
std::string fixture_key(const std::string& system_prompt, const std::string& user_prompt,
                        const std::string& output_schema_id);

// Reads {prompt_hash}.json files from a directory; missing file -> BackendError.
class FixtureBackend : public GenerationBackend {
public:
    explicit FixtureBackend(std::string dir);
    std::string complete(const std::string& system_prompt, const std::string& user_prompt,
                         const std::string& output_schema_id) override;
    std::string kind() const override { return "fixture"; }

private:
    std::string dir_;
};

// Rule-based responder: reproduces what a well-behaved extractor would say,
// derived purely from the prompt content.
class SynthBackend : public GenerationBackend {
public:
    std::string complete(const std::string& system_prompt, const std::string& user_prompt,
                         const std::string& output_schema_id) override;
    std::string kind() const override { return "synth"; }
};

// Tees every completion into fixture files so a later FixtureBackend run
// replays the exact same bytes.
class RecordingBackend : public GenerationBackend {
public:
    RecordingBackend(std::unique_ptr<GenerationBackend> inner, std::string dir);
    std::string complete(const std::string& system_prompt, const std::string& user_prompt,
                         const std::string& output_schema_id) override;
    std::string kind() const override { return inner_->kind(); }

private:
    std::unique_ptr<GenerationBackend> inner_;
    std::string dir_;
};

// OpenAI-compatible POST /chat/completions client.
class HttpGenerationBackend : public GenerationBackend {
public:
    HttpGenerationBackend(std::string base_url, std::string api_key, std::string model);
    std::string complete(const std::string& system_prompt, const std::string& user_prompt,
                         const std::string& output_schema_id) override;
    std::string kind() const override { return "live"; }

private:
    std::string base_url_, api_key_, model_;
};

}  // namespace amkg::llm
