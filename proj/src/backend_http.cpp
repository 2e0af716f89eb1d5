// OpenAI-compatible HTTP clients for generation and embeddings.

#include <json.hpp>

#ifdef AMKG_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "amkg/backend.hpp"
#include "amkg/embedding.hpp"
#include "amkg/errors.hpp"

namespace amkg {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path_prefix;
};

ParsedUrl split_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("backend base url must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

json post_json(const std::string& base_url, const std::string& api_key, const std::string& path,
               const json& body) {
    ParsedUrl url = split_url(base_url);
    httplib::Client client(url.origin);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto res = client.Post(url.path_prefix + path, headers, body.dump(), "application/json");
    if (!res)
        throw BackendError("no response from " + url.origin + " (" +
                           httplib::to_string(res.error()) + ")");
    if (res->status / 100 != 2)
        throw BackendError("HTTP " + std::to_string(res->status) + " from " + path + ": " +
                           res->body);
    json parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded()) throw BackendError("non-JSON body from " + path);
    return parsed;
}

}  // namespace

namespace llm {

HttpGenerationBackend::HttpGenerationBackend(std::string base_url, std::string api_key,
                                             std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

std::string HttpGenerationBackend::complete(const std::string& system_prompt,
                                            const std::string& user_prompt,
                                            const std::string& output_schema_id) {
    json body;
    body["model"] = model_;
    body["temperature"] = 0;
    body["messages"] = json::array({
        json{{"role", "system"}, {"content", system_prompt}},
        json{{"role", "user"}, {"content", user_prompt}},
    });
    body["metadata"] = json{{"output_schema_id", output_schema_id}};
    json reply = post_json(base_url_, api_key_, "/chat/completions", body);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw BackendError("chat completion reply missing choices[0].message.content");
    }
}

}  // namespace llm

namespace embed {

HttpEmbeddingBackend::HttpEmbeddingBackend(std::string base_url, std::string api_key,
                                           std::string model, std::size_t dim)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)),
      dim_(dim) {}

std::vector<double> HttpEmbeddingBackend::embed(const std::string& text) {
    json body;
    body["model"] = model_;
    body["input"] = text;
    json reply = post_json(base_url_, api_key_, "/embeddings", body);
    std::vector<double> vec;
    try {
        vec = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception&) {
        throw BackendError("embeddings reply missing data[0].embedding");
    }
    if (vec.size() != dim_)
        throw BackendError("embedding dimension " + std::to_string(vec.size()) +
                           " does not match configured " + std::to_string(dim_));
    return vec;
}

}  // namespace embed
}  // namespace amkg
