#include "amkg/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include <json.hpp>

#include "amkg/errors.hpp"
#include "amkg/expression.hpp"
#include "amkg/util.hpp"

namespace amkg::extraction {

using nlohmann::json;

// ── Token counting ───────────────────────────────────────────────────────

std::size_t bpe_token_estimate(std::string_view text) {
    std::size_t tokens = 0;
    std::size_t run = 0;
    auto flush = [&]() {
        if (run > 0) tokens += (run + 3) / 4;
        run = 0;
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            ++run;
        } else {
            flush();
            if (!std::isspace(static_cast<unsigned char>(c))) ++tokens;  // punctuation
        }
    }
    flush();
    return tokens;
}

std::size_t whitespace_token_count(std::string_view text) {
    std::size_t tokens = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c));
        if (!space && !in_word) ++tokens;
        in_word = !space;
    }
    return tokens;
}

// ── Block scanning ───────────────────────────────────────────────────────

namespace {

struct Block {
    bool is_equation = false;
    std::string text;   // paragraph text, or "$$ <latex> $$" for equations
    std::string latex;  // equation body
};

void split_paragraphs(const std::string& narrative, std::vector<Block>& out) {
    std::size_t pos = 0;
    while (pos < narrative.size()) {
        std::size_t brk = narrative.find("\n\n", pos);
        std::string para = narrative.substr(pos, brk == std::string::npos ? std::string::npos
                                                                          : brk - pos);
        std::string trimmed = util::trim(para);
        if (!trimmed.empty()) out.push_back({false, trimmed, ""});
        if (brk == std::string::npos) break;
        pos = brk + 2;
    }
}

std::vector<Block> scan_blocks(const std::string& doc) {
    std::vector<Block> blocks;
    std::size_t pos = 0;
    while (pos < doc.size()) {
        std::size_t open = doc.find("$$", pos);
        if (open == std::string::npos) {
            split_paragraphs(doc.substr(pos), blocks);
            break;
        }
        split_paragraphs(doc.substr(pos, open - pos), blocks);
        std::size_t close = doc.find("$$", open + 2);
        if (close == std::string::npos) {
            // Unbalanced delimiter: treat the rest as narrative.
            split_paragraphs(doc.substr(open + 2), blocks);
            break;
        }
        std::string body = util::trim(doc.substr(open + 2, close - open - 2));
        if (!body.empty()) blocks.push_back({true, "$$ " + body + " $$", body});
        pos = close + 2;
    }
    return blocks;
}

// Split points must stay outside inline $...$ spans.
std::vector<std::string> split_long_paragraph(const std::string& text,
                                              const TokenCounter& tokenizer,
                                              std::size_t max_tokens) {
    std::vector<std::string> pieces;
    std::string cur;
    std::string word;
    bool in_math = false;
    bool word_in_math = false;

    auto try_flush_word = [&]() {
        if (word.empty()) return;
        std::string candidate = cur.empty() ? word : cur + " " + word;
        if (tokenizer(candidate) > max_tokens && !cur.empty() && !word_in_math) {
            pieces.push_back(cur);
            cur = word;
        } else {
            cur = std::move(candidate);
        }
        word.clear();
        word_in_math = in_math;
    };

    for (char c : text) {
        if (c == '$') in_math = !in_math;
        if (std::isspace(static_cast<unsigned char>(c)) && !in_math) {
            try_flush_word();
        } else {
            if (word.empty()) word_in_math = in_math;
            word.push_back(c);
        }
    }
    try_flush_word();
    if (!cur.empty()) pieces.push_back(cur);
    return pieces;
}

std::vector<std::string> inline_equations(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t open = text.find('$', pos);
        if (open == std::string::npos) break;
        bool display = open + 1 < text.size() && text[open + 1] == '$';
        std::size_t body_start = open + (display ? 2 : 1);
        std::size_t close = text.find(display ? "$$" : "$", body_start);
        if (close == std::string::npos) break;
        std::string body = util::trim(text.substr(body_start, close - body_start));
        if (!body.empty()) out.push_back(body);
        pos = close + (display ? 2 : 1);
    }
    return out;
}

}  // namespace

std::vector<Chunk> chunk_document(const std::string& doc, const TokenCounter& tokenizer,
                                  std::size_t max_tokens) {
    if (util::trim(doc).empty()) throw ChunkOverflowError("document is empty");

    std::vector<Block> raw_blocks = scan_blocks(doc);
    std::vector<Block> blocks;
    for (auto& b : raw_blocks) {
        if (!b.is_equation && tokenizer(b.text) > max_tokens) {
            for (auto& piece : split_long_paragraph(b.text, tokenizer, max_tokens))
                blocks.push_back({false, std::move(piece), ""});
        } else {
            blocks.push_back(std::move(b));
        }
    }

    std::vector<std::vector<const Block*>> groups;
    std::vector<const Block*> cur;
    std::string cur_text;
    auto text_of = [](const std::vector<const Block*>& g) {
        std::string t;
        for (const Block* b : g) {
            if (!t.empty()) t += "\n\n";
            t += b->text;
        }
        return t;
    };

    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        std::size_t own = tokenizer(b.text);
        if (b.is_equation && own > max_tokens)
            throw ChunkOverflowError("display equation exceeds the token budget (" +
                                     std::to_string(own) + " tokens)");

        std::vector<const Block*> candidate = cur;
        candidate.push_back(&b);
        if (!cur.empty() && tokenizer(text_of(candidate)) > max_tokens) {
            groups.push_back(cur);
            cur.clear();
            // A display equation keeps its preceding paragraph as context.
            if (b.is_equation && i > 0 && !blocks[i - 1].is_equation) {
                std::vector<const Block*> with_ctx{&blocks[i - 1], &b};
                if (tokenizer(text_of(with_ctx)) <= max_tokens) cur.push_back(&blocks[i - 1]);
            }
        }
        cur.push_back(&b);
    }
    if (!cur.empty()) groups.push_back(cur);

    std::vector<Chunk> chunks;
    for (const auto& g : groups) {
        Chunk c;
        c.text = text_of(g);
        c.equations = inline_equations(c.text);
        c.token_count = tokenizer(c.text);
        c.id = "chunk_" + util::hex64(util::fnv1a64(c.text)).substr(0, 8);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

// ── Hint generation ──────────────────────────────────────────────────────

namespace {

struct LexiconEntry {
    const char* phrase;
    const char* canonical;
};

constexpr LexiconEntry kProcessParameters[] = {
    {"laser power", "laser_power"},
    {"scan speed", "scan_speed"},
    {"layer thickness", "layer_thickness"},
    {"exposure time", "exposure_time"},
    {"exposure energy", "exposure_energy"},
    {"radiant exposure", "radiant_exposure"},
    {"light intensity", "light_intensity"},
    {"hatch spacing", "hatch_spacing"},
    {"build orientation", "build_orientation"},
    {"post curing time", "post_curing_time"},
    {"wavelength", "wavelength"},
};

constexpr LexiconEntry kPerformanceMetrics[] = {
    {"cure depth", "cure_depth"},
    {"tensile strength", "tensile_strength"},
    {"surface roughness", "surface_roughness"},
    {"surface quality", "surface_quality"},
    {"porosity", "porosity"},
    {"dimensional accuracy", "dimensional_accuracy"},
    {"elastic modulus", "elastic_modulus"},
    {"flexural strength", "flexural_strength"},
    {"hardness", "hardness"},
};

constexpr LexiconEntry kAssumptions[] = {
    {"steady-state", "steady_state"},
    {"steady state", "steady_state"},
    {"isothermal", "isothermal"},
    {"negligible scattering", "negligible_scattering"},
    {"negligible oxygen inhibition", "negligible_oxygen_inhibition"},
    {"beer-lambert", "beer_lambert_attenuation"},
    {"uniform intensity", "uniform_intensity"},
    {"single-photon absorption", "single_photon_absorption"},
};

constexpr LexiconEntry kMaterials[] = {
    {"photopolymer resin", "photopolymer_resin"},
    {"photopolymer", "photopolymer"},
    {"acrylate", "acrylate"},
    {"epoxy", "epoxy"},
    {"graphene", "graphene"},
    {"hydroxyapatite", "hydroxyapatite"},
    {"nanocomposite", "nanocomposite"},
};

template <std::size_t N>
void lexicon_scan(const std::string& lower_text, const LexiconEntry (&lexicon)[N],
                  std::vector<std::string>& out) {
    std::set<std::string> seen;
    for (const auto& entry : lexicon) {
        if (lower_text.find(entry.phrase) != std::string::npos && seen.insert(entry.canonical).second)
            out.push_back(entry.canonical);
    }
    // "photopolymer resin" subsumes "photopolymer"; keep the longest match only.
    // (Both canonicals may have been added; drop a canonical that is a prefix
    // of another with an underscore boundary.)
    auto subsumed = [&](const std::string& a) {
        for (const auto& b : out)
            if (b != a && b.rfind(a + "_", 0) == 0) return true;
        for (const auto& b : out)
            if (b != a && b.size() > a.size() && b.find("_" + a) != std::string::npos) return false;
        return false;
    };
    out.erase(std::remove_if(out.begin(), out.end(), subsumed), out.end());
}

std::string sanitize_unit(const std::string& unit) {
    std::string out;
    for (char c : unit) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(c);
        else if (!out.empty() && out.back() != '_')
            out.push_back('_');
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

void scan_regimes(const std::string& text, std::vector<std::string>& out) {
    // Normalize en/em dashes so the range separator is a plain '-'.
    std::string norm = text;
    for (const char* dash : {"\xE2\x80\x93", "\xE2\x80\x94"}) {
        std::size_t pos;
        while ((pos = norm.find(dash)) != std::string::npos) norm.replace(pos, 3, "-");
    }
    static const std::regex range_re(
        R"(([A-Za-z][A-Za-z ]{2,40}?)\s+(?:of|between|from)\s+(\d+(?:\.\d+)?)\s*(?:-|to|and)\s*(\d+(?:\.\d+)?)\s*([A-Za-z][A-Za-z0-9/^]*)?)");
    std::set<std::string> seen;
    for (auto it = std::sregex_iterator(norm.begin(), norm.end(), range_re);
         it != std::sregex_iterator(); ++it) {
        std::string phrase = util::lower(util::trim((*it)[1].str()));
        // Drop leading filler so "a laser power" keys on the parameter words.
        static const std::set<std::string> filler = {"a",  "an", "the",  "with",
                                                     "at", "of", "for", "using", "and"};
        std::vector<std::string> words;
        std::string w;
        for (char c : phrase + " ") {
            if (c == ' ') {
                if (!w.empty()) words.push_back(w);
                w.clear();
            } else {
                w.push_back(c);
            }
        }
        while (!words.empty() && filler.count(words.front())) words.erase(words.begin());
        if (words.empty()) continue;
        if (words.size() > 3) words.erase(words.begin(), words.end() - 3);
        std::string name;
        for (const auto& word : words) name += (name.empty() ? "" : "_") + word;

        std::string hint = name + "_" + (*it)[2].str() + "_" + (*it)[3].str();
        std::string unit = sanitize_unit((*it)[4].str());
        if (!unit.empty()) hint += "_" + unit;
        if (seen.insert(hint).second) out.push_back(hint);
    }
}

}  // namespace

HintSet generate_hints(const Chunk& chunk) {
    HintSet hints;
    for (const auto& latex : chunk.equations) {
        if (latex.find('=') == std::string::npos) continue;
        EquationHint h;
        h.latex = latex;
        try {
            auto parsed = eqn::parse_latex(latex);
            h.variables.push_back({parsed.target, "output"});
            for (const auto& sym : eqn::variable_symbols(parsed.rhs))
                h.variables.push_back({sym, "input"});
        } catch (const Error&) {
            auto eq_pos = latex.find('=');
            for (const auto& sym : eqn::extract_symbols(latex.substr(0, eq_pos)))
                h.variables.push_back({sym, "output"});
            for (const auto& sym : eqn::extract_symbols(latex.substr(eq_pos + 1)))
                h.variables.push_back({sym, "input"});
        }
        hints.equations.push_back(std::move(h));
    }

    std::string lower_text = util::lower(chunk.text);
    lexicon_scan(lower_text, kProcessParameters, hints.process_parameters);
    lexicon_scan(lower_text, kPerformanceMetrics, hints.performance_metrics);
    lexicon_scan(lower_text, kAssumptions, hints.assumptions);
    lexicon_scan(lower_text, kMaterials, hints.materials);
    scan_regimes(chunk.text, hints.regimes);
    return hints;
}

// ── Prompts ──────────────────────────────────────────────────────────────

namespace {

json hints_to_json(const HintSet& hints) {
    json j;
    j["equations"] = json::array();
    for (const auto& eq : hints.equations) {
        json vars = json::array();
        for (const auto& v : eq.variables)
            vars.push_back(json{{"symbol", v.symbol}, {"role", v.role}});
        j["equations"].push_back(json{{"latex", eq.latex}, {"variables", vars}});
    }
    auto capped = [](const std::vector<std::string>& names) {
        json arr = json::array();
        std::size_t used = 0;
        for (const auto& n : names) {
            std::size_t cost = bpe_token_estimate(n);
            if (used + cost > kHintCategoryTokenCap) break;
            used += cost;
            arr.push_back(n);
        }
        return arr;
    };
    j["process_parameters"] = capped(hints.process_parameters);
    j["performance_metrics"] = capped(hints.performance_metrics);
    j["assumptions"] = capped(hints.assumptions);
    j["regimes"] = capped(hints.regimes);
    j["materials"] = capped(hints.materials);
    return j;
}

const char* kEntitySystemPrompt =
    "You are an expert in additive manufacturing knowledge graph construction. "
    "Extract entities from the given text chunk, strictly following the entity "
    "types and naming rules below. Verify the suggested hints against the text "
    "and add missing entities only when the text gives explicit evidence.\n"
    "Entity types:\n"
    "- ProcessParameter: controllable process parameters (e.g. laser_power, "
    "scan_speed); lowercase snake_case.\n"
    "- Performance: measurable output metrics (e.g. tensile_strength, "
    "surface_roughness); lowercase snake_case.\n"
    "- Variable: symbolic variables appearing in equations (e.g. P, v, E); "
    "LaTeX-compatible notation.\n"
    "- Equation: a descriptive identifier (e.g. equation_energy_density) plus "
    "the complete LaTeX expression in a 'latex' field.\n"
    "- Assumption: physical or experimental assumptions (e.g. steady_state, "
    "isothermal); lowercase snake_case.\n"
    "- Regime: parameter range constraints, formatted parameter_min_max_unit "
    "(e.g. laser_power_100_300_W).\n"
    "- Material: material or resin components; lowercase snake_case.\n"
    "- Phenomenon: physical phenomena; lowercase snake_case.\n"
    "Output only a JSON array; each record carries name, type, description, "
    "and optionally latex and unit.";

const char* kEntityFewShot =
    "Example input:\n"
    "The cure depth C_d grows logarithmically with the radiant exposure $E$, "
    "following $C_d = D_p \\ln(E / E_c)$, where D_p and E_c are resin "
    "constants, under steady-state exposure conditions.\n"
    "Example output:\n"
    "[\n"
    "  {\"name\": \"radiant_exposure\", \"type\": \"ProcessParameter\", "
    "\"description\": \"energy delivered per unit area during exposure\", "
    "\"unit\": \"mJ/cm^2\"},\n"
    "  {\"name\": \"cure_depth\", \"type\": \"Performance\", \"description\": "
    "\"depth of cured material after exposure\", \"unit\": \"mm\"},\n"
    "  {\"name\": \"equation_cure_depth\", \"type\": \"Equation\", \"latex\": "
    "\"C_d = D_p \\\\ln(E / E_c)\", \"description\": \"working curve relating "
    "cure depth to radiant exposure\"},\n"
    "  {\"name\": \"C_d\", \"type\": \"Variable\", \"latex\": \"C_d\", "
    "\"description\": \"cure depth (output)\"},\n"
    "  {\"name\": \"E\", \"type\": \"Variable\", \"latex\": \"E\", "
    "\"description\": \"radiant exposure (input)\"},\n"
    "  {\"name\": \"steady_state\", \"type\": \"Assumption\", \"description\": "
    "\"steady-state exposure conditions\"}\n"
    "]\n"
    "\n"
    "Example input:\n"
    "Increasing the layer thickness reduces the tensile strength of printed "
    "parts.\n"
    "Example output:\n"
    "[\n"
    "  {\"name\": \"layer_thickness\", \"type\": \"ProcessParameter\", "
    "\"description\": \"thickness of each printed layer\", \"unit\": \"mm\"},\n"
    "  {\"name\": \"tensile_strength\", \"type\": \"Performance\", "
    "\"description\": \"tensile strength of the printed part\", \"unit\": "
    "\"MPa\"}\n"
    "]";

const char* kRelationSystemPrompt =
    "You are an expert in additive manufacturing knowledge graph construction. "
    "Infer semantic relations between the given entities from the text chunk. "
    "Allowed predicates: has_input, has_output, influences, "
    "requires_assumption, valid_in_regime, corresponds_to, uses_material, "
    "derived_from. Subject and object must be names from the given entity "
    "list; every influences relation must carry a sign (+1, -1 or 0); every "
    "equation should have at least one has_input and one has_output. Output "
    "only a JSON array of {subject, predicate, object, sign?, evidence}.";

}  // namespace

Prompt build_entity_prompt(const Chunk& chunk, const HintSet& hints) {
    Prompt p;
    p.schema_id = llm::kEntitySchema;
    p.system = kEntitySystemPrompt;
    p.user = std::string(llm::kHintsMarker) + "\n" + hints_to_json(hints).dump(2) + "\n" +
             "### EXAMPLES\n" + kEntityFewShot + "\n" + llm::kTextMarker + "\n" + chunk.text;
    return p;
}

Prompt build_relation_prompt(const Chunk& chunk, const std::vector<kg::Entity>& entities) {
    json list = json::array();
    for (const auto& e : entities) {
        json rec{{"name", e.name}, {"type", ontology::kind_name(e.kind)}};
        if (e.latex) rec["latex"] = *e.latex;
        list.push_back(std::move(rec));
    }
    Prompt p;
    p.schema_id = llm::kRelationSchema;
    p.system = kRelationSystemPrompt;
    p.user = std::string(llm::kEntitiesMarker) + "\n" + list.dump(2) + "\n" + llm::kTextMarker +
             "\n" + chunk.text;
    return p;
}

// ── Extraction ───────────────────────────────────────────────────────────

namespace {

json complete_json(llm::GenerationBackend& backend, const Prompt& prompt) {
    std::string raw = backend.complete(prompt.system, prompt.user, prompt.schema_id);
    json parsed = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_discarded()) return parsed;
    // One automatic retry, then a hard error with the raw response attached.
    raw = backend.complete(prompt.system, prompt.user, prompt.schema_id);
    parsed = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    if (!parsed.is_discarded()) return parsed;
    throw ExtractionError("backend returned unparseable output for " + prompt.schema_id, raw);
}

json as_array(const json& j, const char* wrapper_key) {
    if (j.is_array()) return j;
    if (j.is_object() && j.contains(wrapper_key) && j.at(wrapper_key).is_array())
        return j.at(wrapper_key);
    return json::array();
}

}  // namespace

EntityExtraction extract_entities(const Chunk& chunk, const HintSet& hints,
                                  llm::GenerationBackend& backend) {
    Prompt prompt = build_entity_prompt(chunk, hints);
    json records = as_array(complete_json(backend, prompt), "entities");

    EntityExtraction result;
    std::map<std::string, kg::Entity> by_uri;
    for (const auto& rec : records) {
        if (!rec.is_object() || !rec.contains("name") || !rec.contains("type")) {
            ++result.dropped_records;
            continue;
        }
        try {
            std::string raw_name = rec.at("name").get<std::string>();
            kg::Entity e;
            e.kind = ontology::entity_kind_from(rec.at("type").get<std::string>());
            e.name = ontology::normalize_entity_name(raw_name);
            e.description = rec.value("description", "");
            if (rec.contains("latex"))
                e.latex = rec.at("latex").get<std::string>();
            else if (e.kind == ontology::EntityKind::Variable)
                e.latex = util::trim(raw_name);
            if (rec.contains("unit")) e.unit = rec.at("unit").get<std::string>();
            if (e.kind == ontology::EntityKind::Equation &&
                (!e.latex || !ontology::validate_equation_latex(*e.latex))) {
                ++result.dropped_records;
                continue;
            }
            e.provenance = {chunk.id};
            e.uri = kg::make_uri(e.kind, e.name);
            auto [it, inserted] = by_uri.emplace(e.uri, e);
            if (!inserted && it->second.description.empty())
                it->second.description = e.description;
        } catch (const json::exception&) {
            ++result.dropped_records;
        } catch (const Error&) {
            ++result.dropped_records;
        }
    }
    for (auto& [uri, e] : by_uri) result.entities.push_back(std::move(e));
    return result;
}

namespace {

std::optional<int> parse_sign(const json& rec) {
    if (!rec.contains("sign") || rec.at("sign").is_null()) return std::nullopt;
    const json& s = rec.at("sign");
    if (s.is_number_integer()) {
        int v = s.get<int>();
        if (v == 1 || v == -1 || v == 0) return v;
        return std::nullopt;
    }
    if (s.is_string()) {
        std::string v = s.get<std::string>();
        if (v == "+" || v == "+1" || v == "positive") return 1;
        if (v == "-" || v == "-1" || v == "negative") return -1;
        if (v == "0" || v == "neutral") return 0;
    }
    return std::nullopt;
}

std::string first_sentence(const std::string& text) {
    auto stop = text.find('.');
    std::string s = stop == std::string::npos ? text : text.substr(0, stop + 1);
    for (char& c : s)
        if (c == '\n') c = ' ';
    return util::trim(s);
}

}  // namespace

std::vector<kg::Relation> extract_relations(const Chunk& chunk,
                                            const std::vector<kg::Entity>& entities,
                                            llm::GenerationBackend& backend) {
    Prompt prompt = build_relation_prompt(chunk, entities);
    json records = as_array(complete_json(backend, prompt), "relations");

    std::map<std::string, const kg::Entity*> by_name;
    for (const auto& e : entities) by_name.emplace(e.name, &e);

    std::map<kg::RelationKey, kg::Relation> out;  // dedup within one chunk
    for (const auto& rec : records) {
        if (!rec.is_object()) continue;
        try {
            auto resolve = [&](const char* field) -> const kg::Entity* {
                std::string raw = rec.at(field).get<std::string>();
                auto it = by_name.find(ontology::normalize_entity_name(raw));
                return it == by_name.end() ? nullptr : it->second;
            };
            const kg::Entity* subj = resolve("subject");
            const kg::Entity* obj = resolve("object");
            if (!subj || !obj) continue;  // only between validated entities

            ontology::RelationKind predicate;
            try {
                predicate = ontology::relation_kind_from(rec.at("predicate").get<std::string>());
            } catch (const Error&) {
                continue;  // unknown predicate
            }
            std::optional<int> sign = parse_sign(rec);
            if (ontology::carries_sign(predicate) && !sign) continue;
            if (!ontology::carries_sign(predicate)) sign.reset();

            kg::Relation r;
            r.subject = subj->uri;
            r.predicate = predicate;
            r.object = obj->uri;
            r.sign = sign;
            r.weight = 1;
            r.evidence = rec.value("evidence", "");
            if (r.evidence.empty()) r.evidence = first_sentence(chunk.text);
            r.provenance = {chunk.id};
            out.emplace(r.key(), std::move(r));
        } catch (const json::exception&) {
            continue;
        } catch (const Error&) {
            continue;
        }
    }
    std::vector<kg::Relation> result;
    for (auto& [key, r] : out) result.push_back(std::move(r));
    return result;
}

// ── Partial F1 ───────────────────────────────────────────────────────────

double name_jaccard(const std::string& a, const std::string& b) {
    if (a == b) return 1.0;
    auto tokens = [](const std::string& s) {
        std::set<std::string> out;
        std::string t;
        for (char c : s + "_") {
            if (c == '_') {
                if (!t.empty()) out.insert(t);
                t.clear();
            } else {
                t.push_back(c);
            }
        }
        return out;
    };
    std::set<std::string> ta = tokens(a), tb = tokens(b);
    if (ta.empty() || tb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : ta) inter += tb.count(t);
    std::size_t uni = ta.size() + tb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

ExtractionMetrics partial_f1(const kg::KnowledgeGraph& predicted,
                             const kg::KnowledgeGraph& reference) {
    if (reference.relations.empty())
        throw MetricsError("reference graph has no relations");

    struct Triple {
        std::string subject, object;
        ontology::RelationKind predicate;
    };
    auto name_of = [](const kg::KnowledgeGraph& g, const std::string& uri) {
        auto it = g.entities.find(uri);
        if (it != g.entities.end()) return it->second.name;
        auto slash = uri.rfind('/');
        return slash == std::string::npos ? uri : uri.substr(slash + 1);
    };
    auto collect = [&](const kg::KnowledgeGraph& g) {
        std::vector<Triple> out;
        for (const auto& [key, r] : g.relations)
            out.push_back({name_of(g, r.subject), name_of(g, r.object), r.predicate});
        return out;
    };
    std::vector<Triple> pred = collect(predicted);
    std::vector<Triple> ref = collect(reference);

    struct Candidate {
        double score;
        std::size_t i, j;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            if (pred[i].predicate != ref[j].predicate) continue;
            double js = name_jaccard(pred[i].subject, ref[j].subject);
            double jo = name_jaccard(pred[i].object, ref[j].object);
            if (js < 0.5 || jo < 0.5) continue;
            candidates.push_back({(js + jo) / 2.0, i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });

    std::vector<bool> used_pred(pred.size(), false), used_ref(ref.size(), false);
    int matched = 0;
    for (const auto& c : candidates) {
        if (used_pred[c.i] || used_ref[c.j]) continue;
        used_pred[c.i] = used_ref[c.j] = true;
        ++matched;
    }

    ExtractionMetrics m;
    m.matched = matched;
    m.spurious = static_cast<int>(pred.size()) - matched;
    m.missed = static_cast<int>(ref.size()) - matched;
    m.precision = pred.empty() ? 0.0 : static_cast<double>(matched) / pred.size();
    m.recall = static_cast<double>(matched) / ref.size();
    m.partial_f1 = (m.precision + m.recall) > 0.0
                       ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                       : 0.0;
    return m;
}

}  // namespace amkg::extraction
