#include "amkg/backend.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include <json.hpp>

#include "amkg/errors.hpp"
#include "amkg/expression.hpp"
#include "amkg/ontology.hpp"
#include "amkg/util.hpp"

namespace amkg::llm {

using nlohmann::json;

std::string fixture_key(const std::string& system_prompt, const std::string& user_prompt,
                        const std::string& output_schema_id) {
    std::string blob = system_prompt;
    blob.push_back('\x1e');
    blob += user_prompt;
    blob.push_back('\x1e');
    blob += output_schema_id;
    return util::hex64(util::fnv1a64(blob));
}

// ── FixtureBackend ───────────────────────────────────────────────────────

FixtureBackend::FixtureBackend(std::string dir) : dir_(std::move(dir)) {}

std::string FixtureBackend::complete(const std::string& system_prompt,
                                     const std::string& user_prompt,
                                     const std::string& output_schema_id) {
    namespace fs = std::filesystem;
    fs::path file = fs::path(dir_) / (fixture_key(system_prompt, user_prompt, output_schema_id) + ".json");
    std::ifstream in(file);
    if (!in)
        throw BackendError("no canned response " + file.string() + " for schema " +
                           output_schema_id);
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.contains("response"))
        throw BackendError("malformed fixture file " + file.string());
    return j.at("response").get<std::string>();
}

// ── RecordingBackend ─────────────────────────────────────────────────────

RecordingBackend::RecordingBackend(std::unique_ptr<GenerationBackend> inner, std::string dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string RecordingBackend::complete(const std::string& system_prompt,
                                       const std::string& user_prompt,
                                       const std::string& output_schema_id) {
    std::string response = inner_->complete(system_prompt, user_prompt, output_schema_id);
    json j;
    j["schema_id"] = output_schema_id;
    j["system"] = system_prompt;
    j["user"] = user_prompt;
    j["response"] = response;
    namespace fs = std::filesystem;
    fs::path file = fs::path(dir_) / (fixture_key(system_prompt, user_prompt, output_schema_id) + ".json");
    std::ofstream out(file);
    if (!out) throw IoError("cannot write fixture file " + file.string());
    out << j.dump(2) << "\n";
    return response;
}

// ── SynthBackend ─────────────────────────────────────────────────────────

namespace {

// Domain lexicon used to phrase deterministic synthetic answers.
const std::map<std::string, std::string>& symbol_concepts() {
    static const std::map<std::string, std::string> table = {
        {"C_d", "cure depth"},
        {"E", "radiant exposure"},
        {"E_c", "critical exposure"},
        {"D_p", "penetration depth"},
        {"I_0", "incident light intensity"},
        {"I", "transmitted light intensity"},
        {"t_e", "exposure time"},
        {"z", "depth below the resin surface"},
        {"E_d", "energy density"},
        {"P", "laser power"},
        {"v", "scan speed"},
        {"h", "hatch spacing"},
        {"t_l", "layer thickness"},
    };
    return table;
}

const std::map<std::string, std::string>& concept_units() {
    static const std::map<std::string, std::string> table = {
        {"cure_depth", "mm"},
        {"radiant_exposure", "mJ/cm^2"},
        {"exposure_energy", "mJ/cm^2"},
        {"critical_exposure", "mJ/cm^2"},
        {"penetration_depth", "mm"},
        {"light_intensity", "mW/cm^2"},
        {"incident_light_intensity", "mW/cm^2"},
        {"exposure_time", "s"},
        {"laser_power", "W"},
        {"scan_speed", "mm/s"},
        {"layer_thickness", "mm"},
    };
    return table;
}

std::string spaced(const std::string& snake) {
    std::string out = snake;
    for (char& c : out)
        if (c == '_') c = ' ';
    return out;
}

std::string concept_of(const std::string& symbol) {
    auto it = symbol_concepts().find(symbol);
    if (it != symbol_concepts().end()) return it->second;
    return "quantity " + symbol;
}

// Extracts the text between `marker` and the next "### " section (or end).
std::string section(const std::string& prompt, const std::string& marker) {
    auto pos = prompt.find(marker);
    if (pos == std::string::npos) return "";
    pos += marker.size();
    auto end = prompt.find("\n### ", pos);
    std::string body =
        end == std::string::npos ? prompt.substr(pos) : prompt.substr(pos, end - pos);
    return util::trim(body);
}

std::string first_sentence_with(const std::string& text, const std::string& needle) {
    auto pos = text.find(needle);
    if (pos == std::string::npos) return "";
    auto begin = text.rfind('.', pos);
    begin = begin == std::string::npos ? 0 : begin + 1;
    auto stop = text.find('.', pos + needle.size());
    stop = stop == std::string::npos ? text.size() : stop + 1;
    std::string sentence = util::trim(text.substr(begin, stop - begin));
    for (char& c : sentence)
        if (c == '\n') c = ' ';
    return sentence;
}

std::string synth_entities(const std::string& user_prompt) {
    json hints = json::parse(section(user_prompt, kHintsMarker));
    json out = json::array();
    std::set<std::pair<std::string, std::string>> seen;
    auto add = [&](json rec) {
        auto id = std::make_pair(rec.at("name").get<std::string>(),
                                 rec.at("type").get<std::string>());
        if (seen.insert(id).second) out.push_back(std::move(rec));
    };

    auto simple = [&](const char* category, const char* type, const std::string& desc_prefix) {
        for (const auto& name : hints.value(category, json::array())) {
            std::string n = name.get<std::string>();
            json rec{{"name", n}, {"type", type}, {"description", desc_prefix + spaced(n)}};
            if (auto it = concept_units().find(n); it != concept_units().end())
                rec["unit"] = it->second;
            add(std::move(rec));
        }
    };
    simple("process_parameters", "ProcessParameter", "controllable process parameter ");
    simple("performance_metrics", "Performance", "measured performance metric ");
    simple("assumptions", "Assumption", "modeling assumption: ");
    simple("regimes", "Regime", "reported operating range ");
    simple("materials", "Material", "material ");

    for (const auto& eq : hints.value("equations", json::array())) {
        std::string latex = eq.at("latex").get<std::string>();
        std::string lhs, rhs_concepts;
        std::vector<std::pair<std::string, std::string>> vars;  // symbol, role
        for (const auto& v : eq.value("variables", json::array()))
            vars.emplace_back(v.at("symbol").get<std::string>(), v.value("role", "unknown"));
        for (const auto& [sym, role] : vars) {
            if (role == "output" && lhs.empty()) lhs = sym;
            if (role != "output") {
                if (!rhs_concepts.empty()) rhs_concepts += ", ";
                rhs_concepts += concept_of(sym);
            }
        }
        if (lhs.empty() && !vars.empty()) lhs = vars.front().first;
        std::string lhs_concept = concept_of(lhs);
        std::string eq_name = "equation_" + ontology::normalize_entity_name(lhs_concept);
        add(json{{"name", eq_name},
                 {"type", "Equation"},
                 {"latex", latex},
                 {"description",
                  "equation for " + lhs_concept + " as a function of " + rhs_concepts}});
        for (const auto& [sym, role] : vars) {
            add(json{{"name", sym},
                     {"type", "Variable"},
                     {"latex", sym},
                     {"description", "symbol " + sym + ", " + concept_of(sym) + " (" + role + ")"}});
        }
    }
    return out.dump(2);
}

std::string synth_relations(const std::string& user_prompt) {
    json entities = json::parse(section(user_prompt, kEntitiesMarker));
    std::string text = section(user_prompt, kTextMarker);
    std::string lower_text = util::lower(text);

    // name -> type, and symbol -> variable entity name
    std::map<std::string, std::string> type_of;
    std::map<std::string, std::string> symbol_to_name;
    std::vector<std::string> params, perfs, assumptions, regimes;
    std::vector<std::pair<std::string, std::string>> equations;  // name, latex
    for (const auto& e : entities) {
        std::string name = e.at("name").get<std::string>();
        std::string type = e.at("type").get<std::string>();
        type_of[name] = type;
        if (type == "Variable")
            symbol_to_name[e.value("latex", name)] = name;
        else if (type == "ProcessParameter")
            params.push_back(name);
        else if (type == "Performance")
            perfs.push_back(name);
        else if (type == "Assumption")
            assumptions.push_back(name);
        else if (type == "Regime")
            regimes.push_back(name);
        else if (type == "Equation")
            equations.emplace_back(name, e.value("latex", ""));
    }

    json out = json::array();
    auto add = [&](const std::string& s, const std::string& p, const std::string& o,
                   std::optional<int> sign, const std::string& evidence) {
        json rec{{"subject", s}, {"predicate", p}, {"object", o}, {"evidence", evidence}};
        if (sign) rec["sign"] = *sign;
        out.push_back(std::move(rec));
    };

    for (const auto& [eq_name, latex] : equations) {
        std::string evidence = first_sentence_with(text, latex);
        if (evidence.empty()) evidence = "Stated as $" + latex + "$.";
        try {
            auto parsed = eqn::parse_latex(latex);
            if (auto it = symbol_to_name.find(parsed.target); it != symbol_to_name.end())
                add(eq_name, "has_output", it->second, std::nullopt, evidence);
            for (const auto& sym : eqn::variable_symbols(parsed.rhs)) {
                if (auto it = symbol_to_name.find(sym); it != symbol_to_name.end())
                    add(eq_name, "has_input", it->second, std::nullopt, evidence);
            }
        } catch (const Error&) {
            continue;
        }
        for (const auto& a : assumptions) {
            std::string cue = spaced(a);
            std::string ev = first_sentence_with(lower_text, cue);
            if (!ev.empty()) add(eq_name, "requires_assumption", a, std::nullopt, ev);
        }
        for (const auto& r : regimes) add(eq_name, "valid_in_regime", r, std::nullopt, evidence);
    }

    // Causal cues between process parameters and performance metrics.
    for (const auto& p : params) {
        for (const auto& f : perfs) {
            std::string pp = spaced(p), ff = spaced(f);
            struct Cue {
                std::string pattern;
                int sign;
            };
            std::vector<Cue> cues = {
                {"increasing the " + pp + " increases the " + ff, +1},
                {"higher " + pp + " leads to greater " + ff, +1},
                {"increasing the " + pp + " reduces the " + ff, -1},
                {"increasing the " + pp + " decreases the " + ff, -1},
                {pp + " does not affect the " + ff, 0},
            };
            for (const auto& cue : cues) {
                if (lower_text.find(cue.pattern) != std::string::npos) {
                    add(p, "influences", f, cue.sign, first_sentence_with(lower_text, cue.pattern));
                    break;
                }
            }
        }
    }

    // "<concept phrase> $S$" adjacency means the parameter maps onto S.
    for (const auto& [name, type] : type_of) {
        if (type != "ProcessParameter" && type != "Performance") continue;
        for (const auto& [sym, var_name] : symbol_to_name) {
            std::string pattern = spaced(name) + " $" + sym + "$";
            if (util::lower(text).find(util::lower(pattern)) != std::string::npos)
                add(name, "corresponds_to", var_name, std::nullopt,
                    first_sentence_with(text, "$" + sym + "$"));
        }
    }
    return out.dump(2);
}

std::string synth_summary(const std::string& user_prompt) {
    json members = json::parse(section(user_prompt, kMembersMarker));
    std::string summary = "Covers ";
    int shown = 0;
    for (const auto& m : members) {
        if (shown == 3) break;
        if (shown > 0) summary += ", ";
        summary += spaced(m.at("name").get<std::string>());
        ++shown;
    }
    summary += " and related concepts.";
    return summary;
}

std::string synth_candidates(const std::string& user_prompt) {
    json task = json::parse(section(user_prompt, kTaskMarker));
    std::string y = task.at("target").get<std::string>();
    auto inputs = task.at("inputs").get<std::vector<std::string>>();
    int m = task.value("m", 3);
    std::string x = inputs.empty() ? "x" : inputs.front();

    std::vector<std::string> family = {
        y + " = k_1 \\ln\\left(\\frac{" + x + "}{k_2}\\right)",
        y + " = k_1 \\frac{" + x + "}{(k_2 + " + x + ")}",
        y + " = k_1 \\exp\\left(-\\frac{k_2}{" + x + "}\\right)",
        y + " = k_1 " + x + " + k_2",
        y + " = k_1 " + x + "^{k_2}",
    };
    json out;
    out["candidates"] = json::array();
    for (int i = 0; i < m && i < static_cast<int>(family.size()); ++i)
        out["candidates"].push_back(family[i]);
    return out.dump(2);
}

}  // namespace

std::string SynthBackend::complete(const std::string& /*system_prompt*/,
                                   const std::string& user_prompt,
                                   const std::string& output_schema_id) {
    try {
        if (output_schema_id == kEntitySchema) return synth_entities(user_prompt);
        if (output_schema_id == kRelationSchema) return synth_relations(user_prompt);
        if (output_schema_id == kSummarySchema) return synth_summary(user_prompt);
        if (output_schema_id == kCandidateSchema) return synth_candidates(user_prompt);
    } catch (const json::exception& e) {
        throw BackendError(std::string("synth backend could not read prompt sections: ") +
                           e.what());
    }
    throw BackendError("synth backend has no rule for schema " + output_schema_id);
}

}  // namespace amkg::llm
