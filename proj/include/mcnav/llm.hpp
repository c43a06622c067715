#ifndef MCNAV_LLM_HPP
#define MCNAV_LLM_HPP

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcnav/errors.hpp"
#include "mcnav/http_client.hpp"
#include "mcnav/prompts.hpp"
#include "mcnav/scene.hpp"

namespace mcnav {

struct Decision {
    Action action;                      // viewpoint id or STOP
    std::optional<std::string> object;  // proposal id
    std::string raw_text;
    std::string reasoning;
};

enum class BackendKind { Remote, Scripted, Oracle };

struct BackendConfig {
    BackendKind kind = BackendKind::Oracle;
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var = "MCNAV_API_KEY";
    double temperature = 0.0;
    double timeout_seconds = 30.0;
    int max_retries = 2;
    std::string script_path;

    void validate() const {
        if (kind == BackendKind::Remote && (endpoint_url.empty() || model_name.empty()))
            throw SchemaError("remote backend requires endpoint_url and model_name");
        if (kind == BackendKind::Scripted && script_path.empty())
            throw SchemaError("scripted backend requires script_path");
    }
};

inline BackendKind backend_kind_from_string(const std::string& s) {
    if (s == "remote") return BackendKind::Remote;
    if (s == "scripted") return BackendKind::Scripted;
    if (s == "oracle") return BackendKind::Oracle;
    throw SchemaError("unknown backend kind '" + s + "'");
}

inline BackendConfig backend_config_from_json(const nlohmann::json& j) {
    BackendConfig cfg;
    if (j.contains("kind")) cfg.kind = backend_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("endpoint_url")) cfg.endpoint_url = j.at("endpoint_url").get<std::string>();
    if (j.contains("model_name")) cfg.model_name = j.at("model_name").get<std::string>();
    if (j.contains("api_key_env_var"))
        cfg.api_key_env_var = j.at("api_key_env_var").get<std::string>();
    if (j.contains("temperature")) cfg.temperature = j.at("temperature").get<double>();
    if (j.contains("timeout")) cfg.timeout_seconds = j.at("timeout").get<double>();
    if (j.contains("max_retries")) cfg.max_retries = j.at("max_retries").get<int>();
    if (j.contains("script_path")) cfg.script_path = j.at("script_path").get<std::string>();
    return cfg;
}

/// One LLM session; Scripted and Oracle instances are per-episode.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual std::string complete(const PromptBundle& prompt) = 0;
};

/// OpenAI-compatible chat completions: prefix as system, input as user.
class RemoteBackend final : public LlmBackend {
public:
    explicit RemoteBackend(BackendConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    std::string complete(const PromptBundle& prompt) override {
        nlohmann::json body{
            {"model", cfg_.model_name},
            {"messages",
             {{{"role", "system"}, {"content", prompt.prefix}},
              {{"role", "user"}, {"content", prompt.input}}}},
            {"temperature", cfg_.temperature}};
        auto res = post_json_with_retries(cfg_.endpoint_url, body, cfg_.api_key_env_var,
                                          cfg_.timeout_seconds, cfg_.max_retries);
        try {
            return res.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("unexpected chat response shape: ") + e.what());
        }
    }

private:
    BackendConfig cfg_;
};

/// Replays a fixed response list; one entry per call.
class ScriptedBackend final : public LlmBackend {
public:
    ScriptedBackend(std::string episode_id, std::vector<std::string> responses)
        : episode_id_(std::move(episode_id)), responses_(std::move(responses)) {}

    std::string complete(const PromptBundle&) override {
        if (next_ >= responses_.size())
            throw ScriptExhausted("script for episode '" + episode_id_ + "' exhausted at step " +
                                  std::to_string(next_));
        return responses_[next_++];
    }

private:
    std::string episode_id_;
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

/// Ignores the prompt and walks the ground-truth path, stopping at the end
/// and selecting the ground-truth object on the final step.
class OracleBackend final : public LlmBackend {
public:
    explicit OracleBackend(const Episode& episode) : episode_(episode) {
        if (episode_.gt_path.empty())
            throw OracleMissingPath("episode '" + episode_.episode_id + "' has no gt_path");
    }

    std::string complete(const PromptBundle&) override {
        std::string out = "Oracle decision.\n";
        if (pos_ + 1 < episode_.gt_path.size()) {
            out += "Selected viewpoint: " + episode_.gt_path[pos_ + 1];
            ++pos_;
        } else {
            out += "Selected viewpoint: STOP";
            if (episode_.target_object)
                out += "\nSelected object: " + episode_.target_object->proposal_id;
        }
        return out;
    }

private:
    Episode episode_;
    std::size_t pos_ = 0;
};

/// Script file: {"responses": {"<episode_id>": ["step0 text", ...]}}
struct ScriptFile {
    std::map<std::string, std::vector<std::string>> responses;

    static ScriptFile load(const std::string& path) {
        auto j = detail::load_json_file(path);
        ScriptFile sf;
        if (!j.contains("responses") || !j.at("responses").is_object())
            throw SchemaError("script file must contain a 'responses' object");
        for (const auto& [id, list] : j.at("responses").items())
            sf.responses[id] = list.get<std::vector<std::string>>();
        return sf;
    }
};

/// Creates a fresh backend session for each episode.
class BackendFactory {
public:
    explicit BackendFactory(BackendConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        if (cfg_.kind == BackendKind::Scripted) script_ = ScriptFile::load(cfg_.script_path);
    }

    const BackendConfig& config() const { return cfg_; }

    std::unique_ptr<LlmBackend> make(const Episode& episode) const {
        switch (cfg_.kind) {
            case BackendKind::Remote: return std::make_unique<RemoteBackend>(cfg_);
            case BackendKind::Oracle: return std::make_unique<OracleBackend>(episode);
            case BackendKind::Scripted: {
                auto it = script_.responses.find(episode.episode_id);
                if (it == script_.responses.end())
                    throw ScriptExhausted("no scripted responses for episode '" +
                                          episode.episode_id + "'");
                return std::make_unique<ScriptedBackend>(episode.episode_id, it->second);
            }
        }
        throw LLMError("unreachable backend kind");
    }

private:
    BackendConfig cfg_;
    ScriptFile script_;
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool iequals(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

} // namespace detail

/// Parse the standardized decision lines from model output. The last
/// `Selected viewpoint:` line wins; STOP is case-insensitive; everything
/// before that line is kept as reasoning.
inline Decision parse_decision(const std::string& text, const std::vector<Action>& action_space,
                               const std::vector<DetectedObject>& proposals) {
    static const std::string kViewpointTag = "Selected viewpoint:";
    static const std::string kObjectTag = "Selected object:";

    std::vector<std::string> lines;
    {
        std::istringstream ss(text);
        std::string line;
        while (std::getline(ss, line)) lines.push_back(line);
    }

    std::optional<std::size_t> vp_line;
    std::optional<std::size_t> obj_line;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string t = detail::trim(lines[i]);
        if (t.rfind(kViewpointTag, 0) == 0) vp_line = i;
        if (t.rfind(kObjectTag, 0) == 0) obj_line = i;
    }
    if (!vp_line) throw ParseError("no 'Selected viewpoint:' line in model output");

    Decision dec;
    dec.raw_text = text;
    for (std::size_t i = 0; i < *vp_line; ++i) {
        dec.reasoning += lines[i];
        dec.reasoning += '\n';
    }

    std::string token = detail::trim(detail::trim(lines[*vp_line]).substr(kViewpointTag.size()));
    if (detail::iequals(token, kStopAction)) {
        dec.action = kStopAction;
    } else if (std::find(action_space.begin(), action_space.end(), token) !=
               action_space.end()) {
        dec.action = token;
    } else {
        throw InvalidAction("viewpoint '" + token + "' is not in the current action space");
    }

    if (obj_line) {
        std::string obj = detail::trim(detail::trim(lines[*obj_line]).substr(kObjectTag.size()));
        if (!obj.empty() && !detail::iequals(obj, "none")) {
            bool known = std::any_of(proposals.begin(), proposals.end(),
                                     [&](const DetectedObject& d) { return d.proposal_id == obj; });
            if (!known)
                throw InvalidObject("object '" + obj + "' is not among the current proposals");
            dec.object = obj;
        }
    }
    return dec;
}

/// Render the standardized lines for a decision; parse_decision round-trips
/// this output.
inline std::string render_decision(const Decision& dec) {
    std::string out = "Selected viewpoint: " + dec.action;
    if (dec.object) out += "\nSelected object: " + *dec.object;
    return out;
}

} // namespace mcnav

#endif
