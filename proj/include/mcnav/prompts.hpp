#ifndef MCNAV_PROMPTS_HPP
#define MCNAV_PROMPTS_HPP

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mcnav/cot.hpp"
#include "mcnav/errors.hpp"
#include "mcnav/memory_map.hpp"

namespace mcnav {

enum class PromptMode { Inference, Mining };

struct PromptBundle {
    std::string prefix;
    std::string input;
    PromptMode mode = PromptMode::Inference;

    std::size_t total_chars() const { return prefix.size() + input.size(); }
};

// Canonical sub-task blocks. The inference block never appears in a mining
// prompt and vice versa; tests pin these exact strings.
inline const std::string kInferenceSubtaskBlock =
    "Reason through these sub-tasks before deciding:\n"
    "1. Is the target object present among the current object proposals?\n"
    "2. Which navigable viewpoint is the best next navigation point, and why?\n"
    "3. If the target object is present, which object proposal refers to it?\n"
    "4. If the target is not found, which viewpoint is most worth further exploration?\n";

inline const std::string kMiningSubtaskBlock =
    "Explain the reason behind the viewpoint and object selection step by step.\n"
    "Do not predict a new action; only explain the given decision.\n";

inline const std::string kDefaultPrefixInference =
    "You are a robot navigating a building by moving between connected viewpoints.\n"
    "At each step you receive a navigation instruction, a memory topological map,\n"
    "the global action space, and the object proposals at your current viewpoint.\n" +
    kInferenceSubtaskBlock +
    "Answer with your reasoning, then end with exactly these lines:\n"
    "Selected viewpoint: <one id from the action space, or STOP>\n"
    "Selected object: <one proposal id>  (include this line only when selecting an object)\n";

inline const std::string kDefaultPrefixMining =
    "You are the human annotator who recorded a navigation path for an instruction.\n"
    "You are shown the memory topological map at one step of that path, together\n"
    "with the viewpoint (and object, if any) that you selected at this step.\n" +
    kMiningSubtaskBlock;

inline const std::string kDefaultInputInference =
    "Instruction: {instruction}\n"
    "{demo}"
    "{map}\n"
    "Action space: {actions}\n"
    "Object proposals: {objects}\n"
    "{history}";

inline const std::string kDefaultInputMining =
    "Instruction: {instruction}\n"
    "{map}\n"
    "Chosen viewpoint: {gt_viewpoint}\n"
    "Chosen object: {gt_object}\n"
    "Explain why this selection was made.\n";

/// Template texts with named placeholders. Defaults are the canonical texts;
/// overrides may be loaded from files at startup.
struct PromptTemplates {
    std::string prefix_inference = kDefaultPrefixInference;
    std::string prefix_mining = kDefaultPrefixMining;
    std::string input_inference = kDefaultInputInference;
    std::string input_mining = kDefaultInputMining;
    std::size_t char_budget = 24000;

    void validate() const {
        static const std::set<std::string> known{"instruction", "map",         "demo",
                                                 "actions",     "objects",     "history",
                                                 "gt_viewpoint", "gt_object"};
        for (const std::string* t :
             {&prefix_inference, &prefix_mining, &input_inference, &input_mining}) {
            std::size_t pos = 0;
            while ((pos = t->find('{', pos)) != std::string::npos) {
                auto end = t->find('}', pos);
                if (end == std::string::npos)
                    throw SchemaError("unterminated placeholder in prompt template");
                std::string name = t->substr(pos + 1, end - pos - 1);
                if (!known.count(name))
                    throw SchemaError("unknown placeholder '{" + name + "}' in prompt template");
                pos = end + 1;
            }
        }
    }
};

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string substitute(const std::string& tmpl,
                              const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        auto open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        auto close = tmpl.find('}', open);
        if (close == std::string::npos)
            throw SchemaError("unterminated placeholder in prompt template");
        const std::string name = tmpl.substr(open + 1, close - open - 1);
        auto it = values.find(name);
        if (it == values.end())
            throw SchemaError("unknown placeholder '{" + name + "}' in prompt template");
        out += it->second;
        pos = close + 1;
    }
    return out;
}

inline std::string render_demo_section(const CoTExample& demo) {
    std::ostringstream out;
    out << "Demonstration example:\n"
        << "  Instruction: " << demo.instruction << '\n'
        << "  Destination room type: " << demo.room_type << '\n';
    for (std::size_t i = 0; i < demo.steps.size(); ++i) {
        const auto& st = demo.steps[i];
        out << "  Step " << (i + 1) << " (at " << st.viewpoint;
        if (st.object) out << ", selected object " << *st.object;
        out << "): " << st.explanation << '\n';
    }
    return out.str();
}

inline std::string render_actions(const std::vector<Action>& actions) {
    std::ostringstream out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out << ", ";
        out << actions[i];
    }
    return out.str();
}

inline std::string render_proposals(const std::vector<DetectedObject>& proposals) {
    if (proposals.empty()) return "none";
    std::ostringstream out;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        if (i) out << ", ";
        out << proposals[i].proposal_id << " (" << proposals[i].label << ")";
    }
    return out.str();
}

inline std::string render_history(const std::vector<std::string>& history) {
    if (history.empty()) return "";
    std::ostringstream out;
    out << "History:\n";
    for (const auto& line : history) out << "  " << line << '\n';
    return out.str();
}

} // namespace detail

/// Load template overrides from a directory holding any of
/// prefix_inference.txt, prefix_mining.txt, input_inference.txt,
/// input_mining.txt. Unknown placeholders fail here, at startup.
inline PromptTemplates load_prompt_templates(const std::string& dir) {
    PromptTemplates t;
    auto maybe = [&](const std::string& name, std::string& target) {
        std::ifstream probe(dir + "/" + name);
        if (probe.good()) target = detail::read_text_file(dir + "/" + name);
    };
    maybe("prefix_inference.txt", t.prefix_inference);
    maybe("prefix_mining.txt", t.prefix_mining);
    maybe("input_inference.txt", t.input_inference);
    maybe("input_mining.txt", t.input_mining);
    t.validate();
    return t;
}

/// Assemble the navigation-inference prompt. History lines are dropped
/// oldest-first if the bundle exceeds the character budget; the map and
/// instruction are never truncated.
inline PromptBundle build_inference_prompt(const PromptTemplates& templates,
                                           const std::string& map_text,
                                           const std::string& instruction,
                                           const std::optional<CoTExample>& demo,
                                           const std::vector<Action>& action_space,
                                           const std::vector<DetectedObject>& proposals,
                                           const std::vector<std::string>& history) {
    PromptBundle bundle;
    bundle.mode = PromptMode::Inference;
    bundle.prefix = templates.prefix_inference;

    std::map<std::string, std::string> values{
        {"instruction", instruction},
        {"demo", demo ? detail::render_demo_section(*demo) : ""},
        {"map", map_text},
        {"actions", detail::render_actions(action_space)},
        {"objects", detail::render_proposals(proposals)},
    };

    std::vector<std::string> kept = history;
    for (;;) {
        values["history"] = detail::render_history(kept);
        bundle.input = detail::substitute(templates.input_inference, values);
        if (bundle.total_chars() <= templates.char_budget || kept.empty()) break;
        kept.erase(kept.begin());
    }
    return bundle;
}

/// Assemble the CoT-mining prompt: the decision is revealed and the model is
/// asked to explain it.
inline PromptBundle build_mining_prompt(const PromptTemplates& templates,
                                        const std::string& map_text,
                                        const std::string& instruction,
                                        const Action& gt_viewpoint,
                                        const std::optional<std::string>& gt_object) {
    PromptBundle bundle;
    bundle.mode = PromptMode::Mining;
    bundle.prefix = templates.prefix_mining;
    bundle.input = detail::substitute(
        templates.input_mining,
        {{"instruction", instruction},
         {"map", map_text},
         {"gt_viewpoint", gt_viewpoint},
         {"gt_object", gt_object ? *gt_object : "none"}});
    return bundle;
}

} // namespace mcnav

#endif
