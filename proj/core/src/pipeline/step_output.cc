#include "nl2plan/pipeline/step_output.h"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nl2plan/pddl/sexpr.h"

namespace nl2plan::pipeline {

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string normalize_name(std::string_view raw, std::string_view what) {
  std::string s = trim(raw);
  if (s.rfind("- ", 0) == 0 || s.rfind("* ", 0) == 0) s = trim(s.substr(2));
  s.erase(std::remove(s.begin(), s.end(), '`'), s.end());
  s = pddl::to_lower(s);
  std::replace(s.begin(), s.end(), ' ', '_');
  if (!pddl::is_identifier(s)) {
    throw StepOutputError("'" + s + "' is not a valid " + std::string(what) + " name");
  }
  return s;
}

// Splits "key: value" at the first colon.
std::optional<std::pair<std::string, std::string>> split_pair(std::string_view line) {
  size_t colon = line.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  return std::make_pair(trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
}

void warn(std::vector<std::string>* warnings, std::string text) {
  if (warnings) warnings->push_back(std::move(text));
}

void formula_refs(const pddl::Formula& f, std::set<std::string>& preds,
                  std::set<std::string>& types) {
  if (f.kind == pddl::Formula::Kind::Atom) preds.insert(f.atom.predicate);
  for (const auto& v : f.vars) types.insert(v.type);
  for (const auto& c : f.children) formula_refs(c, preds, types);
}

void effect_refs(const pddl::Effect& e, std::set<std::string>& preds,
                 std::set<std::string>& types) {
  if (e.kind == pddl::Effect::Kind::Literal) preds.insert(e.atom.predicate);
  if (e.kind == pddl::Effect::Kind::When) formula_refs(e.condition, preds, types);
  for (const auto& v : e.vars) types.insert(v.type);
  for (const auto& c : e.children) effect_refs(c, preds, types);
}

}  // namespace

std::string extract_block(std::string_view response, std::string_view tag) {
  struct Block {
    std::string tag;
    std::string body;
    bool closed = false;
  };
  std::vector<Block> blocks;
  bool open = false;
  for (const auto& line : lines_of(response)) {
    std::string t = trim(line);
    if (t.rfind("```", 0) == 0) {
      if (open && t == "```") {
        blocks.back().closed = true;
        open = false;
        continue;
      }
      if (!open) {
        blocks.push_back({pddl::to_lower(trim(std::string_view(t).substr(3))), {}, false});
        open = true;
        continue;
      }
    }
    if (open) blocks.back().body += line + "\n";
  }
  std::vector<const Block*> matching;
  for (const auto& b : blocks) {
    if (b.tag == tag) matching.push_back(&b);
  }
  const std::string fence = "```" + std::string(tag);
  if (matching.empty()) throw StepOutputError("response has no " + fence + " block");
  if (matching.size() > 1) throw StepOutputError("response has more than one " + fence + " block");
  if (!matching.front()->closed) throw StepOutputError("the " + fence + " block is not closed");
  return matching.front()->body;
}

TypeList parse_types(std::string_view block, std::vector<std::string>* warnings) {
  TypeList out;
  for (const auto& line : lines_of(block)) {
    if (trim(line).empty()) continue;
    auto kv = split_pair(line);
    if (!kv) throw StepOutputError("expected 'name: description', got '" + trim(line) + "'");
    std::string name = normalize_name(kv->first, "type");
    if (name == pddl::kRootType) {
      warn(warnings, "dropped the built-in type object");
      continue;
    }
    if (pddl::is_reserved_word(name)) throw StepOutputError("'" + name + "' is a reserved word");
    bool dup = std::any_of(out.begin(), out.end(), [&](const TypeEntry& e) { return e.name == name; });
    if (dup) {
      warn(warnings, "duplicate type " + name + " dropped");
      continue;
    }
    out.push_back({name, kv->second});
  }
  if (out.empty()) throw StepOutputError("the types block lists no types");
  return out;
}

TypeTree parse_hierarchy(std::string_view block, const TypeList& requested,
                         std::vector<std::string>* warnings) {
  std::vector<std::pair<std::string, std::string>> edges;
  std::set<std::string> lefts;
  for (const auto& line : lines_of(block)) {
    if (trim(line).empty()) continue;
    auto kv = split_pair(line);
    if (!kv) throw StepOutputError("expected 'type: parent', got '" + trim(line) + "'");
    std::string child = normalize_name(kv->first, "type");
    std::string parent = kv->second.empty() ? std::string(pddl::kRootType)
                                            : normalize_name(kv->second, "type");
    if (child == pddl::kRootType) continue;
    if (pddl::is_reserved_word(child)) throw StepOutputError("'" + child + "' is a reserved word");
    if (!lefts.insert(child).second) {
      warn(warnings, "type " + child + " listed twice, the first parent is kept");
      continue;
    }
    edges.emplace_back(child, parent);
  }
  for (const auto& t : requested) {
    if (!lefts.count(t.name)) throw StepOutputError("type " + t.name + " is missing from the hierarchy");
  }
  std::map<std::string, std::string> description;
  for (const auto& t : requested) description[t.name] = t.description;

  std::vector<std::string> order;
  std::map<std::string, std::string> parent_of;
  for (const auto& [child, parent] : edges) {
    if (!parent_of.count(child)) order.push_back(child);
    parent_of[child] = parent;
    if (parent != pddl::kRootType && !lefts.count(parent) && !parent_of.count(parent)) {
      order.insert(order.end() - 1, parent);
      parent_of[parent] = std::string(pddl::kRootType);
    }
  }
  // Synthesized parents need children.
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = order.begin(); it != order.end(); ++it) {
      if (description.count(*it)) continue;
      bool has_child = std::any_of(parent_of.begin(), parent_of.end(),
                                   [&](const auto& e) { return e.second == *it; });
      if (!has_child) {
        warn(warnings, "added type " + *it + " has no children and was dropped");
        parent_of.erase(*it);
        order.erase(it);
        changed = true;
        break;
      }
    }
  }
  TypeTree tree;
  for (const auto& name : order) {
    auto d = description.find(name);
    tree.hierarchy.add(name, parent_of[name], d == description.end() ? "" : d->second);
    tree.origin[name] = d == description.end() ? TypeOrigin::SynthesizedParent : TypeOrigin::Requested;
  }
  if (auto err = tree.hierarchy.tree_error()) throw StepOutputError(*err);
  return tree;
}

std::vector<NlAction> parse_actions(std::string_view block, std::vector<std::string>* warnings) {
  std::vector<NlAction> out;
  NlAction current;
  std::string* last = nullptr;
  bool any = false;
  auto flush = [&] {
    if (!any) return;
    if (current.name.empty()) throw StepOutputError("an action has no name line");
    if (current.description.empty()) throw StepOutputError("action " + current.name + " has no description");
    if (current.example.empty()) throw StepOutputError("action " + current.name + " has no example");
    bool dup = std::any_of(out.begin(), out.end(), [&](const NlAction& a) { return a.name == current.name; });
    if (dup) warn(warnings, "duplicate action " + current.name + " dropped");
    else out.push_back(current);
    current = {};
    last = nullptr;
    any = false;
  };
  for (const auto& line : lines_of(block)) {
    if (trim(line).empty()) {
      flush();
      continue;
    }
    auto kv = split_pair(line);
    std::string key = kv ? pddl::to_lower(kv->first) : std::string();
    if (kv && key == "name") {
      if (any && !current.name.empty()) flush();
      current.name = normalize_name(kv->second, "action");
      last = nullptr;
    } else if (kv && key == "description") {
      current.description = kv->second;
      last = &current.description;
    } else if (kv && (key == "example" || key == "usage" || key == "usage example")) {
      current.example = kv->second;
      last = &current.example;
    } else if (last != nullptr) {
      *last += " " + trim(line);
    } else {
      throw StepOutputError("unexpected line '" + trim(line) + "' in the actions block");
    }
    any = true;
  }
  flush();
  if (out.empty()) throw StepOutputError("the actions block lists no actions");
  return out;
}

std::optional<std::string> parse_feedback(std::string_view response) {
  std::string text;
  try {
    text = trim(extract_block(response, "feedback"));
  } catch (const StepOutputError&) {
    text = trim(response);
  }
  std::string lower = pddl::to_lower(text);
  if (lower.empty() || lower == "no feedback." || lower == "no feedback") return std::nullopt;
  return text;
}

std::string render_types(const TypeList& types) {
  std::string out;
  for (const auto& t : types) out += t.name + ": " + t.description + "\n";
  return out;
}

std::string render_hierarchy(const TypeTree& tree) {
  std::string out;
  for (const auto& t : tree.hierarchy.types()) out += t + ": " + tree.hierarchy.parent_of(t) + "\n";
  return out;
}

std::string render_tree(const pddl::TypeHierarchy& hierarchy) {
  std::string out;
  std::function<void(const std::string&, int)> walk = [&](const std::string& t, int depth) {
    out += std::string(2 * depth, ' ') + t + "\n";
    for (const auto& c : hierarchy.children_of(t)) walk(c, depth + 1);
  };
  walk(std::string(pddl::kRootType), 0);
  return out;
}

std::string render_actions(const std::vector<NlAction>& actions) {
  std::string out;
  for (size_t i = 0; i < actions.size(); ++i) {
    if (i > 0) out += "\n";
    out += "name: " + actions[i].name + "\ndescription: " + actions[i].description +
           "\nexample: " + actions[i].example + "\n";
  }
  return out;
}

std::string fenced(std::string_view tag, std::string_view content) {
  std::string out = "```" + std::string(tag) + "\n" + std::string(content);
  if (!out.empty() && out.back() != '\n') out += '\n';
  return out + "```";
}

void to_json(nlohmann::json& j, const TypeEntry& t) {
  j = {{"name", t.name}, {"description", t.description}};
}

void from_json(const nlohmann::json& j, TypeEntry& t) {
  j.at("name").get_to(t.name);
  t.description = j.value("description", std::string());
}

void to_json(nlohmann::json& j, const NlAction& a) {
  j = {{"name", a.name}, {"description", a.description}, {"example", a.example}};
}

void from_json(const nlohmann::json& j, NlAction& a) {
  j.at("name").get_to(a.name);
  j.at("description").get_to(a.description);
  j.at("example").get_to(a.example);
}

nlohmann::json tree_to_json(const TypeTree& tree) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : tree.hierarchy.types()) {
    auto it = tree.origin.find(t);
    bool synth = it != tree.origin.end() && it->second == TypeOrigin::SynthesizedParent;
    out.push_back({{"name", t},
                   {"parent", tree.hierarchy.parent_of(t)},
                   {"description", tree.hierarchy.description_of(t)},
                   {"origin", synth ? "synthesized-parent" : "requested"}});
  }
  return out;
}

TypeTree tree_from_json(const nlohmann::json& j) {
  TypeTree tree;
  for (const auto& e : j) {
    std::string name = e.at("name");
    tree.hierarchy.add(name, e.at("parent").get<std::string>(),
                       e.value("description", std::string()));
    tree.origin[name] = e.value("origin", std::string()) == "synthesized-parent"
                            ? TypeOrigin::SynthesizedParent
                            : TypeOrigin::Requested;
  }
  return tree;
}

PruneResult prune_domain(pddl::DomainSpec& domain) {
  std::set<std::string> preds;
  std::set<std::string> types;
  for (const auto& a : domain.actions) {
    for (const auto& p : a.params) types.insert(p.type);
    formula_refs(a.precondition, preds, types);
    effect_refs(a.effect, preds, types);
  }
  PruneResult out;
  std::vector<pddl::PredicateDecl> kept;
  for (auto& p : domain.predicates) {
    if (preds.count(p.name)) {
      for (const auto& param : p.params) types.insert(param.type);
      kept.push_back(std::move(p));
    } else {
      out.predicates.push_back(p.name);
    }
  }
  domain.predicates = std::move(kept);
  std::set<std::string> keep;
  for (const auto& t : types) {
    std::string cur = t;
    while (!cur.empty() && cur != pddl::kRootType && domain.hierarchy.contains(cur) &&
           keep.insert(cur).second) {
      cur = domain.hierarchy.parent_of(cur);
    }
  }
  for (const auto& t : std::vector<std::string>(domain.hierarchy.types())) {
    if (!keep.count(t)) out.types.push_back(t);
  }
  for (const auto& t : out.types) domain.hierarchy.remove(t);
  return out;
}

}  // namespace nl2plan::pipeline
