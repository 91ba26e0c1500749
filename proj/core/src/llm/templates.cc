#include "nl2plan/llm/templates.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace nl2plan::llm {

namespace {

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls f(text_before, name) for every placeholder and f(tail, "") at the end.
template <typename F>
void scan(std::string_view body, F&& f) {
  size_t pos = 0;
  size_t start = 0;
  while ((pos = body.find("{{", pos)) != std::string_view::npos) {
    size_t end = body.find("}}", pos + 2);
    if (end == std::string_view::npos) break;
    std::string_view name = body.substr(pos + 2, end - pos - 2);
    if (name.empty() || !std::all_of(name.begin(), name.end(), is_name_char)) {
      pos += 2;
      continue;
    }
    f(body.substr(start, pos - start), name);
    pos = start = end + 2;
  }
  f(body.substr(start), std::string_view());
}

std::string numbered(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += '\n';
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::Main: return "main";
    case TemplateKind::Feedback: return "feedback";
    case TemplateKind::Other: return "other";
  }
  return "other";
}

PromptTemplate parse_template(std::string_view text) {
  PromptTemplate t;
  std::istringstream in{std::string(text)};
  std::string line;
  bool separated = false;
  while (std::getline(in, line)) {
    if (trim(line) == "---") {
      separated = true;
      break;
    }
    if (trim(line).empty()) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos) {
      throw TemplateError("template header line without ':': " + line);
    }
    std::string key = trim(std::string_view(line).substr(0, colon));
    std::string value = trim(std::string_view(line).substr(colon + 1));
    if (key == "id") {
      t.id = value;
    } else if (key == "kind") {
      if (value == "main") t.kind = TemplateKind::Main;
      else if (value == "feedback") t.kind = TemplateKind::Feedback;
      else if (value == "other") t.kind = TemplateKind::Other;
      else throw TemplateError("unknown template kind " + value);
    } else if (key == "check") {
      t.checklist.push_back(value);
    } else {
      throw TemplateError("unknown template header " + key);
    }
  }
  if (!separated) throw TemplateError("template has no '---' separator");
  if (t.id.empty()) throw TemplateError("template has no id");
  std::string body((std::istreambuf_iterator<char>(in)), {});
  while (!body.empty() && body.back() == '\n') body.pop_back();
  t.body = std::move(body);
  if (t.kind == TemplateKind::Feedback) {
    if (t.checklist.empty()) throw TemplateError(t.id + ": feedback template needs a checklist");
    if (t.body.find("{{checklist}}") == std::string::npos) {
      throw TemplateError(t.id + ": feedback template does not place {{checklist}}");
    }
    if (t.body.find("No feedback.") == std::string::npos) {
      throw TemplateError(t.id + ": feedback template has no accepted-without-feedback example");
    }
  }
  return t;
}

std::vector<std::string> placeholders(const PromptTemplate& tmpl) {
  std::vector<std::string> out;
  scan(tmpl.body, [&](std::string_view, std::string_view name) {
    if (!name.empty() && std::find(out.begin(), out.end(), name) == out.end()) {
      out.emplace_back(name);
    }
  });
  return out;
}

std::string render_template(const PromptTemplate& tmpl, const Bindings& bindings) {
  Bindings all = bindings;
  if (tmpl.kind == TemplateKind::Feedback && !all.count("checklist")) {
    all.emplace("checklist", numbered(tmpl.checklist));
  }
  std::vector<std::string> names = placeholders(tmpl);
  std::vector<std::string> missing;
  for (const auto& n : names) {
    if (!all.count(n)) missing.push_back(n);
  }
  std::vector<std::string> unknown;
  for (const auto& [n, _] : all) {
    if (std::find(names.begin(), names.end(), n) == names.end()) unknown.push_back(n);
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  if (!missing.empty()) {
    throw TemplateError(tmpl.id + ": missing binding for " + join(missing));
  }
  if (!unknown.empty()) {
    throw TemplateError(tmpl.id + ": unknown placeholder " + join(unknown));
  }
  std::string out;
  scan(tmpl.body, [&](std::string_view text, std::string_view name) {
    out += text;
    if (!name.empty()) out += all.find(name)->second;
  });
  return out;
}

std::string format_reminder(std::string_view block_tag) {
  return "Respond only in the required format: end your answer with exactly one "
         "```" + std::string(block_tag) + " fenced block.";
}

TemplateLibrary TemplateLibrary::embedded() {
  TemplateLibrary lib;
  for (const auto& e : embedded_templates()) lib.add(parse_template(e.text));
  return lib;
}

TemplateLibrary TemplateLibrary::from_directory(const std::filesystem::path& dir) {
  std::set<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".txt") files.insert(entry.path());
  }
  TemplateLibrary lib;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    try {
      lib.add(parse_template(text));
    } catch (const TemplateError& e) {
      throw TemplateError(f.string() + ": " + e.what());
    }
  }
  return lib;
}

void TemplateLibrary::add(PromptTemplate tmpl) {
  std::string id = tmpl.id;
  if (!templates_.emplace(id, std::move(tmpl)).second) {
    throw TemplateError("duplicate template id " + id);
  }
}

bool TemplateLibrary::contains(std::string_view id) const {
  return templates_.find(id) != templates_.end();
}

const PromptTemplate& TemplateLibrary::get(std::string_view id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw TemplateError("unknown template " + std::string(id));
  return it->second;
}

std::vector<std::string> TemplateLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : templates_) out.push_back(id);
  return out;
}

}  // namespace nl2plan::llm
