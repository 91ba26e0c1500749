#ifndef NL2PLAN_LLM_TEMPLATES_H
#define NL2PLAN_LLM_TEMPLATES_H

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nl2plan::llm {

struct EmbeddedTemplate {
  const char* file_name;
  const char* text;
};

// Contents of core/assets/prompts, compiled in.
const std::vector<EmbeddedTemplate>& embedded_templates();

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TemplateKind { Main, Feedback, Other };

std::string_view to_string(TemplateKind kind);

// Asset format:
//
//   id: type_extraction.feedback
//   kind: feedback
//   check: Are all types general rather than named objects?
//   check: ...
//   ---
//   body with {{placeholders}}
//
// Feedback bodies get {{checklist}} bound to the numbered question list.
struct PromptTemplate {
  std::string id;
  TemplateKind kind = TemplateKind::Main;
  std::vector<std::string> checklist;
  std::string body;
};

PromptTemplate parse_template(std::string_view text);

// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(const PromptTemplate& tmpl);

using Bindings = std::map<std::string, std::string, std::less<>>;

// Substitutes every {{name}}. Bound values are inserted verbatim and never
// rescanned. Throws TemplateError naming the placeholders that are unbound,
// or the bindings that match no placeholder.
std::string render_template(const PromptTemplate& tmpl, const Bindings& bindings);

// Line the pipeline appends when a response could not be parsed.
std::string format_reminder(std::string_view block_tag);

class TemplateLibrary {
 public:
  // The compiled-in assets.
  static TemplateLibrary embedded();
  // Every *.txt file in a directory, e.g. an edited copy of the assets.
  static TemplateLibrary from_directory(const std::filesystem::path& dir);

  void add(PromptTemplate tmpl);
  bool contains(std::string_view id) const;
  // Throws TemplateError for an unknown id.
  const PromptTemplate& get(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace nl2plan::llm

#endif
