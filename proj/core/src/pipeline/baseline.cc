#include "nl2plan/pipeline/baseline.h"

#include <stdexcept>

namespace nl2plan::pipeline {

std::string baseline_cot(llm::Provider& provider, const llm::TemplateLibrary& templates,
                         const std::string& domain_description,
                         const std::string& task_description, const RunConfig& config,
                         std::vector<llm::ChatExchange>* exchanges) {
  auto blank = [](const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; };
  if (blank(task_description)) throw std::invalid_argument("the task description is empty");
  llm::ChatRequest r;
  r.template_id = "baseline_cot";
  r.step = "baseline_cot";
  r.messages = {{"user", llm::render_template(templates.get("baseline_cot"),
                                              {{"domain_description", domain_description},
                                               {"task_description", task_description}})}};
  r.model = config.provider.model;
  r.temperature = config.temperature;
  r.max_tokens = config.provider.max_tokens;
  llm::ChatExchange e = provider.complete(r);
  if (exchanges) exchanges->push_back(e);
  return e.response;
}

}  // namespace nl2plan::pipeline
