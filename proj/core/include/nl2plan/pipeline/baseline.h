#ifndef NL2PLAN_PIPELINE_BASELINE_H
#define NL2PLAN_PIPELINE_BASELINE_H

#include <string>
#include <vector>

#include "nl2plan/llm/provider.h"
#include "nl2plan/llm/templates.h"
#include "nl2plan/pipeline/config.h"

namespace nl2plan::pipeline {

// Single zero-shot prompt asking directly for a plan. The answer is returned
// as is; nothing checks it. Throws std::invalid_argument on an empty task
// description before calling the provider.
std::string baseline_cot(llm::Provider& provider, const llm::TemplateLibrary& templates,
                         const std::string& domain_description,
                         const std::string& task_description, const RunConfig& config,
                         std::vector<llm::ChatExchange>* exchanges = nullptr);

}  // namespace nl2plan::pipeline

#endif
