#ifndef NL2PLAN_LLM_DIGEST_H
#define NL2PLAN_LLM_DIGEST_H

#include <string>
#include <string_view>

#include "nl2plan/llm/types.h"

namespace nl2plan::llm {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Replay key over the template id, the rendered messages and the
// temperature. Model name, step and max_tokens are left out.
std::string request_digest(const ChatRequest& request);

}  // namespace nl2plan::llm

#endif
