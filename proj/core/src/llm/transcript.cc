#include "nl2plan/llm/transcript.h"

#include <fstream>

#include <nlohmann/json.hpp>

namespace nl2plan::llm {

std::vector<ChatExchange> read_transcript(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read transcript " + file.string());
  std::vector<ChatExchange> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<ChatExchange>());
    } catch (const std::exception& e) {
      throw std::runtime_error(file.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::string exchange_line(const ChatExchange& exchange) {
  return nlohmann::json(exchange).dump() + "\n";
}

void append_exchange(const std::filesystem::path& file, const ChatExchange& exchange) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::app);
  out << exchange_line(exchange);
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + file.string());
}

UsageReport usage_totals(const std::vector<ChatExchange>& exchanges) {
  UsageReport r;
  for (const auto& e : exchanges) {
    r.steps[e.request.step] += e.usage;
    r.total += e.usage;
    ++r.exchanges;
  }
  return r;
}

namespace {

nlohmann::json usage_json(const TokenUsage& u) {
  return {{"input_tokens", u.input_tokens},
          {"output_tokens", u.output_tokens},
          {"total", u.total()}};
}

}  // namespace

void to_json(nlohmann::json& j, const UsageReport& report) {
  nlohmann::json steps = nlohmann::json::object();
  for (const auto& [step, u] : report.steps) steps[step] = usage_json(u);
  j = {{"steps", steps}, {"total", usage_json(report.total)}, {"exchanges", report.exchanges}};
}

void from_json(const nlohmann::json& j, UsageReport& report) {
  report = {};
  for (const auto& [step, u] : j.at("steps").items()) report.steps[step] = u.get<TokenUsage>();
  j.at("total").get_to(report.total);
  j.at("exchanges").get_to(report.exchanges);
}

}  // namespace nl2plan::llm
