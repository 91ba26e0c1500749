#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "nl2plan/llm/digest.h"
#include "nl2plan/llm/provider.h"
#include "nl2plan/llm/templates.h"
#include "nl2plan/llm/transcript.h"
#include "test_support.h"

using namespace nl2plan::llm;
using nl2plan::testing::TempDir;

namespace {

ChatRequest request(const std::string& id, const std::string& text) {
  ChatRequest r;
  r.template_id = id;
  r.step = "type_extraction";
  r.messages = {{"user", text}};
  r.model = "gpt-4";
  return r;
}

PromptTemplate inline_template(const std::string& body) {
  return parse_template("id: t\nkind: main\n---\n" + body);
}

}  // namespace

TEST_CASE("sha256 matches the published test vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("request digest ignores the model but not the prompt") {
  ChatRequest a = request("type_extraction", "hello");
  ChatRequest b = a;
  b.model = "another-model";
  b.max_tokens = 100;
  CHECK(request_digest(a) == request_digest(b));
  b.temperature = 0.5;
  CHECK(request_digest(a) != request_digest(b));
  ChatRequest c = a;
  c.messages[0].content += " ";
  CHECK(request_digest(a) != request_digest(c));
  ChatRequest d = a;
  d.template_id = "type_hierarchy";
  CHECK(request_digest(a) != request_digest(d));
}

TEST_CASE("requests are range-checked") {
  ChatRequest r = request("x", "y");
  r.temperature = 2.5;
  CHECK_THROWS_AS(check_request(r), std::invalid_argument);
  r.temperature = -0.1;
  CHECK_THROWS_AS(check_request(r), std::invalid_argument);
  r.temperature = 2.0;
  CHECK_NOTHROW(check_request(r));
  r.max_tokens = 0;
  CHECK_THROWS_AS(check_request(r), std::invalid_argument);
}

TEST_CASE("template substitution") {
  PromptTemplate t = inline_template("Domain: {{desc}}");
  CHECK(render_template(t, {{"desc", "Blocksworld"}}) == "Domain: Blocksworld");
  try {
    render_template(inline_template("{{a}} and {{missing_one}}"), {{"a", "x"}});
    FAIL("expected a TemplateError");
  } catch (const TemplateError& e) {
    CHECK(std::string(e.what()).find("missing_one") != std::string::npos);
  }
  CHECK_THROWS_AS(render_template(t, {{"desc", "x"}, {"extra", "y"}}), TemplateError);
  // Values are not rescanned.
  CHECK(render_template(t, {{"desc", "{{desc}}"}}) == "Domain: {{desc}}");
  CHECK(placeholders(inline_template("{{b}} {{a}} {{b}} {{Not valid}}")) ==
        std::vector<std::string>{"b", "a"});
}

TEST_CASE("template headers are checked") {
  CHECK_THROWS_AS(parse_template("id: x\nkind: main\nno separator"), TemplateError);
  CHECK_THROWS_AS(parse_template("kind: main\n---\nbody"), TemplateError);
  CHECK_THROWS_AS(parse_template("id: x\nkind: odd\n---\nbody"), TemplateError);
  CHECK_THROWS_AS(parse_template("id: x\nkind: feedback\ncheck: q\n---\n{{checklist}}"),
                  TemplateError);
  PromptTemplate ok = parse_template(
      "id: x\nkind: feedback\ncheck: first?\ncheck: second?\n---\n"
      "{{checklist}}\nNo feedback.\n");
  CHECK(ok.checklist.size() == 2);
  CHECK(render_template(ok, {}) == "1. first?\n2. second?\nNo feedback.");
}

TEST_CASE("shipped templates") {
  TemplateLibrary lib = TemplateLibrary::embedded();
  const std::vector<std::string> expected = {
      "action_construction", "action_construction.feedback",
      "action_extraction",   "action_extraction.feedback",
      "baseline_cot",        "revision",
      "task_extraction",     "task_extraction.feedback",
      "type_extraction",     "type_extraction.feedback",
      "type_hierarchy",      "type_hierarchy.feedback"};
  CHECK(lib.ids() == expected);
  CHECK_THROWS_AS(lib.get("nope"), TemplateError);

  for (const auto& id : lib.ids()) {
    const PromptTemplate& t = lib.get(id);
    CAPTURE(id);
    CHECK((t.kind == TemplateKind::Feedback) == (id.find(".feedback") != std::string::npos));
    if (t.kind != TemplateKind::Feedback) continue;
    Bindings b;
    for (const auto& name : placeholders(t)) {
      if (name != "checklist") b[name] = "<" + name + ">";
    }
    b["solution"] = "```types\ntruck: a vehicle\n```";
    std::string text = render_template(t, b);
    size_t last = 0;
    for (const auto& q : t.checklist) {
      CAPTURE(q);
      size_t at = text.find(q);
      REQUIRE(at != std::string::npos);
      CHECK(text.find(q, at + 1) == std::string::npos);
      CHECK(at >= last);
      last = at;
    }
    CHECK(text.find("No feedback.") != std::string::npos);
  }
  CHECK(lib.get("baseline_cot").body.find("Let's think step by step") != std::string::npos);
  CHECK(placeholders(lib.get("revision")) ==
        std::vector<std::string>{"prompt", "solution", "feedback"});
}

TEST_CASE("templates load from a directory") {
  TempDir dir("llm");
  nl2plan::testing::write_file(dir.path() / "a.txt", "id: a\nkind: main\n---\nA {{x}}\n");
  nl2plan::testing::write_file(dir.path() / "ignored.md", "not a template");
  TemplateLibrary lib = TemplateLibrary::from_directory(dir.path());
  CHECK(lib.ids() == std::vector<std::string>{"a"});
  CHECK(render_template(lib.get("a"), {{"x", "1"}}) == "A 1");
}

TEST_CASE("rendering is injective over delimiter-free bindings") {
  PromptTemplate t = inline_template("<{{a}}|{{b}}|{{c}}>");
  std::mt19937 rng(7);
  auto random_text = [&] {
    static const std::string alphabet = "ab {}\n";
    std::string s;
    size_t n = rng() % 4;
    for (size_t i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  std::map<std::string, Bindings> seen;
  for (int i = 0; i < 3000; ++i) {
    Bindings b = {{"a", random_text()}, {"b", random_text()}, {"c", random_text()}};
    std::string out = render_template(t, b);
    auto [it, inserted] = seen.emplace(out, b);
    if (!inserted) CHECK(it->second == b);
  }
}

TEST_CASE("replay returns stored exchanges byte for byte") {
  ChatRequest r = request("type_extraction", "describe blocks");
  ChatExchange stored;
  stored.request = r;
  stored.digest = request_digest(r);
  stored.response = "```types\nblock: a cube\n```";
  stored.usage = {12, 7};
  stored.timestamp = "2024-03-01T10:00:00Z";
  ChatExchange second = stored;
  second.response = "second answer";

  ReplayProvider replay({stored, second});
  ChatExchange got = replay.complete(r);
  CHECK(got == stored);
  CHECK(replay.complete(r).response == "second answer");
  CHECK(replay.complete(r).response == "second answer");

  ChatRequest unseen = request("type_extraction", "something else");
  try {
    replay.complete(unseen);
    FAIL("expected a replay miss");
  } catch (const ReplayMissError& e) {
    CHECK(e.digest() == request_digest(unseen));
    CHECK(std::string(e.what()).find(request_digest(unseen)) != std::string::npos);
  }
}

TEST_CASE("recording appends one line per exchange") {
  TempDir dir("llm");
  auto scripted = std::make_unique<ScriptedProvider>(
      "=== type_extraction\nfirst\n=== type_extraction\nsecond\n");
  RecordingProvider rec(std::move(scripted), dir.path() / "t.jsonl");
  ChatRequest r = request("type_extraction", "12345678");
  ChatExchange a = rec.complete(r);
  ChatExchange b = rec.complete(r);
  CHECK(a.response == "first");
  CHECK(b.response == "second");
  CHECK(a.usage == TokenUsage{2, 2});
  auto back = read_transcript(dir.path() / "t.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0] == a);
  CHECK(back[1] == b);
  UsageReport u = usage_totals(back);
  CHECK(u.total == TokenUsage{4, 4});
  CHECK(u.exchanges == 2);

  auto replay = ReplayProvider::from_directory(dir.path());
  CHECK(replay->complete(r) == a);
  CHECK(replay->complete(r) == b);
}

TEST_CASE("scripted provider") {
  ScriptedProvider p("=== x\nline one\n\nline three\n=== y\n\n");
  CHECK(p.remaining() == std::map<std::string, size_t>{{"x", 1}, {"y", 1}});
  ChatExchange e = p.complete(request("x", "abcde"));
  CHECK(e.response == "line one\n\nline three");
  CHECK(e.usage.input_tokens == 2);
  CHECK(e.usage.output_tokens == 5);
  CHECK(p.complete(request("y", "q")).response.empty());
  CHECK_THROWS_AS(p.complete(request("x", "abcde")), ProviderError);
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("abcd") == 1);
  CHECK(estimate_tokens("abcde") == 2);
}

TEST_CASE("usage totals") {
  CHECK(usage_totals({}).total == TokenUsage{});
  CHECK(usage_totals({}).steps.empty());
  ChatExchange a;
  a.request.step = "action_construction";
  a.usage = {100, 50};
  ChatExchange b = a;
  b.usage = {200, 25};
  ChatExchange c = a;
  c.request.step = "planning";
  c.usage = {1, 1};
  UsageReport r = usage_totals({a, b, c});
  CHECK(r.steps.at("action_construction").total() == 375);
  CHECK(r.total.total() == 377);
  long sum = 0;
  for (const auto& [_, u] : r.steps) sum += u.total();
  CHECK(sum == r.total.total());
  nlohmann::json j = r;
  CHECK(j["steps"]["action_construction"]["total"] == 375);
  CHECK(j.get<UsageReport>() == r);
}

TEST_CASE("transcript errors name the line") {
  TempDir dir("llm");
  nl2plan::testing::write_file(dir.path() / "bad.jsonl", "\n{\"digest\": 1}\n");
  try {
    read_transcript(dir.path() / "bad.jsonl");
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }
}

TEST_CASE("provider configuration problems") {
  ProviderConfig c;
  c.kind = ProviderKind::Replay;
  CHECK(config_problem(c).has_value());
  CHECK_THROWS_AS(make_provider(c), ProviderError);
  TempDir dir("llm");
  c.transcript_dir = dir.path();
  CHECK_FALSE(config_problem(c).has_value());
  c.kind = ProviderKind::Live;
  c.api_key_env = "NL2PLAN_TEST_KEY_THAT_IS_NOT_SET";
  CHECK(config_problem(c)->find("NL2PLAN_TEST_KEY_THAT_IS_NOT_SET") != std::string::npos);
  CHECK(provider_kind_from_string("record") == ProviderKind::Record);
  CHECK_FALSE(provider_kind_from_string("nope").has_value());
}
