#include "nl2plan/pddl/sexpr.h"

#include <algorithm>
#include <cctype>

namespace nl2plan::pddl {

namespace {

std::string format_message(SourcePos pos, const std::string& message,
                           const std::string& hint) {
  std::string out = "line " + std::to_string(pos.line) + ", column " +
                    std::to_string(pos.column) + ": " + message;
  if (!hint.empty()) out += " (hint: " + hint + ")";
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExprDocument read_all() {
    SExprDocument doc;
    skip_space(doc);
    while (!at_end()) {
      doc.exprs.push_back(read_expr(doc));
      skip_space(doc);
    }
    return doc;
  }

 private:
  bool at_end() const { return i_ >= text_.size(); }
  char peek() const { return text_[i_]; }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  SourcePos pos() const { return {line_, col_}; }

  void skip_space(SExprDocument& doc) {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        int comment_line = line_;
        while (!at_end() && peek() == ';') advance();
        size_t start = i_;
        while (!at_end() && peek() != '\n') advance();
        std::string body = trim(text_.substr(start, i_ - start));
        // Only the first comment on a line is kept; later ones are noise.
        doc.line_comments.emplace(comment_line, body);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  SExpr read_expr(SExprDocument& doc) {
    SExpr expr;
    expr.pos = pos();
    char c = peek();
    if (c == ')') {
      throw ParseError(pos(), "unexpected ')'",
                       "remove the extra closing parenthesis");
    }
    if (c == '(') {
      expr.kind = SExpr::Kind::List;
      advance();
      skip_space(doc);
      while (true) {
        if (at_end()) {
          throw ParseError(expr.pos, "unterminated list",
                           "add the missing closing parenthesis");
        }
        if (peek() == ')') {
          expr.end = pos();
          advance();
          break;
        }
        expr.items.push_back(read_expr(doc));
        skip_space(doc);
      }
      return expr;
    }
    expr.kind = SExpr::Kind::Symbol;
    size_t start = i_;
    while (!at_end()) {
      char d = peek();
      if (d == '(' || d == ')' || d == ';' ||
          std::isspace(static_cast<unsigned char>(d))) {
        break;
      }
      if (static_cast<unsigned char>(d) < 0x20) {
        throw ParseError(pos(), "control character in symbol");
      }
      advance();
    }
    expr.symbol = to_lower(text_.substr(start, i_ - start));
    expr.end = pos();
    return expr;
  }

  std::string_view text_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

ParseError::ParseError(SourcePos pos, const std::string& message,
                       std::string hint)
    : std::runtime_error(format_message(pos, message, hint)),
      pos_(pos),
      detail_(message),
      hint_(std::move(hint)) {}

const std::string& SExpr::head() const {
  static const std::string empty;
  if (!is_list() || items.empty() || !items.front().is_symbol()) return empty;
  return items.front().symbol;
}

std::string SExpr::to_string() const {
  if (is_symbol()) return symbol;
  std::string out = "(";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ' ';
    out += items[i].to_string();
  }
  out += ')';
  return out;
}

const std::string* SExprDocument::comment_on(int line) const {
  auto it = line_comments.find(line);
  if (it == line_comments.end() || it->second.empty()) return nullptr;
  return &it->second;
}

SExprDocument read_sexprs(std::string_view text) {
  return Reader(text).read_all();
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

}  // namespace nl2plan::pddl
