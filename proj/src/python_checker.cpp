#include <algorithm>
#include <cctype>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lintseq/lint.hpp"
#include "lintseq/text.hpp"

namespace lintseq::python {

namespace {

// ---------------------------------------------------------------------------
// Tokens

enum class TokKind { Name, Number, String, Op };

struct Token {
  TokKind kind;
  std::string text;
  std::size_t line;
  bool fstring = false;
  std::string body;  // string contents, f-strings only
};

struct LogicalLine {
  std::size_t first_line = 0;
  std::size_t last_line = 0;
  std::size_t indent = 0;
  std::vector<Token> tokens;
};

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> kw = {
      "False", "None",   "True",    "and",      "as",     "assert", "async",  "await",
      "break", "class",  "continue", "def",     "del",    "elif",   "else",   "except",
      "finally", "for",  "from",    "global",   "if",     "import", "in",     "is",
      "lambda", "nonlocal", "not",  "or",       "pass",   "raise",  "return", "try",
      "while", "with",   "yield"};
  return kw;
}

bool is_name(const Token& t) { return t.kind == TokKind::Name && !keywords().contains(t.text); }
bool is_op(const Token& t, std::string_view op) { return t.kind == TokKind::Op && t.text == op; }
bool is_kw(const Token& t, std::string_view kw) { return t.kind == TokKind::Name && t.text == kw; }

const std::unordered_set<std::string_view>& builtins() {
  static const std::unordered_set<std::string_view> names = {
      "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray",
      "bytes", "callable", "chr", "classmethod", "compile", "complex", "copyright", "credits",
      "delattr", "dict", "dir", "divmod", "enumerate", "eval", "exec", "exit", "filter", "float",
      "format", "frozenset", "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input",
      "int", "isinstance", "issubclass", "iter", "len", "license", "list", "locals", "map", "max",
      "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print", "property",
      "quit", "range", "repr", "reversed", "round", "set", "setattr", "slice", "sorted",
      "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip", "__import__",
      "__name__", "__file__", "__doc__", "__builtins__", "__spec__", "__loader__", "__package__",
      "__debug__", "__class__", "__annotations__", "__dict__", "NotImplemented", "Ellipsis",
      "BaseException", "BaseExceptionGroup", "Exception", "ExceptionGroup", "ArithmeticError",
      "AssertionError", "AttributeError", "BlockingIOError", "BrokenPipeError", "BufferError",
      "BytesWarning", "ChildProcessError", "ConnectionAbortedError", "ConnectionError",
      "ConnectionRefusedError", "ConnectionResetError", "DeprecationWarning", "EOFError",
      "EncodingWarning", "EnvironmentError", "FileExistsError", "FileNotFoundError",
      "FloatingPointError", "FutureWarning", "GeneratorExit", "IOError", "ImportError",
      "ImportWarning", "IndentationError", "IndexError", "InterruptedError", "IsADirectoryError",
      "KeyError", "KeyboardInterrupt", "LookupError", "MemoryError", "ModuleNotFoundError",
      "NameError", "NotADirectoryError", "NotImplementedError", "OSError", "OverflowError",
      "PendingDeprecationWarning", "PermissionError", "ProcessLookupError", "RecursionError",
      "ReferenceError", "ResourceWarning", "RuntimeError", "RuntimeWarning", "StopAsyncIteration",
      "StopIteration", "SyntaxError", "SyntaxWarning", "SystemError", "SystemExit", "TabError",
      "TimeoutError", "TypeError", "UnboundLocalError", "UnicodeDecodeError",
      "UnicodeEncodeError", "UnicodeError", "UnicodeTranslateError", "UnicodeWarning",
      "UserWarning", "ValueError", "Warning", "ZeroDivisionError"};
  return names;
}

LintFinding finding(std::string code, std::string message, std::size_t line) {
  return LintFinding{std::move(code), std::move(message), line, Severity::Error};
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool string_prefix(std::string_view ident) {
  std::string lower;
  for (char c : ident) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" ||
         lower == "rb" || lower == "fr" || lower == "rf";
}

std::size_t indent_width(std::string_view line, std::size_t& pos) {
  std::size_t width = 0;
  pos = 0;
  while (pos < line.size()) {
    if (line[pos] == ' ') {
      ++width;
    } else if (line[pos] == '\t') {
      width = (width / 8 + 1) * 8;
    } else if (line[pos] == '\f') {
      width = 0;
    } else {
      break;
    }
    ++pos;
  }
  return width;
}

char closer_for(char open) {
  switch (open) {
    case '(': return ')';
    case '[': return ']';
    default: return '}';
  }
}

// Keywords that cannot begin a continuation line inside brackets. Seeing one
// at or left of the statement's indentation ends an unclosed logical line.
bool statement_only_keyword(std::string_view word) {
  static const std::unordered_set<std::string_view> words = {
      "def",    "class", "import", "return",   "while",    "try",    "except", "finally",
      "with",   "raise", "pass",   "break",    "continue", "global", "nonlocal", "assert",
      "del",    "elif"};
  return words.contains(word);
}

class Tokenizer {
 public:
  Tokenizer(const std::vector<std::string>& lines, std::vector<LintFinding>& findings)
      : lines_(lines), findings_(findings) {}

  std::vector<LogicalLine> run() {
    for (std::size_t idx = 0; idx < lines_.size(); ++idx) scan_line(idx + 1, lines_[idx]);
    if (pending_string_) {
      findings_.push_back(finding("unterminated-string",
                                  pending_string_->triple ? "unterminated triple-quoted string literal"
                                                          : "unterminated string literal",
                                  pending_string_->start_line));
      finish_string();
    }
    if (continuation_ && !lines_.empty()) {
      findings_.push_back(finding("syntax-error", "unexpected EOF while parsing", lines_.size()));
    }
    close_unclosed();
    end_logical(lines_.empty() ? 0 : lines_.size());
    return std::move(out_);
  }

 private:
  struct PendingString {
    std::string quote;
    bool triple;
    bool fstring;
    std::size_t start_line;
    std::string body;
  };

  void scan_line(std::size_t ln, const std::string& line) {
    std::size_t pos = 0;
    if (pending_string_) {
      if (!continue_string(ln, line, pos)) return;
    } else if (cur_.tokens.empty() && brackets_.empty() && !continuation_) {
      std::size_t p = 0;
      const std::size_t width = indent_width(line, p);
      if (p >= line.size() || line[p] == '#') return;
      cur_.indent = width;
      cur_.first_line = ln;
      pos = p;
    } else if (!brackets_.empty() && !continuation_) {
      std::size_t p = 0;
      const std::size_t width = indent_width(line, p);
      std::size_t q = p;
      while (q < line.size() && ident_char(static_cast<unsigned char>(line[q]))) ++q;
      const std::string_view word(line.data() + p, q - p);
      const bool decorator = p < line.size() && line[p] == '@';
      if (width <= cur_.indent && (statement_only_keyword(word) || decorator)) {
        close_unclosed();
        end_logical(ln - 1);
        cur_.indent = width;
        cur_.first_line = ln;
        pos = p;
      }
    }
    continuation_ = false;
    scan_from(ln, line, pos);
    if (!pending_string_ && brackets_.empty() && !continuation_ && !cur_.tokens.empty()) {
      end_logical(ln);
    }
  }

  void scan_from(std::size_t ln, const std::string& line, std::size_t pos) {
    const std::size_t n = line.size();
    while (pos < n) {
      const auto c = static_cast<unsigned char>(line[pos]);
      if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
        ++pos;
        continue;
      }
      if (c == '#') return;
      if (c == '\\') {
        std::size_t rest = pos + 1;
        while (rest < n && (line[rest] == ' ' || line[rest] == '\t' || line[rest] == '\r')) ++rest;
        if (rest >= n) {
          continuation_ = true;
          return;
        }
        findings_.push_back(
            finding("syntax-error", "unexpected character after line continuation character", ln));
        pos = rest;
        continue;
      }
      if (ident_start(c)) {
        std::size_t end = pos;
        while (end < n && ident_char(static_cast<unsigned char>(line[end]))) ++end;
        std::string ident = line.substr(pos, end - pos);
        if (end < n && (line[end] == '\'' || line[end] == '"') && string_prefix(ident)) {
          const bool f = ident.find_first_of("fF") != std::string::npos;
          if (!start_string(ln, line, end, f)) return;
          pos = end;
          continue;
        }
        push(TokKind::Name, std::move(ident), ln);
        pos = end;
        continue;
      }
      if (c == '\'' || c == '"') {
        if (!start_string(ln, line, pos, false)) return;
        continue;
      }
      if (std::isdigit(c) || (c == '.' && pos + 1 < n && std::isdigit(static_cast<unsigned char>(line[pos + 1])))) {
        std::size_t end = pos;
        while (end < n) {
          const auto d = static_cast<unsigned char>(line[end]);
          if (std::isalnum(d) || d == '_' || d == '.') {
            ++end;
          } else if ((d == '+' || d == '-') && end > pos &&
                     (line[end - 1] == 'e' || line[end - 1] == 'E') &&
                     !(line[pos] == '0' && end - pos >= 2 && (line[pos + 1] == 'x' || line[pos + 1] == 'X'))) {
            ++end;
          } else {
            break;
          }
        }
        push(TokKind::Number, line.substr(pos, end - pos), ln);
        pos = end;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') {
        brackets_.push_back({static_cast<char>(c), ln});
        push(TokKind::Op, std::string(1, static_cast<char>(c)), ln);
        ++pos;
        continue;
      }
      if (c == ')' || c == ']' || c == '}') {
        const std::string closer(1, static_cast<char>(c));
        if (brackets_.empty()) {
          findings_.push_back(finding("unmatched-bracket", "unmatched '" + closer + "'", ln));
        } else {
          const char open = brackets_.back().first;
          if (closer_for(open) != static_cast<char>(c)) {
            findings_.push_back(finding("mismatched-bracket",
                                        "closing parenthesis '" + closer +
                                            "' does not match opening parenthesis '" + std::string(1, open) + "'",
                                        ln));
          }
          brackets_.pop_back();
          push(TokKind::Op, closer, ln);
        }
        ++pos;
        continue;
      }
      static const char* const ops[] = {"**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//",
                                        "<<",  ">>",  "<=",  ">=",  "==",  "!=", "+=", "-=", "*=",
                                        "/=",  "%=",  "&=",  "|=",  "^=",  "@="};
      bool matched = false;
      for (const char* op : ops) {
        const std::string_view sv(op);
        if (line.compare(pos, sv.size(), sv) == 0) {
          push(TokKind::Op, std::string(sv), ln);
          pos += sv.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
      static const std::string_view singles = "+-*/%@&|^~<>=.,:;!";
      if (singles.find(static_cast<char>(c)) != std::string_view::npos) {
        push(TokKind::Op, std::string(1, static_cast<char>(c)), ln);
      } else if (c == '$' || c == '?' || c == '`') {
        findings_.push_back(finding("syntax-error", "invalid character '" + std::string(1, static_cast<char>(c)) + "'", ln));
      }
      ++pos;
    }
  }

  // Returns false when the string runs past the end of the line.
  bool start_string(std::size_t ln, const std::string& line, std::size_t& pos, bool fstring) {
    const char q = line[pos];
    const bool triple = line.compare(pos, 3, std::string(3, q)) == 0;
    pending_string_ = PendingString{triple ? std::string(3, q) : std::string(1, q), triple, fstring, ln, {}};
    pos += triple ? 3 : 1;
    return continue_string(ln, line, pos);
  }

  // Scans string contents from pos. On close, pushes the token, advances pos
  // and returns true. Otherwise consumes the line.
  bool continue_string(std::size_t ln, const std::string& line, std::size_t& pos) {
    auto& s = *pending_string_;
    const std::size_t n = line.size();
    while (pos < n) {
      if (line[pos] == '\\') {
        if (pos + 1 >= n) {
          s.body += '\n';
          return false;  // escaped newline continues the string
        }
        s.body += line.substr(pos, 2);
        pos += 2;
        continue;
      }
      if (line.compare(pos, s.quote.size(), s.quote) == 0) {
        pos += s.quote.size();
        finish_string();
        return true;
      }
      s.body += line[pos];
      ++pos;
    }
    if (s.triple) {
      s.body += '\n';
      return false;
    }
    findings_.push_back(finding("unterminated-string", "unterminated string literal", s.start_line));
    finish_string();
    (void)ln;
    return true;
  }

  void finish_string() {
    auto s = std::move(*pending_string_);
    pending_string_.reset();
    if (cur_.tokens.empty() && brackets_.empty() && cur_.first_line == 0) cur_.first_line = s.start_line;
    Token t{TokKind::String, s.quote, s.start_line, s.fstring, {}};
    if (s.fstring) t.body = std::move(s.body);
    cur_.tokens.push_back(std::move(t));
  }

  void push(TokKind kind, std::string text, std::size_t ln) {
    cur_.tokens.push_back(Token{kind, std::move(text), ln, false, {}});
  }

  void close_unclosed() {
    for (const auto& [open, line] : brackets_) {
      findings_.push_back(finding("unclosed-bracket", "'" + std::string(1, open) + "' was never closed", line));
    }
    brackets_.clear();
  }

  void end_logical(std::size_t last_line) {
    if (!cur_.tokens.empty()) {
      cur_.last_line = std::max(last_line, cur_.first_line);
      out_.push_back(std::move(cur_));
    }
    cur_ = LogicalLine{};
  }

  const std::vector<std::string>& lines_;
  std::vector<LintFinding>& findings_;
  std::vector<LogicalLine> out_;
  LogicalLine cur_;
  std::vector<std::pair<char, std::size_t>> brackets_;
  bool continuation_ = false;
  std::optional<PendingString> pending_string_;
};

// Tokenizes one f-string replacement field; errors are ignored.
std::vector<Token> tokenize_fragment(const std::string& text, std::size_t line) {
  std::vector<std::string> one{text};
  std::vector<LintFinding> ignored;
  Tokenizer tk(one, ignored);
  auto logical = tk.run();
  std::vector<Token> out;
  for (auto& ll : logical) {
    for (auto& t : ll.tokens) {
      t.line = line;
      out.push_back(std::move(t));
    }
  }
  return out;
}

// Expression sources inside an f-string body ("{expr!r:fmt}" -> "expr").
std::vector<std::string> fstring_fields(std::string_view body) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        i += 2;
        continue;
      }
      int depth = 0;
      std::size_t j = i + 1;
      std::string expr;
      char quote = 0;
      bool done = false;
      for (; j < body.size(); ++j) {
        const char c = body[j];
        if (quote) {
          if (c == quote) quote = 0;
          expr += c;
          continue;
        }
        if (c == '\'' || c == '"') {
          quote = c;
          expr += c;
          continue;
        }
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == '}') {
          if (depth == 0) {
            done = true;
            break;
          }
          --depth;
        }
        if (depth == 0 && (c == ':' || (c == '!' && !(j + 1 < body.size() && body[j + 1] == '=')))) {
          done = true;
          break;
        }
        expr += c;
      }
      if (!expr.empty() && expr.back() == '=') expr.pop_back();  // f"{x=}"
      fields.push_back(expr);
      if (!done) break;
      // skip the format spec up to the closing brace
      int d = 0;
      while (j < body.size()) {
        if (body[j] == '{') ++d;
        if (body[j] == '}') {
          if (d == 0) break;
          --d;
        }
        ++j;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }
  return fields;
}

// ---------------------------------------------------------------------------
// Scopes and name resolution

enum class ScopeKind { Module, Class, Function };

struct Use {
  std::string name;
  std::size_t line;
  std::size_t order;
};

enum class BindKind { Import, Variable };

// A binding that draws a warning when nothing reads it.
struct Candidate {
  std::string name;
  std::size_t line;
  BindKind kind;
};

struct Scope {
  ScopeKind kind;
  Scope* parent;
  std::unordered_map<std::string, std::size_t> bindings;  // name -> earliest order
  std::vector<Use> uses;
  std::optional<std::size_t> wildcard;
  std::vector<Candidate> candidates;
  std::unordered_set<std::string> declared;  // global / nonlocal
};

enum class StmtKind {
  None, Simple, If, Elif, Else, LoopElse, TryElse, Try, Except, Finally, For, While, With, Def, Class,
  Match, Case, Decorator
};

enum class BlockKind { Module, Function, Class, Loop, Other, Orphan };

struct Block {
  Block(std::size_t indent, BlockKind kind, Scope* scope, bool in_function, bool in_loop)
      : indent(indent), kind(kind), scope(scope), in_function(in_function), in_loop(in_loop) {}
  std::size_t indent;
  BlockKind kind;
  Scope* scope;
  bool in_function;
  bool in_loop;
  StmtKind last = StmtKind::None;
  std::optional<std::size_t> open_try_line;  // try without except/finally yet
};

struct Header {
  std::size_t line;
  std::string keyword;
  BlockKind kind;
  Scope* scope;
  bool reported = false;  // header already carries a finding; no expected-indent
};

using TokSpan = std::span<const Token>;

// Index of the first token at bracket depth 0 satisfying pred, or npos.
template <typename Pred>
std::size_t find_top(TokSpan toks, Pred pred, std::size_t from = 0) {
  int depth = 0;
  for (std::size_t i = from; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (depth == 0 && pred(t)) return i;
    if (t.kind == TokKind::Op) {
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      if (t.text == ")" || t.text == "]" || t.text == "}") depth = std::max(0, depth - 1);
    }
  }
  return std::string::npos;
}

std::vector<TokSpan> split_top(TokSpan toks, std::string_view op) {
  std::vector<TokSpan> parts;
  std::size_t begin = 0;
  while (true) {
    const std::size_t at = find_top(toks, [&](const Token& t) { return is_op(t, op); }, begin);
    if (at == std::string::npos) {
      parts.push_back(toks.subspan(begin));
      break;
    }
    parts.push_back(toks.subspan(begin, at - begin));
    begin = at + 1;
  }
  return parts;
}

bool is_open(const Token& t) { return is_op(t, "(") || is_op(t, "[") || is_op(t, "{"); }
bool is_close(const Token& t) { return is_op(t, ")") || is_op(t, "]") || is_op(t, "}"); }

bool is_compound_keyword(std::string_view w) {
  return w == "if" || w == "elif" || w == "else" || w == "while" || w == "for" || w == "try" ||
         w == "except" || w == "finally" || w == "with" || w == "def" || w == "class";
}

class Analyzer {
 public:
  explicit Analyzer(std::vector<LintFinding>& findings) : findings_(findings) {
    module_ = new_scope(ScopeKind::Module, nullptr);
    blocks_.push_back(Block{0, BlockKind::Module, module_, false, false});
  }

  void run(const std::vector<LogicalLine>& lines) {
    for (const auto& ll : lines) process_line(ll);
    if (pending_header_) {
      expected_indent(*pending_header_);
      pending_header_.reset();
    }
    if (pending_decorator_) dangling_decorator();
    while (!blocks_.empty()) pop_block();
    resolve();
  }

 private:
  Scope* new_scope(ScopeKind kind, Scope* parent) {
    scopes_.push_back(std::make_unique<Scope>(Scope{kind, parent, {}, {}, {}, {}, {}}));
    return scopes_.back().get();
  }

  void add(std::string code, std::string message, std::size_t line) {
    findings_.push_back(finding(std::move(code), std::move(message), line));
  }

  void expected_indent(const Header& h) {
    if (h.reported) return;
    add("expected-indent", "expected an indented block after '" + h.keyword + "'", h.line);
  }

  void dangling_decorator() {
    add("dangling-decorator", "decorator not followed by a function or class definition", *pending_decorator_);
    pending_decorator_.reset();
  }

  void close_try(Block& b) {
    if (b.open_try_line) {
      add("syntax-error", "expected 'except' or 'finally' block", *b.open_try_line);
      b.open_try_line.reset();
    }
  }

  void pop_block() {
    close_try(blocks_.back());
    blocks_.pop_back();
  }

  Block& top() { return blocks_.back(); }

  void process_line(const LogicalLine& ll) {
    const std::size_t indent = ll.indent;
    const TokSpan toks(ll.tokens);
    const bool starts_decorator = is_op(toks[0], "@");
    const bool starts_def = is_kw(toks[0], "def") || is_kw(toks[0], "class") ||
                            (is_kw(toks[0], "async") && toks.size() > 1 && is_kw(toks[1], "def"));
    if (pending_decorator_ && !starts_decorator && !starts_def) dangling_decorator();

    if (pending_header_) {
      Header h = std::move(*pending_header_);
      pending_header_.reset();
      if (indent > top().indent) {
        const Block& parent = top();
        Block b{indent, h.kind, h.scope, parent.in_function, parent.in_loop};
        if (h.kind == BlockKind::Function) {
          b.in_function = true;
          b.in_loop = false;
        } else if (h.kind == BlockKind::Class) {
          b.in_function = false;
          b.in_loop = false;
        } else if (h.kind == BlockKind::Loop) {
          b.in_loop = true;
        }
        blocks_.push_back(b);
        statement(ll);
        return;
      }
      expected_indent(h);
    }

    if (indent > top().indent) {
      add("unexpected-indent", "unexpected indent", ll.first_line);
      const Block& parent = top();
      blocks_.push_back(Block{indent, BlockKind::Orphan, parent.scope, parent.in_function, parent.in_loop});
    } else if (indent < top().indent) {
      while (blocks_.size() > 1 && top().indent > indent) pop_block();
      if (top().indent != indent) {
        add("inconsistent-dedent", "unindent does not match any outer indentation level", ll.first_line);
      }
    }
    statement(ll);
  }

  static bool soft_keyword_header(TokSpan toks, std::string_view word) {
    if (!is_kw(toks[0], word) || toks.size() < 3 || !is_op(toks.back(), ":")) return false;
    const Token& second = toks[1];
    if (second.kind == TokKind::Op && !is_open(second) && second.text != "-" && second.text != "*" &&
        second.text != "~") {
      return false;
    }
    return true;
  }

  // Index of the colon ending a compound header, skipping lambda colons.
  static std::size_t header_colon(TokSpan toks) {
    int lambdas = 0;
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (is_open(t)) ++depth;
      if (is_close(t)) depth = std::max(0, depth - 1);
      if (depth != 0) continue;
      if (is_kw(t, "lambda")) ++lambdas;
      if (is_op(t, ":")) {
        if (lambdas > 0) {
          --lambdas;
          continue;
        }
        return i;
      }
    }
    return std::string::npos;
  }

  void statement(const LogicalLine& ll) {
    TokSpan toks(ll.tokens);
    Block& block = top();
    Scope* scope = block.scope;
    std::string first = toks[0].kind == TokKind::Name ? toks[0].text : std::string();
    bool is_async = false;
    if (first == "async" && toks.size() > 1 && toks[1].kind == TokKind::Name &&
        (toks[1].text == "def" || toks[1].text == "for" || toks[1].text == "with")) {
      is_async = true;
      toks = toks.subspan(1);
      first = toks[0].text;
    }

    bool compound = is_compound_keyword(first);
    if (!compound && (soft_keyword_header(toks, "match") || soft_keyword_header(toks, "case"))) compound = true;

    if (is_op(toks[0], "@")) {
      if (block.open_try_line) close_try(block);
      block.last = StmtKind::Decorator;
      const std::size_t order = next_order();
      collect_uses(scope, toks.subspan(1), order);
      check_shape(toks.subspan(1));
      pending_decorator_ = ll.first_line;
      return;
    }
    pending_decorator_.reset();

    if (!compound) {
      if (block.open_try_line) close_try(block);
      block.last = StmtKind::Simple;
      simple_statements(scope, toks, ll.first_line);
      return;
    }

    const std::size_t colon = header_colon(toks);
    if (colon == std::string::npos) {
      add("syntax-error", "expected ':'", ll.first_line);
      if (block.open_try_line) close_try(block);
      block.last = StmtKind::Simple;
      collect_uses(scope, toks.subspan(1), next_order());
      // Accept an indented body so one missing colon is one finding.
      BlockKind kind = BlockKind::Other;
      if (first == "def") kind = BlockKind::Function;
      if (first == "for" || first == "while") kind = BlockKind::Loop;
      Header h{ll.first_line, std::string(first), kind, scope};
      h.reported = true;
      pending_header_ = std::move(h);
      return;
    }
    const TokSpan head = toks.subspan(0, colon);
    const TokSpan inline_body = toks.subspan(colon + 1);

    // Clause pairing against the previous statement at this level.
    StmtKind kind = StmtKind::Simple;
    const StmtKind prev = block.last;
    if (first == "elif") {
      kind = StmtKind::Elif;
      if (prev != StmtKind::If && prev != StmtKind::Elif) add("orphan-clause", "'elif' without matching 'if'", ll.first_line);
    } else if (first == "else") {
      if (prev == StmtKind::If || prev == StmtKind::Elif) {
        kind = StmtKind::Else;
      } else if (prev == StmtKind::For || prev == StmtKind::While) {
        kind = StmtKind::LoopElse;
      } else if (prev == StmtKind::Except) {
        kind = StmtKind::TryElse;
      } else {
        kind = StmtKind::Else;
        add("orphan-clause", "'else' without matching block", ll.first_line);
      }
    } else if (first == "except") {
      kind = StmtKind::Except;
      if (prev != StmtKind::Try && prev != StmtKind::Except) add("orphan-clause", "'except' without matching 'try'", ll.first_line);
      block.open_try_line.reset();
    } else if (first == "finally") {
      kind = StmtKind::Finally;
      if (prev != StmtKind::Try && prev != StmtKind::Except && prev != StmtKind::TryElse) {
        add("orphan-clause", "'finally' without matching 'try'", ll.first_line);
      }
      block.open_try_line.reset();
    } else {
      if (block.open_try_line) close_try(block);
      if (first == "if") kind = StmtKind::If;
      else if (first == "while") kind = StmtKind::While;
      else if (first == "for") kind = StmtKind::For;
      else if (first == "try") kind = StmtKind::Try;
      else if (first == "with") kind = StmtKind::With;
      else if (first == "def") kind = StmtKind::Def;
      else if (first == "class") kind = StmtKind::Class;
      else if (first == "match") kind = StmtKind::Match;
      else if (first == "case") kind = StmtKind::Case;
    }
    block.last = kind;
    if (kind == StmtKind::Try) block.open_try_line = ll.first_line;

    const std::size_t order = next_order();
    Header header{ll.first_line, first, BlockKind::Other, scope};
    switch (kind) {
      case StmtKind::If:
      case StmtKind::Elif:
      case StmtKind::Match:
        collect_uses(scope, head.subspan(1), order);
        check_shape(head.subspan(1));
        break;
      case StmtKind::While:
        collect_uses(scope, head.subspan(1), order);
        check_shape(head.subspan(1));
        header.kind = BlockKind::Loop;
        break;
      case StmtKind::For: {
        header.kind = BlockKind::Loop;
        const std::size_t in = find_top(head, [](const Token& t) { return is_kw(t, "in"); }, 1);
        if (in == std::string::npos) {
          add("syntax-error", "invalid syntax", ll.first_line);
          collect_uses(scope, head.subspan(1), order);
        } else {
          collect_uses(scope, head.subspan(in + 1), order);
          bind_targets(scope, head.subspan(1, in - 1), order);
        }
        break;
      }
      case StmtKind::With: {
        for (TokSpan item : split_top(head.subspan(1), ",")) {
          const std::size_t as = find_top(item, [](const Token& t) { return is_kw(t, "as"); });
          if (as == std::string::npos) {
            collect_uses(scope, item, order);
          } else {
            collect_uses(scope, item.subspan(0, as), order);
            bind_targets(scope, item.subspan(as + 1), order);
          }
        }
        break;
      }
      case StmtKind::Except: {
        TokSpan rest = head.subspan(1);
        if (!rest.empty() && is_op(rest[0], "*")) rest = rest.subspan(1);
        const std::size_t as = find_top(rest, [](const Token& t) { return is_kw(t, "as"); });
        if (as == std::string::npos) {
          collect_uses(scope, rest, order);
        } else {
          collect_uses(scope, rest.subspan(0, as), order);
          bind_targets(scope, rest.subspan(as + 1), order);
        }
        break;
      }
      case StmtKind::Case: {
        TokSpan rest = head.subspan(1);
        const std::size_t guard = find_top(rest, [](const Token& t) { return is_kw(t, "if"); });
        if (guard != std::string::npos) {
          bind_pattern(scope, rest.subspan(0, guard), order);
          collect_uses(scope, rest.subspan(guard + 1), order);
        } else {
          bind_pattern(scope, rest, order);
        }
        break;
      }
      case StmtKind::Def:
        header.kind = BlockKind::Function;
        header.scope = function_header(scope, head, order, ll.first_line);
        break;
      case StmtKind::Class:
        header.kind = BlockKind::Class;
        header.scope = class_header(scope, head, order, ll.first_line);
        break;
      default:
        if (head.size() > 1) add("syntax-error", "invalid syntax", ll.first_line);
        break;
    }
    (void)is_async;

    if (!inline_body.empty()) {
      // One-line compound statement: the body runs in the header's block.
      Block b{block.indent + 1, header.kind, header.scope, block.in_function, block.in_loop};
      if (header.kind == BlockKind::Function) {
        b.in_function = true;
        b.in_loop = false;
      } else if (header.kind == BlockKind::Class) {
        b.in_function = false;
        b.in_loop = false;
      } else if (header.kind == BlockKind::Loop) {
        b.in_loop = true;
      }
      blocks_.push_back(b);
      simple_statements(header.scope, inline_body, ll.first_line);
      blocks_.pop_back();
      return;
    }
    pending_header_ = header;
  }

  Scope* function_header(Scope* scope, TokSpan head, std::size_t order, std::size_t line) {
    Scope* fn = new_scope(ScopeKind::Function, scope);
    if (head.size() < 2 || !is_name(head[1])) {
      add("syntax-error", "invalid syntax", line);
      return fn;
    }
    bind(scope, head[1].text, order * 2 + 1);
    if (head.size() < 3 || !is_op(head[2], "(")) {
      add("syntax-error", "invalid syntax", line);
      return fn;
    }
    // matching ')'
    int depth = 0;
    std::size_t close = std::string::npos;
    for (std::size_t i = 2; i < head.size(); ++i) {
      if (is_open(head[i])) ++depth;
      if (is_close(head[i]) && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close == std::string::npos) return fn;
    for (TokSpan part : split_top(head.subspan(3, close - 3), ",")) {
      while (!part.empty() && (is_op(part[0], "*") || is_op(part[0], "**"))) part = part.subspan(1);
      if (part.empty() || is_op(part[0], "/")) continue;
      if (is_name(part[0])) bind(fn, part[0].text, 0);
      const std::size_t ann = find_top(part, [](const Token& t) { return is_op(t, ":"); });
      const std::size_t def = find_top(part, [](const Token& t) { return is_op(t, "="); });
      if (ann != std::string::npos) {
        const std::size_t end = def == std::string::npos ? part.size() : def;
        if (end > ann + 1) collect_uses(scope, part.subspan(ann + 1, end - ann - 1), order);
      }
      if (def != std::string::npos) collect_uses(scope, part.subspan(def + 1), order);
    }
    TokSpan tail = head.subspan(close + 1);
    if (!tail.empty()) {
      if (is_op(tail[0], "->")) {
        collect_uses(scope, tail.subspan(1), order);
      } else {
        add("syntax-error", "invalid syntax", line);
      }
    }
    return fn;
  }

  Scope* class_header(Scope* scope, TokSpan head, std::size_t order, std::size_t line) {
    Scope* cls = new_scope(ScopeKind::Class, scope);
    if (head.size() < 2 || !is_name(head[1])) {
      add("syntax-error", "invalid syntax", line);
      return cls;
    }
    bind(scope, head[1].text, order * 2 + 1);
    if (head.size() > 2) {
      if (!is_op(head[2], "(")) {
        add("syntax-error", "invalid syntax", line);
      } else {
        collect_uses(scope, head.subspan(2), order);
      }
    }
    return cls;
  }

  void simple_statements(Scope* scope, TokSpan toks, std::size_t line) {
    for (TokSpan stmt : split_top(toks, ";")) {
      if (stmt.empty()) continue;
      simple_statement(scope, stmt, line);
    }
  }

  void simple_statement(Scope* scope, TokSpan toks, std::size_t line) {
    const std::size_t order = next_order();
    const Token& t0 = toks[0];
    const Block& block = top();
    if (t0.kind == TokKind::Name) {
      const std::string& w = t0.text;
      if (w == "import") {
        for (TokSpan part : split_top(toks.subspan(1), ",")) {
          if (part.empty() || !is_name(part[0])) {
            add("syntax-error", "invalid syntax", line);
            continue;
          }
          const std::size_t as = find_top(part, [](const Token& t) { return is_kw(t, "as"); });
          const std::string& name = as != std::string::npos && as + 1 < part.size() ? part[as + 1].text : part[0].text;
          bind(scope, name, order * 2 + 1);
          scope->candidates.push_back({name, line, BindKind::Import});
        }
        return;
      }
      if (w == "from") {
        const std::size_t imp = find_top(toks, [](const Token& t) { return is_kw(t, "import"); });
        if (imp == std::string::npos || imp + 1 >= toks.size()) {
          add("syntax-error", "invalid syntax", line);
          return;
        }
        TokSpan names = toks.subspan(imp + 1);
        if (is_op(names[0], "(") && is_op(names.back(), ")")) names = names.subspan(1, names.size() - 2);
        if (names.size() == 1 && is_op(names[0], "*")) {
          if (!scope->wildcard) scope->wildcard = order * 2 + 1;
          return;
        }
        for (TokSpan part : split_top(names, ",")) {
          if (part.empty()) continue;
          const std::size_t as = find_top(part, [](const Token& t) { return is_kw(t, "as"); });
          if (as != std::string::npos && as + 1 < part.size()) {
            bind(scope, part[as + 1].text, order * 2 + 1);
            scope->candidates.push_back({part[as + 1].text, line, BindKind::Import});
          } else if (is_name(part[0])) {
            bind(scope, part[0].text, order * 2 + 1);
            scope->candidates.push_back({part[0].text, line, BindKind::Import});
          }
        }
        return;
      }
      if (w == "global" || w == "nonlocal") {
        for (const Token& t : toks.subspan(1)) {
          if (!is_name(t)) continue;
          bind(scope, t.text, 0);
          scope->declared.insert(t.text);
          if (w == "global") bind(module_, t.text, order * 2 + 1);
        }
        return;
      }
      if (w == "return") {
        if (!block.in_function) add("return-outside-function", "'return' outside function", line);
        collect_uses(scope, toks.subspan(1), order);
        check_shape(toks.subspan(1));
        return;
      }
      if (w == "yield") {
        if (!block.in_function) add("yield-outside-function", "'yield' outside function", line);
        collect_uses(scope, toks.subspan(1), order);
        return;
      }
      if (w == "break" || w == "continue") {
        if (!block.in_loop) {
          add(w == "break" ? "break-outside-loop" : "continue-outside-loop",
              w == "break" ? "'break' outside loop" : "'continue' not properly in loop", line);
        }
        if (toks.size() > 1) add("syntax-error", "invalid syntax", line);
        return;
      }
      if (w == "pass") {
        if (toks.size() > 1) add("syntax-error", "invalid syntax", line);
        return;
      }
      if (w == "raise" || w == "assert" || w == "del") {
        collect_uses(scope, toks.subspan(1), order);
        check_shape(toks.subspan(1));
        return;
      }
      if (is_compound_keyword(w) || w == "async") {
        add("syntax-error", "invalid syntax", line);
        return;
      }
    }

    // Expression, assignment, augmented or annotated assignment. A lambda's
    // defaults and colon belong to the value, so only the part before the
    // first top-level lambda can hold targets.
    const std::size_t lam = find_top(toks, [](const Token& t) { return is_kw(t, "lambda"); });
    const TokSpan head = lam == std::string::npos ? toks : toks.subspan(0, lam);
    const std::size_t aug = find_top(head, [](const Token& t) {
      return t.kind == TokKind::Op && t.text.size() >= 2 && t.text.back() == '=' && t.text != "==" &&
             t.text != "<=" && t.text != ">=" && t.text != "!=" && t.text != ":=";
    });
    if (aug != std::string::npos) {
      TokSpan target = toks.subspan(0, aug);
      collect_uses(scope, toks.subspan(aug + 1), order);
      collect_uses(scope, target, order);
      check_shape(toks.subspan(aug + 1));
      if (target.empty() || toks.size() == aug + 1) add("syntax-error", "invalid syntax", line);
      return;
    }
    const std::size_t ann = find_top(head, [](const Token& t) { return is_op(t, ":"); });
    if (ann != std::string::npos) {
      TokSpan target = toks.subspan(0, ann);
      TokSpan rest = toks.subspan(ann + 1);
      const std::size_t eq = find_top(rest, [](const Token& t) { return is_op(t, "="); });
      TokSpan annotation = eq == std::string::npos ? rest : rest.subspan(0, eq);
      collect_uses(scope, annotation, order);
      if (eq != std::string::npos) {
        collect_uses(scope, rest.subspan(eq + 1), order);
        check_shape(rest.subspan(eq + 1));
      }
      if (target.empty() || annotation.empty()) add("syntax-error", "invalid syntax", line);
      bind_targets(scope, target, order);
      return;
    }
    auto parts = split_top(head, "=");
    const TokSpan value = toks.subspan(static_cast<std::size_t>(parts.back().data() - toks.data()));
    collect_uses(scope, value, order);
    check_shape(value);
    if (value.empty()) add("syntax-error", "invalid syntax", line);
    for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
      if (parts[p].empty()) {
        add("syntax-error", "invalid syntax", line);
        continue;
      }
      bind_targets(scope, parts[p], order, line);
    }
  }

  // Rejects two adjacent operands and dangling binary operators.
  void check_shape(TokSpan toks) {
    if (toks.empty()) return;
    auto operand_end = [](const Token& t) {
      return is_name(t) || t.kind == TokKind::Number || t.kind == TokKind::String || is_close(t);
    };
    auto operand_start = [](const Token& t) {
      return is_name(t) || t.kind == TokKind::Number || t.kind == TokKind::String;
    };
    for (std::size_t i = 1; i < toks.size(); ++i) {
      const Token& a = toks[i - 1];
      const Token& b = toks[i];
      if (a.kind == TokKind::String && b.kind == TokKind::String) continue;
      if (operand_end(a) && operand_start(b)) {
        add("syntax-error", "invalid syntax", b.line);
        return;
      }
    }
    const Token& last = toks.back();
    static const std::unordered_set<std::string_view> binary = {
        "+", "-", "*", "/", "//", "%", "**", "<<", ">>", "&", "|", "^", "@", "<", ">",
        "<=", ">=", "==", "!=", ".", "=", ":=", "->", "~"};
    if ((last.kind == TokKind::Op && binary.contains(last.text)) ||
        (last.kind == TokKind::Name && (last.text == "and" || last.text == "or" || last.text == "not" ||
                                        last.text == "in" || last.text == "is" || last.text == "lambda"))) {
      add("syntax-error", "invalid syntax", last.line);
    }
  }

  std::size_t next_order() { return ++order_; }

  void bind(Scope* scope, const std::string& name, std::size_t order) {
    auto [it, inserted] = scope->bindings.try_emplace(name, order);
    if (!inserted) it->second = std::min(it->second, order);
  }

  void use(Scope* scope, const Token& t, std::size_t order) {
    scope->uses.push_back(Use{t.text, t.line, order * 2});
  }

  // Names bound only inside the expression: comprehension targets and lambda
  // parameters.
  static void local_names(TokSpan toks, std::unordered_set<std::string>& locals) {
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (is_open(t)) ++depth;
      if (is_close(t)) --depth;
      if (is_kw(t, "for") && depth > 0) {
        int d = 0;
        for (std::size_t j = i + 1; j < toks.size(); ++j) {
          if (is_open(toks[j])) ++d;
          if (is_close(toks[j])) {
            if (--d < 0) break;
          }
          if (d == 0 && is_kw(toks[j], "in")) break;
          if (is_name(toks[j]) && !(j > 0 && is_op(toks[j - 1], "."))) locals.insert(toks[j].text);
        }
      }
      if (is_kw(t, "lambda")) {
        int d = 0;
        bool in_default = false;
        for (std::size_t j = i + 1; j < toks.size(); ++j) {
          if (is_open(toks[j])) ++d;
          if (is_close(toks[j])) --d;
          if (d < 0) break;
          if (d == 0 && is_op(toks[j], ":")) break;
          if (d == 0 && is_op(toks[j], ",")) in_default = false;
          if (d == 0 && is_op(toks[j], "=")) in_default = true;
          if (!in_default && d == 0 && is_name(toks[j])) locals.insert(toks[j].text);
        }
      }
    }
  }

  void collect_uses(Scope* scope, TokSpan toks, std::size_t order) {
    std::unordered_set<std::string> locals;
    local_names(toks, locals);
    collect_uses(scope, toks, order, locals);
  }

  void collect_uses(Scope* scope, TokSpan toks, std::size_t order, const std::unordered_set<std::string>& locals) {
    std::vector<char> brackets;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (is_open(t)) brackets.push_back(t.text[0]);
      if (is_close(t) && !brackets.empty()) brackets.pop_back();
      if (t.kind == TokKind::String && t.fstring) {
        for (const auto& field : fstring_fields(t.body)) {
          const auto inner = tokenize_fragment(field, t.line);
          std::unordered_set<std::string> inner_locals = locals;
          local_names(inner, inner_locals);
          collect_uses(scope, inner, order, inner_locals);
        }
        continue;
      }
      if (!is_name(t)) continue;
      if (i > 0 && is_op(toks[i - 1], ".")) continue;
      const bool next_eq = i + 1 < toks.size() && is_op(toks[i + 1], "=");
      if (next_eq && !brackets.empty() && brackets.back() == '(') continue;  // keyword argument
      if (i + 1 < toks.size() && is_op(toks[i + 1], ":=")) {
        bind(scope, t.text, order * 2);
        continue;
      }
      if (locals.contains(t.text)) continue;
      use(scope, t, order);
    }
  }

  // Assignment targets: bare names (also inside tuple/list patterns) bind;
  // names under attribute, subscript or call access are uses.
  // `line` > 0 marks plain assignment targets as unused-variable candidates
  // inside functions.
  void bind_targets(Scope* scope, TokSpan toks, std::size_t order, std::size_t line = 0) {
    std::vector<bool> access;  // per open bracket: true when it is a subscript/call
    auto in_access = [&] { return std::any_of(access.begin(), access.end(), [](bool b) { return b; }); };
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (is_open(t)) {
        const bool acc = i > 0 && (is_name(toks[i - 1]) || is_close(toks[i - 1]) ||
                                   toks[i - 1].kind == TokKind::String);
        access.push_back(acc);
        continue;
      }
      if (is_close(t)) {
        if (!access.empty()) access.pop_back();
        continue;
      }
      if (t.kind == TokKind::String && t.fstring) {
        collect_uses(scope, toks.subspan(i, 1), order);
        continue;
      }
      if (!is_name(t)) continue;
      if (i > 0 && is_op(toks[i - 1], ".")) continue;
      const bool followed_by_access =
          i + 1 < toks.size() && (is_op(toks[i + 1], ".") || is_op(toks[i + 1], "(") || is_op(toks[i + 1], "["));
      if (in_access() || followed_by_access) {
        use(scope, t, order);
      } else {
        bind(scope, t.text, order * 2 + 1);
        if (line > 0 && scope->kind == ScopeKind::Function && t.text[0] != '_') {
          scope->candidates.push_back({t.text, line, BindKind::Variable});
        }
      }
    }
  }

  void bind_pattern(Scope* scope, TokSpan toks, std::size_t order) {
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (!is_name(t)) continue;
      if (i > 0 && is_op(toks[i - 1], ".")) continue;
      if (i + 1 < toks.size() && (is_op(toks[i + 1], ".") || is_op(toks[i + 1], "("))) {
        use(scope, t, order);
        continue;
      }
      if (i + 1 < toks.size() && is_op(toks[i + 1], "=")) continue;
      if (t.text == "_") continue;
      bind(scope, t.text, order * 2 + 1);
    }
  }

  bool resolves(const Scope* scope, const Use& u) const {
    // Scopes that execute at definition time see only earlier bindings;
    // function bodies run later and see every binding of enclosing scopes.
    bool deferred = scope->kind == ScopeKind::Function;
    bool first = true;
    for (const Scope* s = scope; s != nullptr; s = s->parent) {
      if (!first && s->kind == ScopeKind::Class && deferred) continue;
      first = false;
      if (auto it = s->bindings.find(u.name); it != s->bindings.end()) {
        if (deferred || s->kind == ScopeKind::Function || it->second <= u.order) return true;
      }
      if (s->wildcard && (deferred || *s->wildcard <= u.order)) return true;
      if (s->kind == ScopeKind::Function) deferred = true;
    }
    return builtins().contains(u.name);
  }

  void resolve() {
    // Names read in a scope or any scope nested in it.
    std::unordered_map<const Scope*, std::unordered_set<std::string>> read;
    for (const auto& scope : scopes_) {
      for (const auto& u : scope->uses) {
        if (!resolves(scope.get(), u)) add("undefined-name", "undefined name '" + u.name + "'", u.line);
        for (const Scope* s = scope.get(); s != nullptr; s = s->parent) read[s].insert(u.name);
      }
    }
    for (const auto& scope : scopes_) {
      std::unordered_set<std::string> reported;
      for (const auto& c : scope->candidates) {
        if (read[scope.get()].contains(c.name) || scope->declared.contains(c.name)) continue;
        if (!reported.insert(c.name).second) continue;
        if (c.kind == BindKind::Import) {
          if (scope->kind == ScopeKind::Module && c.name == "__future__") continue;
          findings_.push_back({"unused-import", "unused import '" + c.name + "'", c.line, Severity::Warning});
        } else {
          findings_.push_back({"unused-variable", "unused variable '" + c.name + "'", c.line, Severity::Warning});
        }
      }
    }
  }

  std::vector<LintFinding>& findings_;
  std::vector<std::unique_ptr<Scope>> scopes_;
  Scope* module_ = nullptr;
  std::vector<Block> blocks_;
  std::optional<Header> pending_header_;
  std::optional<std::size_t> pending_decorator_;
  std::size_t order_ = 0;
};

}  // namespace

std::vector<LintFinding> check_source(std::string_view source) {
  std::vector<LintFinding> findings;
  const auto lines = split_lines(source);
  if (lines.empty()) return findings;
  Tokenizer tokenizer(lines, findings);
  const auto logical = tokenizer.run();
  Analyzer analyzer(findings);
  analyzer.run(logical);
  const std::size_t last = lines.size();
  for (auto& f : findings) f.line = std::clamp<std::size_t>(f.line, 1, last);
  return findings;
}

}  // namespace lintseq::python
