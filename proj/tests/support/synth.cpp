#include "synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "lintseq/sampler.hpp"

namespace lintseq::testing {
namespace {

struct Module {
  const char* import_line;
  const char* name;
  const char* call;  // "%s" is an argument expression
};

constexpr std::array<Module, 8> kModules = {{
    {"import math", "math", "math.sqrt(%s)"},
    {"import os", "os", "os.path.join(\"data\", str(%s))"},
    {"import sys", "sys", "len(sys.argv) + %s"},
    {"import re", "re", "re.escape(str(%s))"},
    {"import json", "json", "json.dumps(%s)"},
    {"from collections import Counter", "Counter", "Counter(str(%s))"},
    {"from functools import reduce", "reduce", "reduce(lambda p, q: p + q, [%s, 1])"},
    {"import itertools", "itertools", "list(itertools.repeat(%s, 2))"},
}};

constexpr std::array<const char*, 10> kWords = {"total", "count", "value", "limit", "scale",
                                                "offset", "size", "width", "depth", "rate"};

struct Func {
  std::string name;
  std::size_t arity;
};

class Builder {
 public:
  Builder(std::uint64_t seed, std::size_t lines) : rng_(splitmix64(seed)), budget_(lines) {}

  std::string build() {
    bool previous_blank = true;
    while (out_.size() < budget_) {
      const std::size_t left = budget_ - out_.size();
      // A blank separator between units, never first or last.
      if (!previous_blank && left >= 2 && rng_.below(3) == 0) {
        out_.emplace_back();
        previous_blank = true;
        continue;
      }
      unit(budget_ - out_.size());
      previous_blank = false;
    }
    std::string text;
    for (const auto& l : out_) text += l + "\n";
    return text;
  }

 private:
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_.below(n)); }

  std::string fresh(const char* prefix) { return std::string(prefix) + "_" + std::to_string(++counter_); }

  std::string literal() {
    switch (pick(4)) {
      case 0:
        return std::to_string(pick(100));
      case 1:
        return std::to_string(pick(10)) + "." + std::to_string(pick(10));
      case 2:
        return "\"" + std::string(kWords[pick(kWords.size())]) + "\"";
      default:
        return "[" + std::to_string(pick(9)) + ", " + std::to_string(pick(9)) + "]";
    }
  }

  // An expression over module-level names.
  std::string global_expr() {
    const std::size_t choice = pick(5);
    if (choice == 0 && !modules_.empty()) {
      char buf[160];
      std::snprintf(buf, sizeof buf, kModules[modules_[pick(modules_.size())]].call, operand().c_str());
      return buf;
    }
    if (choice == 1 && !funcs_.empty()) {
      const Func& f = funcs_[pick(funcs_.size())];
      std::string call = f.name + "(";
      for (std::size_t i = 0; i < f.arity; ++i) call += (i ? ", " : "") + operand();
      return call + ")";
    }
    if (choice == 2 && !globals_.empty()) {
      return globals_[pick(globals_.size())] + " * " + std::to_string(1 + pick(9));
    }
    return operand();
  }

  std::string operand() {
    if (!globals_.empty() && pick(2) == 0) return globals_[pick(globals_.size())];
    return std::to_string(pick(50));
  }

  void unit(std::size_t left) {
    const std::size_t kind = pick(9);
    if (kind <= 1 && left >= 2) return function(left);
    if (kind == 2 && left >= 3) return klass(left);
    if (kind == 3 && left >= 2 && out_.size() + left == budget_ && left <= 4 && !funcs_.empty()) {
      return main_guard(left);
    }
    if (kind == 4 && left >= 2) return loop();
    if (kind == 5 && modules_.size() < kModules.size()) return import();
    if (kind == 6 && pick(2) == 0) {
      out_.push_back("# " + std::string(kWords[pick(kWords.size())]) + " " + kWords[pick(kWords.size())]);
      return;
    }
    if (kind == 7) {
      out_.push_back("print(" + global_expr() + ")");
      return;
    }
    const std::string name = pick(3) == 0 ? fresh("LIMIT") : fresh(kWords[pick(kWords.size())]);
    out_.push_back(name + " = " + (globals_.empty() && funcs_.empty() ? literal() : global_expr()));
    globals_.push_back(name);
  }

  void import() {
    std::vector<std::size_t> unused;
    for (std::size_t i = 0; i < kModules.size(); ++i) {
      if (std::find(modules_.begin(), modules_.end(), i) == modules_.end()) unused.push_back(i);
    }
    const std::size_t m = unused[pick(unused.size())];
    out_.emplace_back(kModules[m].import_line);
    modules_.push_back(m);
  }

  // `def` header, body statements, `return`: exactly min(left, ~8) lines.
  void function(std::size_t left) {
    const std::size_t size = 2 + pick(std::min<std::size_t>(left - 1, 7));
    const std::string name = fresh("compute");
    const std::size_t arity = 1 + pick(3);
    std::vector<std::string> locals;
    std::string header = "def " + name + "(";
    for (std::size_t i = 0; i < arity; ++i) {
      locals.push_back(std::string(1, static_cast<char>('a' + i)));
      header += (i ? ", " : "") + locals.back();
    }
    out_.push_back(header + "):");
    std::size_t body = size - 2;
    if (body > 0 && pick(3) == 0) {
      out_.push_back("    \"\"\"" + std::string(kWords[pick(kWords.size())]) + " helper.\"\"\"");
      --body;
    }
    while (body > 0) {
      const std::string& x = locals[pick(locals.size())];
      const std::string& y = locals[pick(locals.size())];
      if (body >= 2 && pick(3) == 0) {
        if (pick(2) == 0) {
          out_.push_back("    if " + x + " > " + std::to_string(pick(10)) + ":");
          out_.push_back("        " + x + " = " + x + " - " + y);
        } else {
          out_.push_back("    for i in range(" + std::to_string(1 + pick(5)) + "):");
          out_.push_back("        " + x + " += i");
        }
        body -= 2;
        continue;
      }
      const std::string v = fresh(kWords[pick(kWords.size())]);
      std::string rhs = x + " + " + y;
      if (!modules_.empty() && pick(3) == 0) {
        char buf[160];
        std::snprintf(buf, sizeof buf, kModules[modules_[pick(modules_.size())]].call, x.c_str());
        rhs = buf;
      } else if (!globals_.empty() && pick(3) == 0) {
        rhs = x + " * " + globals_[pick(globals_.size())];
      }
      out_.push_back("    " + v + " = " + rhs);
      locals.push_back(v);
      --body;
    }
    out_.push_back("    return " + locals.back());
    funcs_.push_back({name, arity});
  }

  void klass(std::size_t left) {
    const std::string name = fresh("Item");
    out_.push_back("class " + name + ":");
    out_.push_back("    def __init__(self, v):");
    out_.push_back("        self.v = v");
    if (left >= 5 && pick(2) == 0) {
      out_.push_back("    def get(self):");
      out_.push_back("        return self.v");
    }
    funcs_.push_back({name, 1});
  }

  void loop() {
    if (globals_.empty()) {
      const std::string v = fresh("acc");
      out_.push_back(v + " = 0");
      globals_.push_back(v);
      return;
    }
    const std::string& target = globals_[pick(globals_.size())];
    out_.push_back("for k in range(" + std::to_string(2 + pick(8)) + "):");
    out_.push_back("    " + target + " = " + target + " + k");
  }

  void main_guard(std::size_t left) {
    out_.emplace_back("if __name__ == \"__main__\":");
    for (std::size_t i = 1; i < left; ++i) {
      const Func& f = funcs_[pick(funcs_.size())];
      std::string call = "    print(" + f.name + "(";
      for (std::size_t j = 0; j < f.arity; ++j) call += (j ? ", " : "") + std::to_string(pick(20));
      out_.push_back(call + "))");
    }
  }

  SampleRng rng_;
  std::size_t budget_;
  std::vector<std::string> out_;
  std::vector<std::string> globals_;
  std::vector<Func> funcs_;
  std::vector<std::size_t> modules_;
  std::size_t counter_ = 0;
};

SourceExample example(std::size_t index, std::uint64_t seed, std::size_t lines) {
  char id[32];
  std::snprintf(id, sizeof id, "synth-%05zu", index);
  return make_example(id, std::nullopt, synth_program(seed, lines));
}

}  // namespace

std::string synth_program(std::uint64_t seed, std::size_t lines) { return Builder(seed, lines).build(); }

std::vector<SourceExample> synth_corpus_uniform(std::size_t count, std::uint64_t seed, std::size_t min_lines,
                                                std::size_t max_lines) {
  SampleRng rng(seed);
  std::vector<SourceExample> corpus;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t lines = min_lines + rng.below(max_lines - min_lines + 1);
    std::string text = synth_program(mix_seed({seed, i, 0}), lines);
    if (i % 7 == 3) text.pop_back();  // some sources lack a final newline
    char id[32];
    std::snprintf(id, sizeof id, "synth-%05zu", i);
    corpus.push_back(make_example(id, "Write program " + std::to_string(i) + ".", text));
  }
  return corpus;
}

std::vector<SourceExample> synth_corpus_skewed(std::size_t count, std::uint64_t seed, double mean_lines) {
  // 5 + geometric excess, clipped at 60.
  SampleRng rng(seed);
  const double excess = std::max(1.0, mean_lines - 5.0);
  std::vector<SourceExample> corpus;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (static_cast<double>(rng.below(1ull << 53)) + 0.5) / 9007199254740992.0;
    const auto extra = static_cast<std::size_t>(std::floor(-std::log(u) * excess));
    corpus.push_back(example(i, mix_seed({seed, i, 0}), std::min<std::size_t>(60, 5 + extra)));
  }
  return corpus;
}

std::string to_corpus_jsonl(const std::vector<SourceExample>& corpus) {
  std::string out;
  for (const auto& ex : corpus) {
    nlohmann::ordered_json j;
    j["id"] = ex.id;
    if (ex.instruction) j["instruction"] = *ex.instruction;
    j["program"] = ex.program;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace lintseq::testing
