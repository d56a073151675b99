// Copyright 2026 The exectrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "exectrace/progfuzz.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "exectrace/random.hpp"

namespace exectrace {

namespace {

enum Type { kInt, kList, kStr, kBool, kDict, kTypes };

struct Env {
  std::array<std::vector<std::string>, kTypes> vars;

  void Add(Type t, const std::string& name) {
    for (auto& v : vars) v.erase(std::remove(v.begin(), v.end(), name), v.end());
    vars[t].push_back(name);
  }
};

class Generator {
 public:
  Generator(std::uint64_t seed, const ProgramFuzzOptions& options)
      : rng_(seed), options_(options) {}

  FuzzedProgram Run(std::uint64_t seed) {
    std::string text;
    helper_ = options_.allow_helper && rng_.Bernoulli(0.3);
    if (helper_) text += Helper();

    Env env;
    FuzzedProgram out;
    std::vector<std::string> params = {"n"};
    env.Add(kInt, "n");
    out.grammar.emplace_back("n", IntSpec(-3, 12));
    if (rng_.Bernoulli(0.7)) {
      params.push_back("xs");
      env.Add(kList, "xs");
      ValueGrammar g;
      g.type = ValueGrammar::Type::kList;
      g.max_len = 5;
      g.children.push_back(IntSpec(-4, 9));
      out.grammar.emplace_back("xs", g);
    }
    if (rng_.Bernoulli(0.4)) {
      params.push_back("s");
      env.Add(kStr, "s");
      ValueGrammar g;
      g.type = ValueGrammar::Type::kStr;
      g.alphabet = U"abc";
      g.max_len = 4;
      out.grammar.emplace_back("s", g);
    }
    const std::string name = "prog" + std::to_string(seed % 100000);
    text += "def " + name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) text += (i ? ", " : "") + params[i];
    text += "):\n";

    std::string body;
    int count = static_cast<int>(rng_.Uniform(1, options_.max_statements));
    int nest_at = options_.force_nested_for ? static_cast<int>(rng_.Uniform(0, count)) : -1;
    for (int i = 0; i <= count; ++i) {
      if (i == nest_at) body += NestedFor(env, 1);
      if (i < count) body += Statement(env, 1);
    }
    body += Indent(1) + "return " + ReturnExpr(env) + "\n";
    text += body;
    out.unit = MakeUnit(name, text);
    return out;
  }

 private:
  static ValueGrammar IntSpec(std::int64_t lo, std::int64_t hi) {
    ValueGrammar g;
    g.type = ValueGrammar::Type::kInt;
    g.int_min = lo;
    g.int_max = hi;
    return g;
  }

  static std::string Indent(int depth) { return std::string(static_cast<std::size_t>(4 * depth), ' '); }

  std::string Fresh(const char* prefix) { return prefix + std::to_string(counter_++); }

  template <typename T>
  const T& Pick(const std::vector<T>& v) {
    return v[rng_.Index(v.size())];
  }

  // Variables of type `t` that may be written.
  std::vector<std::string> Writable(const Env& env, Type t) const {
    std::vector<std::string> out;
    for (const auto& v : env.vars[t]) {
      if (!readonly_.count(v) && !frozen_.count(v)) out.push_back(v);
    }
    return out;
  }

  std::string Helper() {
    // Small pure helper over two ints.
    std::string a = std::to_string(rng_.Uniform(1, 3));
    switch (rng_.Uniform(0, 2)) {
      case 0:
        return "def helper(a, b):\n    if a > b:\n        return a - b\n    return a + b * " + a +
               "\n\n";
      case 1:
        return "def helper(a, b):\n    c = a % 7\n    c += b\n    return c\n\n";
      default:
        return "def helper(a, b):\n    t = 0\n    for i in range(" + a +
               "):\n        t += a + i\n    return t - b\n\n";
    }
  }

  std::string Literal() { return std::to_string(rng_.Uniform(-2, 9)); }

  std::string IntExpr(const Env& env, int depth) {
    const auto& ints = env.vars[kInt];
    const auto& lists = env.vars[kList];
    const auto& strs = env.vars[kStr];
    const auto& dicts = env.vars[kDict];
    if (depth <= 0 || rng_.Bernoulli(0.35)) {
      int r = static_cast<int>(rng_.Uniform(0, 9));
      if (r < 4 && !ints.empty()) return Pick(ints);
      if (r == 4 && !lists.empty()) return "len(" + Pick(lists) + ")";
      if (r == 5 && !strs.empty()) return "len(" + Pick(strs) + ")";
      if (r == 6 && !dicts.empty()) return "len(" + Pick(dicts) + ")";
      return Literal();
    }
    auto sub = [&] { return IntExpr(env, depth - 1); };
    switch (rng_.Uniform(0, 13)) {
      case 0:
        return "(" + sub() + " + " + sub() + ")";
      case 1:
        return "(" + sub() + " - " + sub() + ")";
      case 2:
        return "(" + sub() + " * " + std::to_string(rng_.Uniform(2, 3)) + ")";
      case 3:
        return "(" + sub() + " // " + std::to_string(rng_.Uniform(2, 4)) + ")";
      case 4:
        return "(" + sub() + " % " + std::to_string(rng_.Uniform(2, 5)) + ")";
      case 5:
        return "abs(" + sub() + ")";
      case 6:
        return (rng_.Bernoulli(0.5) ? "min(" : "max(") + sub() + ", " + sub() + ")";
      case 7:
        if (!lists.empty()) return "sum(" + Pick(lists) + ")";
        return sub();
      case 8:
        if (!lists.empty()) {
          const std::string& l = Pick(lists);
          return "(" + l + "[" + sub() + " % len(" + l + ")] if " + l + " else 0)";
        }
        return sub();
      case 9:
        if (!dicts.empty()) return Pick(dicts) + ".get(" + sub() + ", 0)";
        return sub();
      case 10:
        if (!strs.empty()) {
          return Pick(strs) + (rng_.Bernoulli(0.5) ? ".count('a')" : ".find('b')");
        }
        return sub();
      case 11:
        if (helper_) return "helper(" + sub() + ", " + sub() + ")";
        return sub();
      case 12:
        return "(" + sub() + " if " + BoolExpr(env, depth - 1) + " else " + sub() + ")";
      default:
        return "-" + sub();
    }
  }

  std::string BoolExpr(const Env& env, int depth) {
    const auto& bools = env.vars[kBool];
    const auto& lists = env.vars[kList];
    const auto& strs = env.vars[kStr];
    const auto& dicts = env.vars[kDict];
    auto i = [&] { return IntExpr(env, std::min(depth, 1)); };
    static const char* kCmp[] = {"<", "<=", ">", ">=", "==", "!="};
    switch (rng_.Uniform(0, 9)) {
      case 0:
        if (!bools.empty()) return Pick(bools);
        break;
      case 1:
        if (!bools.empty()) return "not " + Pick(bools);
        break;
      case 2:
        return i() + " % 2 == 0";
      case 3:
        if (!lists.empty()) return i() + (rng_.Bernoulli(0.5) ? " in " : " not in ") + Pick(lists);
        break;
      case 4:
        if (!dicts.empty()) return i() + " in " + Pick(dicts);
        break;
      case 5:
        if (!strs.empty()) return Pick(strs) + ".startswith('a')";
        break;
      case 6:
        if (depth > 0) {
          return "(" + BoolExpr(env, depth - 1) + (rng_.Bernoulli(0.5) ? " and " : " or ") +
                 BoolExpr(env, depth - 1) + ")";
        }
        break;
      case 7:
        return i() + " < " + i() + " <= " + i();
      default:
        break;
    }
    return i() + " " + kCmp[rng_.Index(6)] + " " + i();
  }

  // Assigns to an existing writable variable of type `t` or a fresh one.
  std::string Target(Env& env, Type t, const char* prefix, bool* fresh) {
    std::vector<std::string> w = Writable(env, t);
    *fresh = w.empty() || rng_.Bernoulli(0.35);
    return *fresh ? Fresh(prefix) : Pick(w);
  }

  std::string Statement(Env& env, int depth) {
    const std::string ind = Indent(depth);
    const bool can_nest = depth <= options_.max_nesting;
    int r = static_cast<int>(rng_.Uniform(0, 21));
    if (!can_nest && r >= 14) r = static_cast<int>(rng_.Uniform(0, 13));
    switch (r) {
      case 0:
      case 1:
      case 2: {
        bool fresh = false;
        std::string v = Target(env, kInt, "v", &fresh);
        std::string e = IntExpr(env, 2);
        if (e == v) e = "(" + v + " + " + std::to_string(rng_.Uniform(1, 3)) + ")";
        // Keep values small when a loop can feed a variable back into itself.
        if (!fresh && loop_depth_ > 0) e = "(" + e + ") % 1009";
        env.Add(kInt, v);
        return ind + v + " = " + e + "\n";
      }
      case 3: {
        std::vector<std::string> w = Writable(env, kInt);
        if (w.empty()) break;
        static const char* kOps[] = {"+=", "-=", "//=", "%="};
        std::size_t op = rng_.Index(4);
        std::string rhs = op < 2 ? IntExpr(env, 1) : std::to_string(rng_.Uniform(2, 5));
        return ind + Pick(w) + " " + kOps[op] + " " + rhs + "\n";
      }
      case 4: {
        bool fresh = false;
        std::string v = Target(env, kList, "lst", &fresh);
        std::string e;
        const auto& lists = env.vars[kList];
        switch (lists.empty() ? 0 : rng_.Uniform(0, 3)) {
          case 0:
            e = rng_.Bernoulli(0.3) ? "[]" : "[" + IntExpr(env, 1) + ", " + IntExpr(env, 1) + "]";
            break;
          case 1:
            e = Pick(lists) + " + [" + IntExpr(env, 1) + "]";
            break;
          case 2:
            e = "sorted(" + Pick(lists) + ")";
            break;
          default:
            e = Pick(lists) + "[1:]";
            break;
        }
        env.Add(kList, v);
        return ind + v + " = " + e + "\n";
      }
      case 5: {
        std::vector<std::string> w = Mutable(env, kList);
        if (w.empty()) break;
        const std::string& l = Pick(w);
        if (rng_.Bernoulli(0.6)) return ind + l + ".append(" + IntExpr(env, 1) + ")\n";
        return ind + "if " + l + ":\n" + Indent(depth + 1) + l + "[" + IntExpr(env, 1) +
               " % len(" + l + ")] = " + IntExpr(env, 1) + "\n";
      }
      case 6: {
        std::vector<std::string> w = Mutable(env, kList);
        if (w.empty()) break;
        bool fresh = false;
        std::string v = Target(env, kInt, "v", &fresh);
        const std::string& l = Pick(w);
        env.Add(kInt, v);
        return ind + v + " = " + l + ".pop() if " + l + " else 0\n";
      }
      case 7: {
        bool fresh = false;
        std::string v = Target(env, kStr, "txt", &fresh);
        const auto& strs = env.vars[kStr];
        std::string e;
        switch (strs.empty() ? 0 : rng_.Uniform(0, 3)) {
          case 0:
            e = "str(" + IntExpr(env, 1) + ")";
            break;
          case 1:
            e = Pick(strs) + " + 'ab'[" + IntExpr(env, 1) + " % 2]";
            break;
          case 2:
            e = Pick(strs) + ".upper()";
            break;
          default:
            e = Pick(strs) + ".replace('a', 'c')";
            break;
        }
        env.Add(kStr, v);
        return ind + v + " = " + e + "\n";
      }
      case 8: {
        bool fresh = false;
        std::string v = Target(env, kBool, "flag", &fresh);
        std::string e = BoolExpr(env, 1);
        env.Add(kBool, v);
        return ind + v + " = " + e + "\n";
      }
      case 9: {
        bool fresh = false;
        std::string v = Target(env, kDict, "d", &fresh);
        std::string e = rng_.Bernoulli(0.5) ? "{}" : "{" + Literal() + ": " + IntExpr(env, 1) + "}";
        env.Add(kDict, v);
        return ind + v + " = " + e + "\n";
      }
      case 10: {
        std::vector<std::string> w = Mutable(env, kDict);
        if (w.empty()) break;
        return ind + Pick(w) + "[" + IntExpr(env, 1) + " % 4] = " + IntExpr(env, 1) + "\n";
      }
      case 11: {
        std::vector<std::string> w = Writable(env, kInt);
        if (w.size() < 2) break;
        std::string a = Pick(w), b = Pick(w);
        if (a == b) break;
        return ind + a + ", " + b + " = " + b + ", " + a + "\n";
      }
      case 12:
        if (loop_depth_ > 0) {
          return ind + "if " + BoolExpr(env, 1) + ":\n" + Indent(depth + 1) +
                 (rng_.Bernoulli(0.5) ? "break" : "continue") + "\n";
        }
        if (rng_.Bernoulli(0.4)) {
          return ind + "if " + BoolExpr(env, 1) + ":\n" + Indent(depth + 1) + "return " +
                 IntExpr(env, 1) + "\n";
        }
        break;
      case 13:
        if (rng_.Bernoulli(0.2)) return ind + "pass\n";
        break;
      case 14:
      case 15:
        return If(env, depth);
      case 16:
      case 17:
      case 18:
        return For(env, depth, nullptr);
      case 19:
      case 20:
        return While(env, depth);
      default:
        break;
    }
    bool fresh = false;
    std::string v = Target(env, kInt, "v", &fresh);
    std::string e = IntExpr(env, 1);
    if (!fresh && loop_depth_ > 0) e = "(" + e + ") % 1009";
    env.Add(kInt, v);
    return ind + v + " = " + e + "\n";
  }

  std::vector<std::string> Mutable(const Env& env, Type t) const {
    std::vector<std::string> out;
    for (const auto& v : env.vars[t]) {
      if (!frozen_.count(v)) out.push_back(v);
    }
    return out;
  }

  std::string Block(Env env, int depth, int min_count = 1) {
    int hi = std::max(min_count, options_.max_statements - 2 * depth);
    int count = static_cast<int>(rng_.Uniform(min_count, hi));
    std::string out;
    for (int i = 0; i < count; ++i) out += Statement(env, depth);
    return out;
  }

  std::string If(const Env& env, int depth) {
    std::string out = Indent(depth) + "if " + BoolExpr(env, 2) + ":\n" + Block(env, depth + 1);
    int extra = static_cast<int>(rng_.Uniform(0, 2));
    for (int i = 0; i < extra; ++i) {
      if (i + 1 < extra || rng_.Bernoulli(0.5)) {
        out += Indent(depth) + "elif " + BoolExpr(env, 2) + ":\n" + Block(env, depth + 1);
      } else {
        out += Indent(depth) + "else:\n" + Block(env, depth + 1);
      }
    }
    return out;
  }

  // Loop header over a bounded iterable; the body runs in a copy of `env`.
  // `inner` replaces the random body when set.
  std::string For(const Env& env, int depth, const std::string* inner) {
    Env body = env;
    std::string target = Fresh("i");
    std::string header;
    std::string frozen;
    const auto& lists = env.vars[kList];
    const auto& strs = env.vars[kStr];
    const auto& dicts = env.vars[kDict];
    switch (rng_.Uniform(0, 6)) {
      case 0:
        if (!lists.empty()) {
          frozen = Pick(lists);
          header = target + " in " + frozen;
          body.Add(kInt, target);
          break;
        }
        [[fallthrough]];
      case 1:
        if (!lists.empty()) {
          frozen = Pick(lists);
          std::string value = Fresh("y");
          header = target + ", " + value + " in enumerate(" + frozen + ")";
          body.Add(kInt, target);
          body.Add(kInt, value);
          break;
        }
        [[fallthrough]];
      case 2:
        if (!strs.empty()) {
          frozen = Pick(strs);
          header = target + " in " + frozen;
          body.Add(kStr, target);
          break;
        }
        [[fallthrough]];
      case 3:
        if (!dicts.empty()) {
          frozen = Pick(dicts);
          header = target + " in " + frozen;
          body.Add(kInt, target);
          break;
        }
        [[fallthrough]];
      case 4:
        if (!env.vars[kInt].empty() && rng_.Bernoulli(0.5)) {
          frozen = Pick(env.vars[kInt]);
          header = target + " in range(min(" + frozen + ", " + std::to_string(rng_.Uniform(2, 5)) +
                   "))";
          body.Add(kInt, target);
          break;
        }
        [[fallthrough]];
      default:
        header = target + " in range(" + std::to_string(rng_.Uniform(0, 2)) + ", " +
                 std::to_string(rng_.Uniform(2, 5)) + ")";
        body.Add(kInt, target);
        break;
    }
    bool newly_frozen = !frozen.empty() && frozen_.insert(frozen).second;
    ++loop_depth_;
    std::string out = Indent(depth) + "for " + header + ":\n";
    out += inner ? *inner : Block(body, depth + 1);
    --loop_depth_;
    if (newly_frozen) frozen_.erase(frozen);
    return out;
  }

  std::string While(const Env& env, int depth) {
    std::string w = Fresh("w");
    std::string out = Indent(depth) + w + " = 0\n";
    out += Indent(depth) + "while " + w + " < " + std::to_string(rng_.Uniform(1, 4)) + ":\n";
    out += Indent(depth + 1) + w + " += 1\n";
    Env body = env;
    body.Add(kInt, w);
    readonly_.insert(w);
    ++loop_depth_;
    out += Block(body, depth + 1);
    --loop_depth_;
    return out;
  }

  // A for-loop whose body holds another for-loop, sometimes three deep.
  std::string NestedFor(const Env& env, int depth) {
    // The inner loops are generated first so they see the outer target only
    // through a fresh environment; they cannot mutate outer iterables.
    int levels = rng_.Bernoulli(0.3) ? 3 : 2;
    return NestLevel(env, depth, levels);
  }

  std::string NestLevel(const Env& env, int depth, int levels) {
    if (levels == 1) return For(env, depth, nullptr);
    // Build the header first so the frozen set covers the inner body.
    Env body = env;
    std::string target = Fresh("i");
    body.Add(kInt, target);
    std::string header;
    std::string frozen;
    if (!env.vars[kList].empty() && rng_.Bernoulli(0.5)) {
      frozen = Pick(env.vars[kList]);
      header = target + " in " + frozen;
    } else {
      header = target + " in range(" + std::to_string(rng_.Uniform(1, 4)) + ")";
    }
    bool newly_frozen = !frozen.empty() && frozen_.insert(frozen).second;
    ++loop_depth_;
    std::string out = Indent(depth) + "for " + header + ":\n";
    if (rng_.Bernoulli(0.5)) out += Statement(body, depth + 1);
    out += NestLevel(body, depth + 1, levels - 1);
    if (rng_.Bernoulli(0.5)) out += Statement(body, depth + 1);
    --loop_depth_;
    if (newly_frozen) frozen_.erase(frozen);
    return out;
  }

  std::string ReturnExpr(const Env& env) {
    std::vector<std::string> pool;
    for (Type t : {kInt, kList, kStr, kBool, kDict}) {
      for (const auto& v : env.vars[t]) pool.push_back(v);
    }
    if (pool.empty() || rng_.Bernoulli(0.3)) return IntExpr(env, 2);
    if (pool.size() >= 2 && rng_.Bernoulli(0.5)) {
      std::string a = Pick(pool), b = Pick(pool);
      return a + ", " + b;
    }
    return Pick(pool);
  }

  Rng rng_;
  ProgramFuzzOptions options_;
  bool helper_ = false;
  int counter_ = 0;
  int loop_depth_ = 0;
  std::set<std::string> frozen_;
  std::set<std::string> readonly_;
};

}  // namespace

FuzzedProgram GenerateProgram(std::uint64_t seed, const ProgramFuzzOptions& options) {
  Generator g(seed, options);
  return g.Run(seed);
}

}  // namespace exectrace
