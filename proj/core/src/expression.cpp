#include "zigzag/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace zigzag {
namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(double x) const = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Num : Node {
  double v;
  explicit Num(double v) : v(v) {}
  double eval(double) const override { return v; }
};

struct Var : Node {
  double eval(double x) const override { return x; }
};

struct Unary : Node {
  double (*fn)(double);
  NodePtr a;
  Unary(double (*fn)(double), NodePtr a) : fn(fn), a(std::move(a)) {}
  double eval(double x) const override { return fn(a->eval(x)); }
};

struct Binary : Node {
  double (*fn)(double, double);
  NodePtr a, b;
  Binary(double (*fn)(double, double), NodePtr a, NodePtr b)
      : fn(fn), a(std::move(a)), b(std::move(b)) {}
  double eval(double x) const override { return fn(a->eval(x), b->eval(x)); }
};

double add(double a, double b) { return a + b; }
double sub(double a, double b) { return a - b; }
double mul(double a, double b) { return a * b; }
double divi(double a, double b) { return a / b; }
double neg(double a) { return -a; }
double fmin2(double a, double b) { return std::fmin(a, b); }
double fmax2(double a, double b) { return std::fmax(a, b); }

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    auto n = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression error at position " +
                                std::to_string(pos_) + ": " + what + " in '" +
                                s_ + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (consume('+')) {
        n = std::make_shared<Binary>(add, n, term());
      } else if (consume('-')) {
        n = std::make_shared<Binary>(sub, n, term());
      } else {
        return n;
      }
    }
  }

  NodePtr term() {
    auto n = factor();
    for (;;) {
      if (consume('*')) {
        n = std::make_shared<Binary>(mul, n, factor());
      } else if (consume('/')) {
        n = std::make_shared<Binary>(divi, n, factor());
      } else {
        return n;
      }
    }
  }

  // Unary minus binds below '^': -x^2 parses as -(x^2).
  NodePtr factor() {
    if (consume('-')) return std::make_shared<Unary>(neg, factor());
    if (consume('+')) return factor();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    if (consume('^')) {
      return std::make_shared<Binary>(
          static_cast<double (*)(double, double)>(std::pow), base, factor());
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    if (consume('(')) {
      auto n = expr();
      if (!consume(')')) fail("expected ')'");
      return n;
    }
    fail("unexpected character");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return std::make_shared<Num>(v);
  }

  NodePtr ident() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);

    if (name == "x") return std::make_shared<Var>();
    if (name == "pi") return std::make_shared<Num>(M_PI);
    if (name == "e") return std::make_shared<Num>(M_E);

    static const std::vector<std::pair<std::string, double (*)(double)>> k1 = {
        {"abs", [](double a) { return std::abs(a); }},
        {"exp", [](double a) { return std::exp(a); }},
        {"expm1", [](double a) { return std::expm1(a); }},
        {"log", [](double a) { return std::log(a); }},
        {"log1p", [](double a) { return std::log1p(a); }},
        {"sqrt", [](double a) { return std::sqrt(a); }},
        {"sin", [](double a) { return std::sin(a); }},
        {"cos", [](double a) { return std::cos(a); }},
        {"tan", [](double a) { return std::tan(a); }},
        {"atan", [](double a) { return std::atan(a); }},
        {"sinh", [](double a) { return std::sinh(a); }},
        {"cosh", [](double a) { return std::cosh(a); }},
        {"tanh", [](double a) { return std::tanh(a); }},
    };
    static const std::vector<std::pair<std::string, double (*)(double, double)>> k2 = {
        {"pow", static_cast<double (*)(double, double)>(std::pow)},
        {"min", fmin2},
        {"max", fmax2},
    };

    for (const auto& [fname, fn] : k1) {
      if (name == fname) {
        if (!consume('(')) fail("expected '(' after " + name);
        auto a = expr();
        if (!consume(')')) fail("expected ')'");
        return std::make_shared<Unary>(fn, a);
      }
    }
    for (const auto& [fname, fn] : k2) {
      if (name == fname) {
        if (!consume('(')) fail("expected '(' after " + name);
        auto a = expr();
        if (!consume(',')) fail("expected ','");
        auto b = expr();
        if (!consume(')')) fail("expected ')'");
        return std::make_shared<Binary>(fn, a, b);
      }
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(double)> compile_expression(const std::string& text) {
  Parser parser(text);
  NodePtr root = parser.parse();
  return [root](double x) { return root->eval(x); };
}

}  // namespace zigzag
