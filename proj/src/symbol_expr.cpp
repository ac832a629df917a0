#include "sobscale/symbol_expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace sobscale {

namespace {

using Node = SymbolExpr::Node;
using Op = Node::Op;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  int parse_all() {
    const int root = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return root;
  }

  std::vector<Node> nodes;
  int min_dim = 0;
  bool uses_x = false;

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("symbol expression: " + what + " at position " +
                                std::to_string(pos_) + " in \"" + s_ + "\"");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int add(Node n) {
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }

  int binary(Op op, int l, int r) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    return add(n);
  }

  int expr() {
    int l = term();
    for (;;) {
      if (accept('+')) {
        l = binary(Op::add, l, term());
      } else if (accept('-')) {
        l = binary(Op::sub, l, term());
      } else {
        return l;
      }
    }
  }

  int term() {
    int l = unary();
    for (;;) {
      if (accept('*')) {
        l = binary(Op::mul, l, unary());
      } else if (accept('/')) {
        l = binary(Op::div, l, unary());
      } else {
        return l;
      }
    }
  }

  int unary() {
    if (accept('-')) {
      Node n;
      n.op = Op::neg;
      n.lhs = unary();
      return add(n);
    }
    if (accept('+')) return unary();
    return power();
  }

  int power() {
    const int base = primary();
    if (accept('^')) return binary(Op::pow, base, unary());
    return base;
  }

  std::string identifier() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  int coordinate(Op op, const std::string& id, std::size_t prefix) {
    int index = 0;
    if (id.size() > prefix) {
      if (id.size() != prefix + 1 || id[prefix] < '0' || id[prefix] > '2') {
        fail("unknown variable '" + id + "'");
      }
      index = id[prefix] - '0';
    }
    Node n;
    n.op = op;
    n.index = index;
    min_dim = std::max(min_dim, index + 1);
    if (op == Op::x) uses_x = true;
    return add(n);
  }

  int primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      Node n;
      n.op = Op::constant;
      n.value = v;
      return add(n);
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail(std::string("unexpected '") + c + "'");
    const std::string id = identifier();
    if (id == "pi") {
      Node n;
      n.op = Op::constant;
      n.value = M_PI;
      return add(n);
    }
    if (id == "jb") {
      expect('(');
      if (identifier() != "xi") fail("jb takes the argument 'xi'");
      expect(')');
      Node n;
      n.op = Op::bracket;
      return add(n);
    }
    static const std::pair<const char*, Op> functions[] = {
        {"sin", Op::sin}, {"cos", Op::cos}, {"exp", Op::exp}, {"sqrt", Op::sqrt}, {"abs", Op::abs}};
    for (const auto& [name, op] : functions) {
      if (id == name) {
        expect('(');
        Node n;
        n.op = op;
        n.lhs = expr();
        expect(')');
        return add(n);
      }
    }
    if (id.rfind("xi", 0) == 0) return coordinate(Op::xi, id, 2);
    if (id.rfind("x", 0) == 0) return coordinate(Op::x, id, 1);
    fail("unknown identifier '" + id + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval_node(const std::vector<Node>& nodes, int i, const std::array<double, 3>& x,
                 const std::array<double, 3>& xi) {
  const Node& n = nodes[static_cast<std::size_t>(i)];
  auto l = [&] { return eval_node(nodes, n.lhs, x, xi); };
  auto r = [&] { return eval_node(nodes, n.rhs, x, xi); };
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::x: return x[static_cast<std::size_t>(n.index)];
    case Op::xi: return xi[static_cast<std::size_t>(n.index)];
    case Op::bracket: return std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    case Op::neg: return -l();
    case Op::add: return l() + r();
    case Op::sub: return l() - r();
    case Op::mul: return l() * r();
    case Op::div: return l() / r();
    case Op::pow: return std::pow(l(), r());
    case Op::sin: return std::sin(l());
    case Op::cos: return std::cos(l());
    case Op::exp: return std::exp(l());
    case Op::sqrt: return std::sqrt(l());
    case Op::abs: return std::abs(l());
  }
  return 0.0;
}

}  // namespace

SymbolExpr SymbolExpr::parse(const std::string& text) {
  Parser p(text);
  SymbolExpr e;
  e.root_ = p.parse_all();
  e.text_ = text;
  e.min_dim_ = p.min_dim;
  e.uses_x_ = p.uses_x;
  e.nodes_ = std::make_shared<const std::vector<Node>>(std::move(p.nodes));
  return e;
}

double SymbolExpr::eval(const std::array<double, 3>& x, const std::array<double, 3>& xi) const {
  return eval_node(*nodes_, root_, x, xi);
}

}  // namespace sobscale
