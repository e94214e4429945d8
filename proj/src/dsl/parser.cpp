#include "tensopt/dsl/parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

#include "tensopt/dsl/intrinsics.hpp"

namespace tensopt::dsl {
namespace {

enum class Tok { Ident, Int, Float, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

constexpr std::array<std::string_view, 24> kNamedTypes{
    "int8_t",  "uint8_t",  "int16_t", "uint16_t",      "int32_t",       "uint32_t",
    "int64_t", "uint64_t", "size_t",  "int_fast32_t",  "uint_fast32_t", "int_fast16_t",
    "float",   "double",   "bool",    "elem_t",        "acc_t",         "scale_t",
    "int",     "unsigned", "signed",  "long",          "short",         "char"};

bool is_multiword_part(std::string_view w) {
  return w == "unsigned" || w == "signed" || w == "int" || w == "long" || w == "short" ||
         w == "char";
}

// Thrown internally to unwind on the first syntax error.
struct SyntaxError {
  Diagnostic diag;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(std::vector<Diagnostic>& diags) {
    std::vector<Token> out;
    bool line_start = true;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        advance();
        line_start = true;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      if (c == '/' && peek(1) == '*') {
        SourceLoc start = loc();
        advance();
        advance();
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) advance();
        if (pos_ >= src_.size()) {
          diags.push_back({Severity::Error, start, "syntax", "unterminated block comment"});
          return {};
        }
        advance();
        advance();
        continue;
      }
      if (c == '#' && line_start) {
        SourceLoc at = loc();
        std::string directive;
        while (pos_ < src_.size() && src_[pos_] != '\n') {
          directive += src_[pos_];
          advance();
        }
        diags.push_back({Severity::Error, at, "preprocessor",
                         "preprocessor directive not allowed: " + directive});
        continue;
      }
      line_start = false;
      SourceLoc at = loc();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string word;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          word += src_[pos_];
          advance();
        }
        out.push_back({Tok::Ident, std::move(word), at});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        out.push_back(number(at));
        continue;
      }
      static constexpr std::array<std::string_view, 22> kMulti{
          "<<=", ">>=", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++",
          "--",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "::"};
      bool matched = false;
      for (auto op : kMulti) {
        if (src_.substr(pos_, op.size()) == op) {
          for (std::size_t i = 0; i < op.size(); ++i) advance();
          out.push_back({Tok::Punct, std::string(op), at});
          matched = true;
          break;
        }
      }
      if (matched) continue;
      static constexpr std::string_view kSingle = "{}()[];,=+-*/%<>&|^~!?:.";
      if (kSingle.find(c) != std::string_view::npos) {
        advance();
        out.push_back({Tok::Punct, std::string(1, c), at});
        continue;
      }
      diags.push_back({Severity::Error, at, "syntax",
                       std::string("unexpected character '") + c + "'"});
      return {};
    }
    out.push_back({Tok::End, "", loc()});
    return out;
  }

 private:
  Token number(SourceLoc at) {
    std::string text;
    bool is_float = false;
    if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      text += src_[pos_];
      advance();
      text += src_[pos_];
      advance();
      while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
        text += src_[pos_];
        advance();
      }
    } else {
      while (pos_ < src_.size()) {
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
          text += c;
        } else if (c == '.') {
          is_float = true;
          text += c;
        } else if ((c == 'e' || c == 'E') &&
                   (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                    ((peek(1) == '-' || peek(1) == '+') &&
                     std::isdigit(static_cast<unsigned char>(peek(2)))))) {
          is_float = true;
          text += c;
          advance();
          text += src_[pos_];
        } else {
          break;
        }
        advance();
      }
    }
    while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
      char c = src_[pos_];
      if (c == 'f' || c == 'F') is_float = true;
      text += c;
      advance();
    }
    return {is_float ? Tok::Float : Tok::Int, std::move(text), at};
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  SourceLoc loc() const { return {line_, col_}; }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  KernelProgram program() {
    KernelProgram prog;
    TypeSpec ret = type_spec();
    if (ret.name != "void") fail(cur().loc, "syntax", "kernel must return void");
    const Token& name = expect_ident("function name");
    if (name.text != "test") {
      fail(name.loc, "function-name",
           "kernel function must be named test, found '" + name.text + "'");
    }
    prog.name = name.text;
    expect("(");
    if (!accept(")")) {
      if (cur().text == "void" && peek(1).text == ")") {
        next();
      } else {
        do {
          prog.params.push_back(param());
        } while (accept(","));
      }
      expect(")");
    }
    expect("{");
    while (!check("}")) {
      if (cur().kind == Tok::End) fail(cur().loc, "syntax", "expected '}' before end of input");
      for (auto& s : statements()) prog.body.push_back(std::move(s));
    }
    expect("}");
    if (cur().kind != Tok::End) {
      fail(cur().loc, "single-function", "all code must be inside the test() function");
    }
    return prog;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool check(std::string_view p) const {
    return cur().kind == Tok::Punct && cur().text == p;
  }
  bool check_word(std::string_view w) const {
    return cur().kind == Tok::Ident && cur().text == w;
  }
  bool accept(std::string_view p) {
    if (!check(p)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail(SourceLoc loc, std::string code, std::string msg) {
    throw SyntaxError{{Severity::Error, loc, std::move(code), std::move(msg)}};
  }

  void expect(std::string_view p) {
    if (!accept(p)) {
      std::string found = cur().kind == Tok::End ? "end of input" : "'" + cur().text + "'";
      fail(cur().loc, "syntax", "expected '" + std::string(p) + "', found " + found);
    }
  }

  const Token& expect_ident(std::string_view what) {
    if (cur().kind != Tok::Ident) {
      fail(cur().loc, "syntax", "expected " + std::string(what) + ", found '" + cur().text + "'");
    }
    return next();
  }

  bool at_type_start(std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    if (t.kind != Tok::Ident) return false;
    return t.text == "static" || t.text == "const" || t.text == "void" || is_type_name(t.text);
  }

  TypeSpec type_spec() {
    TypeSpec ts;
    for (;;) {
      if (check_word("static")) {
        ts.is_static = true;
        next();
      } else if (check_word("const")) {
        ts.is_const = true;
        next();
      } else {
        break;
      }
    }
    if (check_word("void")) {
      ts.name = "void";
      next();
      return ts;
    }
    if (cur().kind != Tok::Ident || !is_type_name(cur().text)) {
      fail(cur().loc, "syntax", "expected type name, found '" + cur().text + "'");
    }
    if (is_multiword_part(cur().text)) {
      std::string name = next().text;
      while (cur().kind == Tok::Ident && is_multiword_part(cur().text)) {
        name += " " + next().text;
      }
      ts.name = name;
    } else {
      ts.name = next().text;
    }
    if (check_word("const")) {
      ts.is_const = true;
      next();
    }
    return ts;
  }

  ArrayParam param() {
    ArrayParam p;
    SourceLoc at = cur().loc;
    p.type = type_spec();
    if (p.type.is_static) fail(at, "syntax", "parameters cannot be static");
    p.name = expect_ident("parameter name").text;
    while (accept("[")) {
      p.dims.push_back(expression());
      expect("]");
    }
    if (p.dims.empty()) fail(at, "param-shape", "parameter '" + p.name + "' must be an array");
    return p;
  }

  void skip_attribute() {
    // e.g. row_align_acc(1); accepted and ignored.
    while (cur().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "(") {
      next();
      int depth = 0;
      do {
        if (check("(")) ++depth;
        if (check(")")) --depth;
        if (cur().kind == Tok::End) fail(cur().loc, "syntax", "unterminated attribute");
        next();
      } while (depth > 0);
    }
  }

  std::vector<Stmt> declaration() {
    SourceLoc at = cur().loc;
    TypeSpec ts = type_spec();
    if (ts.name == "void") fail(at, "syntax", "void variables are not allowed");
    std::vector<Stmt> out;
    do {
      Stmt s;
      s.kind = StmtKind::Decl;
      s.loc = cur().loc;
      s.decl.type = ts;
      s.decl.name = expect_ident("variable name").text;
      while (accept("[")) {
        s.decl.dims.push_back(expression());
        expect("]");
      }
      skip_attribute();
      if (accept("=")) {
        if (accept("{")) {
          std::vector<Expr> items;
          if (!check("}")) {
            do {
              if (check("}")) break;  // trailing comma
              items.push_back(expression());
            } while (accept(","));
          }
          expect("}");
          s.decl.list = std::move(items);
        } else {
          s.decl.init = expression();
        }
      }
      out.push_back(std::move(s));
    } while (accept(","));
    expect(";");
    return out;
  }

  std::vector<Stmt> body_of() {
    if (check("{")) {
      next();
      std::vector<Stmt> out;
      while (!check("}")) {
        if (cur().kind == Tok::End) fail(cur().loc, "syntax", "expected '}' before end of input");
        auto s = statements();
        for (auto& x : s) out.push_back(std::move(x));
      }
      next();
      return out;
    }
    return statements();
  }

  // Returns several statements only for multi-declarator declarations.
  std::vector<Stmt> statements() {
    SourceLoc at = cur().loc;
    if (check("{")) {
      Stmt b;
      b.kind = StmtKind::Block;
      b.loc = at;
      b.body = body_of();
      return {std::move(b)};
    }
    if (accept(";")) {
      Stmt e;
      e.kind = StmtKind::Empty;
      e.loc = at;
      return {std::move(e)};
    }
    if (check_word("for")) return {for_loop()};
    if (check_word("if")) return {if_stmt()};
    if (check_word("while") || check_word("do") || check_word("goto") || check_word("return") ||
        check_word("switch") || check_word("break") || check_word("continue")) {
      fail(at, "unsupported", "'" + cur().text + "' is not part of the kernel dialect");
    }
    if (at_type_start()) return declaration();
    if (cur().kind == Tok::Ident && peek(1).kind == Tok::Punct && peek(1).text == "(") {
      return {call()};
    }
    Stmt s = simple_assignment();
    expect(";");
    return {std::move(s)};
  }

  Stmt call() {
    Stmt s;
    s.kind = StmtKind::Call;
    s.loc = cur().loc;
    const Token& name = next();
    if (!lookup_intrinsic(name.text)) {
      fail(name.loc, "unknown-intrinsic", "unknown intrinsic '" + name.text + "'");
    }
    s.callee = name.text;
    expect("(");
    if (!check(")")) {
      do {
        s.args.push_back(expression());
      } while (accept(","));
    }
    expect(")");
    expect(";");
    return s;
  }

  std::optional<AssignOp> assign_op() {
    static const std::array<std::pair<std::string_view, AssignOp>, 11> kOps{{
        {"=", AssignOp::Set},
        {"+=", AssignOp::Add},
        {"-=", AssignOp::Sub},
        {"*=", AssignOp::Mul},
        {"/=", AssignOp::Div},
        {"%=", AssignOp::Mod},
        {"<<=", AssignOp::Shl},
        {">>=", AssignOp::Shr},
        {"&=", AssignOp::And},
        {"|=", AssignOp::Or},
        {"^=", AssignOp::Xor},
    }};
    if (cur().kind != Tok::Punct) return std::nullopt;
    for (auto [text, op] : kOps) {
      if (cur().text == text) {
        next();
        return op;
      }
    }
    return std::nullopt;
  }

  // Assignment or increment without the trailing ';'.
  Stmt simple_assignment() {
    Stmt s;
    s.loc = cur().loc;
    if (check("++") || check("--")) {
      bool inc = next().text == "++";
      s.kind = StmtKind::IncDec;
      s.incdec = inc ? StepKind::PreInc : StepKind::PreDec;
      s.target = lvalue();
      return s;
    }
    s.target = lvalue();
    if (check("++") || check("--")) {
      s.kind = StmtKind::IncDec;
      s.incdec = next().text == "++" ? StepKind::PostInc : StepKind::PostDec;
      return s;
    }
    auto op = assign_op();
    if (!op) fail(cur().loc, "syntax", "expected assignment, found '" + cur().text + "'");
    s.kind = StmtKind::Assign;
    s.assign_op = *op;
    s.value = expression();
    return s;
  }

  Expr lvalue() {
    SourceLoc at = cur().loc;
    Expr e = postfix();
    if (e.kind != ExprKind::Identifier && e.kind != ExprKind::Index) {
      fail(at, "syntax", "expected variable or array element");
    }
    return e;
  }

  Stmt for_loop() {
    Stmt s;
    s.kind = StmtKind::For;
    s.loc = cur().loc;
    next();
    expect("(");
    ForLoop& f = s.loop;
    if (at_type_start()) {
      TypeSpec ts = type_spec();
      f.decl_type = ts;
    }
    f.var = expect_ident("loop variable").text;
    expect("=");
    f.init = expression();
    expect(";");
    SourceLoc cond_at = cur().loc;
    f.cond = expression();
    if (f.cond.kind != ExprKind::Binary ||
        !(f.cond.binary_op == BinaryOp::Lt || f.cond.binary_op == BinaryOp::Le ||
          f.cond.binary_op == BinaryOp::Gt || f.cond.binary_op == BinaryOp::Ge ||
          f.cond.binary_op == BinaryOp::Ne)) {
      fail(cond_at, "loop-form", "loop condition must be a comparison");
    }
    expect(";");
    SourceLoc step_at = cur().loc;
    auto step_var = [&](const std::string& name) {
      if (name != f.var) {
        fail(step_at, "loop-form", "loop step must update the induction variable '" + f.var + "'");
      }
    };
    if (check("++") || check("--")) {
      f.step_kind = next().text == "++" ? StepKind::PreInc : StepKind::PreDec;
      step_var(expect_ident("loop variable").text);
    } else {
      step_var(expect_ident("loop variable").text);
      if (check("++") || check("--")) {
        f.step_kind = next().text == "++" ? StepKind::PostInc : StepKind::PostDec;
      } else if (accept("+=")) {
        f.step_kind = StepKind::AddAssign;
        f.step = expression();
      } else if (accept("-=")) {
        f.step_kind = StepKind::SubAssign;
        f.step = expression();
      } else if (accept("=")) {
        // i = i + k / i = i - k
        Expr rhs = expression();
        if (rhs.kind == ExprKind::Binary &&
            (rhs.binary_op == BinaryOp::Add || rhs.binary_op == BinaryOp::Sub) &&
            rhs.children[0].kind == ExprKind::Identifier && rhs.children[0].text == f.var) {
          f.step_kind =
              rhs.binary_op == BinaryOp::Add ? StepKind::AddAssign : StepKind::SubAssign;
          f.step = std::move(rhs.children[1]);
        } else {
          fail(step_at, "loop-form", "loop step must be additive");
        }
      } else {
        fail(step_at, "loop-form", "loop step must be additive");
      }
    }
    expect(")");
    s.body = body_of();
    return s;
  }

  Stmt if_stmt() {
    Stmt s;
    s.kind = StmtKind::If;
    s.loc = cur().loc;
    next();
    expect("(");
    s.cond = expression();
    expect(")");
    s.body = body_of();
    if (check_word("else")) {
      next();
      s.has_else = true;
      s.else_body = body_of();
    }
    return s;
  }

  // ---- expressions -------------------------------------------------------

  Expr expression() { return ternary(); }

  Expr ternary() {
    SourceLoc at = cur().loc;
    Expr c = binary(0);
    if (accept("?")) {
      Expr t = expression();
      expect(":");
      Expr e = ternary();
      Expr out = Expr::ternary(std::move(c), std::move(t), std::move(e));
      out.loc = at;
      return out;
    }
    return c;
  }

  static std::optional<BinaryOp> binop_of(const Token& t) {
    if (t.kind != Tok::Punct) return std::nullopt;
    static const std::array<std::pair<std::string_view, BinaryOp>, 18> kOps{{
        {"*", BinaryOp::Mul},   {"/", BinaryOp::Div},        {"%", BinaryOp::Mod},
        {"+", BinaryOp::Add},   {"-", BinaryOp::Sub},        {"<<", BinaryOp::Shl},
        {">>", BinaryOp::Shr},  {"<", BinaryOp::Lt},         {"<=", BinaryOp::Le},
        {">", BinaryOp::Gt},    {">=", BinaryOp::Ge},        {"==", BinaryOp::Eq},
        {"!=", BinaryOp::Ne},   {"&", BinaryOp::BitAnd},     {"^", BinaryOp::BitXor},
        {"|", BinaryOp::BitOr}, {"&&", BinaryOp::LogicalAnd}, {"||", BinaryOp::LogicalOr},
    }};
    for (auto [text, op] : kOps) {
      if (t.text == text) return op;
    }
    return std::nullopt;
  }

  // Precedence climbing; all binary operators are left-associative.
  Expr binary(int min_prec) {
    Expr lhs = unary();
    for (;;) {
      auto op = binop_of(cur());
      if (!op || precedence(*op) < min_prec) return lhs;
      SourceLoc at = cur().loc;
      next();
      Expr rhs = binary(precedence(*op) + 1);
      lhs = Expr::binary(*op, std::move(lhs), std::move(rhs));
      lhs.loc = at;
    }
  }

  bool at_cast() const {
    if (!check("(")) return false;
    std::size_t i = 1;
    while (peek(i).kind == Tok::Ident && peek(i).text == "const") ++i;
    if (peek(i).kind != Tok::Ident || !is_type_name(peek(i).text)) return false;
    ++i;
    while (peek(i).kind == Tok::Ident && is_multiword_part(peek(i).text)) ++i;
    return peek(i).kind == Tok::Punct && peek(i).text == ")";
  }

  Expr unary() {
    SourceLoc at = cur().loc;
    auto make = [&](UnaryOp op) {
      next();
      Expr e = Expr::unary(op, unary());
      e.loc = at;
      return e;
    };
    if (check("-")) return make(UnaryOp::Neg);
    if (check("+")) return make(UnaryOp::Plus);
    if (check("~")) return make(UnaryOp::BitNot);
    if (check("!")) return make(UnaryOp::LogicalNot);
    if (check("&")) {
      next();
      Expr operand = postfix();
      if (operand.kind != ExprKind::Identifier && operand.kind != ExprKind::Index) {
        fail(at, "syntax", "address-of requires an array element");
      }
      Expr e = Expr::address_of(std::move(operand));
      e.loc = at;
      return e;
    }
    if (check("++") || check("--")) {
      fail(at, "unsupported", "increment operators are only allowed as statements");
    }
    if (check_word("sizeof")) {
      next();
      expect("(");
      TypeSpec ts = type_spec();
      expect(")");
      Expr e = Expr::size_of(ts.name);
      e.loc = at;
      return e;
    }
    if (at_cast()) {
      next();
      TypeSpec ts = type_spec();
      expect(")");
      Expr e = Expr::cast(ts.name, unary());
      e.loc = at;
      return e;
    }
    return postfix();
  }

  Expr postfix() {
    SourceLoc at = cur().loc;
    Expr base = primary();
    if (!check("[")) return base;
    if (base.kind != ExprKind::Identifier) fail(at, "syntax", "only named arrays can be indexed");
    std::vector<Expr> subs;
    while (accept("[")) {
      subs.push_back(expression());
      expect("]");
    }
    Expr e = Expr::index(std::move(base), std::move(subs));
    e.loc = at;
    return e;
  }

  Expr primary() {
    const Token& t = cur();
    SourceLoc at = t.loc;
    if (t.kind == Tok::Int) {
      Expr e = int_literal(t);
      next();
      return e;
    }
    if (t.kind == Tok::Float) {
      std::string spelling = t.text;
      std::string digits = spelling;
      while (!digits.empty() && (digits.back() == 'f' || digits.back() == 'F' ||
                                 digits.back() == 'l' || digits.back() == 'L')) {
        digits.pop_back();
      }
      char* end = nullptr;
      double v = std::strtod(digits.c_str(), &end);
      if (end == digits.c_str() || *end != '\0') fail(at, "syntax", "bad float literal " + spelling);
      next();
      Expr e = Expr::float_lit(v, std::move(spelling));
      e.loc = at;
      return e;
    }
    if (t.kind == Tok::Ident) {
      if (is_type_name(t.text) || t.text == "static" || t.text == "const") {
        fail(at, "syntax", "unexpected type name '" + t.text + "' in expression");
      }
      Expr e = Expr::ident(t.text);
      e.loc = at;
      next();
      if (check("(")) {
        fail(at, "syntax", "intrinsic calls cannot appear inside expressions");
      }
      return e;
    }
    if (accept("(")) {
      Expr e = expression();
      expect(")");
      return e;
    }
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    fail(at, "syntax", "expected expression, found " + found);
  }

  Expr int_literal(const Token& t) {
    std::string text = t.text;
    std::string suffix;
    while (!text.empty() && std::isalpha(static_cast<unsigned char>(text.back())) &&
           !(text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X') &&
             std::isxdigit(static_cast<unsigned char>(text.back())))) {
      suffix.insert(suffix.begin(), text.back());
      text.pop_back();
    }
    for (char c : suffix) {
      if (c != 'u' && c != 'U' && c != 'l' && c != 'L') {
        fail(t.loc, "syntax", "bad integer suffix in " + t.text);
      }
    }
    bool hex = text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X');
    std::uint64_t v = 0;
    const char* first = text.data() + (hex ? 2 : 0);
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v, hex ? 16 : 10);
    if (ec != std::errc() || ptr != last || first == last) {
      fail(t.loc, "syntax", "bad integer literal " + t.text);
    }
    Expr e = Expr::int_lit(v, hex, suffix);
    e.loc = t.loc;
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_type_name(std::string_view word) {
  for (auto t : kNamedTypes) {
    if (t == word) return true;
  }
  return false;
}

ParseResult parse_kernel(std::string_view text) {
  ParseResult result;
  Lexer lexer(text);
  auto toks = lexer.run(result.diagnostics);
  if (has_errors(result.diagnostics)) return result;
  try {
    Parser parser(std::move(toks));
    result.program = parser.program();
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back(e.diag);
  }
  return result;
}

}  // namespace tensopt::dsl
