#include "rmon/kb_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace rmon {

namespace {

// Maps byte offsets of the whole document to 1-based line/column.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '\n') starts_.push_back(i + 1);
    }
  }

  SourcePos at(std::size_t offset) const {
    auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
    const std::size_t line = static_cast<std::size_t>(it - starts_.begin());
    return SourcePos{line, offset - starts_[line - 1] + 1};
  }

 private:
  std::vector<std::size_t> starts_;
};

[[noreturn]] void fail(const std::string& msg, SourcePos pos) {
  throw ParseError(msg, pos.line, pos.column);
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// ---------------------------------------------------------------------------
// Relation bodies

enum class BodyTok { Ident, Number, Punct, Newline, End };

struct BodyToken {
  BodyTok kind;
  std::string text;
  double number = 0.0;
  std::size_t offset = 0;
};

class BodyLexer {
 public:
  BodyLexer(std::string_view doc, std::size_t begin, std::size_t end, const LineIndex& lines)
      : doc_(doc), pos_(begin), end_(end), lines_(lines) {}

  std::vector<BodyToken> run() {
    std::vector<BodyToken> out;
    int depth = 0;
    while (true) {
      skip_blank();
      if (pos_ >= end_) break;
      const char c = doc_[pos_];
      const std::size_t start = pos_;
      if (c == '\n' || c == ';') {
        ++pos_;
        if (depth == 0) out.push_back({BodyTok::Newline, std::string(1, c), 0.0, start});
      } else if (ident_start(c)) {
        while (pos_ < end_ && ident_char(doc_[pos_])) ++pos_;
        out.push_back({BodyTok::Ident, std::string(doc_.substr(start, pos_ - start)), 0.0, start});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < end_ &&
                  std::isdigit(static_cast<unsigned char>(doc_[pos_ + 1])))) {
        out.push_back(number(start));
      } else if (std::string_view("+-*/=()[]:,.").find(c) != std::string_view::npos) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') depth = std::max(0, depth - 1);
        ++pos_;
        out.push_back({BodyTok::Punct, std::string(1, c), 0.0, start});
      } else {
        fail(std::string("unexpected character '") + c + "' in implementation body",
             lines_.at(start));
      }
    }
    out.push_back({BodyTok::End, "", 0.0, end_});
    return out;
  }

 private:
  void skip_blank() {
    while (pos_ < end_) {
      const char c = doc_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < end_ && doc_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  BodyToken number(std::size_t start) {
    auto digits = [&] {
      while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(doc_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < end_ && doc_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < end_ && (doc_[pos_] == 'e' || doc_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < end_ && (doc_[pos_] == '+' || doc_[pos_] == '-')) ++pos_;
      if (pos_ < end_ && std::isdigit(static_cast<unsigned char>(doc_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    const std::string_view text = doc_.substr(start, pos_ - start);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      fail("malformed number '" + std::string(text) + "'", lines_.at(start));
    }
    return {BodyTok::Number, std::string(text), value, start};
  }

  std::string_view doc_;
  std::size_t pos_;
  std::size_t end_;
  const LineIndex& lines_;
};

const std::set<std::string, std::less<>> kBuiltins = {"min", "max", "sum", "len"};

class BodyParser {
 public:
  BodyParser(std::vector<BodyToken> toks, const LineIndex& lines)
      : toks_(std::move(toks)), lines_(lines) {}

  std::vector<Statement> run() {
    std::vector<Statement> out;
    while (true) {
      while (peek().kind == BodyTok::Newline) ++i_;
      if (peek().kind == BodyTok::End) break;
      out.push_back(statement());
      const BodyToken& t = peek();
      if (t.kind != BodyTok::Newline && t.kind != BodyTok::End) {
        fail("expected end of statement, found '" + t.text + "'", pos(t));
      }
    }
    return out;
  }

 private:
  const BodyToken& peek(std::size_t ahead = 0) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  const BodyToken& take() { return toks_[std::min(i_++, toks_.size() - 1)]; }
  SourcePos pos(const BodyToken& t) const { return lines_.at(t.offset); }

  bool is_punct(const BodyToken& t, char c) const {
    return t.kind == BodyTok::Punct && t.text[0] == c;
  }

  void expect(char c) {
    const BodyToken& t = take();
    if (!is_punct(t, c)) {
      fail(std::string("expected '") + c + "', found '" + (t.kind == BodyTok::End ? "end of body" : t.text) + "'",
           pos(t));
    }
  }

  Statement statement() {
    const BodyToken& head = take();
    if (head.kind != BodyTok::Ident) fail("statement must start with a name", pos(head));
    Statement st{Statement::Target::Let, head.text, nullptr, pos(head)};
    if (is_punct(peek(), '.')) {
      ++i_;
      const BodyToken& field = take();
      if (field.kind != BodyTok::Ident || (field.text != "v" && field.text != "t")) {
        fail("expected field 'v' or 't' after '" + head.text + ".'", pos(field));
      }
      st.target = field.text == "v" ? Statement::Target::OutputValue : Statement::Target::OutputTime;
    }
    expect('=');
    st.expr = expression();
    return st;
  }

  ExprPtr expression() {
    ExprPtr lhs = term();
    while (is_punct(peek(), '+') || is_punct(peek(), '-')) {
      const BodyToken& op = take();
      ExprPtr rhs = term();
      lhs = make_op(op.text[0] == '+' ? ExprKind::Add : ExprKind::Sub, {lhs, rhs}, lhs->pos);
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (is_punct(peek(), '*') || is_punct(peek(), '/')) {
      const BodyToken& op = take();
      ExprPtr rhs = unary();
      lhs = make_op(op.text[0] == '*' ? ExprKind::Mul : ExprKind::Div, {lhs, rhs}, lhs->pos);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (is_punct(peek(), '-')) {
      const BodyToken& op = take();
      return make_op(ExprKind::Neg, {unary()}, pos(op));
    }
    return postfix();
  }

  ExprPtr postfix() {
    ExprPtr base = primary();
    while (is_punct(peek(), '[')) {
      ++i_;
      ExprPtr first = expression();
      if (is_punct(peek(), ':')) {
        ++i_;
        ExprPtr second = expression();
        expect(']');
        base = make_op(ExprKind::Slice, {base, first, second}, base->pos);
      } else {
        expect(']');
        base = make_op(ExprKind::Index, {base, first}, base->pos);
      }
    }
    return base;
  }

  ExprPtr primary() {
    const BodyToken& t = take();
    const SourcePos p = pos(t);
    switch (t.kind) {
      case BodyTok::Number:
        return make_number(t.number, p);
      case BodyTok::Ident:
        if (is_punct(peek(), '(')) return call(t.text, p);
        if (is_punct(peek(), '.')) {
          ++i_;
          const BodyToken& field = take();
          if (field.kind != BodyTok::Ident || (field.text != "v" && field.text != "t")) {
            fail("expected field 'v' or 't' after '" + t.text + ".'", pos(field));
          }
          return make_ref(field.text == "v" ? ExprKind::InputValue : ExprKind::InputTime, t.text, p);
        }
        return make_ref(ExprKind::Name, t.text, p);
      case BodyTok::Punct:
        if (t.text[0] == '(') {
          ExprPtr inner = expression();
          expect(')');
          return inner;
        }
        break;
      default:
        break;
    }
    fail("unexpected '" + (t.kind == BodyTok::End ? std::string("end of body") : t.text) +
             "' in expression",
         p);
  }

  ExprPtr call(const std::string& fn, SourcePos p) {
    if (!kBuiltins.contains(fn)) fail("unknown function '" + fn + "'", p);
    expect('(');
    std::vector<ExprPtr> args{expression()};
    while (is_punct(peek(), ',')) {
      ++i_;
      args.push_back(expression());
    }
    expect(')');
    if (args.size() == 1) {
      if (fn == "min") return make_op(ExprKind::MinReduce, std::move(args), p);
      if (fn == "max") return make_op(ExprKind::MaxReduce, std::move(args), p);
      if (fn == "sum") return make_op(ExprKind::SumReduce, std::move(args), p);
      return make_op(ExprKind::Len, std::move(args), p);
    }
    if (args.size() == 2 && fn == "min") return make_op(ExprKind::Min2, std::move(args), p);
    if (args.size() == 2 && fn == "max") return make_op(ExprKind::Max2, std::move(args), p);
    fail("wrong number of arguments to '" + fn + "'", p);
  }

  std::vector<BodyToken> toks_;
  std::size_t i_ = 0;
  const LineIndex& lines_;
};

// ---------------------------------------------------------------------------
// Document level

enum class Tok { Ident, String, Punct, Directive, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset = 0;
  std::size_t end = 0;  // one past the last byte
};

class DocLexer {
 public:
  DocLexer(std::string_view text, const LineIndex& lines) : text_(text), lines_(lines) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      const std::size_t start = pos_;
      const char c = text_[pos_];
      if (ident_start(c)) {
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        out.push_back({Tok::Ident, std::string(text_.substr(start, pos_ - start)), start, pos_});
      } else if (c == '"') {
        const std::size_t close = text_.find('"', pos_ + 1);
        if (close == std::string_view::npos) fail("unterminated string", lines_.at(start));
        pos_ = close + 1;
        out.push_back({Tok::String, std::string(text_.substr(start + 1, close - start - 1)), start, pos_});
      } else if (c == ':' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '-') {
        pos_ += 2;
        out.push_back({Tok::Directive, ":-", start, pos_});
      } else if (std::string_view("()[],.").find(c) != std::string_view::npos) {
        ++pos_;
        out.push_back({Tok::Punct, std::string(1, c), start, pos_});
      } else {
        fail(std::string("unexpected character '") + c + "'", lines_.at(start));
      }
    }
    out.push_back({Tok::End, "", text_.size(), text_.size()});
    return out;
  }

 private:
  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  const LineIndex& lines_;
};

class DocParser {
 public:
  DocParser(std::string_view text, std::vector<Token> toks, const LineIndex& lines)
      : text_(text), toks_(std::move(toks)), lines_(lines) {}

  KbDocument run() {
    KbDocument doc;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Directive) {
        skip_directive();
        continue;
      }
      const Token& head = take();
      const SourcePos p = lines_.at(head.offset);
      if (head.kind != Tok::Ident) fail("expected a fact, found '" + head.text + "'", p);
      if (head.text == "function") {
        doc.facts.emplace_back(function_fact(p));
      } else if (head.text == "itomsOf") {
        doc.facts.emplace_back(itoms_of_fact(p));
      } else if (head.text == "implementation") {
        doc.facts.emplace_back(implementation_fact(p));
      } else {
        fail("unknown fact '" + head.text + "'", p);
      }
      expect('.');
    }
    return doc;
  }

 private:
  const Token& peek() const { return toks_[std::min(i_, toks_.size() - 1)]; }
  const Token& take() { return toks_[std::min(i_++, toks_.size() - 1)]; }

  std::string describe(const Token& t) const {
    return t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
  }

  void expect(char c) {
    const Token& t = take();
    if (t.kind != Tok::Punct || t.text[0] != c) {
      fail(std::string("expected '") + c + "', found " + describe(t), lines_.at(t.offset));
    }
  }

  std::string ident(const char* what) {
    const Token& t = take();
    if (t.kind != Tok::Ident) {
      fail(std::string("expected ") + what + ", found " + describe(t), lines_.at(t.offset));
    }
    return t.text;
  }

  void skip_directive() {
    const Token& start = take();
    int depth = 0;
    while (true) {
      const Token& t = take();
      if (t.kind == Tok::End) fail("unterminated directive", lines_.at(start.offset));
      if (t.kind != Tok::Punct) continue;
      if (t.text[0] == '(' || t.text[0] == '[') ++depth;
      if (t.text[0] == ')' || t.text[0] == ']') --depth;
      if (t.text[0] == '.' && depth <= 0) return;
    }
  }

  FunctionFact function_fact(SourcePos p) {
    FunctionFact f;
    f.pos = p;
    expect('(');
    f.output = VariableId(ident("output variable"));
    expect(',');
    f.relation = RelationId(ident("relation id"));
    expect(',');
    expect('[');
    if (!(peek().kind == Tok::Punct && peek().text[0] == ']')) {
      f.inputs.emplace_back(ident("input variable"));
      while (peek().kind == Tok::Punct && peek().text[0] == ',') {
        ++i_;
        f.inputs.emplace_back(ident("input variable"));
      }
    }
    expect(']');
    expect(')');
    return f;
  }

  ItomsOfFact itoms_of_fact(SourcePos p) {
    ItomsOfFact f;
    f.pos = p;
    expect('(');
    f.variable = VariableId(ident("variable"));
    expect(',');
    expect('[');
    auto signal = [&] {
      const Token& t = take();
      if (t.kind != Tok::String) {
        fail("expected quoted signal name, found " + describe(t), lines_.at(t.offset));
      }
      if (t.text.empty()) fail("empty signal name", lines_.at(t.offset));
      f.signals.emplace_back(t.text);
    };
    if (!(peek().kind == Tok::Punct && peek().text[0] == ']')) {
      signal();
      while (peek().kind == Tok::Punct && peek().text[0] == ',') {
        ++i_;
        signal();
      }
    }
    expect(']');
    expect(')');
    return f;
  }

  ImplementationFact implementation_fact(SourcePos p) {
    ImplementationFact f;
    f.pos = p;
    expect('(');
    f.relation = RelationId(ident("relation id"));
    expect(',');
    const Token& body = take();
    if (body.kind != Tok::String) {
      fail("expected quoted implementation body, found " + describe(body), lines_.at(body.offset));
    }
    BodyLexer lexer(text_, body.offset + 1, body.end - 1, lines_);
    f.statements = BodyParser(lexer.run(), lines_).run();
    expect(')');
    return f;
  }

  std::string_view text_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const LineIndex& lines_;
};

// ---------------------------------------------------------------------------
// Semantic checks

void check_references(const Expr& e, const FunctionFact& sig, const std::set<std::string>& lets) {
  switch (e.kind) {
    case ExprKind::InputValue:
    case ExprKind::InputTime:
      if (std::find(sig.inputs.begin(), sig.inputs.end(), VariableId(e.name)) == sig.inputs.end()) {
        fail("'" + e.name + "' is not an input of relation " + sig.relation.str(), e.pos);
      }
      break;
    case ExprKind::Name:
      if (!lets.contains(e.name)) {
        const bool is_input =
            std::find(sig.inputs.begin(), sig.inputs.end(), VariableId(e.name)) != sig.inputs.end();
        fail(is_input ? "input '" + e.name + "' needs a '.v' or '.t' accessor"
                      : "unknown name '" + e.name + "'",
             e.pos);
      }
      break;
    default:
      break;
  }
  for (const auto& a : e.args) check_references(*a, sig, lets);
}

RelationExpr bind_body(const ImplementationFact& impl, const FunctionFact& sig,
                       std::vector<Diagnostic>& warnings) {
  RelationExpr out{sig.relation, sig.output, sig.inputs, {}};
  std::set<std::string> lets;
  int value_assignments = 0;
  for (const auto& st : impl.statements) {
    check_references(*st.expr, sig, lets);
    switch (st.target) {
      case Statement::Target::Let: {
        const bool clashes = VariableId(st.name) == sig.output ||
                             std::find(sig.inputs.begin(), sig.inputs.end(), VariableId(st.name)) !=
                                 sig.inputs.end();
        if (clashes) fail("let binding '" + st.name + "' shadows a relation variable", st.pos);
        if (kBuiltins.contains(st.name)) fail("'" + st.name + "' is a reserved name", st.pos);
        lets.insert(st.name);
        break;
      }
      case Statement::Target::OutputValue:
      case Statement::Target::OutputTime:
        if (VariableId(st.name) != sig.output) {
          fail("relation " + sig.relation.str() + " outputs " + sig.output.str() +
                   ", cannot assign to '" + st.name + "'",
               st.pos);
        }
        if (st.target == Statement::Target::OutputValue) {
          ++value_assignments;
        } else {
          warnings.push_back({st.pos, "assignment to " + st.name +
                                          ".t is ignored; output time is the intersection of "
                                          "input times"});
        }
        break;
    }
    out.statements.push_back(st);
  }
  if (value_assignments != 1) {
    fail("implementation of " + sig.relation.str() + " must assign " + sig.output.str() +
             ".v exactly once (found " + std::to_string(value_assignments) + ")",
         impl.pos);
  }
  return out;
}

}  // namespace

KbValidationError::KbValidationError(std::vector<Violation> violations, SourcePos pos)
    : ParseError(
          [&] {
            std::string msg = "invalid knowledge base:";
            for (const auto& v : violations) msg += "\n  " + std::string(to_string(v.kind)) + ": " + v.message;
            return msg;
          }(),
          pos.line, pos.column),
      violations_(std::move(violations)) {}

KbDocument parse_document(std::string_view text) {
  LineIndex lines(text);
  DocLexer lexer(text, lines);
  return DocParser(text, lexer.run(), lines).run();
}

ParsedKb build_kb(KbDocument doc) {
  ParsedKb out;
  std::vector<const FunctionFact*> functions;
  for (const auto& fact : doc.facts) {
    if (const auto* f = std::get_if<FunctionFact>(&fact)) {
      out.kb.declare_variable(f->output);
      for (const auto& in : f->inputs) out.kb.declare_variable(in);
      out.kb.add_relation(Relation{f->relation, f->output, f->inputs});
      functions.push_back(f);
    } else if (const auto* f = std::get_if<ItomsOfFact>(&fact)) {
      out.kb.declare_variable(f->variable);
    }
  }

  for (const auto& fact : doc.facts) {
    const auto* f = std::get_if<ItomsOfFact>(&fact);
    if (!f) continue;
    for (const auto& sig : f->signals) {
      try {
        out.kb.bind(f->variable, sig);
      } catch (const KnowledgeBaseError& e) {
        fail(e.what(), f->pos);
      }
    }
  }

  auto violations = out.kb.validate();
  if (!violations.empty()) {
    SourcePos where = functions.empty() ? SourcePos{1, 1} : functions.front()->pos;
    std::set<RelationId> seen;
    for (const FunctionFact* f : functions) {
      std::set<VariableId> ins(f->inputs.begin(), f->inputs.end());
      const bool bad = !seen.insert(f->relation).second || ins.contains(f->output) ||
                       ins.size() != f->inputs.size() || f->inputs.empty();
      if (bad) {
        where = f->pos;
        break;
      }
    }
    throw KbValidationError(std::move(violations), where);
  }

  for (const auto& fact : doc.facts) {
    const auto* impl = std::get_if<ImplementationFact>(&fact);
    if (!impl) continue;
    auto sig = std::find_if(functions.begin(), functions.end(),
                            [&](const FunctionFact* f) { return f->relation == impl->relation; });
    if (sig == functions.end()) {
      fail("implementation for unknown relation " + impl->relation.str(), impl->pos);
    }
    if (out.implementations.contains(impl->relation)) {
      fail("relation " + impl->relation.str() + " has more than one implementation", impl->pos);
    }
    out.implementations.emplace(impl->relation, bind_body(*impl, **sig, out.warnings));
  }

  out.document = std::move(doc);
  return out;
}

ParsedKb load_kb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open knowledge base " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_kb(buf.str());
  } catch (ParseError& e) {
    e.set_file(path.string());
    throw;
  }
}

namespace {

bool same_fact(const Fact& a, const Fact& b) {
  if (a.index() != b.index()) return false;
  if (const auto* fa = std::get_if<FunctionFact>(&a)) {
    const auto& fb = std::get<FunctionFact>(b);
    return fa->output == fb.output && fa->relation == fb.relation && fa->inputs == fb.inputs;
  }
  if (const auto* fa = std::get_if<ItomsOfFact>(&a)) {
    const auto& fb = std::get<ItomsOfFact>(b);
    return fa->variable == fb.variable && fa->signals == fb.signals;
  }
  const auto& ia = std::get<ImplementationFact>(a);
  const auto& ib = std::get<ImplementationFact>(b);
  if (ia.relation != ib.relation || ia.statements.size() != ib.statements.size()) return false;
  for (std::size_t i = 0; i < ia.statements.size(); ++i) {
    if (!same_statement(ia.statements[i], ib.statements[i])) return false;
  }
  return true;
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F render) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += render(xs[i]);
  }
  return out;
}

}  // namespace

bool same_document(const KbDocument& a, const KbDocument& b) {
  if (a.facts.size() != b.facts.size()) return false;
  for (std::size_t i = 0; i < a.facts.size(); ++i) {
    if (!same_fact(a.facts[i], b.facts[i])) return false;
  }
  return true;
}

std::string print_document(const KbDocument& doc) {
  std::string out;
  for (const auto& fact : doc.facts) {
    if (const auto* f = std::get_if<FunctionFact>(&fact)) {
      out += "function(" + f->output.str() + ", " + f->relation.str() + ", [" +
             join(f->inputs, [](const VariableId& v) { return v.str(); }) + "]).\n";
    } else if (const auto* f = std::get_if<ItomsOfFact>(&fact)) {
      out += "itomsOf(" + f->variable.str() + ", [" +
             join(f->signals, [](const SignalId& s) { return "\"" + s.str() + "\""; }) + "]).\n";
    } else {
      const auto& impl = std::get<ImplementationFact>(fact);
      out += "implementation(" + impl.relation.str() + ", \"\n";
      for (const auto& st : impl.statements) {
        switch (st.target) {
          case Statement::Target::Let:
            out += st.name;
            break;
          case Statement::Target::OutputValue:
            out += st.name + ".v";
            break;
          case Statement::Target::OutputTime:
            out += st.name + ".t";
            break;
        }
        out += " = " + to_source(*st.expr) + "\n";
      }
      out += "\").\n";
    }
  }
  return out;
}

}  // namespace rmon
