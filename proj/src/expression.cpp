#include "amkg/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "amkg/errors.hpp"

namespace amkg::eqn {

Expression Expression::variable(std::string name) {
    Expression e;
    e.op = Op::Variable;
    e.symbol = std::move(name);
    return e;
}

Expression Expression::parameter(int index, std::string spelled) {
    Expression e;
    e.op = Op::Parameter;
    e.param_index = index;
    e.symbol = std::move(spelled);
    return e;
}

Expression Expression::constant(double v) {
    Expression e;
    e.op = Op::Constant;
    e.value = v;
    return e;
}

Expression Expression::make(Op op, std::vector<Expression> children) {
    Expression e;
    e.op = op;
    e.children = std::move(children);
    return e;
}

bool structurally_equal(const Expression& a, const Expression& b) {
    if (a.op != b.op) return false;
    switch (a.op) {
        case Op::Constant:
            if (a.value != b.value) return false;
            break;
        case Op::Variable:
            if (a.symbol != b.symbol) return false;
            break;
        case Op::Parameter:
            if (a.param_index != b.param_index) return false;
            break;
        default:
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(a.children[i], b.children[i])) return false;
    return true;
}

// ── Lexer ────────────────────────────────────────────────────────────────

namespace {

enum class Tok { Number, Symbol, Frac, Ln, Exp, Plus, Minus, Star, Slash, Caret, Equals, LParen, RParen, LBrace, RBrace, End };

struct Token {
    Tok type = Tok::End;
    std::string text;
    double number = 0.0;
    std::size_t offset = 0;
};

const std::set<std::string>& greek_commands() {
    static const std::set<std::string> names = {
        "alpha", "beta",  "gamma", "delta", "epsilon", "varepsilon", "zeta", "eta",
        "theta", "vartheta", "iota", "kappa", "lambda", "mu", "nu", "xi", "omicron",
        "pi", "rho", "sigma", "varsigma", "tau", "upsilon", "phi", "varphi", "chi",
        "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma",
        "Upsilon", "Phi", "Psi", "Omega",
    };
    return names;
}

bool is_skipped_command(const std::string& name) {
    static const std::set<std::string> skipped = {
        "left", "right", "quad", "qquad", "mathrm", "mathit", "mathbf", "text",
        ",", ";", "!", " ", "big", "Big", "bigl", "bigr", "Bigl", "Bigr",
    };
    return skipped.count(name) > 0;
}

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;

    explicit Lexer(const std::string& s) : src(s) {}

    // Reads a subscript after '_': single char, brace group, or Greek command.
    std::string read_subscript() {
        if (pos >= src.size()) throw ParseError("dangling subscript", pos);
        if (src[pos] == '{') {
            std::size_t close = src.find('}', pos);
            if (close == std::string::npos) throw ParseError("unterminated subscript brace", pos);
            std::string sub = src.substr(pos + 1, close - pos - 1);
            pos = close + 1;
            return sub;
        }
        if (src[pos] == '\\') {
            std::size_t start = ++pos;
            while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
            return src.substr(start, pos - start);
        }
        return std::string(1, src[pos++]);
    }

    std::string read_symbol(char first) {
        std::string name(1, first);
        if (pos < src.size() && src[pos] == '_') {
            ++pos;
            name += "_" + read_subscript();
        }
        return name;
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos < src.size()) {
            char c = src[pos];
            std::size_t at = pos;
            if (std::isspace(static_cast<unsigned char>(c)) || c == '$') {
                ++pos;
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos + 1 < src.size() &&
                 std::isdigit(static_cast<unsigned char>(src[pos + 1])))) {
                std::size_t start = pos;
                while (pos < src.size() &&
                       (std::isdigit(static_cast<unsigned char>(src[pos])) || src[pos] == '.'))
                    ++pos;
                double v = 0.0;
                auto text = src.substr(start, pos - start);
                auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
                if (ec != std::errc()) throw ParseError("bad number '" + text + "'", start);
                out.push_back({Tok::Number, text, v, at});
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                ++pos;
                out.push_back({Tok::Symbol, read_symbol(c), 0.0, at});
                continue;
            }
            if (c == '\\') {
                std::size_t start = ++pos;
                while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
                std::string name = src.substr(start, pos - start);
                if (name.empty() && pos < src.size()) name = std::string(1, src[pos++]);
                if (name == "frac" || name == "dfrac") {
                    out.push_back({Tok::Frac, name, 0.0, at});
                } else if (name == "ln" || name == "log") {
                    out.push_back({Tok::Ln, name, 0.0, at});
                } else if (name == "exp") {
                    out.push_back({Tok::Exp, name, 0.0, at});
                } else if (name == "cdot" || name == "times") {
                    out.push_back({Tok::Star, name, 0.0, at});
                } else if (is_skipped_command(name)) {
                    continue;
                } else if (greek_commands().count(name)) {
                    std::string sym = name;
                    if (pos < src.size() && src[pos] == '_') {
                        ++pos;
                        sym += "_" + read_subscript();
                    }
                    out.push_back({Tok::Symbol, sym, 0.0, at});
                } else {
                    throw UnsupportedError("\\" + name);
                }
                continue;
            }
            switch (c) {
                case '+': out.push_back({Tok::Plus, "+", 0.0, at}); break;
                case '-': out.push_back({Tok::Minus, "-", 0.0, at}); break;
                case '*': out.push_back({Tok::Star, "*", 0.0, at}); break;
                case '/': out.push_back({Tok::Slash, "/", 0.0, at}); break;
                case '^': out.push_back({Tok::Caret, "^", 0.0, at}); break;
                case '=': out.push_back({Tok::Equals, "=", 0.0, at}); break;
                case '(': out.push_back({Tok::LParen, "(", 0.0, at}); break;
                case ')': out.push_back({Tok::RParen, ")", 0.0, at}); break;
                case '{': out.push_back({Tok::LBrace, "{", 0.0, at}); break;
                case '}': out.push_back({Tok::RBrace, "}", 0.0, at}); break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", at);
            }
            ++pos;
        }
        out.push_back({Tok::End, "", 0.0, src.size()});
        return out;
    }
};

// k_1 / K_1 style symbols fold to the parameter convention.
std::optional<int> parameter_index_of(const std::string& symbol) {
    if (symbol.size() < 3 || (symbol[0] != 'k' && symbol[0] != 'K') || symbol[1] != '_')
        return std::nullopt;
    int idx = 0;
    for (std::size_t i = 2; i < symbol.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(symbol[i]))) return std::nullopt;
        idx = idx * 10 + (symbol[i] - '0');
    }
    return idx;
}

// ── Parser ───────────────────────────────────────────────────────────────

struct Parser {
    std::vector<Token> toks;
    std::size_t i = 0;

    const Token& peek() const { return toks[i]; }
    Token take() { return toks[i++]; }
    void expect(Tok t, const char* what) {
        if (peek().type != t) throw ParseError(std::string("expected ") + what, peek().offset);
        ++i;
    }

    bool starts_primary() const {
        switch (peek().type) {
            case Tok::Number:
            case Tok::Symbol:
            case Tok::Frac:
            case Tok::Ln:
            case Tok::Exp:
            case Tok::LParen:
            case Tok::LBrace:
                return true;
            default:
                return false;
        }
    }

    Expression expr() {
        Expression t = term();
        while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
            Op op = take().type == Tok::Plus ? Op::Add : Op::Subtract;
            t = Expression::make(op, {std::move(t), term()});
        }
        return t;
    }

    Expression term() {
        Expression f = unary();
        while (true) {
            if (peek().type == Tok::Star) {
                take();
                f = Expression::make(Op::Multiply, {std::move(f), unary()});
            } else if (peek().type == Tok::Slash) {
                take();
                f = Expression::make(Op::Divide, {std::move(f), unary()});
            } else if (starts_primary()) {
                f = Expression::make(Op::Multiply, {std::move(f), unary()});
            } else {
                break;
            }
        }
        return f;
    }

    Expression unary() {
        if (peek().type == Tok::Minus) {
            take();
            return Expression::make(Op::Neg, {unary()});
        }
        if (peek().type == Tok::Plus) {
            take();
            return unary();
        }
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (peek().type == Tok::Caret) {
            take();
            Expression exponent = exponent_operand();
            if (base.op == Op::Variable && base.symbol == "e")
                return Expression::make(Op::Exp, {std::move(exponent)});
            return Expression::make(Op::Power, {std::move(base), std::move(exponent)});
        }
        return base;
    }

    Expression exponent_operand() {
        if (peek().type == Tok::LBrace) {
            take();
            Expression e = expr();
            expect(Tok::RBrace, "'}'");
            return e;
        }
        return unary();
    }

    // Argument of \ln or \exp: a delimited group or one tight operand.
    Expression func_arg() {
        if (peek().type == Tok::LParen) {
            take();
            Expression e = expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (peek().type == Tok::LBrace) {
            take();
            Expression e = expr();
            expect(Tok::RBrace, "'}'");
            return e;
        }
        return unary();
    }

    Expression primary() {
        const Token& t = peek();
        switch (t.type) {
            case Tok::Number: {
                Token tok = take();
                return Expression::constant(tok.number);
            }
            case Tok::Symbol: {
                Token tok = take();
                if (auto idx = parameter_index_of(tok.text))
                    return Expression::parameter(*idx, tok.text);
                return Expression::variable(tok.text);
            }
            case Tok::Frac: {
                take();
                expect(Tok::LBrace, "'{' after \\frac");
                Expression num = expr();
                expect(Tok::RBrace, "'}'");
                expect(Tok::LBrace, "'{'");
                Expression den = expr();
                expect(Tok::RBrace, "'}'");
                return Expression::make(Op::Divide, {std::move(num), std::move(den)});
            }
            case Tok::Ln: {
                take();
                return Expression::make(Op::Ln, {func_arg()});
            }
            case Tok::Exp: {
                take();
                return Expression::make(Op::Exp, {func_arg()});
            }
            case Tok::LParen: {
                take();
                Expression e = expr();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::LBrace: {
                take();
                Expression e = expr();
                expect(Tok::RBrace, "'}'");
                return e;
            }
            default:
                throw ParseError("expected a value, symbol or function", t.offset);
        }
    }
};

}  // namespace

ParsedEquation parse_latex(const std::string& latex) {
    Parser p{Lexer(latex).run()};
    Expression lhs = p.expr();
    if (p.peek().type != Tok::Equals)
        throw ParseError("expected '=' between target and expression", p.peek().offset);
    p.take();
    if (lhs.op != Op::Variable && lhs.op != Op::Parameter)
        throw ParseError("left-hand side must be a single symbol", 0);
    Expression rhs = p.expr();
    if (p.peek().type != Tok::End)
        throw ParseError("trailing input after expression", p.peek().offset);
    return {lhs.symbol, std::move(rhs)};
}

Expression parse_expression(const std::string& latex) {
    Parser p{Lexer(latex).run()};
    Expression e = p.expr();
    if (p.peek().type != Tok::End)
        throw ParseError("trailing input after expression", p.peek().offset);
    return e;
}

// ── Rendering ────────────────────────────────────────────────────────────

namespace {

int precedence(const Expression& e) {
    switch (e.op) {
        case Op::Add:
        case Op::Subtract:
            return 1;
        case Op::Neg:
            return 1;
        case Op::Multiply:
            return 2;
        case Op::Power:
            return 3;
        default:
            return 4;  // leaves and self-delimited forms
    }
}

std::string format_constant(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
    return std::string(buf, p);
}

std::string render_latex_prec(const Expression& e, int parent_prec) {
    std::string out;
    switch (e.op) {
        case Op::Variable:
        case Op::Parameter:
            out = e.op == Op::Parameter ? "k_" + std::to_string(e.param_index) : e.symbol;
            break;
        case Op::Constant:
            out = format_constant(e.value);
            break;
        case Op::Add:
            out = render_latex_prec(e.children[0], 1) + " + " + render_latex_prec(e.children[1], 2);
            break;
        case Op::Subtract:
            out = render_latex_prec(e.children[0], 1) + " - " + render_latex_prec(e.children[1], 2);
            break;
        case Op::Multiply:
            out = render_latex_prec(e.children[0], 2) + " \\cdot " +
                  render_latex_prec(e.children[1], 2);
            break;
        case Op::Divide:
            out = "\\frac{" + render_latex_prec(e.children[0], 0) + "}{" +
                  render_latex_prec(e.children[1], 0) + "}";
            return out;  // self-delimited
        case Op::Power: {
            std::string base = render_latex_prec(e.children[0], 4);
            // A bare "e" base would re-lex as the exponential shorthand.
            if (e.children[0].op == Op::Variable && e.children[0].symbol == "e")
                base = "(" + base + ")";
            out = base + "^{" + render_latex_prec(e.children[1], 0) + "}";
            break;
        }
        case Op::Neg:
            out = "-" + render_latex_prec(e.children[0], 2);
            break;
        case Op::Ln:
            return "\\ln\\left(" + render_latex_prec(e.children[0], 0) + "\\right)";
        case Op::Exp:
            return "\\exp\\left(" + render_latex_prec(e.children[0], 0) + "\\right)";
    }
    if (precedence(e) < parent_prec) out = "(" + out + ")";
    return out;
}

}  // namespace

std::string render_latex(const Expression& e) { return render_latex_prec(e, 0); }

std::string render_latex(const ParsedEquation& eq) {
    return eq.target + " = " + render_latex(eq.rhs);
}

std::string render_words(const Expression& e) {
    switch (e.op) {
        case Op::Variable:
        case Op::Parameter:
            return e.symbol;
        case Op::Constant:
            return format_constant(e.value);
        case Op::Add:
            return render_words(e.children[0]) + " plus " + render_words(e.children[1]);
        case Op::Subtract:
            return render_words(e.children[0]) + " minus " + render_words(e.children[1]);
        case Op::Multiply:
            return render_words(e.children[0]) + " times " + render_words(e.children[1]);
        case Op::Divide:
            return render_words(e.children[0]) + " divided by " + render_words(e.children[1]);
        case Op::Power:
            return render_words(e.children[0]) + " to the power of " + render_words(e.children[1]);
        case Op::Neg:
            return "negative " + render_words(e.children[0]);
        case Op::Ln:
            return "natural log of " + render_words(e.children[0]);
        case Op::Exp:
            return "exponential of " + render_words(e.children[0]);
    }
    return "";
}

std::string render_words(const ParsedEquation& eq) {
    return eq.target + " equals " + render_words(eq.rhs);
}

namespace {

void walk_symbols(const Expression& e, std::set<std::string>& vars, std::set<int>& params) {
    if (e.op == Op::Variable) vars.insert(e.symbol);
    if (e.op == Op::Parameter) params.insert(e.param_index);
    for (const auto& c : e.children) walk_symbols(c, vars, params);
}

}  // namespace

std::vector<std::string> variable_symbols(const Expression& e) {
    std::set<std::string> vars;
    std::set<int> params;
    walk_symbols(e, vars, params);
    return {vars.begin(), vars.end()};
}

std::vector<int> parameter_indices(const Expression& e) {
    std::set<std::string> vars;
    std::set<int> params;
    walk_symbols(e, vars, params);
    return {params.begin(), params.end()};
}

std::vector<std::string> extract_symbols(const std::string& latex) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto push = [&](const std::string& s) {
        if (seen.insert(s).second) out.push_back(s);
    };
    std::size_t i = 0;
    auto read_sub = [&]() -> std::string {
        if (i >= latex.size()) return "";
        if (latex[i] == '{') {
            std::size_t close = latex.find('}', i);
            if (close == std::string::npos) {
                i = latex.size();
                return "";
            }
            std::string sub = latex.substr(i + 1, close - i - 1);
            i = close + 1;
            return sub;
        }
        if (latex[i] == '\\') {
            std::size_t start = ++i;
            while (i < latex.size() && std::isalpha(static_cast<unsigned char>(latex[i]))) ++i;
            return latex.substr(start, i - start);
        }
        return std::string(1, latex[i++]);
    };
    while (i < latex.size()) {
        char c = latex[i];
        if (std::isalpha(static_cast<unsigned char>(c))) {
            ++i;
            std::string sym(1, c);
            if (i < latex.size() && latex[i] == '_') {
                ++i;
                sym += "_" + read_sub();
            }
            push(sym);
            continue;
        }
        if (c == '\\') {
            std::size_t start = ++i;
            while (i < latex.size() && std::isalpha(static_cast<unsigned char>(latex[i]))) ++i;
            std::string name = latex.substr(start, i - start);
            if (greek_commands().count(name)) {
                std::string sym = name;
                if (i < latex.size() && latex[i] == '_') {
                    ++i;
                    sym += "_" + read_sub();
                }
                push(sym);
            }
            continue;
        }
        ++i;
    }
    return out;
}

// ── Evaluator ────────────────────────────────────────────────────────────

Evaluator::Evaluator(const Expression& rhs,
                     std::vector<std::string> inputs,
                     std::vector<std::string> parameters,
                     const std::map<std::string, double>& bound_constants)
    : inputs_(std::move(inputs)), parameters_(std::move(parameters)) {
    auto index_of = [](const std::vector<std::string>& v, const std::string& s) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] == s) return i;
        return std::nullopt;
    };

    std::size_t depth = 0;
    std::size_t max_depth = 0;
    auto emit = [&](Instr ins, int pops) {
        depth = depth - pops + 1;
        max_depth = std::max(max_depth, depth);
        program_.push_back(ins);
    };

    // Postorder compile.
    auto compile = [&](auto&& self, const Expression& e) -> void {
        switch (e.op) {
            case Op::Constant:
                emit({Code::PushConst, e.value, 0}, 0);
                return;
            case Op::Parameter: {
                std::string canonical = "k_" + std::to_string(e.param_index);
                if (auto slot = index_of(parameters_, canonical)) {
                    emit({Code::PushParam, 0.0, *slot}, 0);
                    return;
                }
                throw CompileError("unbound parameter " + canonical);
            }
            case Op::Variable: {
                if (auto slot = index_of(inputs_, e.symbol)) {
                    emit({Code::PushInput, 0.0, *slot}, 0);
                    return;
                }
                if (auto slot = index_of(parameters_, e.symbol)) {
                    emit({Code::PushParam, 0.0, *slot}, 0);
                    return;
                }
                if (auto it = bound_constants.find(e.symbol); it != bound_constants.end()) {
                    emit({Code::PushConst, it->second, 0}, 0);
                    return;
                }
                throw CompileError("unbound symbol " + e.symbol);
            }
            default:
                break;
        }
        for (const auto& c : e.children) self(self, c);
        switch (e.op) {
            case Op::Add: emit({Code::Add, 0.0, 0}, 2); break;
            case Op::Subtract: emit({Code::Sub, 0.0, 0}, 2); break;
            case Op::Multiply: emit({Code::Mul, 0.0, 0}, 2); break;
            case Op::Divide: emit({Code::Div, 0.0, 0}, 2); break;
            case Op::Power: emit({Code::Pow, 0.0, 0}, 2); break;
            case Op::Neg: emit({Code::Neg, 0.0, 0}, 1); break;
            case Op::Ln: emit({Code::Ln, 0.0, 0}, 1); break;
            case Op::Exp: emit({Code::Exp, 0.0, 0}, 1); break;
            default: break;
        }
    };
    compile(compile, rhs);
    max_depth_ = max_depth;
}

double Evaluator::operator()(std::span<const double> x, std::span<const double> theta) const {
    std::vector<double> stack(max_depth_);
    std::size_t top = 0;
    for (const auto& ins : program_) {
        switch (ins.code) {
            case Code::PushConst: stack[top++] = ins.value; break;
            case Code::PushInput: stack[top++] = x[ins.slot]; break;
            case Code::PushParam: stack[top++] = theta[ins.slot]; break;
            case Code::Add: --top; stack[top - 1] += stack[top]; break;
            case Code::Sub: --top; stack[top - 1] -= stack[top]; break;
            case Code::Mul: --top; stack[top - 1] *= stack[top]; break;
            case Code::Div: --top; stack[top - 1] /= stack[top]; break;
            case Code::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
            case Code::Neg: stack[top - 1] = -stack[top - 1]; break;
            case Code::Ln: stack[top - 1] = std::log(stack[top - 1]); break;
            case Code::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
        }
    }
    return stack[0];
}

std::vector<double> Evaluator::evaluate_columns(
    const std::vector<const std::vector<double>*>& columns, std::span<const double> theta) const {
    std::size_t rows = columns.empty() ? 0 : columns.front()->size();
    std::vector<double> out(rows);
    std::vector<double> row(columns.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) row[c] = (*columns[c])[r];
        out[r] = (*this)(row, theta);
    }
    return out;
}

}  // namespace amkg::eqn
