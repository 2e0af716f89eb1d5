#pragma once
// LaTeX-subset expression parsing: =, + - * /, implicit multiplication,
// \frac, ^, \ln, \log (folded to ln), \exp, e^{...}, subscripted symbols as
// atomic identifiers. Compiles to a postfix program for vectorized fitting.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace amkg::eqn {

enum class Op {
    Variable,
    Parameter,
    Constant,
    Add,
    Subtract,
    Multiply,
    Divide,
    Power,
    Neg,
    Ln,
    Exp,
};

struct Expression {
    Op op = Op::Constant;
    double value = 0.0;      // Constant
    std::string symbol;      // Variable name / Parameter original spelling
    int param_index = 0;     // Parameter: i of k_i
    std::vector<Expression> children;

    static Expression variable(std::string name);
    static Expression parameter(int index, std::string spelled);
    static Expression constant(double v);
    static Expression make(Op op, std::vector<Expression> children);
};

bool structurally_equal(const Expression& a, const Expression& b);

struct ParsedEquation {
    std::string target;  // LHS symbol, original spelling
    Expression rhs;
};

// Parses "<symbol> = <expr>". Throws ParseError (with byte offset) or
// UnsupportedError (naming the command).
ParsedEquation parse_latex(const std::string& latex);
// Parses a bare expression with no equality sign.
Expression parse_expression(const std::string& latex);

// Canonical LaTeX normal form; parse(render(parse(x))) is structurally
// identical to parse(x).
std::string render_latex(const Expression& e);
std::string render_latex(const ParsedEquation& eq);

// English rendering used for formula embeddings.
std::string render_words(const Expression& e);
std::string render_words(const ParsedEquation& eq);

// Free variable names (excludes k_i parameters), sorted unique.
std::vector<std::string> variable_symbols(const Expression& e);
// k_i indices, sorted unique.
std::vector<int> parameter_indices(const Expression& e);

// Tolerant lexical scan of symbol tokens in a LaTeX string, first-seen
// order, deduplicated. Never throws.
std::vector<std::string> extract_symbols(const std::string& latex);

// Fit-ready callable: inputs and parameters are bound to positions once,
// evaluation maps (x, theta) to a prediction. Domain violations produce
// non-finite values rather than exceptions.
class Evaluator {
public:
    Evaluator(const Expression& rhs,
              std::vector<std::string> inputs,
              std::vector<std::string> parameters,
              const std::map<std::string, double>& bound_constants = {});

    double operator()(std::span<const double> x, std::span<const double> theta) const;

    // Vectorized: columns[i] belongs to inputs()[i]; all must share length.
    std::vector<double> evaluate_columns(const std::vector<const std::vector<double>*>& columns,
                                         std::span<const double> theta) const;

    const std::vector<std::string>& inputs() const { return inputs_; }
    const std::vector<std::string>& parameters() const { return parameters_; }

private:
    enum class Code { PushConst, PushInput, PushParam, Add, Sub, Mul, Div, Pow, Neg, Ln, Exp };
    struct Instr {
        Code code;
        double value = 0.0;
        std::size_t slot = 0;
    };
    std::vector<Instr> program_;
    std::vector<std::string> inputs_;
    std::vector<std::string> parameters_;
    std::size_t max_depth_ = 0;
};

}  // namespace amkg::eqn
