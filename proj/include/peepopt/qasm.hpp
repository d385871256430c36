#pragma once

// OpenQASM 2.0 subset reader/writer.
//
// Accepted statements: OPENQASM, include (ignored), qreg (exactly one),
// creg, cx, rx, ry, rz, u3, u (alias of u3), measure (checked then dropped),
// barrier (ignored). Angle expressions may use decimal literals, `pi`,
// + - * / ^, parentheses and sin/cos/tan/exp/ln/sqrt.

#include "peepopt/circuit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace peepopt {

class QasmError : public Error {
  public:
    enum class Kind { Syntax, UnsupportedGate, Range };

    QasmError(Kind kind, std::size_t line, std::size_t column, std::string const& what)
        : Error{"line " + std::to_string(line) + ":" + std::to_string(column) + ": " + what}
        , kind_{kind}
        , line_{line}
        , column_{column}
    {}

    [[nodiscard]] auto kind() const noexcept -> Kind { return kind_; }
    [[nodiscard]] auto line() const noexcept -> std::size_t { return line_; }
    [[nodiscard]] auto column() const noexcept -> std::size_t { return column_; }

  private:
    Kind kind_;
    std::size_t line_;
    std::size_t column_;
};

namespace detail::qasm {

enum class Tok { Ident, Number, String, Symbol, Arrow, End };

struct Token {
    Tok type = Tok::End;
    std::string_view text;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
  public:
    explicit Lexer(std::string_view src) : src_{src} {}

    auto next() -> Token
    {
        skip_space();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) { return t; }
        auto const start = pos_;
        char const c = src_[pos_];
        if (is_alpha(c)) {
            while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]))) { advance(); }
            t.type = Tok::Ident;
        } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
            while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) { advance(); }
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                auto save = pos_;
                auto save_col = col_;
                advance();
                if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) { advance(); }
                if (pos_ < src_.size() && is_digit(src_[pos_])) {
                    while (pos_ < src_.size() && is_digit(src_[pos_])) { advance(); }
                } else {
                    pos_ = save;
                    col_ = save_col;
                }
            }
            t.type = Tok::Number;
        } else if (c == '"') {
            advance();
            while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') { advance(); }
            if (pos_ >= src_.size() || src_[pos_] != '"') {
                throw QasmError{QasmError::Kind::Syntax, t.line, t.column, "unterminated string"};
            }
            advance();
            t.type = Tok::String;
        } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
            advance();
            advance();
            t.type = Tok::Arrow;
        } else {
            advance();
            t.type = Tok::Symbol;
        }
        t.text = src_.substr(start, pos_ - start);
        return t;
    }

  private:
    static auto is_alpha(char c) noexcept -> bool
    {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static auto is_digit(char c) noexcept -> bool { return c >= '0' && c <= '9'; }

    void advance() noexcept
    {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_space() noexcept
    {
        while (pos_ < src_.size()) {
            char const c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
                while (pos_ < src_.size() && src_[pos_] != '\n') { advance(); }
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

struct Operand {
    std::string_view reg;
    std::optional<std::size_t> index;
    Token where;
};

class Parser {
  public:
    explicit Parser(std::string_view src) : lex_{src} { cur_ = lex_.next(); }

    auto run() -> Circuit
    {
        if (is_ident("OPENQASM")) {
            bump();
            if (cur_.type != Tok::Number) { fail(cur_, "expected version number"); }
            if (cur_.text != "2.0" && cur_.text != "2") {
                fail(cur_, "unsupported OpenQASM version " + std::string{cur_.text});
            }
            bump();
            expect(";");
        }
        while (cur_.type != Tok::End) { statement(); }
        if (!qreg_) { fail(cur_, "no quantum register declared"); }
        return std::move(*circuit_);
    }

  private:
    static constexpr int max_depth = 256;

    [[noreturn]] static void fail(Token const& t, std::string const& what,
                                  QasmError::Kind kind = QasmError::Kind::Syntax)
    {
        throw QasmError{kind, t.line, t.column, what};
    }

    auto is_ident(std::string_view s) const -> bool { return cur_.type == Tok::Ident && cur_.text == s; }
    auto is_symbol(std::string_view s) const -> bool { return cur_.type == Tok::Symbol && cur_.text == s; }
    void bump() { cur_ = lex_.next(); }

    void expect(std::string_view sym)
    {
        if (!is_symbol(sym)) {
            auto const got = cur_.type == Tok::End ? std::string{"end of input"} : "'" + std::string{cur_.text} + "'";
            fail(cur_, "expected '" + std::string{sym} + "', got " + got);
        }
        bump();
    }

    auto identifier() -> Token
    {
        if (cur_.type != Tok::Ident) { fail(cur_, "expected identifier"); }
        auto t = cur_;
        bump();
        return t;
    }

    auto integer() -> std::size_t
    {
        if (cur_.type != Tok::Number) { fail(cur_, "expected integer"); }
        std::size_t v = 0;
        auto const* first = cur_.text.data();
        auto const* last = first + cur_.text.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last) { fail(cur_, "invalid integer '" + std::string{cur_.text} + "'"); }
        bump();
        return v;
    }

    void statement()
    {
        auto const head = cur_;
        if (head.type != Tok::Ident) { fail(head, "expected statement"); }
        auto const name = head.text;
        if (name == "include") {
            bump();
            if (cur_.type != Tok::String) { fail(cur_, "expected file name string"); }
            bump();
            expect(";");
        } else if (name == "qreg" || name == "creg") {
            bump();
            auto const reg = identifier();
            expect("[");
            auto const size_tok = cur_;
            auto const size = integer();
            expect("]");
            expect(";");
            if (size == 0 || size > 64) { fail(size_tok, "register size must be in [1, 64]", QasmError::Kind::Range); }
            if (name == "qreg") {
                if (qreg_) { fail(head, "only one quantum register is supported"); }
                qreg_ = reg.text;
                circuit_.emplace(size);
            } else {
                for (auto const& [n, s] : cregs_) {
                    if (n == reg.text) { fail(reg, "duplicate classical register"); }
                }
                cregs_.emplace_back(reg.text, size);
            }
        } else if (name == "barrier") {
            bump();
            for (auto const& op : operand_list()) { (void)quantum_targets(op); }
            expect(";");
        } else if (name == "measure") {
            bump();
            auto const q = operand();
            if (cur_.type != Tok::Arrow) { fail(cur_, "expected '->'"); }
            bump();
            auto const c = operand();
            expect(";");
            auto const qn = quantum_targets(q).size();
            auto const csize = creg_size(c);
            if (c.index) {
                if (*c.index >= csize) { fail(c.where, "classical bit index out of range", QasmError::Kind::Range); }
                if (qn != 1) { fail(c.where, "measure arity mismatch"); }
            } else if (qn != csize) {
                fail(c.where, "measure arity mismatch");
            }
        } else {
            gate_call(head);
        }
    }

    auto gate_kind(Token const& t) -> GateKind
    {
        auto const n = t.text;
        if (n == "cx" || n == "CX") { return GateKind::CX; }
        if (n == "rx") { return GateKind::RX; }
        if (n == "ry") { return GateKind::RY; }
        if (n == "rz") { return GateKind::RZ; }
        if (n == "u3" || n == "u" || n == "U") { return GateKind::U3; }
        fail(t, "unsupported gate '" + std::string{n} + "'", QasmError::Kind::UnsupportedGate);
    }

    void gate_call(Token const& head)
    {
        auto const kind = gate_kind(head);
        bump();
        std::vector<double> params;
        if (is_symbol("(")) {
            bump();
            if (!is_symbol(")")) {
                params.push_back(checked_expr());
                while (is_symbol(",")) {
                    bump();
                    params.push_back(checked_expr());
                }
            }
            expect(")");
        }
        if (params.size() != param_count(kind)) {
            fail(head, std::string{gate_name(kind)} + " expects " + std::to_string(param_count(kind))
                           + " parameter(s), got " + std::to_string(params.size()));
        }
        auto const ops = operand_list();
        expect(";");
        if (ops.size() != arity(kind)) {
            fail(head, std::string{gate_name(kind)} + " expects " + std::to_string(arity(kind)) + " operand(s)");
        }
        if (!circuit_) { fail(head, "gate used before qreg declaration"); }

        Gate g{kind, {}, {}};
        for (std::size_t i = 0; i < params.size(); ++i) { g.params[i] = params[i]; }
        if (kind == GateKind::CX) {
            if (!ops[0].index || !ops[1].index) { fail(head, "cx requires indexed qubit operands"); }
            auto const c = quantum_targets(ops[0]).front();
            auto const t = quantum_targets(ops[1]).front();
            if (c == t) { fail(ops[1].where, "cx control and target coincide"); }
            g.qubits = {c, t};
            circuit_->push(g);
        } else {
            for (auto q : quantum_targets(ops[0])) {
                g.qubits = {q, 0};
                circuit_->push(g);
            }
        }
    }

    auto operand() -> Operand
    {
        Operand op;
        op.where = cur_;
        op.reg = identifier().text;
        if (is_symbol("[")) {
            bump();
            op.index = integer();
            expect("]");
        }
        return op;
    }

    auto operand_list() -> std::vector<Operand>
    {
        std::vector<Operand> ops{operand()};
        while (is_symbol(",")) {
            bump();
            ops.push_back(operand());
        }
        return ops;
    }

    auto quantum_targets(Operand const& op) const -> std::vector<qubit_t>
    {
        if (!qreg_ || op.reg != *qreg_) {
            fail(op.where, "unknown quantum register '" + std::string{op.reg} + "'");
        }
        auto const n = circuit_->num_qubits();
        if (op.index) {
            if (*op.index >= n) {
                fail(op.where, "qubit index " + std::to_string(*op.index) + " out of range for register of size "
                                   + std::to_string(n),
                     QasmError::Kind::Range);
            }
            return {static_cast<qubit_t>(*op.index)};
        }
        std::vector<qubit_t> all(n);
        for (std::size_t i = 0; i < n; ++i) { all[i] = static_cast<qubit_t>(i); }
        return all;
    }

    auto creg_size(Operand const& op) const -> std::size_t
    {
        for (auto const& [n, s] : cregs_) {
            if (n == op.reg) { return s; }
        }
        fail(op.where, "unknown classical register '" + std::string{op.reg} + "'");
    }

    // --- expressions ---

    auto checked_expr() -> double
    {
        auto const at = cur_;
        double const v = expr(0);
        if (!std::isfinite(v)) { fail(at, "angle expression is not finite"); }
        return v;
    }

    auto expr(int depth) -> double
    {
        double v = term(depth);
        while (is_symbol("+") || is_symbol("-")) {
            bool const plus = cur_.text == "+";
            bump();
            double const rhs = term(depth);
            v = plus ? v + rhs : v - rhs;
        }
        return v;
    }

    auto term(int depth) -> double
    {
        double v = factor(depth);
        while (is_symbol("*") || is_symbol("/")) {
            bool const mul = cur_.text == "*";
            bump();
            double const rhs = factor(depth);
            v = mul ? v * rhs : v / rhs;
        }
        return v;
    }

    auto factor(int depth) -> double
    {
        if (depth > max_depth) { fail(cur_, "expression nested too deeply"); }
        if (is_symbol("-")) {
            bump();
            return -factor(depth + 1);
        }
        if (is_symbol("+")) {
            bump();
            return factor(depth + 1);
        }
        double const base = primary(depth);
        if (is_symbol("^")) {
            bump();
            return std::pow(base, factor(depth + 1));
        }
        return base;
    }

    auto primary(int depth) -> double
    {
        auto const t = cur_;
        if (t.type == Tok::Number) {
            double v = 0;
            auto const* first = t.text.data();
            auto const* last = first + t.text.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last) { fail(t, "invalid number '" + std::string{t.text} + "'"); }
            bump();
            return v;
        }
        if (is_symbol("(")) {
            bump();
            double const v = expr(depth + 1);
            expect(")");
            return v;
        }
        if (t.type == Tok::Ident) {
            if (t.text == "pi") {
                bump();
                return std::numbers::pi;
            }
            using fn_t = double (*)(double);
            fn_t fn = nullptr;
            if (t.text == "sin") { fn = [](double x) { return std::sin(x); }; }
            else if (t.text == "cos") { fn = [](double x) { return std::cos(x); }; }
            else if (t.text == "tan") { fn = [](double x) { return std::tan(x); }; }
            else if (t.text == "exp") { fn = [](double x) { return std::exp(x); }; }
            else if (t.text == "ln") { fn = [](double x) { return std::log(x); }; }
            else if (t.text == "sqrt") { fn = [](double x) { return std::sqrt(x); }; }
            if (fn != nullptr) {
                bump();
                expect("(");
                double const v = expr(depth + 1);
                expect(")");
                return fn(v);
            }
            fail(t, "unknown identifier '" + std::string{t.text} + "' in expression");
        }
        fail(t, t.type == Tok::End ? std::string{"unexpected end of input"}
                                   : "unexpected '" + std::string{t.text} + "' in expression");
    }

    Lexer lex_;
    Token cur_;
    std::optional<std::string_view> qreg_;
    std::optional<Circuit> circuit_;
    std::vector<std::pair<std::string_view, std::size_t>> cregs_;
};

inline auto format_angle(double v) -> std::string
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail::qasm

/// Parses the supported OpenQASM 2 subset. Measurements are validated and
/// then stripped; the returned circuit holds only unitary gates.
[[nodiscard]] inline auto parse_qasm(std::string_view text) -> Circuit
{
    return detail::qasm::Parser{text}.run();
}

/// Emits `circuit` as OpenQASM 2 with angles at 17 significant digits, so
/// that `parse_qasm(emit_qasm(c)) == c`.
[[nodiscard]] inline auto emit_qasm(Circuit const& circuit) -> std::string
{
    std::string out = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
    out += "qreg q[" + std::to_string(circuit.num_qubits()) + "];\n";
    for (auto const& g : circuit.gates()) {
        out += gate_name(g.kind);
        auto const angles = g.angles();
        if (!angles.empty()) {
            out += '(';
            for (std::size_t i = 0; i < angles.size(); ++i) {
                if (i != 0) { out += ','; }
                out += detail::qasm::format_angle(angles[i]);
            }
            out += ')';
        }
        out += ' ';
        auto const qs = g.targets();
        for (std::size_t i = 0; i < qs.size(); ++i) {
            if (i != 0) { out += ','; }
            out += "q[" + std::to_string(qs[i]) + "]";
        }
        out += ";\n";
    }
    return out;
}

} // namespace peepopt
