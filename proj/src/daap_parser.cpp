/*
 Copyright 2026 The ConfluxLab Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "confluxlab/daap.hpp"
#include "confluxlab/error.hpp"

namespace confluxlab::daap {

namespace {

struct Token {
    enum class Kind { Ident, Int, Float, Sym, End };
    Kind kind = Kind::End;
    std::string text;
    int line = 1;
    int col = 1;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            t.kind = Token::Kind::Ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            t.kind = Token::Kind::Int;
            if (j + 1 < src.size() && src[j] == '.' &&
                std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                t.kind = Token::Kind::Float;
            }
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (c == '.' && i + 1 < src.size() && src[i + 1] == '.') {
            t.kind = Token::Kind::Sym;
            t.text = "..";
            advance(2);
        } else if (std::string_view("[]{}()=:+-*/,;").find(c) != std::string_view::npos) {
            t.kind = Token::Kind::Sym;
            t.text = std::string(1, c);
            advance(1);
        } else {
            throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    DaapProgram run() {
        while (peek().kind == Token::Kind::Ident && peek().text == "param") {
            next();
            const Token& name = expect_ident("parameter name");
            if (is_param(name.text)) error(name, "duplicate parameter '" + name.text + "'");
            prog_.params.push_back(name.text);
        }
        prog_.body = parse_items(/*in_loop=*/false);
        if (peek().kind != Token::Kind::End) error(peek(), "unexpected '" + peek().text + "'");
        if (prog_.statements.empty()) error(peek(), "no statements");
        return std::move(prog_);
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    [[noreturn]] void error(const Token& t, const std::string& msg) const {
        throw ParseError(t.line, t.col, msg);
    }
    bool is_sym(const char* s, std::size_t ahead = 0) const {
        return peek(ahead).kind == Token::Kind::Sym && peek(ahead).text == s;
    }
    void expect_sym(const char* s) {
        if (!is_sym(s)) {
            const Token& t = peek();
            error(t, std::string("expected '") + s + "', found '" +
                         (t.kind == Token::Kind::End ? std::string("end of input") : t.text) + "'");
        }
        next();
    }
    const Token& expect_ident(const char* what) {
        if (peek().kind != Token::Kind::Ident) error(peek(), std::string("expected ") + what);
        return next();
    }
    bool is_param(const std::string& name) const {
        return std::find(prog_.params.begin(), prog_.params.end(), name) != prog_.params.end();
    }
    int scope_lookup(const std::string& name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (prog_.loops[static_cast<std::size_t>(*it)].name == name) return *it;
        return -1;
    }

    std::vector<Node> parse_items(bool in_loop) {
        std::vector<Node> items;
        for (;;) {
            const Token& t = peek();
            if (t.kind == Token::Kind::End) break;
            if (in_loop && is_sym("}")) break;
            if (is_sym(";")) {
                next();
                continue;
            }
            if (t.kind == Token::Kind::Ident && t.text == "for") {
                items.push_back(parse_loop());
            } else if (t.kind == Token::Kind::Ident && is_sym(":", 1)) {
                items.push_back(parse_statement());
            } else if (t.kind == Token::Kind::Ident && t.text == "param") {
                error(t, "parameters must be declared before any loop or statement");
            } else {
                error(t, "expected 'for' or a labelled statement, found '" + t.text + "'");
            }
        }
        return items;
    }

    int declare_loop(const Token& name_tok, Affine lo, Affine hi) {
        if (is_param(name_tok.text))
            error(name_tok, "iteration variable '" + name_tok.text + "' shadows a parameter");
        if (scope_lookup(name_tok.text) >= 0)
            error(name_tok, "iteration variable '" + name_tok.text + "' already declared");
        prog_.loops.push_back(IterVar{name_tok.text, std::move(lo), std::move(hi)});
        return static_cast<int>(prog_.loops.size()) - 1;
    }

    Node parse_loop() {
        next();  // for
        const Token& name = expect_ident("iteration variable");
        if (!(peek().kind == Token::Kind::Ident && peek().text == "in"))
            error(peek(), "expected 'in'");
        next();
        Affine lo = parse_affine();
        expect_sym("..");
        Affine hi = parse_affine();
        int idx = declare_loop(name, std::move(lo), std::move(hi));
        expect_sym("{");
        scope_.push_back(idx);
        Node n;
        n.kind = Node::Kind::Loop;
        n.index = idx;
        n.body = parse_items(/*in_loop=*/true);
        expect_sym("}");
        scope_.pop_back();
        return n;
    }

    Node parse_statement() {
        const Token& label = next();
        for (const Statement& s : prog_.statements)
            if (s.label == label.text) error(label, "duplicate statement label '" + label.text + "'");
        expect_sym(":");
        Statement st;
        st.label = label.text;
        st.line = label.line;
        std::size_t scope_mark = scope_.size();
        inline_loops_.clear();
        st.output = parse_access(expect_ident("output array"));
        expect_sym("=");
        current_ = &st;
        st.rhs = parse_expr();
        current_ = nullptr;
        st.op = infer_op(st.rhs);
        st.loops.assign(scope_.begin(), scope_.end());
        scope_.resize(scope_mark);

        prog_.statements.push_back(std::move(st));
        Node leaf;
        leaf.kind = Node::Kind::Stmt;
        leaf.index = static_cast<int>(prog_.statements.size()) - 1;
        // Inline ranges become loops wrapping just this statement.
        for (auto it = inline_loops_.rbegin(); it != inline_loops_.rend(); ++it) {
            Node wrap;
            wrap.kind = Node::Kind::Loop;
            wrap.index = *it;
            wrap.body.push_back(std::move(leaf));
            leaf = std::move(wrap);
        }
        inline_loops_.clear();
        return leaf;
    }

    AccessFn parse_access(const Token& name) {
        AccessFn a;
        a.array = name.text;
        if (is_param(name.text) || scope_lookup(name.text) >= 0)
            error(name, "'" + name.text + "' is not an array");
        if (is_sym("[") && is_sym("]", 1)) {  // explicit scalar A[]
            next();
            next();
            return a;
        }
        while (is_sym("[")) {
            next();
            const Token& var = expect_ident("iteration variable in index");
            if (is_sym("=")) {
                next();
                Affine lo = parse_affine();
                expect_sym("..");
                Affine hi = parse_affine();
                int idx = declare_loop(var, std::move(lo), std::move(hi));
                scope_.push_back(idx);
                inline_loops_.push_back(idx);
            } else if (scope_lookup(var.text) < 0) {
                if (is_param(var.text))
                    error(var, "parameter '" + var.text + "' cannot index an array");
                error(var, "undeclared iteration variable '" + var.text + "'");
            }
            a.indices.push_back(var.text);
            expect_sym("]");
        }
        return a;
    }

    // affine := aterm { (+|-) aterm } ; aterm := factor { * factor }
    Affine parse_affine() {
        Affine acc = parse_affine_term();
        while (is_sym("+") || is_sym("-")) {
            bool minus = next().text == "-";
            Affine rhs = parse_affine_term();
            long long s = minus ? -1 : 1;
            for (auto& [v, c] : rhs.coeffs) acc.coeffs[v] += s * c;
            acc.constant += s * rhs.constant;
        }
        std::erase_if(acc.coeffs, [](const auto& kv) { return kv.second == 0; });
        return acc;
    }

    Affine parse_affine_term() {
        const Token& start = peek();
        Affine acc = parse_affine_factor();
        while (is_sym("*") || is_sym("/")) {
            if (is_sym("/")) error(peek(), "non-affine bound (division)");
            next();
            Affine rhs = parse_affine_factor();
            if (!acc.coeffs.empty() && !rhs.coeffs.empty())
                error(start, "non-affine bound (product of variables)");
            if (acc.coeffs.empty()) std::swap(acc, rhs);
            for (auto& [v, c] : acc.coeffs) c *= rhs.constant;
            acc.constant *= rhs.constant;
        }
        return acc;
    }

    Affine parse_affine_factor() {
        const Token& t = peek();
        Affine a;
        if (is_sym("-")) {
            next();
            Affine inner = parse_affine_factor();
            for (auto& [v, c] : inner.coeffs) c = -c;
            inner.constant = -inner.constant;
            return inner;
        }
        if (is_sym("(")) {
            next();
            a = parse_affine();
            expect_sym(")");
            return a;
        }
        if (t.kind == Token::Kind::Int) {
            a.constant = std::stoll(next().text);
            return a;
        }
        if (t.kind == Token::Kind::Ident) {
            next();
            if (!is_param(t.text) && scope_lookup(t.text) < 0)
                error(t, "undeclared iteration variable '" + t.text + "' in loop bound");
            a.coeffs[t.text] = 1;
            return a;
        }
        error(t, "non-affine bound near '" + t.text + "'");
    }

    Expr parse_expr() {
        Expr lhs = parse_term();
        while (is_sym("+") || is_sym("-")) {
            Expr e;
            e.kind = next().text == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
            e.args.push_back(std::move(lhs));
            e.args.push_back(parse_term());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_term() {
        Expr lhs = parse_factor();
        while (is_sym("*") || is_sym("/")) {
            Expr e;
            e.kind = next().text == "*" ? Expr::Kind::Mul : Expr::Kind::Div;
            e.args.push_back(std::move(lhs));
            e.args.push_back(parse_factor());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr parse_factor() {
        const Token& t = peek();
        Expr e;
        if (is_sym("-")) {
            next();
            e.kind = Expr::Kind::Neg;
            e.args.push_back(parse_factor());
            return e;
        }
        if (is_sym("(")) {
            next();
            e = parse_expr();
            expect_sym(")");
            return e;
        }
        if (t.kind == Token::Kind::Int || t.kind == Token::Kind::Float) {
            e.kind = Expr::Kind::Number;
            e.number = std::stod(next().text);
            return e;
        }
        if (t.kind == Token::Kind::Ident) {
            const Token& name = next();
            if (is_sym("(")) {
                next();
                e.kind = Expr::Kind::Call;
                e.callee = name.text;
                if (!is_sym(")")) {
                    e.args.push_back(parse_expr());
                    while (is_sym(",")) {
                        next();
                        e.args.push_back(parse_expr());
                    }
                }
                expect_sym(")");
                return e;
            }
            e.kind = Expr::Kind::Ref;
            current_->inputs.push_back(parse_access(name));
            e.ref = static_cast<int>(current_->inputs.size()) - 1;
            return e;
        }
        error(t, t.kind == Token::Kind::End ? "unexpected end of input in expression"
                                            : "unexpected '" + t.text + "' in expression");
    }

    static bool is_ref(const Expr& e) { return e.kind == Expr::Kind::Ref; }

    static OpKind infer_op(const Expr& e) {
        if ((e.kind == Expr::Kind::Sub || e.kind == Expr::Kind::Add) && is_ref(e.args[0]) &&
            e.args[1].kind == Expr::Kind::Mul && is_ref(e.args[1].args[0]) &&
            is_ref(e.args[1].args[1]))
            return OpKind::MulAdd;
        if (e.kind == Expr::Kind::Div && is_ref(e.args[0]) && is_ref(e.args[1])) return OpKind::Div;
        if (e.kind == Expr::Kind::Call && e.callee == "sqrt" && e.args.size() == 1 &&
            is_ref(e.args[0]))
            return OpKind::Sqrt;
        return OpKind::GenericF;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    DaapProgram prog_;
    std::vector<int> scope_;
    std::vector<int> inline_loops_;
    Statement* current_ = nullptr;
};

}  // namespace

DaapProgram parse_daap(std::string_view text) { return Parser(tokenize(text)).run(); }

DaapProgram load_daap(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, "cannot open DAAP file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_daap(ss.str());
}

}  // namespace confluxlab::daap
