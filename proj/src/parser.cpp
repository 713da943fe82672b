#include "liffig/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace liffig {

namespace {

// --- lexer -------------------------------------------------------------------

enum class Tok {
    Ident, IntLit, FloatLit,
    KwVar, KwInt, KwFloat, KwOutput, KwIf, KwFi, KwGoto, KwReturn, KwSkip,
    KwSwap, KwPrint, KwTrue, KwFalse, KwMod,
    Assign, Arrow, Bar, Amp, Bang, Eq, Ne, Lt, Le, Gt, Ge,
    Plus, Minus, Star, Slash, LParen, RParen, LBracket, RBracket,
    LBrace, RBrace, Comma, Colon, Semi, DotDot,
    Junk, End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
    size_t offset = 0;  // into the source, for prose slicing
};

struct Lexer {
    const std::string& src;
    std::vector<Token> tokens;

    explicit Lexer(const std::string& s) : src(s) {}

    void lex() {
        size_t i = 0;
        int line = 1, col = 1;
        auto push = [&](Tok k, size_t start, size_t len, int l, int c) {
            tokens.push_back({k, src.substr(start, len), l, c, start});
        };
        while (i < src.size()) {
            char ch = src[i];
            if (ch == '\n') { ++i; ++line; col = 1; continue; }
            if (ch == ' ' || ch == '\t' || ch == '\r') { ++i; ++col; continue; }
            if (ch == '#') {
                while (i < src.size() && src[i] != '\n') ++i;
                continue;
            }
            int l = line, c = col;
            size_t start = i;
            auto two = [&](char a, char b) {
                return src[i] == a && i + 1 < src.size() && src[i + 1] == b;
            };
            if (std::isalpha(static_cast<unsigned char>(ch))) {
                while (i < src.size() &&
                       (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                    ++i;
                col += static_cast<int>(i - start);
                std::string word = src.substr(start, i - start);
                Tok k = Tok::Ident;
                if (word == "var") k = Tok::KwVar;
                else if (word == "int") k = Tok::KwInt;
                else if (word == "float") k = Tok::KwFloat;
                else if (word == "output") k = Tok::KwOutput;
                else if (word == "if") k = Tok::KwIf;
                else if (word == "fi") k = Tok::KwFi;
                else if (word == "goto") k = Tok::KwGoto;
                else if (word == "return") k = Tok::KwReturn;
                else if (word == "skip") k = Tok::KwSkip;
                else if (word == "swap") k = Tok::KwSwap;
                else if (word == "print") k = Tok::KwPrint;
                else if (word == "true") k = Tok::KwTrue;
                else if (word == "false") k = Tok::KwFalse;
                else if (word == "mod") k = Tok::KwMod;
                tokens.push_back({k, word, l, c, start});
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                bool isfloat = false;
                if (i + 1 < src.size() && src[i] == '.' && src[i + 1] != '.' &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1]))) {
                    isfloat = true;
                    ++i;
                    while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
                }
                col += static_cast<int>(i - start);
                push(isfloat ? Tok::FloatLit : Tok::IntLit, start, i - start, l, c);
                continue;
            }
            if (two(':', '=')) { i += 2; col += 2; push(Tok::Assign, start, 2, l, c); continue; }
            if (two('-', '>')) { i += 2; col += 2; push(Tok::Arrow, start, 2, l, c); continue; }
            if (two('!', '=')) { i += 2; col += 2; push(Tok::Ne, start, 2, l, c); continue; }
            if (two('<', '=')) { i += 2; col += 2; push(Tok::Le, start, 2, l, c); continue; }
            if (two('>', '=')) { i += 2; col += 2; push(Tok::Ge, start, 2, l, c); continue; }
            if (two('=', '=')) { i += 2; col += 2; push(Tok::Eq, start, 2, l, c); continue; }
            if (two('.', '.')) { i += 2; col += 2; push(Tok::DotDot, start, 2, l, c); continue; }
            Tok k;
            switch (ch) {
                case '|': k = Tok::Bar; break;
                case '&': k = Tok::Amp; break;
                case '!': k = Tok::Bang; break;
                case '=': k = Tok::Eq; break;
                case '<': k = Tok::Lt; break;
                case '>': k = Tok::Gt; break;
                case '+': k = Tok::Plus; break;
                case '-': k = Tok::Minus; break;
                case '*': k = Tok::Star; break;
                case '/': k = Tok::Slash; break;
                case '(': k = Tok::LParen; break;
                case ')': k = Tok::RParen; break;
                case '[': k = Tok::LBracket; break;
                case ']': k = Tok::RBracket; break;
                case '{': k = Tok::LBrace; break;
                case '}': k = Tok::RBrace; break;
                case ',': k = Tok::Comma; break;
                case ':': k = Tok::Colon; break;
                case ';': k = Tok::Semi; break;
                default: k = Tok::Junk; break;
            }
            ++i; ++col;
            push(k, start, 1, l, c);
        }
        tokens.push_back({Tok::End, "", line, col, src.size()});
    }
};

struct ParseFail {
    std::string message;
    Token at;
};

// --- parser ------------------------------------------------------------------

struct Parser {
    const std::string& src;
    ParseOptions opt;
    std::vector<Token> toks;
    size_t pos = 0;
    std::vector<Diagnostic> diags;
    std::set<std::string> declared;

    Parser(const std::string& s, ParseOptions o) : src(s), opt(o) {
        Lexer lx(s);
        lx.lex();
        toks = std::move(lx.tokens);
    }

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos + ahead;
        return i < toks.size() ? toks[i] : toks.back();
    }
    const Token& advance() { return toks[std::min(pos++, toks.size() - 1)]; }
    bool at(Tok k) const { return peek().kind == k; }
    bool accept(Tok k) {
        if (at(k)) { advance(); return true; }
        return false;
    }
    Token expect(Tok k, const std::string& what) {
        if (!at(k)) throw ParseFail{"expected " + what, peek()};
        return advance();
    }

    void error(const Token& t, const std::string& msg) {
        diags.push_back({Severity::Error, msg, t.line, t.col});
    }
    void warn(const Token& t, const std::string& msg) {
        diags.push_back({Severity::Warning, msg, t.line, t.col});
    }

    // Lenient auto-declaration happens as a post-pass in finish(), so that
    // bare identifiers that turn out to be label references are not
    // declared as variables.

    // --- terms ---

    bool starts_term() const {
        switch (peek().kind) {
            case Tok::Ident: case Tok::IntLit: case Tok::FloatLit:
            case Tok::Minus: case Tok::LParen:
                return true;
            default:
                return false;
        }
    }

    TermPtr parse_term() { return parse_addsub(); }

    TermPtr parse_addsub() {
        TermPtr t = parse_muldiv();
        for (;;) {
            if (at(Tok::Plus)) { advance(); t = t_bin(BinOp::Add, t, parse_muldiv()); }
            else if (at(Tok::Minus) && peek(1).kind != Tok::Gt) {
                advance();
                t = t_bin(BinOp::Sub, t, parse_muldiv());
            } else break;
        }
        return t;
    }

    TermPtr parse_muldiv() {
        TermPtr t = parse_unary();
        for (;;) {
            if (at(Tok::Star)) { advance(); t = t_bin(BinOp::Mul, t, parse_unary()); }
            else if (at(Tok::Slash)) { advance(); t = t_bin(BinOp::Div, t, parse_unary()); }
            else if (at(Tok::KwMod)) { advance(); t = t_bin(BinOp::Mod, t, parse_unary()); }
            else break;
        }
        return t;
    }

    TermPtr parse_unary() {
        if (accept(Tok::Minus)) {
            TermPtr t = parse_unary();
            // fold -literal so pretty-printed negative constants reparse equal
            if (const auto* lit = std::get_if<Term::Lit>(&t->node)) {
                if (lit->value.is_int()) return t_lit(Value(Int(-lit->value.as_int())));
                if (lit->value.is_float()) return t_lit(Value(-lit->value.as_float()));
            }
            return t_neg(t);
        }
        return parse_primary();
    }

    TermPtr parse_primary() {
        Token t = peek();
        if (accept(Tok::IntLit)) return t_lit(Value(Int(t.text)));
        if (accept(Tok::FloatLit)) return t_lit(Value(std::stod(t.text)));
        if (accept(Tok::LParen)) {
            TermPtr inner = parse_term();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (at(Tok::Ident)) {
            advance();
            if (t.text == "pow" && at(Tok::LParen)) {
                advance();
                TermPtr base = parse_term();
                expect(Tok::Comma, "','");
                TermPtr exp = parse_term();
                expect(Tok::RParen, "')'");
                return t_bin(BinOp::Pow, base, exp);
            }
            if (accept(Tok::LBracket)) {
                TermPtr idx = parse_term();
                if (at(Tok::DotDot))
                    throw ParseFail{"segment is not a term here", peek()};
                expect(Tok::RBracket, "']'");
                return t_elem(t.text, idx);
            }
            return t_var(t.text);
        }
        throw ParseFail{"expected a term", t};
    }

    // --- formulas ---

    CmpOp cmp_from(Tok k) {
        switch (k) {
            case Tok::Eq: return CmpOp::Eq;
            case Tok::Ne: return CmpOp::Ne;
            case Tok::Lt: return CmpOp::Lt;
            case Tok::Le: return CmpOp::Le;
            case Tok::Gt: return CmpOp::Gt;
            default: return CmpOp::Ge;
        }
    }
    bool at_cmp() const {
        switch (peek().kind) {
            case Tok::Eq: case Tok::Ne: case Tok::Lt: case Tok::Le:
            case Tok::Gt: case Tok::Ge:
                return true;
            default:
                return false;
        }
    }

    FormulaPtr parse_formula() { return parse_or(); }

    FormulaPtr parse_or() {
        FormulaPtr f = parse_and();
        while (at(Tok::Bar) && !bar_is_arm_separator()) {
            advance();
            f = f_or(f, parse_and());
        }
        return f;
    }

    // Inside an if-fi body, `|` separates arms; inside a guard the guard's
    // own disjunctions are consumed before the arm's `->` is reached, so a
    // `|` directly following a complete formula begins a new arm.  Context
    // flag set while parsing arm guards.
    bool in_arm_guard = false;
    bool bar_is_arm_separator() const { return in_arm_guard; }

    FormulaPtr parse_and() {
        FormulaPtr f = parse_not();
        while (accept(Tok::Amp)) f = f_and(f, parse_not());
        return f;
    }

    FormulaPtr parse_not() {
        if (accept(Tok::Bang)) return f_not(parse_not());
        return parse_atom();
    }

    // A comparison atom: either a term or an array segment a[lo..hi].
    struct CAtom {
        TermPtr term;                 // engaged when plain term
        std::string array;            // segment form
        TermPtr lo, hi;
        Token tok;
        bool is_seg() const { return !array.empty(); }
    };

    CAtom parse_catom() {
        Token t = peek();
        if (at(Tok::Ident) && peek(1).kind == Tok::LBracket) {
            size_t save = pos;
            advance();
            advance();
            TermPtr lo = parse_term();
            if (accept(Tok::DotDot)) {
                TermPtr hi = parse_term();
                expect(Tok::RBracket, "']'");
                return CAtom{nullptr, t.text, lo, hi, t};
            }
            pos = save;  // plain element access, reparse as a term
        }
        return CAtom{parse_term(), "", nullptr, nullptr, t};
    }

    FormulaPtr cmp_of(const CAtom& l, CmpOp op, const CAtom& r) {
        if (l.is_seg() && r.is_seg())
            throw ParseFail{"cannot relate two segments", l.tok};
        if (l.is_seg()) return f_seg(l.array, l.lo, l.hi, op, r.term);
        if (r.is_seg()) return f_seg(r.array, r.lo, r.hi, flip_cmp(op), l.term);
        return f_cmp(op, l.term, r.term);
    }

    FormulaPtr parse_atom() {
        Token t = peek();
        if (accept(Tok::KwTrue)) return f_bool(true);
        if (accept(Tok::KwFalse)) return f_bool(false);

        // builtin predicate calls
        if (at(Tok::Ident) && peek(1).kind == Tok::LParen) {
            const std::string& name = t.text;
            if (name == "even" || name == "odd" || name == "printed") {
                advance(); advance();
                TermPtr arg = parse_term();
                expect(Tok::RParen, "')'");
                if (name == "even") return f_even(arg);
                if (name == "odd") return f_odd(arg);
                return f_printed(arg);
            }
            if (name == "perm") {
                advance(); advance();
                Token a = expect(Tok::Ident, "array name");
                expect(Tok::Comma, "','");
                Token b = expect(Tok::Ident, "array name");
                expect(Tok::RParen, "')'");
                return f_perm(a.text, b.text);
            }
            if (name == "alloc") {
                advance(); advance();
                Token a = expect(Tok::Ident, "array name");
                expect(Tok::Comma, "','");
                TermPtr lo = parse_term();
                expect(Tok::Comma, "','");
                TermPtr hi = parse_term();
                expect(Tok::RParen, "')'");
                return f_alloc(a.text, lo, hi);
            }
            if (name == "seg") {
                advance(); advance();
                Token a = expect(Tok::Ident, "array name");
                expect(Tok::Comma, "','");
                TermPtr lo = parse_term();
                expect(Tok::Comma, "','");
                TermPtr hi = parse_term();
                expect(Tok::Comma, "','");
                if (!at_cmp()) throw ParseFail{"expected a relation", peek()};
                CmpOp rel = cmp_from(advance().kind);
                expect(Tok::Comma, "','");
                TermPtr bound = parse_term();
                expect(Tok::RParen, "')'");
                return f_seg(a.text, lo, hi, rel, bound);
            }
        }

        if (at(Tok::LParen)) {
            // Could be a parenthesized term starting a comparison, or a
            // parenthesized formula.  Try the term path first.
            size_t save = pos;
            size_t save_diags = diags.size();
            try {
                CAtom first = parse_catom();
                if (at_cmp()) return parse_chain_from(first);
                throw ParseFail{"not a comparison", peek()};
            } catch (const ParseFail&) {
                pos = save;
                diags.resize(save_diags);
            }
            advance();
            bool saved = in_arm_guard;
            in_arm_guard = false;  // parens shield `|` disjunction from the arm list
            FormulaPtr inner = parse_formula();
            in_arm_guard = saved;
            expect(Tok::RParen, "')'");
            return inner;
        }

        if (starts_term()) {
            CAtom first = parse_catom();
            if (at_cmp()) return parse_chain_from(first);
            // bare identifier: a reference to another label's assertion
            if (!first.is_seg() && first.term) {
                if (const auto* v = std::get_if<Term::Var>(&first.term->node))
                    return f_labelref(v->name);
            }
            throw ParseFail{"expected a comparison", peek()};
        }
        throw ParseFail{"expected a formula", t};
    }

    FormulaPtr parse_chain_from(CAtom first) {
        std::vector<CAtom> atoms;
        std::vector<CmpOp> ops;
        atoms.push_back(std::move(first));
        while (at_cmp()) {
            ops.push_back(cmp_from(advance().kind));
            atoms.push_back(parse_catom());
        }
        bool any_seg = false;
        for (const auto& a : atoms) any_seg |= a.is_seg();
        if (!any_seg) {
            if (ops.size() == 1)
                return f_cmp(ops[0], atoms[0].term, atoms[1].term);
            std::vector<TermPtr> terms;
            for (auto& a : atoms) terms.push_back(a.term);
            return f_chain(std::move(terms), std::move(ops));
        }
        FormulaPtr acc;
        for (size_t i = 0; i < ops.size(); ++i) {
            FormulaPtr piece = cmp_of(atoms[i], ops[i], atoms[i + 1]);
            acc = acc ? f_and(acc, piece) : piece;
        }
        return acc;
    }

    // --- commands ---

    CommandPtr parse_command() {
        Token t = peek();
        if (accept(Tok::KwSkip)) return c_skip();
        if (accept(Tok::KwPrint)) return c_print(parse_term());
        if (accept(Tok::KwSwap)) {
            expect(Tok::LParen, "'('");
            Token a = expect(Tok::Ident, "array name");
            expect(Tok::Comma, "','");
            TermPtr i = parse_term();
            expect(Tok::Comma, "','");
            TermPtr j = parse_term();
            expect(Tok::RParen, "')'");
            return c_swap(a.text, i, j);
        }
        if (at(Tok::Star)) {
            // Figure-style output-parameter lvalue: *j := t, also *j = t.
            if (!opt.lenient)
                throw ParseFail{"'*' lvalues are accepted only in lenient mode", t};
            advance();
            Token name = expect(Tok::Ident, "variable after '*'");
            warn(name, "output-parameter '*' ignored; '" + name.text +
                           "' treated as a plain variable");
            if (!accept(Tok::Assign)) {
                if (accept(Tok::Eq))
                    warn(name, "'=' read as ':=' after a '*' lvalue");
                else
                    throw ParseFail{"expected ':=' after '*' lvalue", peek()};
            }
            return c_assign(name.text, parse_term());
        }
        // assignment lookahead: IDENT := / IDENT [ term ] :=
        if (at(Tok::Ident)) {
            size_t save = pos;
            size_t save_diags = diags.size();
            Token name = advance();
            if (accept(Tok::Assign)) {
                return c_assign(name.text, parse_term());
            }
            if (at(Tok::LBracket)) {
                try {
                    advance();
                    TermPtr idx = parse_term();
                    if (accept(Tok::RBracket) && accept(Tok::Assign)) {
                        return c_assign_elem(name.text, idx, parse_term());
                    }
                } catch (const ParseFail&) {
                }
            }
            pos = save;
            diags.resize(save_diags);
        }
        return c_guard(parse_formula());
    }

    std::vector<CommandPtr> parse_command_list(bool stop_at_goto_return) {
        std::vector<CommandPtr> cmds;
        for (;;) {
            if (stop_at_goto_return && (at(Tok::KwGoto) || at(Tok::KwReturn))) break;
            cmds.push_back(parse_command());
            if (!accept(Tok::Semi)) break;
        }
        return cmds;
    }

    // --- liffig blocks ---

    // Formula-or-prose assertion.  On failure (or leftover junk before the
    // body keyword) the raw text up to the body is kept as prose.
    void parse_assertion(LabelBlock& block) {
        size_t start_tok = pos;
        size_t text_begin = peek().offset;
        bool parsed = false;
        try {
            block.assertion = parse_formula();
            parsed = true;
        } catch (const ParseFail&) {
            pos = start_tok;
        }
        bool at_body = at(Tok::KwIf) || at(Tok::KwReturn) || at(Tok::End) ||
                       (at(Tok::Ident) && peek(1).kind == Tok::Colon);
        if (parsed && at_body) return;

        // prose recovery: skip to the next line starting with if/return,
        // or the next `label:` line
        size_t prose_from = parsed ? peek().offset : text_begin;
        if (!parsed) {
            block.assertion = f_bool(true);
            block.prose_only = true;
            warn(toks[start_tok], "assertion for '" + block.label +
                                      "' is informal text; treated as true");
        }
        while (!at(Tok::End)) {
            const Token& t = peek();
            bool line_start = t.offset == 0 || src[t.offset - 1] == '\n' ||
                              begins_line(t);
            if (line_start && (t.kind == Tok::KwIf || t.kind == Tok::KwReturn))
                break;
            if (t.kind == Tok::Ident && peek(1).kind == Tok::Colon && begins_line(t))
                break;
            advance();
        }
        size_t prose_to = peek().offset;
        std::string prose = src.substr(prose_from, prose_to - prose_from);
        // trim
        while (!prose.empty() && std::isspace(static_cast<unsigned char>(prose.back())))
            prose.pop_back();
        size_t i = 0;
        while (i < prose.size() && std::isspace(static_cast<unsigned char>(prose[i]))) ++i;
        prose = prose.substr(i);
        if (parsed && !prose.empty()) block.prose = prose;
        else if (!parsed) block.prose = prose;
    }

    bool begins_line(const Token& t) const {
        size_t o = t.offset;
        while (o > 0) {
            char c = src[o - 1];
            if (c == '\n') return true;
            if (c != ' ' && c != '\t' && c != '\r') return false;
            --o;
        }
        return true;
    }

    GuardedArm parse_arm() {
        GuardedArm arm;
        Token t = peek();
        arm.span = {t.line, t.col};
        in_arm_guard = true;
        arm.guard = parse_formula();
        in_arm_guard = false;
        expect(Tok::Arrow, "'->'");
        arm.body = parse_command_list(/*stop_at_goto_return=*/true);
        if (accept(Tok::KwGoto)) {
            Token target = expect(Tok::Ident, "label after goto");
            arm.target = target.text;
        } else if (accept(Tok::KwReturn)) {
            arm.target = std::nullopt;
        } else {
            throw ParseFail{"arm must end in 'goto L' or 'return'", peek()};
        }
        accept(Tok::Semi);  // tolerated trailing semicolon after goto/return
        return arm;
    }

    LabelBlock parse_block() {
        LabelBlock block;
        Token label = expect(Tok::Ident, "label");
        block.label = label.text;
        block.span = {label.line, label.col};
        expect(Tok::Colon, "':' after label");
        parse_assertion(block);

        if (accept(Tok::KwReturn)) return block;  // bare halt form

        expect(Tok::KwIf, "'if' or 'return'");
        block.arms.push_back(parse_arm());
        while (accept(Tok::Bar)) block.arms.push_back(parse_arm());
        if (!accept(Tok::KwFi)) {
            // Lenient mode accepts a stray `if` as the terminator when it is
            // followed by a new block or the end of input.
            if (opt.lenient && at(Tok::KwIf) &&
                (peek(1).kind == Tok::End ||
                 (peek(1).kind == Tok::Ident && peek(2).kind == Tok::Colon))) {
                warn(peek(), "block terminated by 'if'; read as 'fi'");
                advance();
            } else {
                throw ParseFail{"expected 'fi'", peek()};
            }
        }
        return block;
    }

    // The halt label's `if true -> cmds; return fi` is its exit code, not a
    // guarded arm; keeps the halt node without outgoing arcs.
    void normalize_halt(Program& p) {
        for (auto& b : p.blocks) {
            if (b.label != p.halt) continue;
            if (b.arms.size() == 1 && !b.arms[0].target.has_value()) {
                const auto* lit = std::get_if<Formula::BoolLit>(&b.arms[0].guard->node);
                if (lit && lit->value) {
                    b.exit_body = b.arms[0].body;
                    // a lone `skip` is the empty exit
                    if (b.exit_body.size() == 1 &&
                        std::get_if<Command::Skip>(&b.exit_body[0]->node))
                        b.exit_body.clear();
                    b.arms.clear();
                }
            }
        }
    }

    std::vector<VarDecl> parse_decls() {
        std::vector<VarDecl> out;
        while (at(Tok::KwVar)) {
            advance();
            Token name = expect(Tok::Ident, "variable name");
            expect(Tok::Colon, "':'");
            VarDecl d;
            d.name = name.text;
            d.span = {name.line, name.col};
            if (accept(Tok::KwInt)) {
                if (accept(Tok::LBracket)) {
                    expect(Tok::RBracket, "']'");
                    d.type = VarType::IntArray;
                } else {
                    d.type = VarType::Int;
                }
            } else if (accept(Tok::KwFloat)) {
                d.type = VarType::Float;
            } else {
                throw ParseFail{"expected type int, float or int[]", peek()};
            }
            if (accept(Tok::KwOutput)) d.output = true;
            declared.insert(d.name);
            out.push_back(d);
        }
        return out;
    }

    // --- entry points ---

    ParseResult liffig() {
        ParseResult result;
        Program p;
        vars = &p.vars;
        try {
            p.vars = parse_decls();
            for (auto& d : p.vars) declared.insert(d.name);
            vars = &p.vars;
            while (!at(Tok::End)) p.blocks.push_back(parse_block());
        } catch (const ParseFail& f) {
            error(f.at, f.message);
            result.diagnostics = std::move(diags);
            return result;
        }
        finish(p, result);
        return result;
    }

    ParseResult triples() {
        ParseResult result;
        Program p;
        vars = &p.vars;
        try {
            p.vars = parse_decls();
            vars = &p.vars;
            expect_word("Label");
            expect_word("declarations");
            skip_dashes();
            while (at(Tok::Ident) && peek(1).kind == Tok::Colon &&
                   !(peek().text == "Triples")) {
                LabelBlock b;
                Token label = advance();
                b.label = label.text;
                b.span = {label.line, label.col};
                advance();  // ':'
                parse_assertion_triples(b);
                p.blocks.push_back(std::move(b));
            }
            expect_word("Triples");
            skip_dashes();
            while (at(Tok::LBrace)) {
                Token open = advance();
                Token pre = expect(Tok::Ident, "pre label");
                expect(Tok::RBrace, "'}'");
                std::vector<CommandPtr> cmds = parse_command_list(false);
                expect(Tok::LBrace, "'{'");
                std::optional<std::string> target;
                if (accept(Tok::KwReturn)) {
                    target = std::nullopt;
                } else {
                    Token post = expect(Tok::Ident, "post label");
                    target = post.text;
                }
                expect(Tok::RBrace, "'}'");
                add_triple(p, pre, cmds, target, open);
            }
            if (at(Tok::Ident) && peek().text == "Return") {
                advance();
                skip_dashes();
                auto cmds = parse_command_list(false);
                for (auto& b : p.blocks)
                    if (b.label == p.halt) b.exit_body = cmds;
            }
            if (!at(Tok::End)) throw ParseFail{"unexpected trailing input", peek()};
        } catch (const ParseFail& f) {
            error(f.at, f.message);
            result.diagnostics = std::move(diags);
            return result;
        }
        finish(p, result);
        return result;
    }

    void expect_word(const std::string& w) {
        if (!(at(Tok::Ident) && peek().text == w))
            throw ParseFail{"expected '" + w + "' section header", peek()};
        advance();
    }
    void skip_dashes() {
        while (at(Tok::Minus)) advance();
    }

    // Triples assertions end at the next `Label:` line / section header.
    void parse_assertion_triples(LabelBlock& block) {
        size_t start_tok = pos;
        bool parsed = false;
        try {
            block.assertion = parse_formula();
            parsed = true;
        } catch (const ParseFail&) {
            pos = start_tok;
        }
        bool boundary = at(Tok::End) ||
                        (at(Tok::Ident) && (peek(1).kind == Tok::Colon ||
                                            peek().text == "Triples"));
        if (parsed && boundary) return;
        if (!parsed) {
            block.assertion = f_bool(true);
            block.prose_only = true;
            warn(toks[start_tok], "assertion for '" + block.label +
                                      "' is informal text; treated as true");
        }
        size_t prose_from = peek().offset;
        while (!at(Tok::End)) {
            const Token& t = peek();
            if (t.kind == Tok::Ident && begins_line(t) &&
                (peek(1).kind == Tok::Colon || t.text == "Triples"))
                break;
            advance();
        }
        std::string prose = src.substr(prose_from, peek().offset - prose_from);
        while (!prose.empty() && std::isspace(static_cast<unsigned char>(prose.back())))
            prose.pop_back();
        size_t i = 0;
        while (i < prose.size() && std::isspace(static_cast<unsigned char>(prose[i]))) ++i;
        block.prose = prose.substr(i);
    }

    void add_triple(Program& p, const Token& pre,
                    const std::vector<CommandPtr>& cmds,
                    const std::optional<std::string>& target, const Token& at_tok) {
        auto it = std::find_if(p.blocks.begin(), p.blocks.end(),
                               [&](const LabelBlock& b) { return b.label == pre.text; });
        if (it == p.blocks.end()) {
            error(pre, "triple references undeclared label " + pre.text);
            return;
        }
        GuardedArm arm;
        arm.span = {at_tok.line, at_tok.col};
        // the leading formula of the command, if any, becomes the guard
        size_t body_from = 0;
        if (!cmds.empty()) {
            if (const auto* g = std::get_if<Command::Guard>(&cmds[0]->node)) {
                arm.guard = g->f;
                body_from = 1;
            }
        }
        if (!arm.guard) arm.guard = f_bool(true);
        arm.body.assign(cmds.begin() + static_cast<long>(body_from), cmds.end());
        if (!target.has_value() && it->label == p.halt) {
            // {H} cmds {return} is the halt exit, not an arm
            it->exit_body = arm.body;
            return;
        }
        arm.target = target;
        it->arms.push_back(std::move(arm));
    }

    void auto_declare(Program& p) {
        std::set<std::string> reads, arrays;
        auto scan_cmd = [&](const CommandPtr& c) {
            collect_read_vars(c, reads);
            std::set<std::string> w;
            collect_assigned_names(c, w, arrays);
            reads.insert(w.begin(), w.end());
        };
        for (const auto& b : p.blocks) {
            collect_read_vars(b.assertion, reads);
            collect_array_names(b.assertion, arrays);
            for (const auto& arm : b.arms) {
                collect_read_vars(arm.guard, reads);
                collect_array_names(arm.guard, arrays);
                for (const auto& c : arm.body) scan_cmd(c);
            }
            for (const auto& c : b.exit_body) scan_cmd(c);
        }
        for (const auto& name : reads) {
            if (declared.count(name)) continue;
            declared.insert(name);
            VarType t = arrays.count(name) ? VarType::IntArray : VarType::Int;
            p.vars.push_back({name, t, false, {}});
            diags.push_back({Severity::Warning,
                             "undeclared variable '" + name + "' assumed " +
                                 (t == VarType::IntArray ? "int[]" : "int"),
                             0, 0});
        }
    }

    static void collect_array_names(const FormulaPtr& f, std::set<std::string>& out) {
        if (!f) return;
        if (const auto* pm = std::get_if<Formula::Perm>(&f->node)) {
            out.insert(pm->a);
            out.insert(pm->b);
        } else if (const auto* sg = std::get_if<Formula::Seg>(&f->node)) {
            out.insert(sg->array);
            collect_array_names_term(sg->lo, out);
            collect_array_names_term(sg->hi, out);
            collect_array_names_term(sg->bound, out);
        } else if (const auto* al = std::get_if<Formula::Alloc>(&f->node)) {
            out.insert(al->array);
        } else if (const auto* c = std::get_if<Formula::Cmp>(&f->node)) {
            collect_array_names_term(c->lhs, out);
            collect_array_names_term(c->rhs, out);
        } else if (const auto* ch = std::get_if<Formula::Chain>(&f->node)) {
            for (const auto& t : ch->terms) collect_array_names_term(t, out);
        } else if (const auto* a = std::get_if<Formula::And>(&f->node)) {
            collect_array_names(a->lhs, out);
            collect_array_names(a->rhs, out);
        } else if (const auto* o = std::get_if<Formula::Or>(&f->node)) {
            collect_array_names(o->lhs, out);
            collect_array_names(o->rhs, out);
        } else if (const auto* n = std::get_if<Formula::Not>(&f->node)) {
            collect_array_names(n->f, out);
        } else if (const auto* e = std::get_if<Formula::Even>(&f->node)) {
            collect_array_names_term(e->t, out);
        } else if (const auto* o2 = std::get_if<Formula::Odd>(&f->node)) {
            collect_array_names_term(o2->t, out);
        } else if (const auto* pr = std::get_if<Formula::Printed>(&f->node)) {
            collect_array_names_term(pr->t, out);
        }
    }

    static void collect_array_names_term(const TermPtr& t, std::set<std::string>& out) {
        if (!t) return;
        if (const auto* e = std::get_if<Term::Elem>(&t->node)) {
            out.insert(e->array);
            collect_array_names_term(e->index, out);
        } else if (const auto* n = std::get_if<Term::Neg>(&t->node)) {
            collect_array_names_term(n->operand, out);
        } else if (const auto* b = std::get_if<Term::Bin>(&t->node)) {
            collect_array_names_term(b->lhs, out);
            collect_array_names_term(b->rhs, out);
        }
    }

    static void collect_assigned_names(const CommandPtr& c, std::set<std::string>& w,
                                       std::set<std::string>& arrays) {
        if (!c) return;
        if (const auto* a = std::get_if<Command::AssignVar>(&c->node)) {
            w.insert(a->name);
            collect_array_names_term(a->rhs, arrays);
        } else if (const auto* e = std::get_if<Command::AssignElem>(&c->node)) {
            w.insert(e->array);
            arrays.insert(e->array);
        } else if (const auto* s = std::get_if<Command::Swap>(&c->node)) {
            w.insert(s->array);
            arrays.insert(s->array);
        } else if (const auto* g = std::get_if<Command::Guard>(&c->node)) {
            collect_array_names(g->f, arrays);
        } else if (const auto* p = std::get_if<Command::Print>(&c->node)) {
            collect_array_names_term(p->t, arrays);
        } else if (const auto* q = std::get_if<Command::Seq>(&c->node)) {
            collect_assigned_names(q->first, w, arrays);
            collect_assigned_names(q->second, w, arrays);
        }
    }

    void finish(Program& p, ParseResult& result) {
        bool have_start = false, have_halt = false;
        for (const auto& b : p.blocks) {
            have_start |= b.label == p.start;
            have_halt |= b.label == p.halt;
        }
        if (!have_start)
            diags.push_back({Severity::Error, "missing start label S", 1, 1});
        if (!have_halt)
            diags.push_back({Severity::Error, "missing halt label H", 1, 1});
        normalize_halt(p);
        if (opt.lenient) auto_declare(p);
        if (have_start && have_halt) {
            try {
                p.freeze();
                result.program = std::move(p);
            } catch (const EvalError& e) {
                diags.push_back({Severity::Error, e.what(), 1, 1});
            }
        }
        result.diagnostics = std::move(diags);
    }
};

}  // namespace

ParseResult parse_liffig(const std::string& src, ParseOptions opt) {
    return Parser(src, opt).liffig();
}

ParseResult parse_triples(const std::string& src, ParseOptions opt) {
    return Parser(src, opt).triples();
}

ParseResult parse_path(const std::string& path, ParseOptions opt) {
    std::ifstream in(path);
    if (!in) {
        ParseResult r;
        r.diagnostics.push_back({Severity::Error, "cannot open " + path, 0, 0});
        return r;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    if (path.size() >= 8 && path.substr(path.size() - 8) == ".triples")
        return parse_triples(buf.str(), opt);
    return parse_liffig(buf.str(), opt);
}

FormulaPtr parse_formula_text(const std::string& src) {
    Parser pr(src, {});
    FormulaPtr f = pr.parse_formula();
    if (pr.peek().kind != Tok::End) throw EvalError("trailing input after formula");
    return f;
}

TermPtr parse_term_text(const std::string& src) {
    Parser pr(src, {});
    TermPtr t = pr.parse_term();
    if (pr.peek().kind != Tok::End) throw EvalError("trailing input after term");
    return t;
}

// --- validation ---------------------------------------------------------------

namespace {

struct UseChecker {
    const Program& p;
    std::vector<Diagnostic>& diags;
    std::set<std::string> reported;

    void undeclared(const std::string& name, const SourceSpan& span) {
        if (p.var_index.count(name)) return;
        if (!reported.insert(name).second) return;
        diags.push_back({Severity::Error, "undeclared variable '" + name + "'",
                         span.line, span.col});
    }

    void check(const TermPtr& t) {
        if (!t) return;
        if (const auto* v = std::get_if<Term::Var>(&t->node)) {
            undeclared(v->name, t->span);
        } else if (const auto* e = std::get_if<Term::Elem>(&t->node)) {
            undeclared(e->array, t->span);
            check(e->index);
        } else if (const auto* n = std::get_if<Term::Neg>(&t->node)) {
            check(n->operand);
        } else if (const auto* b = std::get_if<Term::Bin>(&t->node)) {
            check(b->lhs);
            check(b->rhs);
        }
    }

    void check(const FormulaPtr& f) {
        if (!f) return;
        // label references are not variable reads and are checked separately
        std::set<std::string> names;
        collect_read_vars(f, names);
        for (const auto& n : names) undeclared(n, f->span);
    }

    void check(const CommandPtr& c) {
        if (!c) return;
        if (const auto* g = std::get_if<Command::Guard>(&c->node)) {
            check(g->f);
        } else if (const auto* a = std::get_if<Command::AssignVar>(&c->node)) {
            undeclared(a->name, c->span);
            check(a->rhs);
        } else if (const auto* e = std::get_if<Command::AssignElem>(&c->node)) {
            undeclared(e->array, c->span);
            check(e->index);
            check(e->rhs);
        } else if (const auto* s = std::get_if<Command::Swap>(&c->node)) {
            undeclared(s->array, c->span);
            check(s->i);
            check(s->j);
        } else if (const auto* pr = std::get_if<Command::Print>(&c->node)) {
            check(pr->t);
        } else if (const auto* q = std::get_if<Command::Seq>(&c->node)) {
            check(q->first);
            check(q->second);
        }
    }
};

void collect_assigned_vars(const CommandPtr& c, std::set<std::string>& out) {
    if (!c) return;
    if (const auto* a = std::get_if<Command::AssignVar>(&c->node)) out.insert(a->name);
    else if (const auto* e = std::get_if<Command::AssignElem>(&c->node)) out.insert(e->array);
    else if (const auto* s = std::get_if<Command::Swap>(&c->node)) out.insert(s->array);
    else if (const auto* q = std::get_if<Command::Seq>(&c->node)) {
        collect_assigned_vars(q->first, out);
        collect_assigned_vars(q->second, out);
    }
}

bool guards_exhaustive(const std::vector<GuardedArm>& arms) {
    for (const auto& a : arms) {
        const auto* b = std::get_if<Formula::BoolLit>(&a.guard->node);
        if (b && b->value) return true;
    }
    auto as_cmp = [](const FormulaPtr& f) {
        return std::get_if<Formula::Cmp>(&f->node);
    };
    auto as_parity = [](const FormulaPtr& f) -> int {
        if (std::get_if<Formula::Even>(&f->node)) return 0;
        if (std::get_if<Formula::Odd>(&f->node)) return 1;
        return -1;
    };
    if (arms.size() == 2) {
        const auto* c1 = as_cmp(arms[0].guard);
        const auto* c2 = as_cmp(arms[1].guard);
        if (c1 && c2 && equal(c1->lhs, c2->lhs) && equal(c1->rhs, c2->rhs)) {
            auto comp = [](CmpOp a, CmpOp b) {
                return (a == CmpOp::Eq && b == CmpOp::Ne) ||
                       (a == CmpOp::Ne && b == CmpOp::Eq) ||
                       (a == CmpOp::Lt && b == CmpOp::Ge) ||
                       (a == CmpOp::Ge && b == CmpOp::Lt) ||
                       (a == CmpOp::Le && b == CmpOp::Gt) ||
                       (a == CmpOp::Gt && b == CmpOp::Le);
            };
            if (comp(c1->op, c2->op)) return true;
        }
        int p1 = as_parity(arms[0].guard);
        int p2 = as_parity(arms[1].guard);
        if (p1 >= 0 && p2 >= 0 && p1 != p2) {
            auto term_of = [](const FormulaPtr& f) -> TermPtr {
                if (const auto* e = std::get_if<Formula::Even>(&f->node)) return e->t;
                return std::get<Formula::Odd>(f->node).t;
            };
            if (equal(term_of(arms[0].guard), term_of(arms[1].guard))) return true;
        }
    }
    if (arms.size() == 3) {
        const auto* c1 = as_cmp(arms[0].guard);
        const auto* c2 = as_cmp(arms[1].guard);
        const auto* c3 = as_cmp(arms[2].guard);
        if (c1 && c2 && c3 && equal(c1->lhs, c2->lhs) && equal(c2->lhs, c3->lhs) &&
            equal(c1->rhs, c2->rhs) && equal(c2->rhs, c3->rhs)) {
            std::set<CmpOp> ops{c1->op, c2->op, c3->op};
            if (ops == std::set<CmpOp>{CmpOp::Lt, CmpOp::Eq, CmpOp::Gt}) return true;
        }
    }
    return false;
}

}  // namespace

std::vector<Diagnostic> validate(const Program& p) {
    std::vector<Diagnostic> diags;
    auto err = [&](const SourceSpan& s, const std::string& m) {
        diags.push_back({Severity::Error, m, s.line, s.col});
    };
    auto warn = [&](const SourceSpan& s, const std::string& m) {
        diags.push_back({Severity::Warning, m, s.line, s.col});
    };

    if (!p.has_label(p.start)) err({}, "missing start label " + p.start);
    if (!p.has_label(p.halt)) err({}, "missing halt label " + p.halt);

    UseChecker uses{p, diags};
    std::map<std::string, int> incoming;
    for (const auto& b : p.blocks) {
        uses.check(b.assertion);
        for (const auto& arm : b.arms) {
            uses.check(arm.guard);
            for (const auto& c : arm.body) uses.check(c);
            if (arm.target.has_value()) {
                if (!p.has_label(*arm.target))
                    err(arm.span, "undefined label " + *arm.target);
                else if (*arm.target == p.start)
                    err(arm.span, "goto targets the start label " + p.start);
                else
                    incoming[*arm.target]++;
            } else {
                incoming[p.halt]++;
            }
            if (b.label == p.halt && arm.target.has_value())
                err(arm.span, "arm of halt label " + p.halt + " must return");
        }
        for (const auto& c : b.exit_body) uses.check(c);

        // ghost variables are written exactly once, by the S-entry snapshot
        std::set<std::string> assigned;
        for (const auto& arm : b.arms)
            for (const auto& c : arm.body) collect_assigned_vars(c, assigned);
        for (const auto& c : b.exit_body) collect_assigned_vars(c, assigned);
        for (const auto& name : assigned) {
            int slot = p.slot_of(name);
            if (slot >= 0 && p.vars[static_cast<size_t>(slot)].is_ghost())
                err(b.span, "ghost variable " + name + " is assigned in block " +
                                b.label);
        }
    }

    for (const auto& v : p.vars) {
        if (v.is_ghost() && p.slot_of(v.ghost_base()) < 0)
            err(v.span, "ghost variable " + v.name + " has no base variable " +
                            v.ghost_base());
    }

    // cyclic assertion references
    for (const auto& b : p.blocks) {
        try {
            expand_label_refs(b.assertion, p);
        } catch (const EvalError& e) {
            err(b.span, e.what());
        }
    }

    for (const auto& b : p.blocks) {
        if (b.label != p.start && incoming[b.label] == 0)
            warn(b.span, "label " + b.label + " is unreachable (no incoming arc)");
        if (b.label != p.halt && b.arms.empty())
            warn(b.span, "label " + b.label + " has no arms (dead end)");
        if (!b.arms.empty() && !guards_exhaustive(b.arms))
            warn(b.span, "guards of " + b.label + " may not be exhaustive");
    }
    return diags;
}

}  // namespace liffig
