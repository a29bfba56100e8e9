#include <cctype>
#include <unordered_set>

#include "rq/surface.hpp"

namespace rq {

namespace {

using namespace surface;

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

const std::unordered_set<std::string> kKeywords = {"fn",  "tfn", "val", "ref", "unit",   "forall",
                                                   "Int", "Unit", "Top", "Ref", "assume", "loc"};

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    static const char* puncts[] = {"||", ":=", "=>", "<:", "(", ")", "{", "}", "[", "]", ",", ":",
                                   ";",  "=",  "^",  "*",  "!", "+", "-", "@", "."};
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Span sp{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                ++j;
            out.push_back({Tok::Ident, src.substr(i, j - i), sp});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Int, src.substr(i, j - i), sp});
            advance(j - i);
            continue;
        }
        bool matched = false;
        for (const char* p : puncts) {
            std::string s(p);
            if (src.compare(i, s.size(), s) == 0) {
                out.push_back({Tok::Punct, s, sp});
                advance(s.size());
                matched = true;
                break;
            }
        }
        if (!matched) throw ParseError(sp, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", Span{line, col}});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SourceProgram program() {
        SourceProgram p;
        while (is_word("assume") || is_word("loc")) p.decls.push_back(decl());
        p.exprs.push_back(expr());
        if (accept("||")) p.exprs.push_back(expr());
        expect_end();
        return p;
    }

    SQType qtype_only() {
        SQType q = qtype();
        expect_end();
        return q;
    }

    SQual qual_only() {
        SQual q = qual();
        expect_end();
        return q;
    }

    SExprPtr expr_only() {
        SExprPtr e = expr();
        expect_end();
        return e;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    Span here() const { return peek().span; }

    bool is(const char* p, std::size_t k = 0) const { return peek(k).kind == Tok::Punct && peek(k).text == p; }
    bool is_word(const char* w, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == w; }
    bool is_name(std::size_t k = 0) const { return peek(k).kind == Tok::Ident && !kKeywords.count(peek(k).text); }

    bool accept(const char* p) {
        if (!is(p)) return false;
        ++pos_;
        return true;
    }

    void expect(const char* p) {
        if (!accept(p)) fail("expected '" + std::string(p) + "'");
    }

    void expect_word(const char* w) {
        if (!is_word(w)) fail("expected '" + std::string(w) + "'");
        ++pos_;
    }

    void expect_end() {
        if (peek().kind != Tok::End) fail("unexpected trailing input");
    }

    std::string name() {
        if (!is_name()) fail("expected a name");
        return toks_[pos_++].text;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        std::string got = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
        throw ParseError(here(), msg + ", found " + got);
    }

    Id location() {
        Span sp = here();
        expect("@");
        if (peek().kind != Tok::Int) fail("expected a location number");
        try {
            return static_cast<Id>(std::stoul(toks_[pos_++].text));
        } catch (const std::exception&) {
            throw ParseError(sp, "location number out of range");
        }
    }

    Decl decl() {
        Span sp = here();
        if (is_word("loc")) {
            ++pos_;
            Id l = location();
            expect(":");
            SQType content = qtype();
            expect("=");
            SExprPtr v = assign();
            expect(";");
            return LocDecl{l, std::move(content), std::move(v), sp};
        }
        expect_word("assume");
        std::string n = name();
        if (accept("^")) {
            std::string q = name();
            expect("<:");
            SQType bound = qtype();
            expect(";");
            return AssumeType{n, q, std::move(bound), sp};
        }
        expect(":");
        SQType t = qtype();
        expect(";");
        return AssumeTerm{n, std::move(t), sp};
    }

    // -- qualifiers and types -----------------------------------------------

    SQual qual() {
        SQual q;
        expect("{");
        if (accept("}")) return q;
        do {
            Span sp = here();
            if (accept("*")) {
                q.fresh = true;
            } else if (is("@")) {
                q.atoms.push_back({"@" + std::to_string(location()), sp});
            } else {
                q.atoms.push_back({name(), sp});
            }
        } while (accept(","));
        expect("}");
        return q;
    }

    SQType qtype() {
        SQType q{type(), {}};
        if (accept("^")) q.qual = qual();
        return q;
    }

    STypePtr mk(SType t) { return std::make_shared<const SType>(std::move(t)); }

    STypePtr type() {
        Span sp = here();
        if (is_word("Int") || is_word("Unit")) return mk({STBase{toks_[pos_++].text}, sp});
        if (is_word("Top")) {
            ++pos_;
            return mk({STTop{}, sp});
        }
        if (is_word("Ref")) {
            ++pos_;
            expect("[");
            SQType c = qtype();
            expect("]");
            return mk({STRef{std::move(c)}, sp});
        }
        if (is_word("forall")) return forall();
        if (is_name()) return mk({STName{name()}, sp});
        if (accept("(")) {
            STypePtr t = paren_type(sp);
            return t;
        }
        fail("expected a type");
    }

    STypePtr forall() {
        Span sp = here();
        expect_word("forall");
        std::string self = is_name() ? name() : "";
        expect("[");
        std::string tv = name();
        expect("^");
        std::string qv = name();
        expect("<:");
        SQType bound = qtype();
        expect("]");
        expect(".");
        SQType body = qtype();
        return mk({STAll{self, tv, qv, std::move(bound), std::move(body)}, sp});
    }

    // After '(' in type position.
    STypePtr paren_type(Span sp) {
        if (is_word("forall")) {
            STypePtr t = forall();
            expect(")");
            return t;
        }
        std::string self;
        if (is_name() && is("(", 1)) {
            self = name();
            expect("(");
            return fun_rest(sp, self);
        }
        if (is("(") && is_name(1) && is(":", 2)) {
            expect("(");
            return fun_rest(sp, "");
        }
        SQType dom = qtype();
        if (accept(")")) {
            if (!dom.qual.atoms.empty() || dom.qual.fresh) fail("qualifier on a parenthesised type");
            return dom.type;
        }
        expect("=>");
        SQType cod = qtype();
        expect(")");
        return mk({STFun{"", "", std::move(dom), std::move(cod)}, sp});
    }

    // After `self(` or `(` of a named parameter: `[x:] Q) => R)` or `) => R)`.
    STypePtr fun_rest(Span sp, std::string self) {
        std::string param;
        SQType dom;
        if (accept(")")) {
            dom = SQType{mk({STBase{"Unit"}, sp}), {}};
        } else {
            if (is_name() && is(":", 1)) {
                param = name();
                expect(":");
            }
            dom = qtype();
            expect(")");
        }
        expect("=>");
        SQType cod = qtype();
        expect(")");
        return mk({STFun{std::move(self), std::move(param), std::move(dom), std::move(cod)}, sp});
    }

    // -- expressions ----------------------------------------------------------

    SExprPtr mk(SExpr e) { return std::make_shared<const SExpr>(std::move(e)); }

    SExprPtr expr() {
        Span sp = here();
        if (is_word("val")) {
            ++pos_;
            std::string n = name();
            expect("=");
            SExprPtr rhs = assign();
            expect(";");
            SExprPtr body = expr();
            return mk({SLet{n, rhs, body}, sp});
        }
        SExprPtr e = assign();
        if (accept(";")) {
            SExprPtr rest = expr();
            return mk({SLet{"_", e, rest}, sp});
        }
        return e;
    }

    SExprPtr assign() {
        Span sp = here();
        SExprPtr lhs = sum();
        if (accept(":=")) {
            SExprPtr rhs = assign();
            return mk({SAssign{lhs, rhs}, sp});
        }
        return lhs;
    }

    SExprPtr sum() {
        Span sp = here();
        SExprPtr lhs = unary();
        while (is("+") || is("-")) {
            PrimOp op = is("+") ? PrimOp::Add : PrimOp::Sub;
            ++pos_;
            SExprPtr rhs = unary();
            lhs = mk({SPrim{op, lhs, rhs}, sp});
        }
        return lhs;
    }

    SExprPtr unary() {
        Span sp = here();
        if (is_word("ref")) {
            ++pos_;
            return mk({SRef{unary()}, sp});
        }
        return postfix();
    }

    SExprPtr postfix() {
        Span sp = here();
        SExprPtr e = bang();
        for (;;) {
            Span at = here();
            if (accept("(")) {
                SExprPtr arg = is(")") ? mk({SUnit{}, at}) : expr();
                expect(")");
                e = mk({SApp{e, arg}, sp});
            } else if (accept("[")) {
                SQType t = qtype();
                expect("]");
                e = mk({STApp{e, std::move(t)}, sp});
            } else {
                return e;
            }
        }
    }

    SExprPtr bang() {
        Span sp = here();
        if (accept("!")) return mk({SDeref{bang()}, sp});
        return atom();
    }

    SExprPtr atom() {
        Span sp = here();
        if (peek().kind == Tok::Int) {
            try {
                return mk({SInt{std::stoll(toks_[pos_++].text)}, sp});
            } catch (const std::exception&) {
                throw ParseError(sp, "integer literal out of range");
            }
        }
        if (is_word("unit")) {
            ++pos_;
            return mk({SUnit{}, sp});
        }
        if (is_word("fn")) return fn();
        if (is_word("tfn")) return tfn();
        if (is("@")) return mk({SLoc{location()}, sp});
        if (is_name()) return mk({SVar{name()}, sp});
        if (accept("{")) {
            SExprPtr e = expr();
            expect("}");
            return e;
        }
        if (accept("(")) {
            SExprPtr e = expr();
            if (accept(":")) {
                SQType t = qtype();
                expect(")");
                return mk({SAscribe{e, std::move(t)}, sp});
            }
            expect(")");
            return e;
        }
        fail("expected an expression");
    }

    SExprPtr fn() {
        Span sp = here();
        expect_word("fn");
        std::string self = is_name() ? name() : "";
        expect("(");
        std::string param = "_";
        SQType dom;
        if (accept(")")) {
            dom = SQType{mk(SType{STBase{"Unit"}, sp}), {}};
        } else {
            param = name();
            expect(":");
            dom = qtype();
            expect(")");
        }
        std::optional<SQType> cod;
        if (accept(":")) cod = qtype();
        expect("{");
        SExprPtr body = expr();
        expect("}");
        return mk({SFn{self, param, std::move(dom), std::move(cod), body}, sp});
    }

    SExprPtr tfn() {
        Span sp = here();
        expect_word("tfn");
        std::string self = is_name() ? name() : "";
        expect("[");
        std::string tv = name();
        expect("^");
        std::string qv = name();
        expect("<:");
        SQType bound = qtype();
        expect("]");
        expect("{");
        SExprPtr body = expr();
        expect("}");
        return mk({STFn{self, tv, qv, std::move(bound), body}, sp});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

surface::SourceProgram parse_program(const std::string& text) { return Parser(lex(text)).program(); }

namespace detail {
surface::SQType parse_surface_qtype(const std::string& text) { return Parser(lex(text)).qtype_only(); }
surface::SQual parse_surface_qual(const std::string& text) { return Parser(lex(text)).qual_only(); }
surface::SExprPtr parse_surface_expr(const std::string& text) { return Parser(lex(text)).expr_only(); }
}  // namespace detail

}  // namespace rq
