#include <filesystem>

#include <gtest/gtest.h>

#include "rq/driver.hpp"
#include "rq/pretty.hpp"

using namespace rq;

TEST(Parse, IdentityAbstraction) {
    TermPtr t = parse_term("fn f(x: Int^{*}) : Int^{x} { x }");
    const EAbs* a = t->as<EAbs>();
    ASSERT_NE(a, nullptr);
    EXPECT_EQ(a->self, "f");
    EXPECT_EQ(a->param, "x");
    EXPECT_EQ(pretty(a->dom), "Int^{*}");
    ASSERT_TRUE(a->cod.has_value());
    EXPECT_EQ(a->cod->qual, Qualifier({Atom::bound(0, kParamSlot)}));
    EXPECT_TRUE(a->body->is<EVar>());
}

TEST(Parse, LetChain) {
    TermPtr t = parse_term("val x = ref 0; !x");
    const ELet* l = t->as<ELet>();
    ASSERT_NE(l, nullptr);
    EXPECT_EQ(l->name, "x");
    EXPECT_TRUE(l->rhs->is<ERef>());
    ASSERT_TRUE(l->body->is<EDeref>());
    EXPECT_EQ(l->body->as<EDeref>()->ref->as<EVar>()->var, Atom::bound(0, kParamSlot));
}

TEST(Parse, TypeAbstractionWrapsAbstraction) {
    TermPtr t = parse_term("tfn f[X^z <: Top^{*}] { fn g(x: X^{*}) : X^{x} { x } }");
    const ETAbs* ta = t->as<ETAbs>();
    ASSERT_NE(ta, nullptr);
    EXPECT_EQ(ta->tvar, "X");
    EXPECT_EQ(ta->qvar, "z");
    EXPECT_TRUE(ta->body->is<EAbs>());
}

TEST(Parse, BareTypeMeansUntracked) {
    EXPECT_EQ(parse_qtype("Int").qual, Qualifier{});
    EXPECT_EQ(parse_qtype("Ref[Int]^{*}").qual, Qualifier::fresh_only());
}

TEST(Parse, Errors) {
    EXPECT_THROW(parse_program("fn f(x: Int { x }"), ParseError);
    EXPECT_THROW(parse_program("val = 3; 4"), ParseError);
    EXPECT_THROW(parse_program(""), ParseError);
    try {
        parse_program("1 +\n  )");
    } catch (const ParseError& e) {
        EXPECT_EQ(e.span.line, 2);
    }
}

TEST(Elaborate, ShadowingIsRejected) {
    EXPECT_THROW(parse_and_elaborate("val x = 1; val x = 2; x"), ElabError);
}

TEST(Elaborate, AnnotationScope) {
    try {
        parse_and_elaborate("fn(x: Int^{y}) { x }");
        FAIL();
    } catch (const ElabError& e) {
        EXPECT_EQ(e.code, ErrorCode::ScopeError);
    }
    try {
        parse_and_elaborate("y");
        FAIL();
    } catch (const ElabError& e) {
        EXPECT_EQ(e.code, ErrorCode::UnboundVar);
    }
    EXPECT_THROW(parse_and_elaborate("tfn[X^x <: Top] { fn(y: Int^{X}) { y } }"), ElabError);
}

TEST(Pretty, Types) {
    EXPECT_EQ(pretty(parse_qtype("(f(x: Int^{*}) => Int^{x})^{}")), "(f(x: Int^{*}) => Int^{x})^{}");
    EXPECT_EQ(pretty(parse_qtype("(g(x: Int^{*}) => Int^{})^{}")), "(g(x: Int^{*}) => Int)^{}");
    EXPECT_EQ(pretty(parse_qtype("((x: Int^{*}) => Int^{})^{}")), "((x: Int^{*}) => Int)^{}");
    EXPECT_EQ(pretty(parse_qtype("(Unit => Int)^{*}")), "(Unit => Int)^{*}");
    EXPECT_EQ(pretty(parse_qtype("Ref[Ref[Int]^{}]^{*}")), "Ref[Ref[Int]]^{*}");
}

TEST(Pretty, CorpusRoundTrips) {
    std::size_t n = 0;
    for (const auto& e : driver::load_manifest(driver::default_corpus_dir())) {
        std::string src = driver::read_file(driver::default_corpus_dir() + "/" + e.file);
        Program p;
        try {
            p = parse_and_elaborate(src);
        } catch (const std::exception&) {
            continue;
        }
        for (const TermPtr& t : p.terms) {
            std::string text = pretty(t, &p.env);
            TermPtr back = parse_term(text, p.env);
            EXPECT_TRUE(alpha_equal(*t, *back)) << e.name << "\n" << text;
            EXPECT_EQ(pretty(back, &p.env), text) << e.name;
            ++n;
        }
    }
    EXPECT_GE(n, 50u);
}
