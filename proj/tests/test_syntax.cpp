#include <gtest/gtest.h>

#include "rq/pretty.hpp"
#include "rq/surface.hpp"

using namespace rq;

namespace {

TypeEnv xyz() {
    TypeEnv env;
    env.push_term(0, "x", qt(make_ref(qt(make_int())), Qualifier::fresh_only()));
    env.push_term(1, "y", qt(make_ref(qt(make_int())), Qualifier::fresh_only()));
    env.push_term(2, "v", qt(make_int()));
    return env;
}

const Atom X = Atom::free(0), Y = Atom::free(1), V = Atom::free(2);

}  // namespace

TEST(FreeNames, ClosedAbstractionHasNone) {
    TermPtr t = parse_term("fn f(x: Int) { x }");
    EXPECT_TRUE(free_names(*t).atoms.empty());
    EXPECT_TRUE(term_free_vars(*t).empty());
}

TEST(FreeNames, TypeAndQualifierPositions) {
    TypeEnv env = xyz();
    QType q = parse_qtype("Ref[Int^{y}]^{x}", env);
    EXPECT_EQ(free_names(q).atoms, Qualifier({X, Y}));
}

TEST(FreeNames, CounterClosureMentionsItsCell) {
    TypeEnv env = xyz();
    TermPtr t = parse_term("fn() { x := !x + 1 }", env);
    EXPECT_EQ(term_free_vars(*t), Qualifier({X}));
}

TEST(Subst, VariableAndUnderBinder) {
    TypeEnv env = xyz();
    TermPtr v = parse_term("5");
    auto sub = [&](const std::string& s) {
        TermPtr t = parse_term(s, env);
        std::unordered_map<Id, Qualifier> none;
        struct R : Rewriter {
            TermPtr v;
            TermPtr var(const Atom& a, std::uint32_t d) const override {
                return a == Atom::free(2) ? v : Rewriter::var(a, d);
            }
        } r;
        r.v = v;
        return r.term(t, 0);
    };
    EXPECT_TRUE(alpha_equal(*sub("v"), *v));
    EXPECT_TRUE(alpha_equal(*sub("fn g(y: Int) { v }"), *parse_term("fn g(y: Int) { 5 }")));
    EXPECT_TRUE(alpha_equal(*sub("fn g(v: Int) { v }"), *parse_term("fn g(v: Int) { v }")));
}

TEST(Subst, QualifierAtEveryPosition) {
    TypeEnv env = xyz();
    env.push_term(3, "a", qt(make_int()));
    env.push_term(4, "b", qt(make_int()));
    QType q = parse_qtype("Ref[Int^{x}]^{y}", env);
    QType r = subst_free(q, {{0, Qualifier({Atom::free(3), Atom::free(4)})}});
    EXPECT_TRUE(alpha_equal(r, parse_qtype("Ref[Int^{a, b}]^{y}", env)));
    EXPECT_EQ(pretty(r, &env), "Ref[Int^{a, b}]^{y}");
}

TEST(Subst, TypeVariableReplacement) {
    TypeEnv env;
    env.push_type(0, 1, "X", "x", qt(make_top(), Qualifier::fresh_only()));
    env.push_term(2, "a", qt(make_int()));
    QType q = parse_qtype("X^{x}", env);
    QType r = subst_free(q, {{1, Qualifier({Atom::free(2)})}}, {{0, make_int()}});
    EXPECT_EQ(pretty(r, &env), "Int^{a}");
}

TEST(LocallyNameless, OpenThenCloseIsIdentity) {
    TermPtr t = parse_term("fn f(x: Ref[Int]^{*}) : Ref[Int]^{x} { x }");
    const EAbs* abs = t->as<EAbs>();
    ASSERT_NE(abs, nullptr);
    TermPtr opened = instantiate(abs->body, open_with_ids(50, 51));
    EXPECT_EQ(term_free_vars(*opened), Qualifier({Atom::free(51)}));
    TermPtr closed = close_over(opened, Closing{50, 51, std::nullopt});
    EXPECT_TRUE(alpha_equal(*closed, *abs->body));
    QType cod = instantiate(*abs->cod, open_with_ids(50, 51));
    EXPECT_EQ(free_names(cod).atoms, Qualifier({Atom::free(51)}));
}

TEST(LocallyNameless, AlphaEquivalenceIgnoresNames) {
    EXPECT_TRUE(alpha_equal(*parse_term("fn f(x: Int) { x }"), *parse_term("fn g(y: Int) { y }")));
    EXPECT_FALSE(alpha_equal(*parse_term("fn f(x: Int) { x }"), *parse_term("fn f(x: Int) { f }")));
    EXPECT_TRUE(alpha_equal(parse_qtype("(f(x: Int^{*}) => Int^{x})^{}"), parse_qtype("(g(y: Int^{*}) => Int^{y})^{}")));
}

TEST(Values, Classification) {
    EXPECT_TRUE(is_value(*parse_term("42")));
    EXPECT_TRUE(is_value(*parse_term("unit")));
    EXPECT_TRUE(is_value(*parse_term("fn(x: Int) { x }")));
    EXPECT_TRUE(is_value(*parse_term("@0")));
    EXPECT_FALSE(is_value(*parse_term("ref 0")));
    EXPECT_FALSE(is_value(*parse_term("(fn(x: Int) { x })(1)")));
}

TEST(TypeEnvTest, LookupAndPop) {
    TypeEnv env = xyz();
    ASSERT_NE(env.term(1), nullptr);
    EXPECT_EQ(env.term(1)->name, "y");
    EXPECT_EQ(*env.name_of(2), "v");
    EXPECT_EQ(*env.binding_qual(0), Qualifier::fresh_only());
    env.pop();
    EXPECT_EQ(env.term(2), nullptr);
    EXPECT_GE(env.fresh_id(), 3u);
}
