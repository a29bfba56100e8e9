#include <gtest/gtest.h>

#include "rq/pretty.hpp"
#include "rq/surface.hpp"

using namespace rq;

TEST(Step, BetaWithUnusedSelf) {
    Store s;
    StepResult r = step(parse_term("(fn f(x: Int) { x })(5)"), s);
    EXPECT_EQ(r.kind, StepKind::Stepped);
    EXPECT_EQ(r.event, EventKind::Beta);
    EXPECT_EQ(pretty(r.term), "5");
    EXPECT_EQ(s.size(), 0u);
}

TEST(Step, AllocationExtendsStore) {
    Store s;
    StepResult r = step(parse_term("ref 0"), s);
    EXPECT_EQ(r.event, EventKind::Alloc);
    ASSERT_TRUE(r.loc.has_value());
    EXPECT_EQ(*r.loc, 0u);
    EXPECT_EQ(pretty(r.term), "@0");
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(pretty(s.cells[0]), "0");
}

TEST(Step, DereferenceLeavesStore) {
    Store s;
    s.cells.push_back(parse_term("7"));
    s.reach.push_back(Qualifier{});
    StepResult r = step(parse_term("!@0"), s);
    EXPECT_EQ(r.event, EventKind::Deref);
    EXPECT_EQ(pretty(r.term), "7");
    EXPECT_EQ(s.size(), 1u);
    EXPECT_EQ(pretty(s.cells[0]), "7");
}

TEST(Step, TypeApplicationSubstitutes) {
    Store s;
    StepResult r = step(parse_term("(tfn f[X^x <: Top^{*}] { fn g(y: X^{x}) { y } })[Int^{}]"), s);
    EXPECT_EQ(r.event, EventKind::BetaT);
    EXPECT_TRUE(alpha_equal(*r.term, *parse_term("fn g(y: Int^{}) { y }"))) << pretty(r.term);
}

TEST(Step, StuckTerms) {
    Store s;
    StepResult r = step(parse_term("!5"), s);
    EXPECT_EQ(r.kind, StepKind::Stuck);
    EXPECT_FALSE(r.stuck_reason.empty());
    EXPECT_EQ(step(parse_term("3(4)"), s).kind, StepKind::Stuck);
    EXPECT_EQ(step(parse_term("42"), s).kind, StepKind::Value);
}

TEST(Evaluate, ValuesAndFuel) {
    EvalResult v = evaluate(parse_term("42"), {});
    EXPECT_EQ(v.outcome, EvalOutcome::Value);
    EXPECT_EQ(v.steps, 0u);
    EvalResult d = evaluate(parse_term("(fn f(x: Int) { f(x) })(1)"), {}, 100);
    EXPECT_EQ(d.outcome, EvalOutcome::OutOfFuel);
    EXPECT_EQ(d.steps, 100u);
}

TEST(Evaluate, CounterThroughReferences) {
    Program p = parse_and_elaborate("val c = ref 0;\nval inc = fn() { c := !c + 1 };\ninc();\ninc();\n!c");
    EvalResult r = evaluate(p.terms[0], p.store);
    EXPECT_EQ(r.outcome, EvalOutcome::Value);
    EXPECT_EQ(pretty(r.term), "2");
    EXPECT_EQ(r.store.size(), 1u);
}

TEST(Evaluate, TraceHasInitialTermThenOneLinePerStep) {
    EvalResult r = evaluate(parse_term("ref 0"), {}, 10, true);
    ASSERT_EQ(r.trace.size(), 2u);
    EXPECT_EQ(r.trace[0], "ref 0");
    EXPECT_EQ(r.trace[1], "alloc @0: @0");
}

TEST(Preservation, ValueHasNoSteps) {
    PreservationReport r = check_preservation(parse_term("1"), {}, {});
    EXPECT_FALSE(r.initial_error);
    EXPECT_TRUE(r.steps.empty());
    EXPECT_EQ(r.violations, 0u);
}

TEST(Preservation, BetaWitnessIsEmpty) {
    PreservationReport r = check_preservation(parse_term("(fn f(x: Int^{}) { x })(3)"), {}, {});
    ASSERT_EQ(r.steps.size(), 1u);
    EXPECT_EQ(r.steps[0].event, EventKind::Beta);
    EXPECT_TRUE(r.steps[0].witness.empty());
    EXPECT_TRUE(r.steps[0].problem.empty());
}

TEST(Preservation, AllocationWitnessIsNewLocation) {
    PreservationReport r = check_preservation(parse_term("ref 0"), {}, {});
    ASSERT_EQ(r.steps.size(), 1u);
    EXPECT_EQ(r.steps[0].witness, Qualifier({Atom::loc(0)}));
    EXPECT_EQ(r.steps[0].new_locations, std::vector<Id>{0});
    EXPECT_EQ(r.violations, 0u);
    EXPECT_EQ(r.final_sigma.size(), 1u);
}

TEST(Preservation, IllTypedStartIsReported) {
    PreservationReport r = check_preservation(parse_term("!5"), {}, {});
    EXPECT_TRUE(r.initial_error.has_value());
}

TEST(StoreWf, Examples) {
    StoreTyping empty;
    EXPECT_FALSE(store_wf(empty));
    StoreTyping one;
    one.extend(qt(make_int()));
    EXPECT_FALSE(store_wf(one));
    StoreTyping bad;
    bad.extend(qt(make_int(), Qualifier({Atom::free(0)})));
    EXPECT_TRUE(store_wf(bad));
    StoreTyping unsat;
    unsat.extend(qt(make_int()));
    unsat.extend(qt(make_ref(qt(make_int())), Qualifier({Atom::loc(0)})));
    unsat.extend(qt(make_int(), Qualifier({Atom::loc(1)})));
    EXPECT_TRUE(store_wf(unsat));
}

TEST(Separation, IndependentAllocations) {
    SeparationReport r = separation_experiment(parse_term("ref 0"), parse_term("ref 1"), {}, {});
    EXPECT_TRUE(r.premise_ok);
    EXPECT_TRUE(r.violations.empty());
    EXPECT_EQ(r.graph1, std::vector<Id>{0});
    EXPECT_EQ(r.graph2, std::vector<Id>{1});
    EXPECT_TRUE(r.disjoint);
}

TEST(Separation, Literals) {
    SeparationReport r = separation_experiment(parse_term("42"), parse_term("42"), {}, {});
    EXPECT_TRUE(r.premise_ok);
    EXPECT_EQ(r.steps, 0u);
    EXPECT_TRUE(r.disjoint);
}

TEST(Separation, UntrackedContentIsShareable) {
    Program p = parse_and_elaborate("loc @0 : Int = 5;\n!@0 || !@0");
    SeparationReport r = separation_experiment(p.terms[0], p.terms[1], p.sigma, p.store);
    EXPECT_TRUE(r.premise_ok) << r.premise_problem;
    EXPECT_TRUE(r.violations.empty());
    EXPECT_TRUE(r.disjoint);
}

TEST(Separation, SharedLocationFailsPremise) {
    Program p = parse_and_elaborate("loc @0 : Int = 5;\n@0 || @0");
    SeparationReport r = separation_experiment(p.terms[0], p.terms[1], p.sigma, p.store);
    EXPECT_FALSE(r.premise_ok);
    EXPECT_NE(r.premise_problem.find("overlap"), std::string::npos) << r.premise_problem;
}

TEST(ValueLemmas, ClosedValues) {
    EXPECT_FALSE(value_lemmas(parse_term("42"), {}));
    EXPECT_FALSE(value_lemmas(parse_term("fn f(x: Int^{*}) : Int^{x} { x }"), {}));
    StoreTyping s;
    s.extend(qt(make_int()));
    EXPECT_FALSE(value_lemmas(parse_term("@0"), s));
}

TEST(RuntimeReach, FollowsStore) {
    Program p = parse_and_elaborate("loc @0 : Int = 5;\nloc @1 : Ref[Int]^{@0} = @0;\nloc @2 : Int = 1;\n@1");
    EXPECT_EQ(runtime_reach(p.terms[0], p.store), (std::vector<Id>{0, 1}));
}
