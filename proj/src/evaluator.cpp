#include "rq/evaluator.hpp"

#include <algorithm>
#include <set>

#include "rq/pretty.hpp"

namespace rq {

std::string_view event_name(EventKind k) {
    switch (k) {
        case EventKind::None: return "none";
        case EventKind::Beta: return "beta";
        case EventKind::BetaT: return "beta-type";
        case EventKind::Alloc: return "alloc";
        case EventKind::Deref: return "deref";
        case EventKind::Assign: return "assign";
        case EventKind::Let: return "let";
        case EventKind::Ascribe: return "ascribe";
        case EventKind::Prim: return "prim";
    }
    return "?";
}

std::string_view outcome_name(EvalOutcome o) {
    switch (o) {
        case EvalOutcome::Value: return "value";
        case EvalOutcome::Stuck: return "stuck";
        case EvalOutcome::OutOfFuel: return "out-of-fuel";
    }
    return "?";
}

namespace {

Qualifier saturate_locs(const Qualifier& q, const Store& store) {
    Qualifier out = q.without_fresh();
    for (const Atom& a : q.atoms())
        if (a.is_loc() && a.a < store.reach.size()) out.merge(store.reach[a.a]);
    return out;
}

}  // namespace

Qualifier value_qual(const Term& v, const Store& store) {
    if (auto* l = v.as<ELoc>()) {
        Qualifier q = l->loc < store.reach.size() ? store.reach[l->loc] : Qualifier{};
        q.insert(Atom::loc(l->loc));
        return q;
    }
    if (auto* a = v.as<EAbs>(); a && a->capture) return *a->capture;
    if (auto* a = v.as<ETAbs>(); a && a->capture) return *a->capture;
    if (v.is<EAbs>() || v.is<ETAbs>()) return saturate_locs(term_free_vars(v), store);
    return {};
}

namespace {

class Stepper {
public:
    explicit Stepper(Store& s) : store_(s) {}
    StepResult res;

    TermPtr go(const TermPtr& t) {
        return std::visit([&](const auto& n) { return rule(n, t); }, t->node);
    }

private:
    TermPtr stuck(std::string why) {
        res.kind = StepKind::Stuck;
        res.stuck_reason = std::move(why);
        return nullptr;
    }

    template <class Rebuild>
    TermPtr congruence(const TermPtr& sub, Rebuild&& rebuild) {
        TermPtr n = go(sub);
        if (!n) return nullptr;
        return rebuild(n);
    }

    template <class N>
    TermPtr rule(const N&, const TermPtr&) {
        return stuck("no reduction applies");
    }

    TermPtr rule(const EVar&, const TermPtr& t) { return stuck("free variable " + pretty(t)); }

    TermPtr rule(const EApp& n, const TermPtr& t) {
        if (!is_value(*n.fn))
            return congruence(n.fn, [&](TermPtr f) { return make_term(EApp{f, n.arg}, t->span); });
        if (!is_value(*n.arg))
            return congruence(n.arg, [&](TermPtr a) { return make_term(EApp{n.fn, a}, t->span); });
        auto* abs = n.fn->as<EAbs>();
        if (!abs) return stuck("applying a non-function value");
        Opening op;
        op.term[kSelfSlot] = n.fn;
        op.qual[kSelfSlot] = value_qual(*n.fn, store_);
        op.term[kParamSlot] = n.arg;
        op.qual[kParamSlot] = value_qual(*n.arg, store_);
        res.event = EventKind::Beta;
        return instantiate(abs->body, op);
    }

    TermPtr rule(const ETApp& n, const TermPtr& t) {
        if (!is_value(*n.fn))
            return congruence(n.fn, [&](TermPtr f) { return make_term(ETApp{f, n.arg}, t->span); });
        auto* tabs = n.fn->as<ETAbs>();
        if (!tabs) return stuck("type application of a non-universal value");
        Opening op;
        op.term[kSelfSlot] = n.fn;
        op.qual[kSelfSlot] = value_qual(*n.fn, store_);
        op.qual[kParamSlot] = n.arg.qual;
        op.tvar = n.arg.type;
        res.event = EventKind::BetaT;
        return instantiate(tabs->body, op);
    }

    TermPtr rule(const ERef& n, const TermPtr& t) {
        if (!is_value(*n.init))
            return congruence(n.init, [&](TermPtr i) { return make_term(ERef{i}, t->span); });
        Id l = static_cast<Id>(store_.cells.size());
        Qualifier reach = saturate_locs(value_qual(*n.init, store_), store_);
        store_.cells.push_back(n.init);
        store_.reach.push_back(std::move(reach));
        res.event = EventKind::Alloc;
        res.loc = l;
        return make_term(ELoc{l}, t->span);
    }

    TermPtr rule(const EDeref& n, const TermPtr& t) {
        if (!is_value(*n.ref))
            return congruence(n.ref, [&](TermPtr r) { return make_term(EDeref{r}, t->span); });
        auto* l = n.ref->as<ELoc>();
        if (!l || l->loc >= store_.cells.size()) return stuck("dereferencing a non-location");
        res.event = EventKind::Deref;
        res.loc = l->loc;
        return store_.cells[l->loc];
    }

    TermPtr rule(const EAssign& n, const TermPtr& t) {
        if (!is_value(*n.ref))
            return congruence(n.ref, [&](TermPtr r) { return make_term(EAssign{r, n.value}, t->span); });
        if (!is_value(*n.value))
            return congruence(n.value, [&](TermPtr v) { return make_term(EAssign{n.ref, v}, t->span); });
        auto* l = n.ref->as<ELoc>();
        if (!l || l->loc >= store_.cells.size()) return stuck("assigning through a non-location");
        store_.cells[l->loc] = n.value;
        res.event = EventKind::Assign;
        res.loc = l->loc;
        return make_term(EUnit{}, t->span);
    }

    TermPtr rule(const ELet& n, const TermPtr& t) {
        if (!is_value(*n.rhs))
            return congruence(n.rhs, [&](TermPtr r) { return make_term(ELet{n.name, r, n.body}, t->span); });
        Opening op;
        op.term[kParamSlot] = n.rhs;
        op.qual[kParamSlot] = value_qual(*n.rhs, store_);
        res.event = EventKind::Let;
        return instantiate(n.body, op);
    }

    TermPtr rule(const EAscribe& n, const TermPtr& t) {
        if (!is_value(*n.term))
            return congruence(n.term, [&](TermPtr s) { return make_term(EAscribe{s, n.type}, t->span); });
        res.event = EventKind::Ascribe;
        return n.term;
    }

    TermPtr rule(const EPrim& n, const TermPtr& t) {
        if (!is_value(*n.lhs))
            return congruence(n.lhs, [&](TermPtr l) { return make_term(EPrim{n.op, l, n.rhs}, t->span); });
        if (!is_value(*n.rhs))
            return congruence(n.rhs, [&](TermPtr r) { return make_term(EPrim{n.op, n.lhs, r}, t->span); });
        auto* a = n.lhs->as<EConst>();
        auto* b = n.rhs->as<EConst>();
        if (!a || !b) return stuck("arithmetic on non-integers");
        auto ua = static_cast<std::uint64_t>(a->value), ub = static_cast<std::uint64_t>(b->value);
        std::uint64_t r = n.op == PrimOp::Add ? ua + ub : ua - ub;
        res.event = EventKind::Prim;
        return make_term(EConst{static_cast<std::int64_t>(r)}, t->span);
    }

    Store& store_;
};

}  // namespace

StepResult step(const TermPtr& t, Store& store) {
    if (is_value(*t)) {
        StepResult v;
        v.term = t;
        return v;
    }
    Stepper s(store);
    s.res.kind = StepKind::Stepped;
    TermPtr next = s.go(t);
    StepResult r = std::move(s.res);
    r.term = next ? next : t;
    return r;
}

EvalResult evaluate(TermPtr t, Store store, std::size_t fuel, bool trace) {
    EvalResult out;
    if (trace) out.trace.push_back(pretty(t));
    while (true) {
        if (is_value(*t)) {
            out.outcome = EvalOutcome::Value;
            break;
        }
        if (out.steps >= fuel) {
            out.outcome = EvalOutcome::OutOfFuel;
            break;
        }
        StepResult r = step(t, store);
        if (r.kind == StepKind::Stuck) {
            out.outcome = EvalOutcome::Stuck;
            out.stuck_reason = r.stuck_reason;
            break;
        }
        t = r.term;
        ++out.steps;
        if (trace) {
            std::string ev(event_name(r.event));
            if (r.loc) ev += " @" + std::to_string(*r.loc);
            out.trace.push_back(ev + ": " + pretty(t));
        }
    }
    out.term = std::move(t);
    out.store = std::move(store);
    return out;
}

std::optional<std::string> store_wf(const StoreTyping& sigma) {
    TypeEnv empty;
    QualCtx ctx{empty, sigma};
    for (Id l = 0; l < sigma.size(); ++l) {
        const QType& e = sigma.at(l);
        FreeNames fn = free_names(e);
        std::string where = "@" + std::to_string(l) + ": ";
        if (!fn.tvars.empty()) return where + "mentions a type variable";
        for (const Atom& a : fn.atoms.atoms()) {
            if (!a.is_loc()) return where + "mentions a variable";
            if (!sigma.contains(a.a)) return where + "mentions an unknown location";
        }
        if (e.qual.fresh()) return where + "qualifier is fresh";
        if (!is_saturated(ctx, e.qual)) return where + "qualifier is not saturated";
    }
    return std::nullopt;
}

std::optional<QType> allocation_typing(const TermPtr& value, const StoreTyping& sigma) {
    TypeEnv empty;
    CheckOutcome o = check_program(empty, sigma, value);
    auto* r = ok_result(o);
    if (!r) return std::nullopt;
    return QType{r->qtype.type, saturate(QualCtx{empty, sigma}, r->qtype.qual).without_fresh()};
}

PreservationReport check_preservation(const TermPtr& t0, const StoreTyping& sigma0, const Store& store0,
                                      std::size_t fuel, const CheckOptions& opts) {
    PreservationReport rep;
    TypeEnv empty;
    StoreTyping sigma = sigma0;
    Store store = store0;
    CheckOutcome first = check_program(empty, sigma, t0, opts);
    if (auto* e = error_of(first)) {
        rep.initial_error = *e;
        return rep;
    }
    rep.initial = ok_result(first)->qtype;
    QType current = rep.initial;
    Qualifier all_new;
    TermPtr t = ok_result(first)->elaborated;

    for (std::size_t i = 0;; ++i) {
        if (is_value(*t)) {
            rep.outcome = EvalOutcome::Value;
            break;
        }
        if (i >= fuel) {
            rep.outcome = EvalOutcome::OutOfFuel;
            break;
        }
        std::string before = pretty(t);
        StepResult r = step(t, store);
        if (r.kind == StepKind::Stuck) {
            ++rep.progress_violations;
            rep.outcome = EvalOutcome::Stuck;
            PreservationStep s{i, EventKind::None, {}, {}, before, before, false, "stuck: " + r.stuck_reason};
            rep.steps.push_back(std::move(s));
            break;
        }
        PreservationStep s;
        s.index = i;
        s.event = r.event;
        s.before = std::move(before);
        s.after = pretty(r.term);
        const std::size_t sigma_before = sigma.size();
        if (r.event == EventKind::Alloc) {
            Id l = *r.loc;
            auto content = allocation_typing(store.cells[l], sigma);
            if (!content) {
                s.problem = "allocated value does not typecheck";
                content = QType{make_top(), {}};
            }
            sigma.extend(*content);
            s.witness.insert(Atom::loc(l));
            all_new.insert(Atom::loc(l));
            if (auto bad = store_wf(sigma)) s.problem = "store typing ill-formed: " + *bad;
        }
        for (std::size_t l = sigma_before; l < sigma.size(); ++l) s.new_locations.push_back(static_cast<Id>(l));
        t = r.term;
        CheckOutcome o = check_program(empty, sigma, t, opts);
        if (auto* e = error_of(o)) {
            if (s.problem.empty())
                s.problem = "re-check failed: " + std::string(code_name(e->code)) + " (" + e->rule + ") " + e->detail;
        } else {
            const QType& got = ok_result(o)->qtype;
            QType predicted{current.type, grow(current.qual, s.witness)};
            QType cumulative{rep.initial.type, grow(rep.initial.qual, all_new)};
            s.exact = alpha_equal(got, predicted);
            SubResult step_ok = qtype_sub(empty, sigma, got, predicted, opts.sub_fuel);
            SubResult total_ok = qtype_sub(empty, sigma, got, cumulative, opts.sub_fuel);
            if (s.problem.empty() && !step_ok.ok())
                s.problem = pretty(got) + " not within " + pretty(predicted) + ": " + step_ok.detail;
            if (s.problem.empty() && !total_ok.ok())
                s.problem = pretty(got) + " not within " + pretty(cumulative) + ": " + total_ok.detail;
            current = got;
        }
        if (!s.problem.empty()) ++rep.violations;
        rep.steps.push_back(std::move(s));
    }
    rep.final_term = t;
    rep.final_sigma = sigma;
    rep.final_store = std::move(store);
    return rep;
}

std::vector<Id> runtime_reach(const TermPtr& t, const Store& store) {
    std::set<Id> seen;
    std::vector<Id> work;
    for (const Atom& a : free_names(*t).atoms.atoms())
        if (a.is_loc()) work.push_back(a.a);
    while (!work.empty()) {
        Id l = work.back();
        work.pop_back();
        if (!seen.insert(l).second || l >= store.cells.size()) continue;
        for (const Atom& a : free_names(*store.cells[l]).atoms.atoms())
            if (a.is_loc()) work.push_back(a.a);
    }
    return {seen.begin(), seen.end()};
}

SeparationReport separation_experiment(const TermPtr& t1, const TermPtr& t2, const StoreTyping& sigma0,
                                       const Store& store0, std::size_t fuel, const CheckOptions& opts) {
    SeparationReport rep;
    TypeEnv empty;
    StoreTyping sigma = sigma0;
    Store store = store0;
    TermPtr cur[2];
    QType types[2];
    const TermPtr inputs[2] = {t1, t2};
    for (int k = 0; k < 2; ++k) {
        CheckOutcome o = check_program(empty, sigma, inputs[k], opts);
        if (auto* e = error_of(o)) {
            rep.premise_problem = "term " + std::to_string(k + 1) + " rejected: " + std::string(code_name(e->code));
            return rep;
        }
        cur[k] = ok_result(o)->elaborated;
        types[k] = ok_result(o)->qtype;
    }
    auto disjoint_now = [&]() {
        return !overlap(QualCtx{empty, sigma}, types[0].qual, types[1].qual).has_atoms();
    };
    if (!disjoint_now()) {
        rep.premise_problem = "qualifiers overlap: " + pretty(overlap(QualCtx{empty, sigma}, types[0].qual, types[1].qual));
        return rep;
    }
    rep.premise_ok = true;

    int turn = 0;
    while (rep.steps < fuel && !(is_value(*cur[0]) && is_value(*cur[1]))) {
        if (is_value(*cur[turn])) turn = 1 - turn;
        StepResult r = step(cur[turn], store);
        if (r.kind == StepKind::Stuck) {
            rep.violations.push_back("term " + std::to_string(turn + 1) + " stuck: " + r.stuck_reason);
            break;
        }
        ++rep.steps;
        cur[turn] = r.term;
        if (r.event == EventKind::Alloc) {
            auto content = allocation_typing(store.cells[*r.loc], sigma);
            sigma.extend(content ? *content : QType{make_top(), {}});
        }
        for (int k = 0; k < 2; ++k) {
            CheckOutcome o = check_program(empty, sigma, cur[k], opts);
            if (auto* e = error_of(o)) {
                rep.violations.push_back("step " + std::to_string(rep.steps) + ": term " + std::to_string(k + 1) +
                                         " no longer typechecks (" + std::string(code_name(e->code)) + ")");
                continue;
            }
            types[k] = ok_result(o)->qtype;
        }
        if (!disjoint_now())
            rep.violations.push_back("step " + std::to_string(rep.steps) + ": qualifiers overlap");
        turn = 1 - turn;
    }
    rep.final1 = cur[0];
    rep.final2 = cur[1];
    rep.graph1 = runtime_reach(cur[0], store);
    rep.graph2 = runtime_reach(cur[1], store);
    std::vector<Id> common;
    std::set_intersection(rep.graph1.begin(), rep.graph1.end(), rep.graph2.begin(), rep.graph2.end(),
                          std::back_inserter(common));
    rep.disjoint = common.empty();
    return rep;
}

std::optional<std::string> value_lemmas(const TermPtr& v, const StoreTyping& sigma, const CheckOptions& opts) {
    if (!is_value(*v)) return "not a value";
    TypeEnv empty;
    CheckOutcome full = check_program(empty, sigma, v, opts);
    if (auto* e = error_of(full)) return "value rejected: " + std::string(code_name(e->code));
    const QType& q = ok_result(full)->qtype;
    if (q.qual.fresh()) return "value synthesized a fresh qualifier " + pretty(q);
    CheckOutcome tight = synthesize(empty, sigma, q.qual, v, opts);
    if (auto* e = error_of(tight)) return "re-check under its own qualifier failed: " + e->detail;
    if (!alpha_equal(ok_result(tight)->qtype, q))
        return "tight re-check changed the type to " + pretty(ok_result(tight)->qtype);
    if (auto e = check_against(empty, sigma, q.qual, v, QType{q.type, q.qual.without_fresh()}, opts))
        return "non-fresh re-check failed: " + e->detail;
    return std::nullopt;
}

}  // namespace rq
