#include "rq/typechecker.hpp"

#include "rq/pretty.hpp"

namespace rq {

std::string_view code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::UnboundVar: return "UnboundVar";
        case ErrorCode::Unobservable: return "Unobservable";
        case ErrorCode::FreshnessViolation: return "FreshnessViolation";
        case ErrorCode::OverlapViolation: return "OverlapViolation";
        case ErrorCode::QualifierMismatch: return "QualifierMismatch";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::RefContentFresh: return "RefContentFresh";
        case ErrorCode::DependencyViolation: return "DependencyViolation";
        case ErrorCode::FuelExhausted: return "FuelExhausted";
        case ErrorCode::ScopeError: return "ScopeError";
    }
    return "?";
}

namespace {

class ScopeProbe final : public Rewriter {
public:
    ScopeProbe(const TypeEnv& env, const StoreTyping& store) : env_(env), store_(store) {}
    mutable std::optional<std::string> problem;

    std::optional<Qualifier> atom(const Atom& a, std::uint32_t depth) const override {
        if (problem) return std::nullopt;
        if (a.is_bound() && a.a >= depth)
            problem = "dangling bound name";
        else if (a.is_bound() && a.b == kTypeSlot)
            problem = "type variable used as a qualifier";
        else if (a.is_free() && !env_.binds_atom(a.a))
            problem = env_.tvar(a.a) ? "type variable " + *env_.name_of(a.a) + " used as a qualifier"
                                     : "unbound name ?" + std::to_string(a.a);
        else if (a.is_loc() && !store_.contains(a.a))
            problem = "unknown location @" + std::to_string(a.a);
        return std::nullopt;
    }
    TypePtr tvar(const Atom& a, std::uint32_t depth) const override {
        if (problem) return nullptr;
        if (a.is_bound() && (a.a >= depth || a.b != kTypeSlot))
            problem = "dangling type variable";
        else if (a.is_free() && !env_.tvar(a.a))
            problem = "unbound type variable ?" + std::to_string(a.a);
        return nullptr;
    }

private:
    const TypeEnv& env_;
    const StoreTyping& store_;
};

class TermVarProbe final : public Rewriter {
public:
    explicit TermVarProbe(std::uint32_t slot) : slot_(slot) {}
    mutable bool hit = false;
    TermPtr var(const Atom& a, std::uint32_t depth) const override {
        if (a == Atom::bound(depth, slot_)) hit = true;
        return nullptr;
    }

private:
    std::uint32_t slot_;
};

bool uses_bound_var(const TermPtr& body, std::uint32_t slot) {
    TermVarProbe p(slot);
    p.term(body, 0);
    return p.hit;
}

bool type_part_mentions_free(const TypePtr& t, Id id) {
    FreeNames fn = free_names(QType{t, {}});
    return fn.atoms.contains(Atom::free(id));
}

struct CheckFailure {
    TypeError error;
    std::optional<Atom> unobserved;
};

class Checker {
public:
    Checker(const TypeEnv& env, const StoreTyping& store, Qualifier phi, const CheckOptions& opts)
        : env_(env), store_(store), phi_(std::move(phi)), opts_(opts) {}

    struct Synth {
        QType type;
        TermPtr elab;
    };

    Synth synth(const TermPtr& t) {
        Synth s = std::visit([&](const auto& n) { return rule(n, *t); }, t->node);
        if (opts_.trace) trace.push_back({last_rule_, t->span, pretty(s.type, &env_)});
        return s;
    }

    std::vector<TraceEntry> trace;

private:
    // RAII: pops environment entries and restores the observation.
    struct Scope {
        Checker& c;
        std::size_t env_size;
        Qualifier saved_phi;
        explicit Scope(Checker& ch) : c(ch), env_size(ch.env_.size()), saved_phi(ch.phi_) {}
        ~Scope() {
            while (c.env_.size() > env_size) c.env_.pop();
            c.phi_ = std::move(saved_phi);
        }
    };

    [[noreturn]] void fail(ErrorCode code, const std::string& rule, const Term& at, std::string detail,
                           std::optional<Atom> unobserved = std::nullopt) {
        throw CheckFailure{TypeError{code, rule, at.span, std::move(detail)}, unobserved};
    }

    void fail_sub(const SubResult& r, const std::string& rule, const Term& at, const std::string& what) {
        switch (r.status) {
            case SubStatus::Ok: return;
            case SubStatus::QualifierFail: fail(ErrorCode::QualifierMismatch, rule, at, what + ": " + r.detail);
            case SubStatus::TypeFail: fail(ErrorCode::TypeMismatch, rule, at, what + ": " + r.detail);
            case SubStatus::FuelExhausted: fail(ErrorCode::FuelExhausted, rule, at, what + ": " + r.detail);
        }
    }

    void observe(const Qualifier& q, const std::string& rule, const Term& at) {
        for (const Atom& a : q.atoms()) {
            if (a.is_bound()) continue;
            if (!phi_.contains(a))
                fail(ErrorCode::Unobservable, rule, at,
                     pretty(Qualifier({a}), &env_) + " is not in the observation " + pretty(phi_, &env_), a);
        }
    }

    void well_formed(const QType& q, const std::string& rule, const Term& at) {
        ScopeProbe p(env_, store_);
        p.qtype(q, 0);
        if (p.problem) fail(ErrorCode::ScopeError, rule, at, *p.problem + " in " + pretty(q, &env_));
    }

    void well_formed_qual(const Qualifier& q, const std::string& rule, const Term& at) {
        ScopeProbe p(env_, store_);
        p.qual(q, 0);
        if (p.problem) fail(ErrorCode::ScopeError, rule, at, *p.problem);
    }

    // Unfold type variables to their bounds until a structural type shows up.
    TypePtr expose(TypePtr t, const std::string& rule, const Term& at) {
        int fuel = opts_.sub_fuel;
        while (auto* v = t->as<TVar>()) {
            const TypeBinding* b = v->var.is_free() ? env_.tvar(v->var.a) : nullptr;
            if (!b) fail(ErrorCode::ScopeError, rule, at, "unbound type variable");
            if (fuel-- <= 0) fail(ErrorCode::FuelExhausted, rule, at, "bound unfolding exhausted fuel");
            t = b->bound.type;
        }
        return t;
    }

    QualCtx qctx() const { return QualCtx{env_, store_}; }

    Synth done(const char* rule, QType type, TermPtr elab) {
        last_rule_ = rule;
        return Synth{std::move(type), std::move(elab)};
    }

    // -- rules ---------------------------------------------------------------

    Synth rule(const EConst&, const Term& t) {
        return done("t-cst", qt(make_int()), std::make_shared<const Term>(t));
    }

    Synth rule(const EUnit&, const Term& t) {
        return done("t-cst", qt(make_unit()), std::make_shared<const Term>(t));
    }

    Synth rule(const EVar& n, const Term& t) {
        if (!n.var.is_free()) fail(ErrorCode::ScopeError, "t-var", t, "dangling bound variable");
        const TermBinding* b = env_.term(n.var.a);
        if (!b) {
            if (env_.qvar(n.var.a) || env_.tvar(n.var.a))
                fail(ErrorCode::ScopeError, "t-var", t, *env_.name_of(n.var.a) + " is not a term variable");
            fail(ErrorCode::UnboundVar, "t-var", t, "unbound variable ?" + std::to_string(n.var.a));
        }
        observe(Qualifier({n.var}), "t-var", t);
        return done("t-var", QType{b->type.type, Qualifier({n.var})}, std::make_shared<const Term>(t));
    }

    Synth rule(const ELoc& n, const Term& t) {
        if (!store_.contains(n.loc)) fail(ErrorCode::ScopeError, "t-loc", t, "unknown location @" + std::to_string(n.loc));
        const QType& content = store_.at(n.loc);
        Qualifier q = content.qual;
        q.insert(Atom::loc(n.loc));
        observe(q, "t-loc", t);
        return done("t-loc", QType{make_ref(content), q}, std::make_shared<const Term>(t));
    }

    Qualifier initial_capture(const TermPtr& body) {
        Qualifier cap;
        for (const Atom& a : term_free_vars(*body).atoms()) {
            cap.insert(a);
            if (a.is_loc() && store_.contains(a.a))
                for (const Atom& b : store_.at(a.a).qual.atoms()) cap.insert(b);
        }
        return cap;
    }

    template <class F>
    Synth with_capture(const std::optional<Qualifier>& given, const TermPtr& body, const char* rule_name,
                       const Term& t, F&& attempt) {
        if (given) {
            well_formed_qual(*given, rule_name, t);
            if (given->fresh()) fail(ErrorCode::FreshnessViolation, rule_name, t, "capture qualifier contains *");
            observe(*given, rule_name, t);
            return attempt(*given);
        }
        Qualifier cap = initial_capture(body);
        observe(cap, rule_name, t);
        for (;;) {
            std::size_t trace_mark = trace.size();
            try {
                return attempt(cap);
            } catch (CheckFailure& f) {
                if (f.error.code != ErrorCode::Unobservable || !f.unobserved) throw;
                const Atom a = *f.unobserved;
                if (cap.contains(a) || !phi_.contains(a)) throw;
                cap.insert(a);
                trace.resize(trace_mark);
            }
        }
    }

    Synth rule(const EAbs& n, const Term& t) {
        well_formed(n.dom, "t-abs", t);
        bool self_used = uses_bound_var(n.body, kSelfSlot);
        if (self_used && !n.cod)
            fail(ErrorCode::TypeMismatch, "t-abs", t, "recursive use of the function needs a result annotation");
        QType cod_closed = n.cod ? *n.cod : qt(make_top(), Qualifier::fresh_only());
        TypePtr self_type = make_fun(n.self, n.param, n.dom, cod_closed);

        return with_capture(n.capture, n.body, "t-abs", t, [&](const Qualifier& cap) {
            Scope scope(*this);
            Id f = env_.fresh_id(), x = env_.fresh_id();
            env_.push_term(f, n.self.empty() ? "_" : n.self, QType{self_type, cap});
            env_.push_term(x, n.param.empty() ? "_" : n.param, n.dom);
            Opening op = open_with_ids(f, x);
            std::optional<QType> cod;
            if (n.cod) {
                cod = instantiate(*n.cod, op);
                well_formed(*cod, "t-abs", t);
            }
            phi_ = cap;
            phi_.insert(Atom::free(f));
            phi_.insert(Atom::free(x));
            Synth body = synth(instantiate(n.body, op));
            QType result = body.type;
            if (cod) {
                observe(cod->qual, "t-abs", t);
                fail_sub(qtype_sub(env_, store_, body.type, *cod, opts_.sub_fuel), "t-abs", t,
                         "body does not match the declared result");
                result = *cod;
            }
            Closing cl{f, x, std::nullopt};
            EAbs elab{n.self, n.param, n.dom, n.cod, cap, close_over(body.elab, cl)};
            QType fn_type{make_fun(n.self, n.param, n.dom, close_over(result, cl)), cap};
            return done("t-abs", fn_type, make_term(std::move(elab), t.span));
        });
    }

    Synth rule(const ETAbs& n, const Term& t) {
        well_formed(n.bound, "t-tabs", t);
        if (uses_bound_var(n.body, kSelfSlot))
            fail(ErrorCode::TypeMismatch, "t-tabs", t, "recursive use of a type abstraction is not supported");
        TypePtr self_type = make_all(n.self, n.tvar, n.qvar, n.bound, qt(make_top(), Qualifier::fresh_only()));

        return with_capture(n.capture, n.body, "t-tabs", t, [&](const Qualifier& cap) {
            Scope scope(*this);
            Id f = env_.fresh_id(), X = env_.fresh_id(), x = env_.fresh_id();
            env_.push_term(f, n.self.empty() ? "_" : n.self, QType{self_type, cap});
            env_.push_type(X, x, n.tvar, n.qvar, n.bound);
            phi_ = cap;
            phi_.insert(Atom::free(f));
            phi_.insert(Atom::free(x));
            Synth body = synth(instantiate(n.body, open_with_ids(f, x, X)));
            Closing cl{f, x, X};
            ETAbs elab{n.self, n.tvar, n.qvar, n.bound, cap, close_over(body.elab, cl)};
            QType all_type{make_all(n.self, n.tvar, n.qvar, n.bound, close_over(body.type, cl)), cap};
            return done("t-tabs", all_type, make_term(std::move(elab), t.span));
        });
    }

    // Shared tail of term and type application.
    void application_checks(const char* plain_rule, const char* fresh_rule, const Term& t, const Qualifier& pa,
                            const Qualifier& d, const Qualifier& qf, const QType& cod, std::string& used_rule) {
        if (!d.fresh()) {
            used_rule = plain_rule;
            if (pa.fresh())
                fail(ErrorCode::FreshnessViolation, plain_rule, t,
                     "fresh argument " + pretty(pa, &env_) + " passed where " + pretty(d, &env_) + " is expected");
            if (!qual_sub(qctx(), pa, d))
                fail(ErrorCode::QualifierMismatch, plain_rule, t,
                     "argument qualifier " + pretty(pa, &env_) + " is not a subqualifier of " + pretty(d, &env_));
        } else {
            used_rule = fresh_rule;
            Qualifier ov = overlap(qctx(), pa, qf);
            if (!qual_sub(qctx(), ov, d))
                fail(ErrorCode::OverlapViolation, fresh_rule, t,
                     "overlap " + pretty(ov, &env_) + " of argument " + pretty(pa, &env_) + " and function " +
                         pretty(qf, &env_) + " is not permitted by " + pretty(d, &env_));
            if (pa.fresh() && type_mentions_bound(*cod.type, kParamSlot))
                fail(ErrorCode::DependencyViolation, fresh_rule, t,
                     "result type depends on the parameter but the argument is fresh");
            if (qf.fresh() && type_mentions_bound(*cod.type, kSelfSlot))
                fail(ErrorCode::DependencyViolation, fresh_rule, t,
                     "result type depends on the function but the function is fresh");
        }
        for (const Atom& a : cod.qual.atoms()) {
            if (a.is_bound()) continue;
            if (!phi_.contains(a))
                fail(ErrorCode::Unobservable, used_rule, t,
                     "result qualifier mentions unobservable " + pretty(Qualifier({a}), &env_), a);
        }
    }

    Synth rule(const EApp& n, const Term& t) {
        Synth fn = synth(n.fn);
        Synth arg = synth(n.arg);
        TypePtr ft = expose(fn.type.type, "t-app", t);
        auto* f = ft->as<TFun>();
        if (!f) fail(ErrorCode::TypeMismatch, "t-app", t, "applying a non-function of type " + pretty(fn.type, &env_));
        fail_sub(type_sub(env_, store_, arg.type.type, f->dom.type, opts_.sub_fuel), "t-app", t,
                 "argument type mismatch");
        std::string used;
        application_checks("t-app", "t-app◇", t, arg.type.qual, f->dom.qual, fn.type.qual, f->cod, used);
        Opening op;
        op.qual[kSelfSlot] = fn.type.qual;
        op.qual[kParamSlot] = arg.type.qual;
        QType result = instantiate(f->cod, op);
        last_rule_ = used;
        return Synth{result, make_term(EApp{fn.elab, arg.elab}, t.span)};
    }

    Synth rule(const ETApp& n, const Term& t) {
        well_formed(n.arg, "t-tapp", t);
        Synth fn = synth(n.fn);
        TypePtr ft = expose(fn.type.type, "t-tapp", t);
        auto* a = ft->as<TAll>();
        if (!a) fail(ErrorCode::TypeMismatch, "t-tapp", t, "type application of a non-universal " + pretty(fn.type, &env_));
        fail_sub(type_sub(env_, store_, n.arg.type, a->bound.type, opts_.sub_fuel), "t-tapp", t,
                 "type argument outside its bound");
        observe(n.arg.qual, "t-tapp", t);
        std::string used;
        application_checks("t-tapp", "t-tapp◇", t, n.arg.qual, a->bound.qual, fn.type.qual, a->body, used);
        Opening op;
        op.qual[kSelfSlot] = fn.type.qual;
        op.qual[kParamSlot] = n.arg.qual;
        op.tvar = n.arg.type;
        QType result = instantiate(a->body, op);
        last_rule_ = used;
        return Synth{result, make_term(ETApp{fn.elab, n.arg}, t.span)};
    }

    Synth rule(const ERef& n, const Term& t) {
        Synth init = synth(n.init);
        if (init.type.qual.fresh())
            fail(ErrorCode::RefContentFresh, "t-ref", t, "reference content " + pretty(init.type, &env_) + " is fresh");
        Qualifier q = init.type.qual.with_fresh();
        return done("t-ref", QType{make_ref(init.type), q}, make_term(ERef{init.elab}, t.span));
    }

    Synth rule(const EDeref& n, const Term& t) {
        Synth r = synth(n.ref);
        auto* ref = expose(r.type.type, "t-deref", t)->as<TRef>();
        if (!ref) fail(ErrorCode::TypeMismatch, "t-deref", t, "dereferencing a non-reference " + pretty(r.type, &env_));
        if (ref->content.qual.fresh())
            fail(ErrorCode::RefContentFresh, "t-deref", t, "reference content is fresh");
        observe(ref->content.qual, "t-deref", t);
        return done("t-deref", ref->content, make_term(EDeref{r.elab}, t.span));
    }

    Synth rule(const EAssign& n, const Term& t) {
        Synth r = synth(n.ref);
        auto* ref = expose(r.type.type, "t-assgn", t)->as<TRef>();
        if (!ref) fail(ErrorCode::TypeMismatch, "t-assgn", t, "assigning through a non-reference " + pretty(r.type, &env_));
        if (ref->content.qual.fresh())
            fail(ErrorCode::RefContentFresh, "t-assgn", t, "reference content is fresh");
        Synth v = synth(n.value);
        fail_sub(qtype_sub(env_, store_, v.type, ref->content, opts_.sub_fuel), "t-assgn", t,
                 "assigned value " + pretty(v.type, &env_) + " does not fit " + pretty(ref->content, &env_));
        return done("t-assgn", qt(make_unit()), make_term(EAssign{r.elab, v.elab}, t.span));
    }

    Synth rule(const EAscribe& n, const Term& t) {
        well_formed(n.type, "t-sub", t);
        Synth s = synth(n.term);
        fail_sub(qtype_sub(env_, store_, s.type, n.type, opts_.sub_fuel), "t-sub", t,
                 pretty(s.type, &env_) + " does not subsume to " + pretty(n.type, &env_));
        observe(n.type.qual, "t-sub", t);
        return done("t-sub", n.type, make_term(EAscribe{s.elab, n.type}, t.span));
    }

    Synth rule(const ELet& n, const Term& t) {
        Synth rhs = synth(n.rhs);
        Id x;
        Synth body;
        {
            Scope scope(*this);
            x = env_.fresh_id();
            env_.push_term(x, n.name.empty() ? "_" : n.name, rhs.type);
            phi_.insert(Atom::free(x));
            body = synth(instantiate(n.body, open_with_ids(std::nullopt, x)));
        }
        const Qualifier& p = rhs.type.qual;
        if (p.fresh() && type_part_mentions_free(body.type.type, x))
            fail(ErrorCode::DependencyViolation, "let", t,
                 "result type mentions " + (n.name.empty() ? std::string("_") : n.name) + " but its value is fresh");
        QType result = subst_free(body.type, {{x, p}});
        ELet elab{n.name, rhs.elab, close_over(body.elab, Closing{std::nullopt, x, std::nullopt})};
        return done("let", result, make_term(std::move(elab), t.span));
    }

    Synth rule(const EPrim& n, const Term& t) {
        Synth l = synth(n.lhs);
        Synth r = synth(n.rhs);
        fail_sub(type_sub(env_, store_, l.type.type, make_int(), opts_.sub_fuel), "t-prim", t, "left operand");
        fail_sub(type_sub(env_, store_, r.type.type, make_int(), opts_.sub_fuel), "t-prim", t, "right operand");
        return done("t-prim", qt(make_int()), make_term(EPrim{n.op, l.elab, r.elab}, t.span));
    }

    TypeEnv env_;
    const StoreTyping& store_;
    Qualifier phi_;
    CheckOptions opts_;
    std::string last_rule_;
};

}  // namespace

CheckOutcome synthesize(const TypeEnv& env, const StoreTyping& store, const Qualifier& observation,
                        const TermPtr& t, const CheckOptions& opts) {
    Checker c(env, store, observation.without_fresh(), opts);
    try {
        Checker::Synth s = c.synth(t);
        return TypingResult{std::move(s.type), std::move(s.elab), std::move(c.trace)};
    } catch (CheckFailure& f) {
        return f.error;
    }
}

Qualifier full_observation(const TypeEnv& env, const StoreTyping& store) {
    Qualifier phi;
    for (const EnvEntry& e : env.entries()) {
        if (auto* b = std::get_if<TermBinding>(&e))
            phi.insert(Atom::free(b->id));
        else
            phi.insert(Atom::free(std::get<TypeBinding>(e).qvar));
    }
    for (Id l = 0; l < store.size(); ++l) phi.insert(Atom::loc(l));
    return phi;
}

CheckOutcome check_program(const TypeEnv& env, const StoreTyping& store, const TermPtr& t, const CheckOptions& opts) {
    return synthesize(env, store, full_observation(env, store), t, opts);
}

std::optional<TypeError> check_against(const TypeEnv& env, const StoreTyping& store, const Qualifier& observation,
                                       const TermPtr& t, const QType& expected, const CheckOptions& opts) {
    CheckOutcome o = synthesize(env, store, observation, t, opts);
    if (auto* e = error_of(o)) return *e;
    const QType& got = ok_result(o)->qtype;
    SubResult r = qtype_sub(env, store, got, expected, opts.sub_fuel);
    if (r.ok()) return std::nullopt;
    ErrorCode code = r.status == SubStatus::QualifierFail ? ErrorCode::QualifierMismatch
                     : r.status == SubStatus::TypeFail    ? ErrorCode::TypeMismatch
                                                          : ErrorCode::FuelExhausted;
    return TypeError{code, "t-sub", t->span, pretty(got, &env) + " does not subsume to " + pretty(expected, &env)};
}

std::optional<std::string> scope_problem(const TypeEnv& env, const StoreTyping& store, const QType& q) {
    ScopeProbe p(env, store);
    p.qtype(q, 0);
    return p.problem;
}

std::optional<std::string> telescope_problem(const TypeEnv& env, const StoreTyping& store) {
    TypeEnv prefix;
    for (const EnvEntry& e : env.entries()) {
        if (auto* b = std::get_if<TermBinding>(&e)) {
            if (auto p = scope_problem(prefix, store, b->type)) return b->name + ": " + *p;
            prefix.push_term(b->id, b->name, b->type);
        } else {
            auto& tb = std::get<TypeBinding>(e);
            if (auto p = scope_problem(prefix, store, tb.bound)) return tb.tname + ": " + *p;
            prefix.push_type(tb.tvar, tb.qvar, tb.tname, tb.qname, tb.bound);
        }
    }
    return std::nullopt;
}

}  // namespace rq
