#include "rq/subtyping.hpp"

#include "rq/pretty.hpp"

namespace rq {

namespace {

class SubChecker {
public:
    SubChecker(const TypeEnv& env, const StoreTyping& store, int fuel) : env_(env), store_(store), fuel_(fuel) {}

    SubResult qtype(const QType& s, const QType& t) {
        if (!qual_sub(QualCtx{env_, store_}, s.qual, t.qual))
            return fail(SubStatus::QualifierFail,
                        "qualifier " + pretty(s.qual, &env_) + " is not a subqualifier of " + pretty(t.qual, &env_));
        return type(s.type, t.type);
    }

    SubResult type(const TypePtr& s, const TypePtr& t) {
        if (t->is<TTop>()) return {};
        if (auto* sv = s->as<TVar>()) {
            if (auto* tv = t->as<TVar>(); tv && tv->var == sv->var) return {};
            if (!spend()) return exhausted();
            const TypeBinding* b = sv->var.is_free() ? env_.tvar(sv->var.a) : nullptr;
            if (!b) return fail(SubStatus::TypeFail, "unbound type variable " + pretty(s, &env_));
            return type(b->bound.type, t);
        }
        if (auto* sb = s->as<TBase>()) {
            auto* tb = t->as<TBase>();
            if (tb && tb->name == sb->name) return {};
            return mismatch(s, t);
        }
        if (auto* sr = s->as<TRef>()) {
            auto* tr = t->as<TRef>();
            if (!tr) return mismatch(s, t);
            if (!(sr->content.qual == tr->content.qual))
                return fail(SubStatus::QualifierFail, "reference contents differ in qualifier: " +
                                                          pretty(sr->content.qual, &env_) + " vs " +
                                                          pretty(tr->content.qual, &env_));
            if (auto r = type(sr->content.type, tr->content.type); !r.ok()) return r;
            return type(tr->content.type, sr->content.type);
        }
        if (auto* sf = s->as<TFun>()) {
            auto* tf = t->as<TFun>();
            if (!tf) return mismatch(s, t);
            if (auto r = qtype(tf->dom, sf->dom); !r.ok()) return r;
            Id f = env_.fresh_id(), x = env_.fresh_id();
            env_.push_term(f, sf->self.empty() ? "f" : sf->self, QType{s, Qualifier::fresh_only()});
            env_.push_term(x, sf->param.empty() ? "x" : sf->param, tf->dom);
            Opening op = open_with_ids(f, x);
            SubResult r = qtype(instantiate(sf->cod, op), instantiate(tf->cod, op));
            env_.pop();
            env_.pop();
            return r;
        }
        if (auto* sa = s->as<TAll>()) {
            auto* ta = t->as<TAll>();
            if (!ta) return mismatch(s, t);
            if (!spend()) return exhausted();
            if (auto r = qtype(ta->bound, sa->bound); !r.ok()) return r;
            Id f = env_.fresh_id(), X = env_.fresh_id(), x = env_.fresh_id();
            env_.push_term(f, sa->self.empty() ? "f" : sa->self, QType{s, Qualifier::fresh_only()});
            env_.push_type(X, x, sa->tvar, sa->qvar, ta->bound);
            Opening op = open_with_ids(f, x, X);
            SubResult r = qtype(instantiate(sa->body, op), instantiate(ta->body, op));
            env_.pop();
            env_.pop();
            return r;
        }
        return mismatch(s, t);
    }

private:
    bool spend() { return fuel_-- > 0; }

    static SubResult exhausted() { return {SubStatus::FuelExhausted, "subtyping fuel exhausted"}; }
    static SubResult fail(SubStatus s, std::string d) { return {s, std::move(d)}; }

    SubResult mismatch(const TypePtr& s, const TypePtr& t) {
        return fail(SubStatus::TypeFail, pretty(s, &env_) + " is not a subtype of " + pretty(t, &env_));
    }

    TypeEnv env_;
    const StoreTyping& store_;
    int fuel_;
};

}  // namespace

SubResult type_sub(const TypeEnv& env, const StoreTyping& store, const TypePtr& s, const TypePtr& t, int fuel) {
    return SubChecker(env, store, fuel).type(s, t);
}

SubResult qtype_sub(const TypeEnv& env, const StoreTyping& store, const QType& s, const QType& t, int fuel) {
    return SubChecker(env, store, fuel).qtype(s, t);
}

}  // namespace rq
