#include "rq/qualifiers.hpp"

#include <map>

namespace rq {

std::optional<Qualifier> one_step(const QualCtx& ctx, const Atom& a) {
    if (a.is_free()) {
        if (const Qualifier* q = ctx.env.binding_qual(a.a)) return *q;
        return std::nullopt;
    }
    if (a.is_loc() && ctx.store.contains(a.a)) return ctx.store.at(a.a).qual;
    return std::nullopt;
}

Qualifier saturate(const QualCtx& ctx, const Qualifier& q) {
    Qualifier out;
    out.set_fresh(q.fresh());
    std::vector<Atom> work(q.atoms().begin(), q.atoms().end());
    while (!work.empty()) {
        Atom a = work.back();
        work.pop_back();
        if (out.contains(a)) continue;
        out.insert(a);
        if (auto next = one_step(ctx, a)) {
            if (next->fresh()) out.set_fresh(true);
            for (const Atom& b : next->atoms())
                if (!out.contains(b)) work.push_back(b);
        }
    }
    return out;
}

bool is_saturated(const QualCtx& ctx, const Qualifier& q) { return saturate(ctx, q).atoms() == q.atoms(); }

Qualifier overlap(const QualCtx& ctx, const Qualifier& p, const Qualifier& q) {
    Qualifier out = saturate(ctx, p).intersect_atoms(saturate(ctx, q));
    out.set_fresh(true);
    return out;
}

namespace {

// Binding qualifier usable for upcasting (variables only, never locations).
const Qualifier* tracked_binding(const QualCtx& ctx, const Atom& a) {
    if (!a.is_free()) return nullptr;
    const Qualifier* q = ctx.env.binding_qual(a.a);
    if (!q || q->fresh()) return nullptr;
    return q;
}

class SubDecider {
public:
    SubDecider(const QualCtx& ctx, const Qualifier& target) : ctx_(ctx) {
        // Absorption closure: a term variable in the target lets the target
        // also cover that variable's binding qualifier.
        std::vector<Atom> work(target.atoms().begin(), target.atoms().end());
        while (!work.empty()) {
            Atom g = work.back();
            work.pop_back();
            if (closure_.contains(g)) continue;
            closure_.insert(g);
            if (!g.is_free() || !ctx_.env.term(g.a)) continue;
            if (const Qualifier* qg = tracked_binding(ctx_, g))
                for (const Atom& b : qg->atoms()) work.push_back(b);
        }
    }

    bool covered(const Atom& a) {
        if (closure_.contains(a)) return true;
        auto it = memo_.find(a);
        if (it != memo_.end()) return it->second;
        memo_[a] = false;  // cycle guard; telescopes are acyclic anyway
        bool ok = false;
        if (const Qualifier* qa = tracked_binding(ctx_, a)) {
            ok = true;
            for (const Atom& b : qa->atoms())
                if (!covered(b)) {
                    ok = false;
                    break;
                }
        }
        memo_[a] = ok;
        return ok;
    }

private:
    const QualCtx& ctx_;
    Qualifier closure_;
    std::map<Atom, bool> memo_;
};

}  // namespace

bool qual_sub(const QualCtx& ctx, const Qualifier& p, const Qualifier& q) {
    if (p.fresh() && !q.fresh()) return false;
    if (p.atoms_subset_of(q)) return true;
    SubDecider d(ctx, q);
    for (const Atom& a : p.atoms())
        if (!d.covered(a)) return false;
    return true;
}

Qualifier subst_atom(const Qualifier& q, const Atom& x, const Qualifier& p) {
    if (!q.contains(x)) return q;
    Qualifier out = q;
    out.erase(x);
    out.merge(p);
    return out;
}

Qualifier grow(const Qualifier& q, const Qualifier& p) {
    if (!q.fresh()) return q;
    return qual_union(q, p);
}

bool well_scoped(const QualCtx& ctx, const Qualifier& q) {
    for (const Atom& a : q.atoms()) {
        if (a.is_bound()) return false;
        if (a.is_free() && !ctx.env.binds_atom(a.a)) return false;
        if (a.is_loc() && !ctx.store.contains(a.a)) return false;
    }
    return true;
}

}  // namespace rq
