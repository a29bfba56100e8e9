#pragma once

#include "rq/syntax.hpp"

namespace rq {

struct QualCtx {
    const TypeEnv& env;
    const StoreTyping& store;
};

// Qualifier one step away from an atom: the binding qualifier of a variable,
// the bound's qualifier of a qualifier variable, or the store typing of a location.
std::optional<Qualifier> one_step(const QualCtx& ctx, const Atom& a);

// Reflexive-transitive closure of one_step over the atoms of q.
Qualifier saturate(const QualCtx& ctx, const Qualifier& q);
bool is_saturated(const QualCtx& ctx, const Qualifier& q);

// p ⊓ q: always carries the fresh marker.
Qualifier overlap(const QualCtx& ctx, const Qualifier& p, const Qualifier& q);

// Algorithmic qualifier subtyping.
bool qual_sub(const QualCtx& ctx, const Qualifier& p, const Qualifier& q);

// q[p/x]
Qualifier subst_atom(const Qualifier& q, const Atom& x, const Qualifier& p);
// q[p/◇]; the marker stays.
Qualifier grow(const Qualifier& q, const Qualifier& p);

// Every free atom is bound in the environment or store.
bool well_scoped(const QualCtx& ctx, const Qualifier& q);

}  // namespace rq
