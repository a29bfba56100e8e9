#pragma once

#include <functional>
#include <sstream>

#include "rq/pretty.hpp"
#include "support.hpp"

namespace rqtest {

struct PropertyTally {
    std::size_t telescopes = 0;
    std::size_t checks = 0;
    std::size_t counterexamples = 0;
    std::size_t premise_hits = 0;  // distributivity instances meeting every premise
    std::string first;
};

inline void record(PropertyTally& t, bool ok, const std::function<std::string()>& what) {
    ++t.checks;
    if (ok) return;
    if (t.counterexamples++ == 0) t.first = what();
}

inline std::string show(const Qualifier& q, const TypeEnv& env) { return pretty(q, &env); }

// Saturation idempotence, overlap symmetry, qual_sub reflexivity and transitivity.
inline PropertyTally algebra_properties(std::uint32_t seed, std::size_t telescopes) {
    std::mt19937 rng(seed);
    PropertyTally t;
    for (std::size_t n = 0; n < telescopes; ++n) {
        Telescope tel = random_telescope(rng);
        ++t.telescopes;
        QualCtx ctx{tel.env, tel.store};
        std::vector<Qualifier> sample;
        for (int i = 0; i < 12; ++i) sample.push_back(pick(rng, tel.atoms, 0.3, 0.2));
        for (const Qualifier& q : sample) {
            Qualifier s = saturate(ctx, q);
            record(t, saturate(ctx, s) == s, [&] { return "saturate not idempotent on " + show(q, tel.env); });
            record(t, q.atoms_subset_of(s), [&] { return "saturate not extensive on " + show(q, tel.env); });
            record(t, qual_sub(ctx, q, q), [&] { return "qual_sub not reflexive on " + show(q, tel.env); });
        }
        for (const Qualifier& p : sample)
            for (const Qualifier& q : sample) {
                Qualifier a = overlap(ctx, p, q), b = overlap(ctx, q, p);
                record(t, a == b && a.fresh(), [&] {
                    return "overlap asymmetric on " + show(p, tel.env) + ", " + show(q, tel.env);
                });
                if (p.atoms_subset_of(q) && (!p.fresh() || q.fresh()))
                    record(t, qual_sub(ctx, p, q), [&] {
                        return "q-sub rejected " + show(p, tel.env) + " <: " + show(q, tel.env);
                    });
            }
        for (const Qualifier& p : sample)
            for (const Qualifier& q : sample) {
                if (!qual_sub(ctx, p, q)) continue;
                for (const Qualifier& r : sample) {
                    if (!qual_sub(ctx, q, r)) continue;
                    record(t, qual_sub(ctx, p, r), [&] {
                        return "qual_sub not transitive: " + show(p, tel.env) + " <: " + show(q, tel.env) +
                               " <: " + show(r, tel.env);
                    });
                }
            }
    }
    return t;
}

// (r ⊓ r')[p/x] = r[p/x] ⊓ r'[p/x] for x : T^q at top level, p and q over
// locations (p saturated, as the qualifier of a value), p ∩ φ ⊆ q,
// saturate(r), saturate(r') ⊆ φ, and q = p or q = (p ∩ s)*.
inline PropertyTally distributivity(std::uint32_t seed, std::size_t telescopes) {
    std::mt19937 rng(seed);
    PropertyTally t;
    std::bernoulli_distribution coin(0.5);
    for (std::size_t n = 0; n < telescopes; ++n) {
        // store of up to five locations; x is the only variable
        StoreTyping store;
        std::vector<Atom> locs;
        std::uniform_int_distribution<int> nloc_d(1, 5);
        int nloc = nloc_d(rng);
        TypeEnv empty;
        for (int i = 0; i < nloc; ++i) {
            Qualifier q = saturate(QualCtx{empty, store}, pick(rng, locs, 0.4, 0.0)).without_fresh();
            store.extend(qt(make_int(), q));
            locs.push_back(Atom::loc(static_cast<Id>(i)));
        }
        ++t.telescopes;
        const Atom x = Atom::free(0);
        for (int attempt = 0; attempt < 40; ++attempt) {
            Qualifier p = saturate(QualCtx{empty, store}, pick(rng, locs, 0.4, 0.0)).without_fresh();
            // q = p, or q = (p ∩ s)* plus the marker, as at the substitution sites
            Qualifier q = p;
            if (coin(rng)) {
                q = saturate(QualCtx{empty, store}, p.intersect_atoms(pick(rng, locs, 0.5, 0.0))).without_fresh();
                q.set_fresh(true);
            }
            TypeEnv env;
            env.push_term(0, "x", qt(make_int(), q));
            QualCtx ctx{env, store};
            std::vector<Atom> universe = locs;
            universe.push_back(x);
            Qualifier phi = pick(rng, universe, 0.6, 0.0);
            // p ∩ (◇ ∪ φ) ⊆ q
            bool premise = true;
            for (const Atom& a : p.atoms())
                if (phi.contains(a) && !q.contains(a)) premise = false;
            if (!premise) continue;
            Qualifier r = pick(rng, universe, 0.4, 0.3), r2 = pick(rng, universe, 0.4, 0.3);
            auto within = [&](const Qualifier& s) { return saturate(ctx, s).without_fresh().atoms_subset_of(phi); };
            if (!within(r) || !within(r2)) continue;
            ++t.premise_hits;
            Qualifier lhs = subst_atom(overlap(ctx, r, r2), x, p);
            QualCtx sub_ctx{empty, store};
            Qualifier rhs = overlap(sub_ctx, subst_atom(r, x, p), subst_atom(r2, x, p));
            record(t, lhs == rhs, [&] {
                std::ostringstream os;
                os << "distributivity fails: r=" << show(r, env) << " r'=" << show(r2, env) << " p=" << show(p, env)
                   << " q=" << show(q, env) << " phi=" << show(phi, env) << " lhs=" << show(lhs, env)
                   << " rhs=" << show(rhs, env);
                return os.str();
            });
        }
    }
    return t;
}

}  // namespace rqtest
