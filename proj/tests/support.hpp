#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rq/qualifiers.hpp"
#include "rq/subtyping.hpp"

namespace rqtest {

using namespace rq;

// ---------------------------------------------------------------------------
// Random telescopes

struct Telescope {
    TypeEnv env;
    StoreTyping store;
    std::vector<Atom> atoms;  // every variable and location atom, in order
    std::vector<Atom> vars;
    std::vector<Atom> locs;
};

inline Qualifier pick(std::mt19937& rng, const std::vector<Atom>& from, double p_each, double p_fresh) {
    std::bernoulli_distribution each(p_each), fresh(p_fresh);
    Qualifier q;
    for (const Atom& a : from)
        if (each(rng)) q.insert(a);
    q.set_fresh(fresh(rng));
    return q;
}

// Up to `max_atoms` atoms: a few locations with a saturated store typing, then
// term and qualifier variables whose qualifiers mention only earlier atoms.
inline Telescope random_telescope(std::mt19937& rng, int max_entries = 6, int max_atoms = 6) {
    Telescope t;
    std::uniform_int_distribution<int> nloc_d(0, 2);
    int nloc = std::min(nloc_d(rng), max_atoms - 1);
    std::uniform_int_distribution<int> nvar_d(1, std::min(max_entries, max_atoms - nloc));
    int nvar = nvar_d(rng);

    for (int i = 0; i < nloc; ++i) {
        Qualifier q = pick(rng, t.locs, 0.4, 0.0);
        TypeEnv empty;
        q = saturate(QualCtx{empty, t.store}, q).without_fresh();
        t.store.extend(qt(make_int(), q));
        t.locs.push_back(Atom::loc(static_cast<Id>(i)));
        t.atoms.push_back(t.locs.back());
    }
    std::bernoulli_distribution is_type(0.25), is_fun(0.3);
    for (int i = 0; i < nvar; ++i) {
        Qualifier q = pick(rng, t.atoms, 0.35, 0.35);
        Id id = static_cast<Id>(i);
        if (is_type(rng)) {
            t.env.push_type(static_cast<Id>(1000 + i), id, "X" + std::to_string(i), "x" + std::to_string(i),
                            qt(make_top(), q));
        } else {
            TypePtr ty = is_fun(rng) ? make_fun("", "", qt(make_int()), qt(make_int())) : make_ref(qt(make_int()));
            t.env.push_term(id, "v" + std::to_string(i), qt(ty, q));
        }
        t.vars.push_back(Atom::free(id));
        t.atoms.push_back(t.vars.back());
    }
    return t;
}

// ---------------------------------------------------------------------------
// Declarative qualifier subtyping on a small universe

// Exact closure of q-sub, q-var/q-qvar, q-self and q-trans for an environment of
// at most four variables.  Qualifiers are bitmasks: bit i is variable i, bit 4 is ◇.
class DeclarativeOracle {
public:
    static constexpr int kVars = 4;
    static constexpr int kFresh = 1 << kVars;
    static constexpr int kSize = 1 << (kVars + 1);

    // binding[i]: mask of the qualifier assumed for variable i, or -1 when absent.
    // self_ok[i]: whether variable i is a term variable (q-self applies).
    DeclarativeOracle(const std::array<int, kVars>& binding, const std::array<bool, kVars>& term_var) {
        int dom = kFresh;
        for (int i = 0; i < kVars; ++i)
            if (binding[i] >= 0) dom |= 1 << i;
        for (int a = 0; a < kSize; ++a) {
            reach_[a].reset();
            if ((a & ~dom) != 0) continue;
            for (int b = 0; b < kSize; ++b)
                if ((b & ~dom) == 0 && (a & ~b) == 0) reach_[a].set(b);  // q-sub
        }
        for (int i = 0; i < kVars; ++i) {
            if (binding[i] < 0 || (binding[i] & kFresh)) continue;
            const int x = 1 << i, q = binding[i];
            for (int p = 0; p < kSize; ++p) {
                if ((p & ~dom) != 0) continue;
                reach_[p | x].set(p | q);  // q-var, q-qvar
                if (term_var[i]) reach_[p | q | x].set(p | x);  // q-self
            }
        }
        for (int k = 0; k < kSize; ++k)
            for (int i = 0; i < kSize; ++i)
                if (reach_[i][k]) reach_[i] |= reach_[k];
    }

    bool derivable(int p, int q) const { return reach_[p][q]; }

private:
    std::array<std::bitset<kSize>, kSize> reach_;
};

inline Qualifier from_mask(int mask) {
    Qualifier q;
    for (int i = 0; i < DeclarativeOracle::kVars; ++i)
        if (mask & (1 << i)) q.insert(Atom::free(static_cast<Id>(i)));
    q.set_fresh(mask & DeclarativeOracle::kFresh);
    return q;
}

struct OracleTally {
    std::uint64_t environments = 0;
    std::uint64_t queries = 0;
    std::uint64_t unsound = 0;          // algorithm accepts, oracle rejects
    std::uint64_t incomplete = 0;       // oracle accepts, algorithm rejects
    std::string first_unsound;
};

// Every telescope of up to four variables, each either a term variable or a
// qualifier variable, against every pair of qualifiers over the bound atoms.
inline OracleTally run_oracle(bool include_qvars = true) {
    OracleTally tally;
    constexpr int V = DeclarativeOracle::kVars;
    for (int n = 0; n <= V; ++n) {
        // qualifier choice for entry i ranges over subsets of earlier vars plus ◇
        std::uint64_t total = 1;
        for (int i = 0; i < n; ++i) total *= std::uint64_t(1) << (i + 1);
        const int kinds = include_qvars ? (1 << n) : 1;
        for (std::uint64_t code = 0; code < total; ++code) {
            for (int kind = 0; kind < kinds; ++kind) {
                std::array<int, V> binding{-1, -1, -1, -1};
                std::array<bool, V> term{true, true, true, true};
                std::uint64_t c = code;
                TypeEnv env;
                StoreTyping store;
                for (int i = 0; i < n; ++i) {
                    const std::uint64_t width = std::uint64_t(1) << (i + 1);
                    int bits = static_cast<int>(c % width);
                    c /= width;
                    int mask = (bits & ((1 << i) - 1)) | ((bits >> i) & 1 ? DeclarativeOracle::kFresh : 0);
                    binding[i] = mask;
                    term[i] = !((kind >> i) & 1);
                    if (term[i])
                        env.push_term(static_cast<Id>(i), "v" + std::to_string(i), qt(make_int(), from_mask(mask)));
                    else
                        env.push_type(static_cast<Id>(100 + i), static_cast<Id>(i), "X" + std::to_string(i),
                                      "x" + std::to_string(i), qt(make_top(), from_mask(mask)));
                }
                DeclarativeOracle oracle(binding, term);
                const int dom = ((1 << n) - 1) | DeclarativeOracle::kFresh;
                ++tally.environments;
                QualCtx ctx{env, store};
                for (int p = 0; p < DeclarativeOracle::kSize; ++p) {
                    if (p & ~dom) continue;
                    for (int q = 0; q < DeclarativeOracle::kSize; ++q) {
                        if (q & ~dom) continue;
                        ++tally.queries;
                        bool alg = qual_sub(ctx, from_mask(p), from_mask(q));
                        bool dec = oracle.derivable(p, q);
                        if (alg && !dec) {
                            if (tally.unsound == 0)
                                tally.first_unsound = "n=" + std::to_string(n) + " code=" + std::to_string(code) +
                                                      " kind=" + std::to_string(kind) + " p=" + std::to_string(p) +
                                                      " q=" + std::to_string(q);
                            ++tally.unsound;
                        }
                        if (dec && !alg) ++tally.incomplete;
                    }
                }
            }
        }
    }
    return tally;
}

}  // namespace rqtest
