#include "rq/pretty.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rq {

namespace {

class MentionProbe final : public Rewriter {
public:
    explicit MentionProbe(std::uint32_t slot) : slot_(slot) {}
    mutable bool hit = false;

    std::optional<Qualifier> atom(const Atom& a, std::uint32_t depth) const override {
        if (a == Atom::bound(depth, slot_)) hit = true;
        return std::nullopt;
    }
    TypePtr tvar(const Atom& a, std::uint32_t depth) const override {
        if (a == Atom::bound(depth, slot_)) hit = true;
        return nullptr;
    }
    TermPtr var(const Atom& a, std::uint32_t depth) const override {
        if (a == Atom::bound(depth, slot_)) hit = true;
        return nullptr;
    }

private:
    std::uint32_t slot_;
};

bool anonymous(const std::string& s) { return s.empty() || s == "_"; }

enum Level { kLet = 0, kAssign, kSum, kUnary, kPostfix, kBang, kAtom };

class Printer {
public:
    explicit Printer(const TypeEnv* env) : env_(env) {
        if (env_) {
            for (const EnvEntry& e : env_->entries()) {
                if (auto* t = std::get_if<TermBinding>(&e)) {
                    in_scope_.insert(t->name);
                } else {
                    auto& b = std::get<TypeBinding>(e);
                    in_scope_.insert(b.tname);
                    in_scope_.insert(b.qname);
                }
            }
        }
    }

    std::string atom(const Atom& a) const {
        switch (a.kind) {
            case AtomKind::Loc: return "@" + std::to_string(a.a);
            case AtomKind::Free: {
                if (env_)
                    if (auto n = env_->name_of(a.a)) return *n;
                return "?" + std::to_string(a.a);
            }
            case AtomKind::Bound: {
                if (a.a < frames_.size()) {
                    const Frame& f = frames_[frames_.size() - 1 - a.a];
                    if (a.b < 3 && !f.names[a.b].empty()) return f.names[a.b];
                }
                return "^" + std::to_string(a.a) + "." + std::to_string(a.b);
            }
        }
        return "?";
    }

    std::string qual(const Qualifier& q) const {
        std::vector<std::string> names;
        for (const Atom& a : q.atoms()) names.push_back(atom(a));
        std::sort(names.begin(), names.end());
        if (q.fresh()) names.push_back("*");
        std::string out = "{";
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out += ", ";
            out += names[i];
        }
        return out + "}";
    }

    std::string qtype(const QType& q, bool nested) {
        std::string t = type(q.type);
        if (nested && q.qual.empty()) return t;
        return t + "^" + qual(q.qual);
    }

    std::string type(const TypePtr& t) {
        return std::visit(
            [&](const auto& n) -> std::string {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, TBase>) {
                    return n.name;
                } else if constexpr (std::is_same_v<N, TTop>) {
                    return "Top";
                } else if constexpr (std::is_same_v<N, TVar>) {
                    return atom(n.var);
                } else if constexpr (std::is_same_v<N, TRef>) {
                    return "Ref[" + qtype(n.content, true) + "]";
                } else if constexpr (std::is_same_v<N, TFun>) {
                    return fun(n);
                } else {
                    return all(n);
                }
            },
            t->node);
    }

    std::string term(const TermPtr& t, int ctx = kLet) {
        auto [s, lvl] = term_at(t);
        if (lvl < ctx) return lvl == kLet ? "{ " + s + " }" : "(" + s + ")";
        return s;
    }

private:
    struct Frame {
        std::string names[3];
    };

    std::string choose(const std::string& hint, bool referenced, const char* fallback) {
        if (anonymous(hint) && !referenced) return "";
        std::string base = anonymous(hint) ? fallback : hint;
        std::string name = base;
        for (int i = 1; in_scope_.count(name); ++i) name = base + std::to_string(i);
        return name;
    }

    void push(Frame f) {
        for (auto& n : f.names)
            if (!n.empty()) in_scope_.insert(n);
        frames_.push_back(std::move(f));
    }

    void pop() {
        for (auto& n : frames_.back().names)
            if (!n.empty()) in_scope_.erase(in_scope_.find(n));
        frames_.pop_back();
    }

    std::string fun(const TFun& n) {
        std::string dom = qtype(n.dom, true);
        Frame f;
        f.names[kSelfSlot] = choose(n.self, mentions_bound(n.cod, kSelfSlot), "f");
        f.names[kParamSlot] = choose(n.param, mentions_bound(n.cod, kParamSlot), "x");
        push(f);
        std::string cod = qtype(n.cod, true);
        pop();
        std::string param = f.names[kParamSlot].empty() ? dom : f.names[kParamSlot] + ": " + dom;
        if (!f.names[kSelfSlot].empty()) return "(" + f.names[kSelfSlot] + "(" + param + ") => " + cod + ")";
        if (!f.names[kParamSlot].empty()) return "((" + param + ") => " + cod + ")";
        return "(" + dom + " => " + cod + ")";
    }

    std::string all(const TAll& n) {
        std::string bound = qtype(n.bound, true);
        Frame f;
        f.names[kSelfSlot] = choose(n.self, mentions_bound(n.body, kSelfSlot), "f");
        f.names[kParamSlot] = choose(n.qvar, true, "x");
        f.names[kTypeSlot] = choose(n.tvar, true, "X");
        push(f);
        std::string body = qtype(n.body, true);
        pop();
        std::string self = f.names[kSelfSlot].empty() ? "" : f.names[kSelfSlot];
        return "(forall " + self + "[" + f.names[kTypeSlot] + "^" + f.names[kParamSlot] + " <: " + bound + "]. " +
               body + ")";
    }

    std::pair<std::string, int> term_at(const TermPtr& t) {
        return std::visit(
            [&](const auto& n) -> std::pair<std::string, int> {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, EConst>) {
                    return {std::to_string(n.value), kAtom};
                } else if constexpr (std::is_same_v<N, EUnit>) {
                    return {"unit", kAtom};
                } else if constexpr (std::is_same_v<N, EVar>) {
                    return {atom(n.var), kAtom};
                } else if constexpr (std::is_same_v<N, ELoc>) {
                    return {"@" + std::to_string(n.loc), kAtom};
                } else if constexpr (std::is_same_v<N, EAbs>) {
                    return {abs(n), kAtom};
                } else if constexpr (std::is_same_v<N, EApp>) {
                    return {term(n.fn, kPostfix) + "(" + term(n.arg) + ")", kPostfix};
                } else if constexpr (std::is_same_v<N, ERef>) {
                    return {"ref " + term(n.init, kUnary), kUnary};
                } else if constexpr (std::is_same_v<N, EDeref>) {
                    return {"!" + term(n.ref, kBang), kBang};
                } else if constexpr (std::is_same_v<N, EAssign>) {
                    return {term(n.ref, kSum) + " := " + term(n.value, kAssign), kAssign};
                } else if constexpr (std::is_same_v<N, ETAbs>) {
                    return {tabs(n), kAtom};
                } else if constexpr (std::is_same_v<N, ETApp>) {
                    return {term(n.fn, kPostfix) + "[" + qtype(n.arg, true) + "]", kPostfix};
                } else if constexpr (std::is_same_v<N, EAscribe>) {
                    return {"(" + term(n.term) + " : " + qtype(n.type, false) + ")", kAtom};
                } else if constexpr (std::is_same_v<N, ELet>) {
                    return {let(n), kLet};
                } else {
                    const char* op = n.op == PrimOp::Add ? " + " : " - ";
                    return {term(n.lhs, kSum) + op + term(n.rhs, kUnary), kSum};
                }
            },
            t->node);
    }

    std::string abs(const EAbs& n) {
        std::string dom = qtype(n.dom, true);
        bool body_self = mentions_bound(n.body, kSelfSlot) || (n.cod && mentions_bound(*n.cod, kSelfSlot));
        bool body_param = mentions_bound(n.body, kParamSlot) || (n.cod && mentions_bound(*n.cod, kParamSlot));
        Frame f;
        f.names[kSelfSlot] = choose(n.self, body_self, "f");
        f.names[kParamSlot] = choose(n.param, body_param, "x");
        push(f);
        std::string cod = n.cod ? " : " + qtype(*n.cod, false) : "";
        std::string body = term(n.body);
        pop();
        std::string param;
        if (!f.names[kParamSlot].empty())
            param = f.names[kParamSlot] + ": " + dom;
        else if (n.dom.type->is<TBase>() && n.dom.type->as<TBase>()->name == "Unit" && n.dom.qual.empty())
            param = "";
        else
            param = "_: " + dom;
        std::string self = f.names[kSelfSlot].empty() ? "" : " " + f.names[kSelfSlot];
        return "fn" + self + "(" + param + ")" + cod + " { " + body + " }";
    }

    std::string tabs(const ETAbs& n) {
        std::string bound = qtype(n.bound, true);
        Frame f;
        f.names[kSelfSlot] = choose(n.self, mentions_bound(n.body, kSelfSlot), "f");
        f.names[kParamSlot] = choose(n.qvar, true, "x");
        f.names[kTypeSlot] = choose(n.tvar, true, "X");
        push(f);
        std::string body = term(n.body);
        pop();
        std::string self = f.names[kSelfSlot].empty() ? "" : " " + f.names[kSelfSlot];
        return "tfn" + self + "[" + f.names[kTypeSlot] + "^" + f.names[kParamSlot] + " <: " + bound + "] { " + body +
               " }";
    }

    std::string let(const ELet& n) {
        std::string rhs = term(n.rhs, kAssign);
        Frame f;
        f.names[kParamSlot] = choose(n.name, mentions_bound(n.body, kParamSlot), "x");
        push(f);
        std::string body = term(n.body, kLet);
        pop();
        if (f.names[kParamSlot].empty()) return rhs + "; " + body;
        return "val " + f.names[kParamSlot] + " = " + rhs + "; " + body;
    }

    const TypeEnv* env_;
    std::vector<Frame> frames_;
    std::multiset<std::string> in_scope_;
};

}  // namespace

bool mentions_bound(const QType& q, std::uint32_t slot) {
    MentionProbe p(slot);
    p.qtype(q, 0);
    return p.hit;
}

bool mentions_bound(const TermPtr& t, std::uint32_t slot) {
    MentionProbe p(slot);
    p.term(t, 0);
    return p.hit;
}

std::string pretty(const Qualifier& q, const TypeEnv* env) { return Printer(env).qual(q); }
std::string pretty(const QType& q, const TypeEnv* env) { return Printer(env).qtype(q, false); }
std::string pretty(const TypePtr& t, const TypeEnv* env) { return Printer(env).type(t); }
std::string pretty(const TermPtr& t, const TypeEnv* env) { return Printer(env).term(t); }

}  // namespace rq
