#include "rq/surface.hpp"

namespace rq {

namespace detail {
surface::SQType parse_surface_qtype(const std::string& text);
surface::SQual parse_surface_qual(const std::string& text);
surface::SExprPtr parse_surface_expr(const std::string& text);
}  // namespace detail

namespace {

using namespace surface;

enum class NameKind { Term, Qual, TypeVar };

struct Binding {
    std::string name;
    NameKind kind;
    bool bound;            // bound by a binder group vs. free in the environment
    std::uint32_t level;   // group level for bound names
    std::uint32_t slot;
    Id id;                 // free id otherwise
};

bool anonymous(const std::string& s) { return s.empty() || s == "_"; }

class Elaborator {
public:
    explicit Elaborator(const TypeEnv& env) {
        for (const EnvEntry& e : env.entries()) {
            if (auto* t = std::get_if<TermBinding>(&e)) {
                scope_.push_back({t->name, NameKind::Term, false, 0, 0, t->id});
            } else {
                auto& b = std::get<TypeBinding>(e);
                scope_.push_back({b.tname, NameKind::TypeVar, false, 0, 0, b.tvar});
                scope_.push_back({b.qname, NameKind::Qual, false, 0, 0, b.qvar});
            }
        }
    }

    Qualifier qual(const SQual& q) {
        Qualifier out;
        out.set_fresh(q.fresh);
        for (const QualAtom& a : q.atoms) {
            if (a.name[0] == '@') {
                out.insert(Atom::loc(static_cast<Id>(std::stoul(a.name.substr(1)))));
                continue;
            }
            const Binding* b = lookup(a.name);
            if (!b) throw ElabError(ErrorCode::ScopeError, a.span, "unbound name '" + a.name + "' in qualifier");
            if (b->kind == NameKind::TypeVar)
                throw ElabError(ErrorCode::ScopeError, a.span, "type variable '" + a.name + "' used as a qualifier");
            out.insert(atom_of(*b));
        }
        return out;
    }

    QType qtype(const SQType& q) { return QType{type(*q.type), qual(q.qual)}; }

    TypePtr type(const SType& t) {
        return std::visit(
            [&](const auto& n) -> TypePtr {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, STBase>) {
                    return n.name == "Int" ? make_int() : n.name == "Unit" ? make_unit() : make_base(n.name);
                } else if constexpr (std::is_same_v<N, STTop>) {
                    return make_top();
                } else if constexpr (std::is_same_v<N, STName>) {
                    const Binding* b = lookup(n.name);
                    if (!b || b->kind != NameKind::TypeVar)
                        throw ElabError(ErrorCode::ScopeError, t.span, "unknown type '" + n.name + "'");
                    Atom a = atom_of(*b);
                    return make_tvar(b->bound ? Atom::bound(a.a, kTypeSlot) : a);
                } else if constexpr (std::is_same_v<N, STRef>) {
                    return make_ref(qtype(n.content));
                } else if constexpr (std::is_same_v<N, STFun>) {
                    QType dom = qtype(n.dom);
                    Group g(*this);
                    g.bind(n.self, NameKind::Term, kSelfSlot);
                    g.bind(n.param, NameKind::Term, kParamSlot);
                    QType cod = qtype(n.cod);
                    return make_fun(n.self, n.param, dom, cod);
                } else {
                    QType bound = qtype(n.bound);
                    Group g(*this);
                    g.bind(n.self, NameKind::Term, kSelfSlot);
                    g.bind(n.qvar, NameKind::Qual, kParamSlot);
                    g.bind(n.tvar, NameKind::TypeVar, kTypeSlot);
                    QType body = qtype(n.body);
                    return make_all(n.self, n.tvar, n.qvar, bound, body);
                }
            },
            t.node);
    }

    TermPtr expr(const SExprPtr& e) {
        const Span sp = e->span;
        return std::visit(
            [&](const auto& n) -> TermPtr {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, SInt>) {
                    return make_term(EConst{n.value}, sp);
                } else if constexpr (std::is_same_v<N, SUnit>) {
                    return make_term(EUnit{}, sp);
                } else if constexpr (std::is_same_v<N, SVar>) {
                    const Binding* b = lookup(n.name);
                    if (!b) throw ElabError(ErrorCode::UnboundVar, sp, "unbound variable '" + n.name + "'");
                    if (b->kind != NameKind::Term)
                        throw ElabError(ErrorCode::ScopeError, sp, "'" + n.name + "' is not a term variable");
                    return make_term(EVar{atom_of(*b)}, sp);
                } else if constexpr (std::is_same_v<N, SLoc>) {
                    return make_term(ELoc{n.loc}, sp);
                } else if constexpr (std::is_same_v<N, SFn>) {
                    QType dom = qtype(n.dom);
                    Group g(*this);
                    g.bind(n.self, NameKind::Term, kSelfSlot);
                    g.bind(n.param, NameKind::Term, kParamSlot);
                    std::optional<QType> cod;
                    if (n.cod) cod = qtype(*n.cod);
                    TermPtr body = expr(n.body);
                    return make_term(EAbs{n.self, n.param, dom, cod, std::nullopt, body}, sp);
                } else if constexpr (std::is_same_v<N, SApp>) {
                    return make_term(EApp{expr(n.fn), expr(n.arg)}, sp);
                } else if constexpr (std::is_same_v<N, SRef>) {
                    return make_term(ERef{expr(n.init)}, sp);
                } else if constexpr (std::is_same_v<N, SDeref>) {
                    return make_term(EDeref{expr(n.ref)}, sp);
                } else if constexpr (std::is_same_v<N, SAssign>) {
                    return make_term(EAssign{expr(n.ref), expr(n.value)}, sp);
                } else if constexpr (std::is_same_v<N, STFn>) {
                    QType bound = qtype(n.bound);
                    Group g(*this);
                    g.bind(n.self, NameKind::Term, kSelfSlot);
                    g.bind(n.qvar, NameKind::Qual, kParamSlot);
                    g.bind(n.tvar, NameKind::TypeVar, kTypeSlot);
                    TermPtr body = expr(n.body);
                    return make_term(ETAbs{n.self, n.tvar, n.qvar, bound, std::nullopt, body}, sp);
                } else if constexpr (std::is_same_v<N, STApp>) {
                    return make_term(ETApp{expr(n.fn), qtype(n.arg)}, sp);
                } else if constexpr (std::is_same_v<N, SAscribe>) {
                    return make_term(EAscribe{expr(n.term), qtype(n.type)}, sp);
                } else if constexpr (std::is_same_v<N, SLet>) {
                    if (!anonymous(n.name))
                        if (const Binding* b = lookup(n.name); b && b->kind == NameKind::Term)
                            throw ElabError(ErrorCode::ScopeError, sp, "'" + n.name + "' is already bound");
                    TermPtr rhs = expr(n.rhs);
                    Group g(*this);
                    g.bind(n.name, NameKind::Term, kParamSlot);
                    TermPtr body = expr(n.body);
                    return make_term(ELet{n.name, rhs, body}, sp);
                } else {
                    return make_term(EPrim{n.op, expr(n.lhs), expr(n.rhs)}, sp);
                }
            },
            e->node);
    }

private:
    struct Group {
        Elaborator& el;
        std::size_t mark;
        explicit Group(Elaborator& e) : el(e), mark(e.scope_.size()) { ++el.depth_; }
        ~Group() {
            el.scope_.resize(mark);
            --el.depth_;
        }
        void bind(const std::string& n, NameKind k, std::uint32_t slot) {
            if (anonymous(n)) return;
            el.scope_.push_back({n, k, true, el.depth_ - 1, slot, 0});
        }
    };

    const Binding* lookup(const std::string& n) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->name == n) return &*it;
        return nullptr;
    }

    Atom atom_of(const Binding& b) const {
        if (!b.bound) return Atom::free(b.id);
        return Atom::bound(depth_ - 1 - b.level, b.slot);
    }

    std::vector<Binding> scope_;
    std::uint32_t depth_ = 0;
};

}  // namespace

Program elaborate(const SourceProgram& src) {
    Program p;
    Id next = 0;
    for (const Decl& d : src.decls) {
        if (auto* a = std::get_if<AssumeTerm>(&d)) {
            QType t = Elaborator(p.env).qtype(a->type);
            if (auto prob = scope_problem(p.env, p.sigma, t)) throw ElabError(ErrorCode::ScopeError, a->span, *prob);
            p.env.push_term(next++, a->name, t);
        } else if (auto* a = std::get_if<AssumeType>(&d)) {
            QType b = Elaborator(p.env).qtype(a->bound);
            if (auto prob = scope_problem(p.env, p.sigma, b)) throw ElabError(ErrorCode::ScopeError, a->span, *prob);
            Id tv = next++, qv = next++;
            p.env.push_type(tv, qv, a->tname, a->qname, b);
        } else {
            auto& l = std::get<LocDecl>(d);
            if (l.loc != p.sigma.size())
                throw ElabError(ErrorCode::ScopeError, l.span,
                                "locations must be declared in order; expected @" + std::to_string(p.sigma.size()));
            TypeEnv closed;
            QType content = Elaborator(closed).qtype(l.content);
            if (auto prob = scope_problem(closed, p.sigma, content))
                throw ElabError(ErrorCode::ScopeError, l.span, *prob);
            TermPtr v = Elaborator(closed).expr(l.value);
            if (!is_value(*v)) throw ElabError(ErrorCode::ScopeError, l.span, "location initialiser must be a value");
            p.sigma.extend(content);
            p.store.cells.push_back(v);
            p.store.reach.push_back(content.qual);
        }
    }
    for (const SExprPtr& e : src.exprs) p.terms.push_back(Elaborator(p.env).expr(e));
    return p;
}

Program parse_and_elaborate(const std::string& text) { return elaborate(parse_program(text)); }

QType parse_qtype(const std::string& text, const TypeEnv& env) {
    return Elaborator(env).qtype(detail::parse_surface_qtype(text));
}

Qualifier parse_qualifier(const std::string& text, const TypeEnv& env) {
    return Elaborator(env).qual(detail::parse_surface_qual(text));
}

TermPtr parse_term(const std::string& text, const TypeEnv& env) {
    return Elaborator(env).expr(detail::parse_surface_expr(text));
}

}  // namespace rq
