#include "rq/syntax.hpp"

#include <algorithm>
#include <stdexcept>

namespace rq {

// ---------------------------------------------------------------------------
// Qualifier

Qualifier::Qualifier(std::initializer_list<Atom> atoms, bool fresh) : atoms_(atoms), fresh_(fresh) {
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool Qualifier::contains(const Atom& a) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), a);
}

void Qualifier::insert(const Atom& a) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || *it != a) atoms_.insert(it, a);
}

bool Qualifier::erase(const Atom& a) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end() || *it != a) return false;
    atoms_.erase(it);
    return true;
}

void Qualifier::merge(const Qualifier& other) {
    std::vector<Atom> out;
    out.reserve(atoms_.size() + other.atoms_.size());
    std::set_union(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end(), std::back_inserter(out));
    atoms_ = std::move(out);
    fresh_ = fresh_ || other.fresh_;
}

bool Qualifier::atoms_subset_of(const Qualifier& other) const {
    return std::includes(other.atoms_.begin(), other.atoms_.end(), atoms_.begin(), atoms_.end());
}

bool Qualifier::subset_of(const Qualifier& other) const {
    return (!fresh_ || other.fresh_) && atoms_subset_of(other);
}

Qualifier Qualifier::without_fresh() const {
    Qualifier q = *this;
    q.fresh_ = false;
    return q;
}

Qualifier Qualifier::with_fresh() const {
    Qualifier q = *this;
    q.fresh_ = true;
    return q;
}

Qualifier Qualifier::intersect_atoms(const Qualifier& other) const {
    Qualifier q;
    std::set_intersection(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end(),
                          std::back_inserter(q.atoms_));
    return q;
}

Qualifier qual_union(const Qualifier& a, const Qualifier& b) {
    Qualifier q = a;
    q.merge(b);
    return q;
}

// ---------------------------------------------------------------------------
// Type constructors

namespace {
template <class N>
TypePtr mk(N n) {
    return std::make_shared<const Type>(Type{std::move(n)});
}
}  // namespace

TypePtr make_base(std::string name) { return mk(TBase{std::move(name)}); }

TypePtr make_int() {
    static const TypePtr t = make_base("Int");
    return t;
}

TypePtr make_unit() {
    static const TypePtr t = make_base("Unit");
    return t;
}

TypePtr make_top() {
    static const TypePtr t = mk(TTop{});
    return t;
}

TypePtr make_tvar(Atom var) { return mk(TVar{var}); }
TypePtr make_ref(QType content) { return mk(TRef{std::move(content)}); }

TypePtr make_fun(std::string self, std::string param, QType dom, QType cod) {
    return mk(TFun{std::move(self), std::move(param), std::move(dom), std::move(cod)});
}

TypePtr make_all(std::string self, std::string tvar, std::string qvar, QType bound, QType body) {
    return mk(TAll{std::move(self), std::move(tvar), std::move(qvar), std::move(bound), std::move(body)});
}

bool is_value(const Term& t) {
    return t.is<EConst>() || t.is<EUnit>() || t.is<ELoc>() || t.is<EAbs>() || t.is<ETAbs>();
}

// ---------------------------------------------------------------------------
// Environments

void TypeEnv::note_id(Id id) {
    if (index_.count(id)) throw std::logic_error("duplicate binder id in environment");
    next_id_ = std::max(next_id_, id + 1);
}

void TypeEnv::push_term(Id id, std::string name, QType type) {
    note_id(id);
    index_[id] = entries_.size();
    entries_.emplace_back(TermBinding{id, std::move(name), std::move(type)});
}

void TypeEnv::push_type(Id tvar, Id qvar, std::string tname, std::string qname, QType bound) {
    note_id(tvar);
    note_id(qvar);
    index_[tvar] = entries_.size();
    index_[qvar] = entries_.size();
    entries_.emplace_back(TypeBinding{tvar, qvar, std::move(tname), std::move(qname), std::move(bound)});
}

void TypeEnv::pop() {
    const EnvEntry& e = entries_.back();
    if (auto* t = std::get_if<TermBinding>(&e)) {
        index_.erase(t->id);
    } else {
        auto& b = std::get<TypeBinding>(e);
        index_.erase(b.tvar);
        index_.erase(b.qvar);
    }
    entries_.pop_back();
}

const TermBinding* TypeEnv::term(Id id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    return std::get_if<TermBinding>(&entries_[it->second]);
}

const TypeBinding* TypeEnv::qvar(Id id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    auto* b = std::get_if<TypeBinding>(&entries_[it->second]);
    return (b && b->qvar == id) ? b : nullptr;
}

const TypeBinding* TypeEnv::tvar(Id id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return nullptr;
    auto* b = std::get_if<TypeBinding>(&entries_[it->second]);
    return (b && b->tvar == id) ? b : nullptr;
}

const Qualifier* TypeEnv::binding_qual(Id id) const {
    if (auto* t = term(id)) return &t->type.qual;
    if (auto* b = qvar(id)) return &b->bound.qual;
    return nullptr;
}

std::optional<std::string> TypeEnv::name_of(Id id) const {
    if (auto* t = term(id)) return t->name;
    if (auto* b = qvar(id)) return b->qname;
    if (auto* b = tvar(id)) return b->tname;
    return std::nullopt;
}

Id StoreTyping::extend(QType content) {
    entries_.push_back(std::move(content));
    return static_cast<Id>(entries_.size() - 1);
}

// ---------------------------------------------------------------------------
// Free names

namespace {

struct FreeCollector {
    FreeNames out;
    bool term_level_only = false;

    void qual(const Qualifier& q) {
        if (term_level_only) return;
        for (const Atom& a : q.atoms())
            if (!a.is_bound()) out.atoms.insert(a);
    }

    void type(const Type& t) {
        if (term_level_only) return;
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, TVar>) {
                    if (n.var.is_free()) out.tvars.push_back(n.var.a);
                } else if constexpr (std::is_same_v<N, TRef>) {
                    qtype(n.content);
                } else if constexpr (std::is_same_v<N, TFun>) {
                    qtype(n.dom);
                    qtype(n.cod);
                } else if constexpr (std::is_same_v<N, TAll>) {
                    qtype(n.bound);
                    qtype(n.body);
                }
            },
            t.node);
    }

    void qtype(const QType& q) {
        type(*q.type);
        qual(q.qual);
    }

    void term(const Term& t) {
        std::visit(
            [&](const auto& n) {
                using N = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<N, EVar>) {
                    if (n.var.is_free()) out.atoms.insert(n.var);
                } else if constexpr (std::is_same_v<N, ELoc>) {
                    out.atoms.insert(Atom::loc(n.loc));
                } else if constexpr (std::is_same_v<N, EAbs>) {
                    qtype(n.dom);
                    if (n.cod) qtype(*n.cod);
                    if (n.capture) qual(*n.capture);
                    term(*n.body);
                } else if constexpr (std::is_same_v<N, EApp>) {
                    term(*n.fn);
                    term(*n.arg);
                } else if constexpr (std::is_same_v<N, ERef>) {
                    term(*n.init);
                } else if constexpr (std::is_same_v<N, EDeref>) {
                    term(*n.ref);
                } else if constexpr (std::is_same_v<N, EAssign>) {
                    term(*n.ref);
                    term(*n.value);
                } else if constexpr (std::is_same_v<N, ETAbs>) {
                    qtype(n.bound);
                    if (n.capture) qual(*n.capture);
                    term(*n.body);
                } else if constexpr (std::is_same_v<N, ETApp>) {
                    term(*n.fn);
                    qtype(n.arg);
                } else if constexpr (std::is_same_v<N, EAscribe>) {
                    term(*n.term);
                    qtype(n.type);
                } else if constexpr (std::is_same_v<N, ELet>) {
                    term(*n.rhs);
                    term(*n.body);
                } else if constexpr (std::is_same_v<N, EPrim>) {
                    term(*n.lhs);
                    term(*n.rhs);
                }
            },
            t.node);
    }

    FreeNames finish() {
        std::sort(out.tvars.begin(), out.tvars.end());
        out.tvars.erase(std::unique(out.tvars.begin(), out.tvars.end()), out.tvars.end());
        return std::move(out);
    }
};

}  // namespace

FreeNames free_names(const QType& q) {
    FreeCollector c;
    c.qtype(q);
    return c.finish();
}

FreeNames free_names(const Term& t) {
    FreeCollector c;
    c.term(t);
    return c.finish();
}

Qualifier term_free_vars(const Term& t) {
    FreeCollector c;
    c.term_level_only = true;
    c.term(t);
    return c.finish().atoms;
}

namespace {

bool qual_mentions(const Qualifier& q, std::uint32_t depth, std::uint32_t slot) {
    return q.contains(Atom::bound(depth, slot));
}

bool mentions(const Type& t, std::uint32_t depth, std::uint32_t slot);

bool mentions(const QType& q, std::uint32_t depth, std::uint32_t slot) {
    return qual_mentions(q.qual, depth, slot) || mentions(*q.type, depth, slot);
}

bool mentions(const Type& t, std::uint32_t depth, std::uint32_t slot) {
    if (auto* v = t.as<TVar>()) return v->var == Atom::bound(depth, slot);
    if (auto* r = t.as<TRef>()) return mentions(r->content, depth, slot);
    if (auto* f = t.as<TFun>()) return mentions(f->dom, depth, slot) || mentions(f->cod, depth + 1, slot);
    if (auto* a = t.as<TAll>()) return mentions(a->bound, depth, slot) || mentions(a->body, depth + 1, slot);
    return false;
}

}  // namespace

bool type_mentions_bound(const Type& t, std::uint32_t slot) { return mentions(t, 0, slot); }

// ---------------------------------------------------------------------------
// Rewriter

std::optional<Qualifier> Rewriter::atom(const Atom&, std::uint32_t) const { return std::nullopt; }
TypePtr Rewriter::tvar(const Atom&, std::uint32_t) const { return nullptr; }
TermPtr Rewriter::var(const Atom&, std::uint32_t) const { return nullptr; }

Qualifier Rewriter::qual(const Qualifier& q, std::uint32_t depth) const {
    Qualifier out;
    out.set_fresh(q.fresh());
    for (const Atom& a : q.atoms()) {
        if (auto r = atom(a, depth))
            out.merge(*r);
        else
            out.insert(a);
    }
    return out;
}

QType Rewriter::qtype(const QType& q, std::uint32_t depth) const {
    return QType{type(q.type, depth), qual(q.qual, depth)};
}

TypePtr Rewriter::type(const TypePtr& t, std::uint32_t depth) const {
    return std::visit(
        [&](const auto& n) -> TypePtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, TVar>) {
                if (auto r = tvar(n.var, depth)) return r;
                return t;
            } else if constexpr (std::is_same_v<N, TRef>) {
                return make_ref(qtype(n.content, depth));
            } else if constexpr (std::is_same_v<N, TFun>) {
                return make_fun(n.self, n.param, qtype(n.dom, depth), qtype(n.cod, depth + 1));
            } else if constexpr (std::is_same_v<N, TAll>) {
                return make_all(n.self, n.tvar, n.qvar, qtype(n.bound, depth), qtype(n.body, depth + 1));
            } else {
                return t;
            }
        },
        t->node);
}

TermPtr Rewriter::term(const TermPtr& t, std::uint32_t depth) const {
    const Span sp = t->span;
    return std::visit(
        [&](const auto& n) -> TermPtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, EVar>) {
                if (auto r = var(n.var, depth)) return r;
                return t;
            } else if constexpr (std::is_same_v<N, EAbs>) {
                EAbs out{n.self, n.param, qtype(n.dom, depth), std::nullopt, std::nullopt, term(n.body, depth + 1)};
                if (n.cod) out.cod = qtype(*n.cod, depth + 1);
                if (n.capture) out.capture = qual(*n.capture, depth);
                return make_term(std::move(out), sp);
            } else if constexpr (std::is_same_v<N, EApp>) {
                return make_term(EApp{term(n.fn, depth), term(n.arg, depth)}, sp);
            } else if constexpr (std::is_same_v<N, ERef>) {
                return make_term(ERef{term(n.init, depth)}, sp);
            } else if constexpr (std::is_same_v<N, EDeref>) {
                return make_term(EDeref{term(n.ref, depth)}, sp);
            } else if constexpr (std::is_same_v<N, EAssign>) {
                return make_term(EAssign{term(n.ref, depth), term(n.value, depth)}, sp);
            } else if constexpr (std::is_same_v<N, ETAbs>) {
                ETAbs out{n.self, n.tvar, n.qvar, qtype(n.bound, depth), std::nullopt, term(n.body, depth + 1)};
                if (n.capture) out.capture = qual(*n.capture, depth);
                return make_term(std::move(out), sp);
            } else if constexpr (std::is_same_v<N, ETApp>) {
                return make_term(ETApp{term(n.fn, depth), qtype(n.arg, depth)}, sp);
            } else if constexpr (std::is_same_v<N, EAscribe>) {
                return make_term(EAscribe{term(n.term, depth), qtype(n.type, depth)}, sp);
            } else if constexpr (std::is_same_v<N, ELet>) {
                return make_term(ELet{n.name, term(n.rhs, depth), term(n.body, depth + 1)}, sp);
            } else if constexpr (std::is_same_v<N, EPrim>) {
                return make_term(EPrim{n.op, term(n.lhs, depth), term(n.rhs, depth)}, sp);
            } else {
                return t;
            }
        },
        t->node);
}

// ---------------------------------------------------------------------------
// Opening / closing / substitution

namespace {

class OpenRewriter final : public Rewriter {
public:
    explicit OpenRewriter(const Opening& op) : op_(op) {}

    std::optional<Qualifier> atom(const Atom& a, std::uint32_t depth) const override {
        if (a.is_bound() && a.a == depth && a.b < 3 && op_.qual[a.b]) return op_.qual[a.b];
        return std::nullopt;
    }
    TypePtr tvar(const Atom& a, std::uint32_t depth) const override {
        if (a.is_bound() && a.a == depth && a.b == kTypeSlot) return op_.tvar;
        return nullptr;
    }
    TermPtr var(const Atom& a, std::uint32_t depth) const override {
        if (a.is_bound() && a.a == depth && a.b < 3) return op_.term[a.b];
        return nullptr;
    }

private:
    const Opening& op_;
};

class CloseRewriter final : public Rewriter {
public:
    explicit CloseRewriter(const Closing& c) : c_(c) {}

    std::optional<std::uint32_t> slot_of(const Atom& a) const {
        if (!a.is_free()) return std::nullopt;
        if (c_.self && *c_.self == a.a) return kSelfSlot;
        if (c_.param && *c_.param == a.a) return kParamSlot;
        return std::nullopt;
    }

    std::optional<Qualifier> atom(const Atom& a, std::uint32_t depth) const override {
        if (auto s = slot_of(a)) return Qualifier({Atom::bound(depth, *s)});
        return std::nullopt;
    }
    TypePtr tvar(const Atom& a, std::uint32_t depth) const override {
        if (a.is_free() && c_.tvar && *c_.tvar == a.a) return make_tvar(Atom::bound(depth, kTypeSlot));
        return nullptr;
    }
    TermPtr var(const Atom& a, std::uint32_t depth) const override {
        if (auto s = slot_of(a)) return make_term(EVar{Atom::bound(depth, *s)});
        return nullptr;
    }

private:
    const Closing& c_;
};

class FreeSubstRewriter final : public Rewriter {
public:
    FreeSubstRewriter(const std::unordered_map<Id, Qualifier>& atoms, const std::unordered_map<Id, TypePtr>& tvars)
        : atoms_(atoms), tvars_(tvars) {}

    std::optional<Qualifier> atom(const Atom& a, std::uint32_t) const override {
        if (!a.is_free()) return std::nullopt;
        auto it = atoms_.find(a.a);
        if (it == atoms_.end()) return std::nullopt;
        return it->second;
    }
    TypePtr tvar(const Atom& a, std::uint32_t) const override {
        if (!a.is_free()) return nullptr;
        auto it = tvars_.find(a.a);
        return it == tvars_.end() ? nullptr : it->second;
    }

private:
    const std::unordered_map<Id, Qualifier>& atoms_;
    const std::unordered_map<Id, TypePtr>& tvars_;
};

}  // namespace

Opening open_with_ids(std::optional<Id> self, std::optional<Id> param, std::optional<Id> tvar) {
    Opening op;
    if (self) {
        op.qual[kSelfSlot] = Qualifier({Atom::free(*self)});
        op.term[kSelfSlot] = make_term(EVar{Atom::free(*self)});
    }
    if (param) {
        op.qual[kParamSlot] = Qualifier({Atom::free(*param)});
        op.term[kParamSlot] = make_term(EVar{Atom::free(*param)});
    }
    if (tvar) op.tvar = make_tvar(Atom::free(*tvar));
    return op;
}

QType instantiate(const QType& body, const Opening& op) { return OpenRewriter(op).qtype(body, 0); }
TermPtr instantiate(const TermPtr& body, const Opening& op) { return OpenRewriter(op).term(body, 0); }

QType close_over(const QType& body, const Closing& c) { return CloseRewriter(c).qtype(body, 0); }
TermPtr close_over(const TermPtr& body, const Closing& c) { return CloseRewriter(c).term(body, 0); }

QType subst_free(const QType& q, const std::unordered_map<Id, Qualifier>& atoms,
                 const std::unordered_map<Id, TypePtr>& tvars) {
    return FreeSubstRewriter(atoms, tvars).qtype(q, 0);
}

TermPtr subst_free(const TermPtr& t, const std::unordered_map<Id, Qualifier>& atoms,
                   const std::unordered_map<Id, TypePtr>& tvars) {
    return FreeSubstRewriter(atoms, tvars).term(t, 0);
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

bool alpha_equal(const QType& a, const QType& b) { return a.qual == b.qual && alpha_equal(*a.type, *b.type); }

bool alpha_equal(const Type& a, const Type& b) {
    if (a.node.index() != b.node.index()) return false;
    if (auto* x = a.as<TBase>()) return x->name == b.as<TBase>()->name;
    if (a.is<TTop>()) return true;
    if (auto* x = a.as<TVar>()) return x->var == b.as<TVar>()->var;
    if (auto* x = a.as<TRef>()) return alpha_equal(x->content, b.as<TRef>()->content);
    if (auto* x = a.as<TFun>()) {
        auto* y = b.as<TFun>();
        return alpha_equal(x->dom, y->dom) && alpha_equal(x->cod, y->cod);
    }
    auto* x = a.as<TAll>();
    auto* y = b.as<TAll>();
    return alpha_equal(x->bound, y->bound) && alpha_equal(x->body, y->body);
}

namespace {
bool opt_equal(const std::optional<QType>& a, const std::optional<QType>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || alpha_equal(*a, *b);
}
}  // namespace

bool alpha_equal(const Term& a, const Term& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using N = std::decay_t<decltype(x)>;
            const N& y = std::get<N>(b.node);
            if constexpr (std::is_same_v<N, EConst>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<N, EUnit>) {
                return true;
            } else if constexpr (std::is_same_v<N, EVar>) {
                return x.var == y.var;
            } else if constexpr (std::is_same_v<N, ELoc>) {
                return x.loc == y.loc;
            } else if constexpr (std::is_same_v<N, EAbs>) {
                return alpha_equal(x.dom, y.dom) && opt_equal(x.cod, y.cod) && x.capture == y.capture &&
                       alpha_equal(*x.body, *y.body);
            } else if constexpr (std::is_same_v<N, EApp>) {
                return alpha_equal(*x.fn, *y.fn) && alpha_equal(*x.arg, *y.arg);
            } else if constexpr (std::is_same_v<N, ERef>) {
                return alpha_equal(*x.init, *y.init);
            } else if constexpr (std::is_same_v<N, EDeref>) {
                return alpha_equal(*x.ref, *y.ref);
            } else if constexpr (std::is_same_v<N, EAssign>) {
                return alpha_equal(*x.ref, *y.ref) && alpha_equal(*x.value, *y.value);
            } else if constexpr (std::is_same_v<N, ETAbs>) {
                return alpha_equal(x.bound, y.bound) && x.capture == y.capture && alpha_equal(*x.body, *y.body);
            } else if constexpr (std::is_same_v<N, ETApp>) {
                return alpha_equal(*x.fn, *y.fn) && alpha_equal(x.arg, y.arg);
            } else if constexpr (std::is_same_v<N, EAscribe>) {
                return alpha_equal(*x.term, *y.term) && alpha_equal(x.type, y.type);
            } else if constexpr (std::is_same_v<N, ELet>) {
                return alpha_equal(*x.rhs, *y.rhs) && alpha_equal(*x.body, *y.body);
            } else {
                return x.op == y.op && alpha_equal(*x.lhs, *y.lhs) && alpha_equal(*x.rhs, *y.rhs);
            }
        },
        a.node);
}

std::size_t term_size(const Term& t) {
    return std::visit(
        [](const auto& n) -> std::size_t {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, EAbs> || std::is_same_v<N, ETAbs>) {
                return 1 + term_size(*n.body);
            } else if constexpr (std::is_same_v<N, EApp>) {
                return 1 + term_size(*n.fn) + term_size(*n.arg);
            } else if constexpr (std::is_same_v<N, ERef>) {
                return 1 + term_size(*n.init);
            } else if constexpr (std::is_same_v<N, EDeref>) {
                return 1 + term_size(*n.ref);
            } else if constexpr (std::is_same_v<N, EAssign>) {
                return 1 + term_size(*n.ref) + term_size(*n.value);
            } else if constexpr (std::is_same_v<N, ETApp>) {
                return 1 + term_size(*n.fn);
            } else if constexpr (std::is_same_v<N, EAscribe>) {
                return 1 + term_size(*n.term);
            } else if constexpr (std::is_same_v<N, ELet>) {
                return 1 + term_size(*n.rhs) + term_size(*n.body);
            } else if constexpr (std::is_same_v<N, EPrim>) {
                return 1 + term_size(*n.lhs) + term_size(*n.rhs);
            } else {
                return 1;
            }
        },
        t.node);
}

}  // namespace rq
