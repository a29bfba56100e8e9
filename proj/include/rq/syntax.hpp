#pragma once

// Core syntax: qualifiers, qualified types and terms in locally nameless form.
// Bound names are (depth, slot) indices; free names are unique ids handed out
// by the environment.  Binder groups:
//   Fun / Abs          slot 0 = self, slot 1 = parameter
//   All / TAbs         slot 0 = self, slot 1 = qualifier var, slot 2 = type var
//   Let                slot 1 = bound name

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace rq {

using Id = std::uint32_t;

enum class AtomKind : std::uint8_t { Free, Loc, Bound };

inline constexpr std::uint32_t kSelfSlot = 0;
inline constexpr std::uint32_t kParamSlot = 1;
inline constexpr std::uint32_t kTypeSlot = 2;

struct Atom {
    AtomKind kind = AtomKind::Free;
    std::uint32_t a = 0;  // id, location, or de Bruijn depth
    std::uint32_t b = 0;  // slot for bound atoms

    static Atom free(Id id) { return {AtomKind::Free, id, 0}; }
    static Atom loc(Id l) { return {AtomKind::Loc, l, 0}; }
    static Atom bound(std::uint32_t depth, std::uint32_t slot) { return {AtomKind::Bound, depth, slot}; }

    bool is_free() const { return kind == AtomKind::Free; }
    bool is_loc() const { return kind == AtomKind::Loc; }
    bool is_bound() const { return kind == AtomKind::Bound; }

    auto operator<=>(const Atom&) const = default;
};

// A finite atom set plus the fresh marker.
class Qualifier {
public:
    Qualifier() = default;
    Qualifier(std::initializer_list<Atom> atoms, bool fresh = false);

    static Qualifier fresh_only() { return Qualifier({}, true); }

    bool fresh() const { return fresh_; }
    void set_fresh(bool f) { fresh_ = f; }
    const std::vector<Atom>& atoms() const& { return atoms_; }
    std::vector<Atom> atoms() && { return std::move(atoms_); }  // safe in range-for over temporaries
    bool empty() const { return atoms_.empty() && !fresh_; }
    bool has_atoms() const { return !atoms_.empty(); }

    bool contains(const Atom& a) const;
    void insert(const Atom& a);
    bool erase(const Atom& a);
    void merge(const Qualifier& other);  // union, including the marker

    bool atoms_subset_of(const Qualifier& other) const;
    bool subset_of(const Qualifier& other) const;  // marker respected

    Qualifier without_fresh() const;
    Qualifier with_fresh() const;
    Qualifier intersect_atoms(const Qualifier& other) const;

    bool operator==(const Qualifier&) const = default;

private:
    std::vector<Atom> atoms_;  // sorted, unique
    bool fresh_ = false;
};

Qualifier qual_union(const Qualifier& a, const Qualifier& b);

// ---------------------------------------------------------------------------
// Types

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct QType {
    TypePtr type;
    Qualifier qual;
};

struct TBase { std::string name; };
struct TTop {};
struct TVar { Atom var; };  // Free(id) or Bound(depth, kTypeSlot)
struct TRef { QType content; };
struct TFun {
    std::string self, param;  // name hints only
    QType dom;
    QType cod;  // under the binder group
};
struct TAll {
    std::string self, tvar, qvar;
    QType bound;
    QType body;  // under the binder group
};

struct Type {
    std::variant<TBase, TTop, TVar, TRef, TFun, TAll> node;

    template <class T> const T* as() const { return std::get_if<T>(&node); }
    template <class T> bool is() const { return std::holds_alternative<T>(node); }
};

TypePtr make_base(std::string name);
TypePtr make_int();
TypePtr make_unit();
TypePtr make_top();
TypePtr make_tvar(Atom var);
TypePtr make_ref(QType content);
TypePtr make_fun(std::string self, std::string param, QType dom, QType cod);
TypePtr make_all(std::string self, std::string tvar, std::string qvar, QType bound, QType body);

inline QType qt(TypePtr t, Qualifier q = {}) { return QType{std::move(t), std::move(q)}; }

// ---------------------------------------------------------------------------
// Terms

struct Span {
    int line = 0;
    int col = 0;
};

enum class PrimOp : std::uint8_t { Add, Sub };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct EConst { std::int64_t value; };
struct EUnit {};
struct EVar { Atom var; };
struct ELoc { Id loc; };
struct EAbs {
    std::string self, param;
    QType dom;
    std::optional<QType> cod;          // under the binder group
    std::optional<Qualifier> capture;  // filled in by the checker when omitted
    TermPtr body;                      // under the binder group
};
struct EApp { TermPtr fn, arg; };
struct ERef { TermPtr init; };
struct EDeref { TermPtr ref; };
struct EAssign { TermPtr ref, value; };
struct ETAbs {
    std::string self, tvar, qvar;
    QType bound;
    std::optional<Qualifier> capture;
    TermPtr body;
};
struct ETApp { TermPtr fn; QType arg; };
struct EAscribe { TermPtr term; QType type; };
struct ELet { std::string name; TermPtr rhs, body; };
struct EPrim { PrimOp op; TermPtr lhs, rhs; };

struct Term {
    std::variant<EConst, EUnit, EVar, ELoc, EAbs, EApp, ERef, EDeref, EAssign, ETAbs, ETApp, EAscribe, ELet, EPrim>
        node;
    Span span;

    template <class T> const T* as() const { return std::get_if<T>(&node); }
    template <class T> bool is() const { return std::holds_alternative<T>(node); }
};

template <class Node>
TermPtr make_term(Node n, Span span = {}) {
    return std::make_shared<const Term>(Term{std::move(n), span});
}

bool is_value(const Term& t);

// ---------------------------------------------------------------------------
// Environments

struct TermBinding {
    Id id;
    std::string name;
    QType type;
};

struct TypeBinding {
    Id tvar, qvar;
    std::string tname, qname;
    QType bound;
};

using EnvEntry = std::variant<TermBinding, TypeBinding>;

class TypeEnv {
public:
    void push_term(Id id, std::string name, QType type);
    void push_type(Id tvar, Id qvar, std::string tname, std::string qname, QType bound);
    void pop();

    std::size_t size() const { return entries_.size(); }
    const std::vector<EnvEntry>& entries() const { return entries_; }

    const TermBinding* term(Id id) const;
    const TypeBinding* qvar(Id id) const;
    const TypeBinding* tvar(Id id) const;
    bool binds_atom(Id id) const { return term(id) || qvar(id); }

    // Qualifier of the binding for a term or qualifier variable.
    const Qualifier* binding_qual(Id id) const;
    std::optional<std::string> name_of(Id id) const;

    Id fresh_id() { return next_id_++; }
    Id peek_next_id() const { return next_id_; }

private:
    void note_id(Id id);

    std::vector<EnvEntry> entries_;
    std::unordered_map<Id, std::size_t> index_;
    Id next_id_ = 0;
};

class StoreTyping {
public:
    Id extend(QType content);
    std::size_t size() const { return entries_.size(); }
    bool contains(Id l) const { return l < entries_.size(); }
    const QType& at(Id l) const { return entries_.at(l); }
    const std::vector<QType>& entries() const { return entries_; }

private:
    std::vector<QType> entries_;
};

// ---------------------------------------------------------------------------
// Free names

struct FreeNames {
    Qualifier atoms;         // free term / qualifier vars and locations
    std::vector<Id> tvars;   // free type variables (sorted)
};

FreeNames free_names(const QType& q);
FreeNames free_names(const Term& t);
// Free term-level variable and location occurrences only.
Qualifier term_free_vars(const Term& t);

// Whether a bound atom (depth 0, slot) occurs in the type part (not qualifier).
bool type_mentions_bound(const Type& t, std::uint32_t slot);

// ---------------------------------------------------------------------------
// Locally nameless rewriting

class Rewriter {
public:
    virtual ~Rewriter() = default;
    // Replacement for a qualifier atom, or nullopt to keep it.
    virtual std::optional<Qualifier> atom(const Atom& a, std::uint32_t depth) const;
    virtual TypePtr tvar(const Atom& a, std::uint32_t depth) const;
    virtual TermPtr var(const Atom& a, std::uint32_t depth) const;

    Qualifier qual(const Qualifier& q, std::uint32_t depth) const;
    TypePtr type(const TypePtr& t, std::uint32_t depth) const;
    QType qtype(const QType& q, std::uint32_t depth) const;
    TermPtr term(const TermPtr& t, std::uint32_t depth) const;
};

// Payload for the slots of the outermost binder group.
struct Opening {
    std::optional<Qualifier> qual[3];
    TermPtr term[3];
    TypePtr tvar;
};

Opening open_with_ids(std::optional<Id> self, std::optional<Id> param, std::optional<Id> tvar = std::nullopt);

QType instantiate(const QType& body, const Opening& op);
TermPtr instantiate(const TermPtr& body, const Opening& op);

// Abstract free ids into the outermost binder group (inverse of opening).
struct Closing {
    std::optional<Id> self, param, tvar;
};
QType close_over(const QType& body, const Closing& c);
TermPtr close_over(const TermPtr& body, const Closing& c);

// Replace free atoms by qualifiers (q[p/x]) and free type variables by types.
QType subst_free(const QType& q, const std::unordered_map<Id, Qualifier>& atoms,
                 const std::unordered_map<Id, TypePtr>& tvars = {});
TermPtr subst_free(const TermPtr& t, const std::unordered_map<Id, Qualifier>& atoms,
                   const std::unordered_map<Id, TypePtr>& tvars = {});

// Structural equality ignoring name hints and spans (alpha-equivalence).
bool alpha_equal(const Type& a, const Type& b);
bool alpha_equal(const QType& a, const QType& b);
bool alpha_equal(const Term& a, const Term& b);

std::size_t term_size(const Term& t);

}  // namespace rq
