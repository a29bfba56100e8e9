#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rq/evaluator.hpp"

namespace rq {

struct ParseError : std::runtime_error {
    Span span;
    ParseError(Span s, const std::string& msg)
        : std::runtime_error(std::to_string(s.line) + ":" + std::to_string(s.col) + ": " + msg), span(s) {}
};

// Name resolution failure during elaboration.
struct ElabError : std::runtime_error {
    ErrorCode code;
    Span span;
    ElabError(ErrorCode c, Span s, const std::string& msg) : std::runtime_error(msg), code(c), span(s) {}
};

namespace surface {

struct QualAtom {
    std::string name;  // identifier, or "@N" for a location
    Span span;
};

struct SQual {
    std::vector<QualAtom> atoms;
    bool fresh = false;
};

struct SType;
using STypePtr = std::shared_ptr<const SType>;

struct SQType {
    STypePtr type;
    SQual qual;
};

struct STBase { std::string name; };
struct STTop {};
struct STName { std::string name; };
struct STRef { SQType content; };
struct STFun { std::string self, param; SQType dom, cod; };
struct STAll { std::string self, tvar, qvar; SQType bound, body; };

struct SType {
    std::variant<STBase, STTop, STName, STRef, STFun, STAll> node;
    Span span;
};

struct SExpr;
using SExprPtr = std::shared_ptr<const SExpr>;

struct SInt { std::int64_t value; };
struct SUnit {};
struct SVar { std::string name; };
struct SLoc { Id loc; };
struct SFn { std::string self, param; SQType dom; std::optional<SQType> cod; SExprPtr body; };
struct SApp { SExprPtr fn, arg; };
struct SRef { SExprPtr init; };
struct SDeref { SExprPtr ref; };
struct SAssign { SExprPtr ref, value; };
struct STFn { std::string self, tvar, qvar; SQType bound; SExprPtr body; };
struct STApp { SExprPtr fn; SQType arg; };
struct SAscribe { SExprPtr term; SQType type; };
struct SLet { std::string name; SExprPtr rhs, body; };
struct SPrim { PrimOp op; SExprPtr lhs, rhs; };

struct SExpr {
    std::variant<SInt, SUnit, SVar, SLoc, SFn, SApp, SRef, SDeref, SAssign, STFn, STApp, SAscribe, SLet, SPrim> node;
    Span span;
};

struct AssumeTerm { std::string name; SQType type; Span span; };
struct AssumeType { std::string tname, qname; SQType bound; Span span; };
struct LocDecl { Id loc; SQType content; SExprPtr value; Span span; };

using Decl = std::variant<AssumeTerm, AssumeType, LocDecl>;

struct SourceProgram {
    std::vector<Decl> decls;
    std::vector<SExprPtr> exprs;  // one, or two for separation experiments
};

}  // namespace surface

surface::SourceProgram parse_program(const std::string& text);

struct Program {
    TypeEnv env;
    StoreTyping sigma;
    Store store;
    std::vector<TermPtr> terms;
};

// Resolves names to locally nameless core terms.  Throws ElabError.
Program elaborate(const surface::SourceProgram& src);
Program parse_and_elaborate(const std::string& text);

// Standalone pieces, resolved against an environment.
QType parse_qtype(const std::string& text, const TypeEnv& env = {});
Qualifier parse_qualifier(const std::string& text, const TypeEnv& env = {});
TermPtr parse_term(const std::string& text, const TypeEnv& env = {});

}  // namespace rq
