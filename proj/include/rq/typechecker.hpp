#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rq/subtyping.hpp"

namespace rq {

enum class ErrorCode {
    UnboundVar,
    Unobservable,
    FreshnessViolation,
    OverlapViolation,
    QualifierMismatch,
    TypeMismatch,
    RefContentFresh,
    DependencyViolation,
    FuelExhausted,
    ScopeError,
};

std::string_view code_name(ErrorCode c);

struct TypeError {
    ErrorCode code;
    std::string rule;
    Span span;
    std::string detail;
};

struct TraceEntry {
    std::string rule;
    Span span;
    std::string result;
};

struct TypingResult {
    QType qtype;
    TermPtr elaborated;  // every abstraction carries its capture qualifier
    std::vector<TraceEntry> trace;
};

struct CheckOptions {
    int sub_fuel = kDefaultSubFuel;
    bool trace = false;
};

using CheckOutcome = std::variant<TypingResult, TypeError>;

inline const TypingResult* ok_result(const CheckOutcome& o) { return std::get_if<TypingResult>(&o); }
inline const TypeError* error_of(const CheckOutcome& o) { return std::get_if<TypeError>(&o); }

// Synthesize the qualified type of t under Γ^φ | Σ.
CheckOutcome synthesize(const TypeEnv& env, const StoreTyping& store, const Qualifier& observation,
                        const TermPtr& t, const CheckOptions& opts = {});

// Everything in Γ and Σ is observable.
Qualifier full_observation(const TypeEnv& env, const StoreTyping& store);
CheckOutcome check_program(const TypeEnv& env, const StoreTyping& store, const TermPtr& t,
                           const CheckOptions& opts = {});

// Synthesize, then subsume into the expected type.
std::optional<TypeError> check_against(const TypeEnv& env, const StoreTyping& store, const Qualifier& observation,
                                       const TermPtr& t, const QType& expected, const CheckOptions& opts = {});

// Scope checks for annotations, environments and store typings.
std::optional<std::string> scope_problem(const TypeEnv& env, const StoreTyping& store, const QType& q);
std::optional<std::string> telescope_problem(const TypeEnv& env, const StoreTyping& store);

}  // namespace rq
