#pragma once

#include <string>
#include <vector>

#include "rq/typechecker.hpp"

namespace rq {

inline constexpr std::size_t kDefaultEvalFuel = 100000;

// Runtime store.  `reach` holds, per location, the saturated qualifier of the
// value it was allocated with; it is what values substitute for their names.
struct Store {
    std::vector<TermPtr> cells;
    std::vector<Qualifier> reach;

    std::size_t size() const { return cells.size(); }
};

enum class StepKind { Value, Stepped, Stuck };
enum class EventKind { None, Beta, BetaT, Alloc, Deref, Assign, Let, Ascribe, Prim };

std::string_view event_name(EventKind k);

struct StepResult {
    StepKind kind = StepKind::Value;
    TermPtr term;
    EventKind event = EventKind::None;
    std::optional<Id> loc;  // touched location
    std::string stuck_reason;
};

// Call-by-value, function before argument, left before right.
StepResult step(const TermPtr& t, Store& store);

// Qualifier a closed value stands for when substituted into annotations.
Qualifier value_qual(const Term& v, const Store& store);

enum class EvalOutcome { Value, Stuck, OutOfFuel };
std::string_view outcome_name(EvalOutcome o);

struct EvalResult {
    EvalOutcome outcome = EvalOutcome::Value;
    TermPtr term;
    Store store;
    std::size_t steps = 0;
    std::string stuck_reason;
    std::vector<std::string> trace;
};

EvalResult evaluate(TermPtr t, Store store, std::size_t fuel = kDefaultEvalFuel, bool trace = false);

// Entries closed, qualifiers made of locations only, saturated.
std::optional<std::string> store_wf(const StoreTyping& sigma);

// Typing of a freshly allocated value, used to extend Σ.
std::optional<QType> allocation_typing(const TermPtr& value, const StoreTyping& sigma);

struct PreservationStep {
    std::size_t index = 0;
    EventKind event = EventKind::None;
    Qualifier witness;            // p in q[p/◇]
    std::vector<Id> new_locations;  // dom(Σ') minus dom(Σ)
    std::string before, after;
    bool exact = false;  // re-synthesized type equals the predicted one
    std::string problem;  // empty when the step preserved typing
};

struct PreservationReport {
    std::optional<TypeError> initial_error;
    QType initial;
    std::vector<PreservationStep> steps;
    std::size_t violations = 0;
    std::size_t progress_violations = 0;
    EvalOutcome outcome = EvalOutcome::Value;
    TermPtr final_term;
    StoreTyping final_sigma;
    Store final_store;
};

PreservationReport check_preservation(const TermPtr& t, const StoreTyping& sigma0, const Store& store0,
                                      std::size_t fuel = kDefaultEvalFuel, const CheckOptions& opts = {});

struct SeparationReport {
    bool premise_ok = false;
    std::string premise_problem;
    std::size_t steps = 0;
    std::vector<std::string> violations;
    std::vector<Id> graph1, graph2;  // locations reachable from each final value
    bool disjoint = false;
    TermPtr final1, final2;
};

SeparationReport separation_experiment(const TermPtr& t1, const TermPtr& t2, const StoreTyping& sigma0,
                                       const Store& store0, std::size_t fuel = kDefaultEvalFuel,
                                       const CheckOptions& opts = {});

// Locations reachable at run time from a term through the store.
std::vector<Id> runtime_reach(const TermPtr& t, const Store& store);

// Values are non-fresh, and re-check under φ narrowed to the value's own qualifier.
std::optional<std::string> value_lemmas(const TermPtr& v, const StoreTyping& sigma, const CheckOptions& opts = {});

}  // namespace rq
