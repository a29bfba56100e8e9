#pragma once

#include <string>

#include "rq/qualifiers.hpp"

namespace rq {

inline constexpr int kDefaultSubFuel = 512;

enum class SubStatus { Ok, QualifierFail, TypeFail, FuelExhausted };

struct SubResult {
    SubStatus status = SubStatus::Ok;
    std::string detail;

    bool ok() const { return status == SubStatus::Ok; }
};

// Fuel is spent on every type-variable unfolding and every universal comparison.
SubResult type_sub(const TypeEnv& env, const StoreTyping& store, const TypePtr& s, const TypePtr& t,
                   int fuel = kDefaultSubFuel);
// Qualifier obligation first, then the type.
SubResult qtype_sub(const TypeEnv& env, const StoreTyping& store, const QType& s, const QType& t,
                    int fuel = kDefaultSubFuel);

}  // namespace rq
