#pragma once

#include <string>

#include "rq/syntax.hpp"

namespace rq {

// Free ids are named through the environment when given; unknown ids print as `?N`.
std::string pretty(const Qualifier& q, const TypeEnv* env = nullptr);
std::string pretty(const QType& q, const TypeEnv* env = nullptr);
std::string pretty(const TypePtr& t, const TypeEnv* env = nullptr);
std::string pretty(const TermPtr& t, const TypeEnv* env = nullptr);

// Whether a bound slot of the outermost group occurs anywhere (type or qualifier).
bool mentions_bound(const QType& q, std::uint32_t slot);
bool mentions_bound(const TermPtr& t, std::uint32_t slot);

}  // namespace rq
