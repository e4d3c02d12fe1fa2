#pragma once

#include <string_view>

namespace fairsq {

// Comparison of a linear form against zero: `lhs REL 0`.
enum class Relation { Le, Lt, Ge, Gt, Eq };

constexpr std::string_view to_string(Relation r) noexcept
{
    switch (r) {
    case Relation::Le: return "<=";
    case Relation::Lt: return "<";
    case Relation::Ge: return ">=";
    case Relation::Gt: return ">";
    case Relation::Eq: return "==";
    }
    return "?";
}

// Relation holding exactly where `r` fails. Eq has no single-relation
// complement; callers expand it into `< or >`.
constexpr Relation complement(Relation r) noexcept
{
    switch (r) {
    case Relation::Le: return Relation::Gt;
    case Relation::Lt: return Relation::Ge;
    case Relation::Ge: return Relation::Lt;
    case Relation::Gt: return Relation::Le;
    case Relation::Eq: return Relation::Eq;
    }
    return r;
}

constexpr bool holds(double value, Relation r) noexcept
{
    switch (r) {
    case Relation::Le: return value <= 0;
    case Relation::Lt: return value < 0;
    case Relation::Ge: return value >= 0;
    case Relation::Gt: return value > 0;
    case Relation::Eq: return value == 0;
    }
    return false;
}

} // namespace fairsq
