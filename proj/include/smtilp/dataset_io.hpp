#pragma once

#include <string>
#include <string_view>

#include "smtilp/logic.hpp"

namespace smtilp {

/// Parses `pred(a,b,...)`; throws Error on malformed text.
GroundAtom parse_ground_atom(std::string_view text);

/// Line-oriented facts format:
///   fact <pred>(<obj>,...)
///   measure <obj> <attr> <real>
///   example <id> <pos|neg> <headpred>(<obj>,...)
/// `#` starts a comment. Facts and measurements go to the background.
Dataset parse_dataset(std::string_view text);
Dataset load_dataset(const std::string& path);

/// Inverse of parse_dataset; reals are printed with round-trip precision.
std::string serialize_dataset(const Dataset& d);
void save_dataset(const Dataset& d, const std::string& path);

std::string format_real(double v);

}  // namespace smtilp
