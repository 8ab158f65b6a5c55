#pragma once

#include <string>
#include <string_view>

#include "puca/gadget_synth.hpp"

namespace puca {

// Text form of a plan: a versioned header of `key value...` lines, then
// `particles <count>` followed by the gadget in Configuration format.
std::string write_plan(const GadgetPlan& plan);

// Throws ParseError with the offending line.
GadgetPlan read_plan(std::string_view text);

}  // namespace puca
