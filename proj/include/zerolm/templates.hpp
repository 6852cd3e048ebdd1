#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "zerolm/archspace.hpp"

namespace zerolm {

/// Built-in search-space grammars: "flexibert", "gpt2", "lonas-bert", "lonas-llama".
const std::vector<std::string> &template_names();

/// Throws ValidationError listing the known templates for unknown names.
SearchSpaceDef space_template(std::string_view name);

} // namespace zerolm
