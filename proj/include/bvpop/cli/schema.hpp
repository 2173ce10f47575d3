#pragma once

#include <string>

namespace bvpop::cli {

/// JSON schema of the scenario config, pretty-printed.
std::string config_schema();

}  // namespace bvpop::cli
