#pragma once

#include <string>

#include "relkin/suites.hpp"

namespace relkin {

using SuiteBody = void (*)(SuiteReport&, const SuiteConfig&);
// name is already validated
SuiteBody suite_body(const std::string& name);

}  // namespace relkin
