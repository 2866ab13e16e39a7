#pragma once

#include <string>
#include <utility>
#include <vector>

namespace causim {

// Reference constants computed by the brute-force oracle, used as frozen
// expected values throughout the test suites. The text form is checked
// in under data/derived_constants.txt and regenerated with `causim mint`.
std::vector<std::pair<std::string, double>> reference_constants();
std::string reference_constants_text();

}  // namespace causim
