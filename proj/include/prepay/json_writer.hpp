#pragma once

#include "json.hpp"

#include <string>

namespace prepay::cli {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point number at 17 significant digits; non-finite
/// numbers become null. Key order is insertion order, so output is reproducible.
std::string to_json_text(const Json& value, int indent = 2);

/// %.12g, the CSV number format.
std::string csv_number(double x);

}  // namespace prepay::cli
