#pragma once

#include <json.hpp>

#include "rollhls/ir.hpp"

namespace rollhls {

// IR JSON schema: top-level keys "name", "params", "locals", "body", plus the
// optional "arrays" and "functions". Constants are strings (decimal or 0x-hex)
// so 128-bit values survive the round trip.
nlohmann::json expr_to_json(const Expr &e);
Expr expr_from_json(const nlohmann::json &j);
nlohmann::json kernel_to_json(const Kernel &k);
/// Builds the kernel and runs the same semantic checks as the text parser.
Kernel kernel_from_json(const nlohmann::json &j);

}  // namespace rollhls
