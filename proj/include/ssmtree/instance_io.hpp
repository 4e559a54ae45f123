#pragma once

#include <iosfwd>
#include <string>

#include "ssmtree/tree_model.hpp"

namespace ssmtree {

// Instance files are JSON:
//   { "q": 5, "d": 2, "h": 3,
//     "eta":       [{"v": "0.1.2", "c": 1}, ...],
//     "eta_prime": [{"v": "0.1.2", "c": 2}, ...] }
// Colors are 1-based in files and 0-based in memory; "" addresses the root.
// "eta_prime" may be omitted, in which case it copies "eta".
BoundaryPair load_instance(std::istream& in);
BoundaryPair load_instance_file(const std::string& path);

std::string save_instance(const BoundaryPair& pair);

}  // namespace ssmtree
