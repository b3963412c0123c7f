#pragma once

#include <string>

#include "ssc/params.hpp"

namespace ssc {

/// On-disk layout under `dir`:
///   manifest.txt      one line per tensor: "<name> <ndim> <d0> <d1> ..."
///   <name>.bin        flat little-endian 64-bit floats, row-major
/// The round trip is bit-exact. Tensor names are restricted to
/// [A-Za-z0-9._-] so they double as file names.
void save_params(const std::string& dir, const ParamSet& params);

/// Loads every tensor listed in the manifest (requires_grad = false).
ParamSet load_params(const std::string& dir);

/// Copies the manifest values into an existing registry; every name must
/// match in both directions and shapes must agree.
void load_params_into(const std::string& dir, ParamSet& params);

}  // namespace ssc
