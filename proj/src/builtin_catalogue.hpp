#pragma once

#include <span>

namespace sparsesphere::detail {

struct CatalogueEntry {
  const char* name;
  const char* label;
  int strength;
  std::span<const double> coordinates;  // x0 y0 z0 x1 y1 z1 ...
};

/// Embedded designs for ladder levels 2, 3, ... in order.
std::span<const CatalogueEntry> catalogue_entries();

}  // namespace sparsesphere::detail
