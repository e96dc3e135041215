#pragma once

#include <string>

#include "invsrc/mesh.hpp"
#include "invsrc/types.hpp"

namespace invsrc {

/// Renders a piecewise-linear nodal field as flat-shaded triangles with a
/// diverging blue-white-red scale centered at zero. Output is byte-stable
/// for identical inputs. A zero field renders single-colored.
void write_field_svg(const Mesh& mesh, const Vec& nodal_values,
                     const std::string& path, const std::string& title = "");

} // namespace invsrc
