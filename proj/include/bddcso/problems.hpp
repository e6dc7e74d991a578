#pragma once

/** @file problems.hpp
    @brief Coefficient fields for the homogeneous and the high-contrast channel problems.
*/

#include "bddcso/mesh.hpp"

#include <span>

namespace bddcso {

CoefficientField make_constant(StructuredMesh const& mesh, double value);

/// Straight bars of coefficient 10^exponent in a unit background. One bar runs along
/// `axis` through the centre of every column of subdomains; its square cross-section is
/// `cross_section` cells wide in each transverse direction.
struct ChannelSpec
{
  double exponent = 0.0;
  int cross_section = 2;
  int axis = 0;
};

CoefficientField make_channels(StructuredMesh const& mesh, std::span<int const> subdomains_per_dim,
                               ChannelSpec const& spec);

} // namespace bddcso
