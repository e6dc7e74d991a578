#include "bddcso/problems.hpp"

#include "bddcso/errors.hpp"

#include <cmath>
#include <string>

namespace bddcso {

CoefficientField make_constant(StructuredMesh const& mesh, double value)
{
  if (!(value > 0.0))
    throw InvalidArgument("coefficient value must be positive");
  return CoefficientField{std::vector<double>(static_cast<std::size_t>(mesh.cell_count()), value)};
}

CoefficientField make_channels(StructuredMesh const& mesh, std::span<int const> subdomains_per_dim,
                               ChannelSpec const& spec)
{
  int const dim = mesh.dim();
  if (static_cast<int>(subdomains_per_dim.size()) != dim)
    throw InvalidArgument("make_channels: need one subdomain count per axis");
  if (spec.axis < 0 || spec.axis >= dim)
    throw InvalidArgument("make_channels: channel axis out of range");
  if (spec.cross_section < 1)
    throw InvalidArgument("make_channels: cross-section must be at least one cell");

  std::array<long, 3> block{1, 1, 1};
  for (int d = 0; d < dim; ++d) {
    if (subdomains_per_dim[d] < 1 || mesh.cells(d) % subdomains_per_dim[d] != 0)
      throw InvalidArgument("make_channels: subdomain grid does not divide the mesh");
    block[d] = mesh.cells(d) / subdomains_per_dim[d];
    if (d != spec.axis && spec.cross_section > block[d])
      throw InvalidArgument("make_channels: cross-section " + std::to_string(spec.cross_section) +
                            " exceeds subdomain size " + std::to_string(block[d]));
  }

  double const high = std::pow(10.0, spec.exponent);
  CoefficientField field{std::vector<double>(static_cast<std::size_t>(mesh.cell_count()), 1.0)};
  for (long c = 0; c < mesh.cell_count(); ++c) {
    auto const idx = mesh.cell_index(c);
    bool inside = true;
    for (int d = 0; d < dim && inside; ++d) {
      if (d == spec.axis)
        continue;
      long const offset = idx[d] % block[d];
      long const start = (block[d] - spec.cross_section) / 2;
      inside = offset >= start && offset < start + spec.cross_section;
    }
    if (inside)
      field.alpha[c] = high;
  }
  return field;
}

} // namespace bddcso
