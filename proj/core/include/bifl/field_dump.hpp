#pragma once

// Binary field dump, little-endian:
//
//   char[4]  magic "BIFL"
//   u32      version (1)
//   u32      n
//   f64      h
//   u32      array count (10)
//   u32      placement tag per array (see Placement)
//   f64[]    arrays in order phi, A.x, A.y, A.z, D.x, D.y, D.z, B.x, B.y, B.z,
//            each x-fastest with the dimensions implied by its tag.
//
// Radial CSV profile columns: r,|D|,|E|,phi,energy_density.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bifl/grid.hpp"

namespace bifl {

inline constexpr std::uint32_t kDumpVersion = 1;

void write_field_dump(std::ostream& os, const FieldState& state);
void write_field_dump(const std::string& path, const FieldState& state);
/// Throws Error on a malformed or truncated stream.
FieldState read_field_dump(std::istream& is);
FieldState read_field_dump(const std::string& path);

struct RadialSample {
  double r = 0.0;
  double d_norm = 0.0;
  double e_norm = 0.0;
  double phi = 0.0;
  double energy_density = 0.0;
};

/// Cell-center samples binned by distance from `center` with bin width h.
std::vector<RadialSample> radial_profile(const FieldState& state, const ModelParams& m,
                                         const Vec3& center = {});

void write_radial_csv(std::ostream& os, const std::vector<RadialSample>& rows);

}  // namespace bifl
