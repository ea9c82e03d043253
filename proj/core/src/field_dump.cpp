#include "bifl/field_dump.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "bifl/errors.hpp"

namespace bifl {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("field dump is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

struct Slot {
  Placement tag;
  Array3* array;
};

std::vector<Slot> slots(FieldState& s) {
  return {{Placement::Node, &s.phi.values},  {Placement::EdgeX, &s.A.c[0]}, {Placement::EdgeY, &s.A.c[1]},
          {Placement::EdgeZ, &s.A.c[2]},     {Placement::EdgeX, &s.D.c[0]}, {Placement::EdgeY, &s.D.c[1]},
          {Placement::EdgeZ, &s.D.c[2]},     {Placement::FaceX, &s.B.c[0]}, {Placement::FaceY, &s.B.c[1]},
          {Placement::FaceZ, &s.B.c[2]}};
}

}  // namespace

void write_field_dump(std::ostream& os, const FieldState& state) {
  os.write("BIFL", 4);
  put<std::uint32_t>(os, kDumpVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.grid.n));
  put<double>(os, state.grid.h);
  auto list = slots(const_cast<FieldState&>(state));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(list.size()));
  for (const auto& s : list) put<std::uint32_t>(os, static_cast<std::uint32_t>(s.tag));
  for (const auto& s : list)
    for (double v : s.array->values()) put<double>(os, v);
  if (!os) throw Error("failed to write field dump");
}

void write_field_dump(const std::string& path, const FieldState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_field_dump(os, state);
}

FieldState read_field_dump(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "BIFL", 4) != 0) throw Error("not a BIFL field dump");
  const auto version = get<std::uint32_t>(is);
  if (version != kDumpVersion) throw Error("unsupported field dump version " + std::to_string(version));
  GridSpec g;
  g.n = static_cast<int>(get<std::uint32_t>(is));
  g.h = get<double>(is);
  g.validate();
  FieldState state = FieldState::zeros(g);
  auto list = slots(state);
  const auto count = get<std::uint32_t>(is);
  if (count != list.size()) throw Error("unexpected array count in field dump");
  for (const auto& s : list) {
    const auto tag = get<std::uint32_t>(is);
    if (tag != static_cast<std::uint32_t>(s.tag)) throw Error("unexpected placement tag in field dump");
  }
  for (const auto& s : list)
    for (double& v : s.array->values()) v = get<double>(is);
  return state;
}

FieldState read_field_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_field_dump(is);
}

std::vector<RadialSample> radial_profile(const FieldState& state, const ModelParams& m,
                                         const Vec3& center) {
  const GridSpec& g = state.grid;
  const int n = g.n;
  const int nbins = static_cast<int>(std::ceil(std::sqrt(3.0) * g.half_width() / g.h)) + 1;
  std::vector<RadialSample> sums(static_cast<size_t>(nbins));
  std::vector<int> counts(static_cast<size_t>(nbins), 0);
  const Array3& phi = state.phi.values;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double r = norm(g.cell_center(i, j, k) - center);
        const int bin = std::min(nbins - 1, static_cast<int>(r / g.h));
        const FieldPoint p{face_average(state.B, i, j, k), edge_average(state.D, i, j, k)};
        double phic = 0.0;
        for (int dk = 0; dk < 2; ++dk)
          for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) phic += phi(i + di, j + dj, k + dk);
        auto& s = sums[static_cast<size_t>(bin)];
        s.r += r;
        s.d_norm += norm(p.D);
        s.e_norm += norm(e_of_bd(p, m));
        s.phi += 0.125 * phic;
        s.energy_density += energy_density(p, m);
        ++counts[static_cast<size_t>(bin)];
      }
  std::vector<RadialSample> rows;
  for (size_t b = 0; b < sums.size(); ++b) {
    if (counts[b] == 0) continue;
    const double inv = 1.0 / counts[b];
    const auto& s = sums[b];
    rows.push_back({s.r * inv, s.d_norm * inv, s.e_norm * inv, s.phi * inv, s.energy_density * inv});
  }
  return rows;
}

void write_radial_csv(std::ostream& os, const std::vector<RadialSample>& rows) {
  os << "r,|D|,|E|,phi,energy_density\n";
  os << std::setprecision(17);
  for (const auto& row : rows) {
    os << row.r << ',' << row.d_norm << ',' << row.e_norm << ',' << row.phi << ','
       << row.energy_density << '\n';
  }
}

}  // namespace bifl
