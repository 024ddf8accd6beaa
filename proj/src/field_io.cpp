#include <cstdint>
#include <cstdio>
#include <fstream>

#include "sojourn/momentum_field.hpp"

namespace sojourn {

namespace {

constexpr char kMagic[8] = {'S', 'J', 'F', 'I', 'E', 'L', 'D', '1'};

int sector_code(Sector s) {
  switch (s) {
    case Sector::Positive: return 1;
    case Sector::Negative: return -1;
    case Sector::Mixed: return 0;
  }
  return 0;
}

Sector sector_from_code(std::int32_t c) {
  if (c == 1) return Sector::Positive;
  if (c == -1) return Sector::Negative;
  if (c == 0) return Sector::Mixed;
  throw Error(ErrorKind::Io, "bad sector code in field snapshot");
}

}  // namespace

void write_field_binary(const std::string& path, const SpinorField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path);
  std::int32_t n = f.grid().n;
  std::int32_t tag = sector_code(f.sector());
  double p_max = f.grid().p_max;
  double m = f.mass().value();
  out.write(kMagic, sizeof kMagic);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&tag), sizeof tag);
  out.write(reinterpret_cast<const char*>(&p_max), sizeof p_max);
  out.write(reinterpret_cast<const char*>(&m), sizeof m);
  for (std::size_t idx = 0; idx < f.grid().size(); ++idx)
    for (int c = 0; c < 4; ++c) {
      cplx v = f.component(c)[idx];
      double re = v.real(), im = v.imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

SpinorField read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kMagic)) throw Error(ErrorKind::Io, path + " is not a field snapshot");
  std::int32_t n = 0, tag = 0;
  double p_max = 0, m = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&tag), sizeof tag);
  in.read(reinterpret_cast<char*>(&p_max), sizeof p_max);
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  if (!in) throw Error(ErrorKind::Io, "truncated header in " + path);
  SpinorField f(make_grid(n, p_max), Mass(m), sector_from_code(tag));
  for (std::size_t idx = 0; idx < f.grid().size(); ++idx)
    for (int c = 0; c < 4; ++c) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      f.component(c)[idx] = cplx(re, im);
    }
  if (!in) throw Error(ErrorKind::Io, "truncated data in " + path);
  return f;
}

void write_field_csv_slice(const std::string& path, const SpinorField& f, int axis,
                           const std::array<int, 3>& through) {
  if (axis < 0 || axis > 2) throw Error(ErrorKind::InvalidArgument, "axis must be 0, 1 or 2");
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw Error(ErrorKind::Io, "cannot open " + path);
  std::fprintf(fp, "p,re0,im0,re1,im1,re2,im2,re3,im3\n");
  const auto& grid = f.grid();
  for (int j = 0; j < grid.n; ++j) {
    auto ix = through;
    ix[axis] = j;
    Spinor v = f.at(grid.index(ix[0], ix[1], ix[2]));
    std::fprintf(fp, "%.17g", grid.p(j));
    for (int c = 0; c < 4; ++c) std::fprintf(fp, ",%.17g,%.17g", v[c].real(), v[c].imag());
    std::fprintf(fp, "\n");
  }
  if (std::fclose(fp) != 0) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace sojourn
