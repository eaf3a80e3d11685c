#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mbo/diagnostics.hpp"
#include "mbo/grid.hpp"
#include "mbo/trajectory.hpp"

namespace mbo {

// Label snapshot format "MBOLBL1": one ASCII header line
//   MBOLBL1 d n_cells P Lambda
// followed by row-major cell labels as unsigned bytes (1-based).
inline void write_mbolbl1(const std::string& path, const Partition& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char header[96];
  std::snprintf(header, sizeof(header), "MBOLBL1 %d %d %d %.17g\n", p.grid.dim, p.grid.n,
                p.num_phases, p.grid.length);
  out << header;
  std::vector<std::uint8_t> bytes(p.labels);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(b + 1);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (!out) throw IoError("short write to " + path);
}

inline Partition read_mbolbl1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  int d = 0, n = 0, P = 0;
  double lambda = 0.0;
  in >> magic >> d >> n >> P >> lambda;
  if (magic != "MBOLBL1" || d < 1 || d > 3 || n < 4 || P < 1 || !(lambda > 0.0))
    throw IoError("bad MBOLBL1 header in " + path);
  in.get();  // newline
  TorusGrid g{d, n, lambda};
  Partition p(g, P);
  in.read(reinterpret_cast<char*>(p.labels.data()), p.labels.size());
  if (in.gcount() != static_cast<std::streamsize>(p.labels.size()))
    throw IoError("truncated MBOLBL1 payload in " + path);
  for (auto& b : p.labels) {
    if (b < 1 || b > P) throw IoError("label byte out of range in " + path);
    b = static_cast<std::uint8_t>(b - 1);
  }
  return p;
}

// Binary PGM (P5) with maxval = P; pixel value is the 1-based label.
inline void write_pgm(const std::string& path, const Partition& p) {
  if (p.grid.dim != 2) throw IoError("PGM output is 2-D only");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << p.grid.n << " " << p.grid.n << "\n" << p.num_phases << "\n";
  std::vector<std::uint8_t> bytes(p.labels);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(b + 1);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Step records as CSV: n,t,Eh,dissipation,vol_1..vol_P,elg_residual.
inline void write_records_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const int P = traj.initial.num_phases;
  out << "n,t,Eh,dissipation";
  for (int i = 1; i <= P; ++i) out << ",vol_" << i;
  out << ",elg_residual\n";
  for (const auto& r : traj.records) {
    out << r.n << ',' << format_double(r.t) << ',' << format_double(r.Eh) << ','
        << format_double(r.dissipation);
    for (double v : r.volumes) out << ',' << format_double(v);
    out << ',';
    if (!std::isnan(r.elg_residual)) out << format_double(r.elg_residual);
    out << '\n';
  }
}

inline void write_excess_csv(const std::string& path, const ExcessReport& rep, int dim) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "cx";
  if (dim > 1) out << ",cy";
  if (dim > 2) out << ",cz";
  out << ",r,tilt_excess,energy_excess,bulk_l1,is_good\n";
  for (std::size_t k = 0; k < rep.balls.size(); ++k) {
    const auto& b = rep.balls[k];
    out << format_double(b.center[0]);
    if (dim > 1) out << ',' << format_double(b.center[1]);
    if (dim > 2) out << ',' << format_double(b.center[2]);
    out << ',' << format_double(b.r) << ',' << format_double(b.tilt_excess) << ','
        << format_double(b.energy_excess) << ',' << format_double(b.bulk_l1) << ','
        << (rep.is_good[k] ? 1 : 0) << '\n';
  }
}

inline void write_radius_csv(const std::string& path, const std::vector<RadiusSample>& series) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "t,radius\n";
  for (const auto& s : series)
    out << format_double(s.t) << ',' << format_double(s.radius) << '\n';
}

}  // namespace mbo
