#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <ddsplit/error.hpp>

namespace ddsolve {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Guard against a locale that uses a decimal comma.
  for (char& c : s) {
    if (c == ',') c = '.';
  }
  return s;
}

std::string trace_header() { return "n,residual,branch,theta,dist0,chi,rho\n"; }

std::string trace_row(const ddsplit::IterationReport& r) {
  return std::to_string(r.n) + "," + format_double(r.kt_residual) + "," +
         ddsplit::to_string(r.branch) + "," + format_double(r.theta) + "," +
         format_double(std::sqrt(r.dist0_sq)) + "," + format_double(r.chi) + "," +
         format_double(r.rho) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ddsplit::Error("cannot write " + path.string());
  out << content;
  if (!out) throw ddsplit::Error("write failed for " + path.string());
}

std::string solution_csv(const ddsplit::Partition& partition, const ddsplit::GluedSolution& glued) {
  const ddsplit::Grid& g = partition.global;
  std::string s = g.dim == 1 ? "x,u\n" : "x,y,u\n";
  for (int k = 0; k < g.n_nodes(); ++k) {
    const auto& p = g.nodes[static_cast<std::size_t>(k)];
    s += format_double(p.x) + ",";
    if (g.dim == 2) s += format_double(p.y) + ",";
    s += format_double(glued.nodal[k]) + "\n";
  }
  return s;
}

std::string duals_csv(const ddsplit::Interface& iface, const ddsplit::Vector& g, int dim) {
  std::string s = dim == 1 ? "x,g\n" : "x,y,g\n";
  for (int r = 0; r < iface.size(); ++r) {
    const auto& p = iface.nodes[static_cast<std::size_t>(r)];
    s += format_double(p.x) + ",";
    if (dim == 2) s += format_double(p.y) + ",";
    s += format_double(g[r]) + "\n";
  }
  return s;
}

std::string dual_file_name(const ddsplit::Interface& iface) {
  return "duals_" + std::to_string(iface.left + 1) + "_" + std::to_string(iface.right + 1) + ".csv";
}

}  // namespace ddsolve
