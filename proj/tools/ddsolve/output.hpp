#pragma once

#include <filesystem>
#include <string>

#include <ddsplit/problems.hpp>

namespace ddsolve {

/// 17 significant digits, '.' decimal point regardless of locale.
std::string format_double(double v);

std::string trace_header();
std::string trace_row(const ddsplit::IterationReport& r);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string solution_csv(const ddsplit::Partition& partition, const ddsplit::GluedSolution& glued);
std::string duals_csv(const ddsplit::Interface& iface, const ddsplit::Vector& g, int dim);
std::string dual_file_name(const ddsplit::Interface& iface);

}  // namespace ddsolve
