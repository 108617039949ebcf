#ifndef LEVYQ_CSV_HPP
#define LEVYQ_CSV_HPP

/**
 * @file csv.hpp
 * @brief Tiny CSV formatting helpers shared by reports and the experiment
 *        harness.
 *
 * All floating-point cells are rendered with %.17g so that rewriting the same
 * numbers reproduces byte-identical files and a round-trip through text loses
 * nothing.
 */

#include <cstdio>
#include <string>
#include <vector>

namespace levyq {

/** Round-trip-exact decimal rendering of a double (17 significant digits). */
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

/** Join already-rendered cells with commas and terminate the row with '\n'. */
inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

/** Numeric convenience overload: renders every cell with fmt17. */
inline std::string csv_row(const std::vector<double>& cells) {
  std::vector<std::string> rendered;
  rendered.reserve(cells.size());
  for (double c : cells) rendered.push_back(fmt17(c));
  return csv_row(rendered);
}

}  // namespace levyq

#endif  // LEVYQ_CSV_HPP
