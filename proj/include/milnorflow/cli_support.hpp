#pragma once

#include <string>
#include <vector>

namespace milnorflow {

/**
 * @brief Parses a grid: comma-separated items, each a number or an inclusive
 * range start:stop:step. Throws DomainError on malformed input.
 */
std::vector<double> parse_grid(const std::string& text);

/** @brief Shortest round-trip form with 17 significant digits. */
std::string format_g17(double x);

/** @brief RFC-4180 field quoting. */
std::string csv_field(const std::string& s);

/** @brief Comma list to items, blanks dropped. */
std::vector<std::string> split_list(const std::string& text);

/** @brief UTC time as YYYY-MM-DDThh:mm:ssZ. */
std::string utc_timestamp();

}  // namespace milnorflow
