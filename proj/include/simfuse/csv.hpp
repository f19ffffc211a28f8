#pragma once

#include <string>
#include <vector>

namespace simfuse {

// Minimal CSV support for the engine's flat numeric/identifier tables.  No
// quoting or embedded separators; fields are trimmed of trailing \r.
namespace csv {

std::vector<std::string> split_line(const std::string& line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads the file, validates the header equals `expected_header`, and that
// every row has the same arity.  Errors name the file and row.
Table read_file(const std::string& path,
                const std::vector<std::string>& expected_header);

std::string join(const std::vector<std::string>& fields);

// Shortest round-trip formatting for doubles; deterministic across runs.
std::string format_double(double v);

// Parses a double or throws, naming file/row for error context.
double parse_double(const std::string& field, const std::string& path,
                    std::size_t row);
long long parse_int(const std::string& field, const std::string& path,
                    std::size_t row);

}  // namespace csv
}  // namespace simfuse
