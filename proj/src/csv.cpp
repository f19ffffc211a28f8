#include "simfuse/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "simfuse/error.hpp"

namespace simfuse::csv {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

Table read_file(const std::string& path,
                const std::vector<std::string>& expected_header) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path);
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_line(line);
    if (lineno == 1) {
      if (!expected_header.empty() && fields != expected_header) {
        throw Error(Errc::missing_column,
                    path + " row 1: header mismatch, got '" + line + "'");
      }
      t.header = std::move(fields);
      continue;
    }
    if (!t.header.empty() && fields.size() != t.header.size()) {
      throw Error(Errc::missing_column,
                  path + " row " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty())
    throw Error(Errc::missing_column, path + ": empty file, no header");
  return t;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& path,
                    std::size_t row) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw Error(Errc::invalid_parameter, path + " row " + std::to_string(row) +
                                             ": bad numeric field '" + field +
                                             "'");
  }
  return v;
}

long long parse_int(const std::string& field, const std::string& path,
                    std::size_t row) {
  long long v = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw Error(Errc::invalid_parameter, path + " row " + std::to_string(row) +
                                             ": bad integer field '" + field +
                                             "'");
  }
  return v;
}

}  // namespace simfuse::csv
