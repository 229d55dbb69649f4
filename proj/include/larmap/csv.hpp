#ifndef LARMAP_CSV_HPP
#define LARMAP_CSV_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "larmap/types.hpp"

namespace larmap {

// Minimal CSV support: comma separated, no quoting, header row mandatory.
// All file formats in this project are plain numeric tables plus simple
// identifiers, so a full CSV dialect is not needed.

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position for `name`, or -1.
  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("missing header row: " + path);
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.header.size())
      throw FormatError(path + ": row " + std::to_string(t.rows.size() + 1) +
                        " has " + std::to_string(cells.size()) +
                        " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open file for writing: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace larmap

#endif
