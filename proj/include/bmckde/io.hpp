#pragma once

#include <string>
#include <vector>

namespace bmckde {

//! Shortest round-trip decimal representation, locale independent.
std::string format_double(double v);

//! Write `content` to `path` via a temporary file and rename.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

std::vector<std::string> split(const std::string& line, char sep);

//! Minimal CSV assembler; cells are preformatted strings.
class CsvWriter {
public:
  explicit CsvWriter(const std::vector<std::string>& header);

  void add_row(const std::vector<std::string>& cells);
  //! Append a raw line (used for footers such as `slope=...`).
  void append_line(const std::string& raw);
  const std::string& str() const { return buf_; }
  void write(const std::string& path) const;

private:
  std::string buf_;
  std::size_t columns_;
};

}  // namespace bmckde
