#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dartskill {

// Shortest decimal string that round-trips to the same double (via
// std::to_chars).  Every number this library writes goes through here so
// that reruns of the same configuration produce byte-identical files.
std::string format_double(double value);

// Strict double parse of the full string; throws FormatError on trailing
// garbage, empty input, or out-of-range values.
double parse_double(std::string_view text);

// FNV-1a 64-bit hash, printed as 16 lowercase hex digits.  Used to stamp
// output files with the configuration they came from.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::uint64_t hash);

// Whole-file helpers; throw IoError on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

// Dense numeric matrix as bare comma-separated rows (no header), one text
// line per matrix row.  The interchange format for point clouds, geodesic
// distance matrices, and embeddings.
void write_matrix(const std::filesystem::path& path,
                  const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

// Row-oriented CSV with one header line and optional '#' comment lines
// before it.  Cells are written with format_double for numbers; string
// cells must not contain commas or newlines.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> header,
            std::vector<std::string> comments = {});

  void add_row(const std::vector<std::string>& cells);
  const std::string& text() const { return text_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

// Minimal CSV reader for the files CsvWriter produces: skips '#' comments,
// first row is the header, every later row must match its width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws FormatError
};
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace dartskill
