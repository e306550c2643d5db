#include "dartskill/text_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "dartskill/errors.hpp"

namespace dartskill {

std::string format_double(double value) {
  char buffer[40];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) {
    throw NumericDomainError("format_double: conversion failed");
  }
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw FormatError("parse_double: not a number: '" + std::string(text) +
                      "'");
  }
  return value;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hash_hex(std::uint64_t hash) {
  static const char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory: " +
                          path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_matrix(const std::filesystem::path& path,
                  const Eigen::MatrixXd& matrix) {
  std::string text;
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c > 0) text += ',';
      text += format_double(matrix(r, c));
    }
    text += '\n';
  }
  write_text_file(path, text);
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

// Splits file content into lines, tolerating a missing final newline and
// CRLF endings.
std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t nl = content.find('\n', start);
    std::string_view line = (nl == std::string_view::npos)
                                ? content.substr(start)
                                : content.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::vector<std::vector<double>> rows;
  for (std::string_view line : split_lines(content)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (std::string_view cell : split_line(line)) {
      row.push_back(parse_double(cell));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError("read_matrix: ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd matrix(static_cast<Eigen::Index>(rows.size()),
                         rows.empty()
                             ? 0
                             : static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      matrix(r, c) = rows[static_cast<std::size_t>(r)]
                         [static_cast<std::size_t>(c)];
    }
  }
  return matrix;
}

CsvWriter::CsvWriter(std::vector<std::string> header,
                     std::vector<std::string> comments)
    : columns_(header.size()) {
  if (header.empty()) {
    throw ParameterDomainError("CsvWriter: header must be non-empty");
  }
  for (const std::string& comment : comments) {
    text_ += "# ";
    text_ += comment;
    text_ += '\n';
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw ParameterDomainError("CsvWriter: row width " +
                               std::to_string(cells.size()) +
                               " != header width " +
                               std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void CsvWriter::save(const std::filesystem::path& path) const {
  write_text_file(path, text_);
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw FormatError("CSV column not found: " + std::string(name));
}

CsvTable read_csv(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  CsvTable table;
  for (std::string_view line : split_lines(content)) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    for (std::string_view cell : split_line(line)) {
      cells.emplace_back(cell);
    }
    if (table.header.empty()) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size()) {
        throw FormatError("read_csv: ragged row in " + path.string());
      }
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty()) {
    throw FormatError("read_csv: no header in " + path.string());
  }
  return table;
}

}  // namespace dartskill
