#pragma once

// Minimal CSV reading/writing for the case directory format: UTF-8, header
// row, comma separated, no quoting (ids never contain commas).

#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "gridres/core.hpp"

namespace gridres::csv {

// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  if (v == 0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    std::string_view cell = line.substr(
        start, pos == std::string_view::npos ? std::string_view::npos
                                             : pos - start);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.remove_suffix(1);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    out.emplace_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Schema {
  std::string file;
  std::unordered_map<std::string, std::size_t> columns;
};

// One data row with header-based accessors. Errors name file and row.
class Row {
 public:
  Row(std::shared_ptr<const Schema> schema, std::vector<std::string> cells,
      std::size_t line)
      : schema_(std::move(schema)), cells_(std::move(cells)), line_(line) {}

  bool has(std::string_view column) const {
    return schema_->columns.count(std::string(column)) > 0;
  }

  const std::string& str(std::string_view column) const {
    auto it = schema_->columns.find(std::string(column));
    if (it == schema_->columns.end())
      fail("schema mismatch, missing column '" + std::string(column) + "'");
    return cells_[it->second];
  }

  double num(std::string_view column) const {
    const std::string& s = str(column);
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail("column '" + std::string(column) + "': not a number: '" + s + "'");
    return v;
  }

  long integer(std::string_view column) const {
    const std::string& s = str(column);
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      fail("column '" + std::string(column) + "': not an integer: '" + s +
           "'");
    return v;
  }

  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(schema_->file + " row " + std::to_string(line_) + ": " +
                     what);
  }

 private:
  std::shared_ptr<const Schema> schema_;
  std::vector<std::string> cells_;
  std::size_t line_;
};

inline std::vector<Row> read(const std::filesystem::path& path,
                             const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw InputError("missing file: " + path.string());
  auto schema = std::make_shared<Schema>();
  schema->file = path.filename().string();
  std::string line;
  if (!std::getline(in, line))
    throw InputError(schema->file + ": empty file, expected header row");
  auto header = split(line);
  for (std::size_t i = 0; i < header.size(); ++i)
    schema->columns.emplace(header[i], i);
  for (const auto& r : required)
    if (!schema->columns.count(r))
      throw InputError(schema->file + ": schema mismatch, missing column '" +
                       r + "'");
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw InputError(schema->file + " row " + std::to_string(lineno) +
                       ": schema mismatch, expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    rows.emplace_back(schema, std::move(cells), lineno);
  }
  return rows;
}

// Buffered writer; throws on open failure so unwritable paths surface.
class Writer {
 public:
  Writer(const std::filesystem::path& path,
         const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot write " + path.string());
    row(header);
  }

  template <typename... Cells>
  void operator()(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  ~Writer() = default;

  void close() {
    out_.close();
    if (!out_) throw Error("failed writing " + path_.string());
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }

  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace gridres::csv
