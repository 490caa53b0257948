#pragma once

// Tabular output: RFC-4180 CSV with a header row, or a JSON array of objects
// whose keys follow the column order. Big integers and reals are always
// written as decimal strings.

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cannonball::cli {

enum class Format { Csv, Json };

struct Cell {
  enum class Kind { Text, Number, Bool };
  std::string text;
  Kind kind = Kind::Text;

  static Cell str(std::string s) { return {std::move(s), Kind::Text}; }
  /// A machine-sized integer; a bare JSON number.
  static Cell num(long long v) { return {std::to_string(v), Kind::Number}; }
  static Cell num(unsigned long long v) { return {std::to_string(v), Kind::Number}; }
  static Cell num(unsigned long v) { return num(static_cast<unsigned long long>(v)); }
  static Cell num(unsigned v) { return num(static_cast<unsigned long long>(v)); }
  static Cell num(int v) { return num(static_cast<long long>(v)); }
  static Cell flag(bool b) { return {b ? "true" : "false", Kind::Bool}; }
};

using Row = std::vector<Cell>;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Streams rows as they are produced.
class RowWriter {
 public:
  RowWriter(std::ostream& out, Format format, std::vector<std::string> columns);
  RowWriter(const RowWriter&) = delete;
  RowWriter& operator=(const RowWriter&) = delete;
  ~RowWriter();

  void write(const Row& row);
  /// Closes the JSON array; called by the destructor if not done before.
  void finish();

 private:
  std::ostream& out_;
  Format format_;
  std::vector<std::string> columns_;
  bool first_ = true;
  bool finished_ = false;
};

std::string csv_field(const std::string& text);

void emit(std::ostream& out, Format format, const std::vector<std::string>& columns,
          const std::vector<Row>& rows);

/// Throws IoError when the file cannot be written.
void emit_to_path(const std::filesystem::path& path, Format format,
                  const std::vector<std::string>& columns, const std::vector<Row>& rows);

}  // namespace cannonball::cli
