#include "cli/emit.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace cannonball::cli {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

RowWriter::RowWriter(std::ostream& out, Format format, std::vector<std::string> columns)
    : out_(out), format_(format), columns_(std::move(columns)) {
  if (format_ == Format::Csv) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      out_ << (i ? "," : "") << csv_field(columns_[i]);
    }
    out_ << "\r\n";
  } else {
    out_ << "[";
  }
}

RowWriter::~RowWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void RowWriter::write(const Row& row) {
  if (row.size() != columns_.size()) {
    throw std::logic_error("row has " + std::to_string(row.size()) + " cells, schema has " +
                           std::to_string(columns_.size()));
  }
  if (format_ == Format::Csv) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out_ << (i ? "," : "") << csv_field(row[i].text);
    }
    out_ << "\r\n";
    return;
  }
  out_ << (first_ ? "\n  {" : ",\n  {");
  first_ = false;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out_ << (i ? ", " : "") << nlohmann::json(columns_[i]).dump() << ": ";
    if (row[i].kind == Cell::Kind::Text) {
      out_ << nlohmann::json(row[i].text).dump();
    } else {
      out_ << row[i].text;
    }
  }
  out_ << "}";
}

void RowWriter::finish() {
  if (finished_) return;
  finished_ = true;
  if (format_ == Format::Json) out_ << (first_ ? "]\n" : "\n]\n");
  out_.flush();
}

void emit(std::ostream& out, Format format, const std::vector<std::string>& columns,
          const std::vector<Row>& rows) {
  RowWriter writer(out, format, columns);
  for (const Row& row : rows) writer.write(row);
  writer.finish();
}

void emit_to_path(const std::filesystem::path& path, Format format,
                  const std::vector<std::string>& columns, const std::vector<Row>& rows) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  emit(file, format, columns, rows);
  if (!file) throw IoError("write to " + path.string() + " failed");
}

}  // namespace cannonball::cli
