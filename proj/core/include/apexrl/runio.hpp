#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace apexrl {

// Shortest decimal representation that round-trips to the same double.
// Used for every numeric artifact so reruns are byte-identical.
std::string fmt(double v);
std::string fmt(int v);
std::string fmt(long long v);
std::string fmt(std::size_t v);

// Line-buffered CSV writer with a fixed header. Cells are preformatted
// strings; use fmt() for numbers.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t n_cols_;
};

// Creates the directory (and parents) if missing; throws ConfigError on
// failure. Returns the path unchanged for call chaining.
std::string ensure_dir(const std::string& path);

// Reads a whole file; throws ParseError if unreadable.
std::string read_file(const std::string& path);

// Atomically-ish writes content (plain truncate+write; no temp file — runs
// are single-process).
void write_file(const std::string& path, const std::string& content);

}  // namespace apexrl
