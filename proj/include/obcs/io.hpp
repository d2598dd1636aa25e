#pragma once

#include "obcs/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

// Text formats used repo-wide.
//
// Matrix format: optional '#' comment lines, then a header line "rows cols",
// then rows*cols whitespace-separated decimal doubles in row-major order,
// printed with 17 significant digits so values round-trip bit-exactly.
// Vectors are rows=1 matrices.
namespace obcs::io {

/// Shortest-exact decimal rendering used for every double we serialize.
std::string format_double(double x);

void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is, std::vector<std::string>* leading_comments = nullptr);

void write_matrix_file(const std::filesystem::path& path, const Matrix& m,
                       const std::vector<std::string>& leading_comments = {});
Matrix read_matrix_file(const std::filesystem::path& path,
                        std::vector<std::string>* leading_comments = nullptr);

void write_vector_file(const std::filesystem::path& path, const Vector& v,
                       const std::vector<std::string>& leading_comments = {});
Vector read_vector_file(const std::filesystem::path& path,
                        std::vector<std::string>* leading_comments = nullptr);

/// ASCII PGM (P2) image with values clamped from [0,1] to 0..255.
void write_pgm(const std::filesystem::path& path, const Matrix& image);

/// Flat "key = value" config file. '#' starts a comment, blank lines are
/// skipped, duplicate keys are errors. Readers validate key sets strictly:
/// unknown keys are errors, not warnings.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is);
  static KeyValueConfig parse_file(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  const std::string& raw(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;  // true/false
  std::vector<long long> get_int_list(const std::string& key) const;  // comma-separated

  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::uint64_t get_uint64_or(const std::string& key, std::uint64_t fallback) const;
  double get_double_or(const std::string& key, double fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;

  /// Throws listing any key not in `allowed`.
  void require_known_keys(const std::vector<std::string>& allowed) const;

  std::vector<std::string> keys() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace obcs::io
