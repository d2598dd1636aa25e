#include "obcs/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace obcs::io {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Token scanner over a stream: skips whitespace and '#'-to-end-of-line
// comments. Comments seen before the first token can be collected.
class TokenReader {
 public:
  explicit TokenReader(std::istream& is) : is_(is) {}

  bool next(std::string& token, std::vector<std::string>* comments = nullptr) {
    token.clear();
    int c = is_.get();
    while (c != EOF) {
      if (c == '#') {
        std::string line;
        std::getline(is_, line);
        if (comments != nullptr) comments->push_back(trim(line));
        c = is_.get();
        continue;
      }
      if (std::isspace(c)) {
        c = is_.get();
        continue;
      }
      break;
    }
    if (c == EOF) return false;
    while (c != EOF && !std::isspace(c) && c != '#') {
      token.push_back(static_cast<char>(c));
      c = is_.get();
    }
    if (c == '#') is_.unget();
    return true;
  }

  double next_double(const char* what) {
    std::string tok;
    if (!next(tok)) fail(std::string(what) + ": unexpected end of input");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      fail(std::string(what) + ": bad number '" + tok + "'");
    }
    return v;
  }

  long long next_int(const char* what) {
    std::string tok;
    if (!next(tok)) fail(std::string(what) + ": unexpected end of input");
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0') {
      fail(std::string(what) + ": bad integer '" + tok + "'");
    }
    return v;
  }

 private:
  std::istream& is_;
};

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is, std::vector<std::string>* leading_comments) {
  TokenReader reader(is);
  std::string tok;
  if (!reader.next(tok, leading_comments)) fail("matrix: empty input");

  char* end = nullptr;
  const long long rows = std::strtoll(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') fail("matrix: bad row count '" + tok + "'");
  const long long cols = reader.next_int("matrix header");
  if (rows < 1 || cols < 1) fail("matrix: dimensions must be positive");

  Matrix m(rows, cols);
  for (long long i = 0; i < rows; ++i) {
    for (long long j = 0; j < cols; ++j) {
      m(i, j) = reader.next_double("matrix entry");
    }
  }
  if (!m.allFinite()) fail("matrix: non-finite entries");
  return m;
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m,
                       const std::vector<std::string>& leading_comments) {
  std::ofstream os(path);
  if (!os) fail("cannot open for writing: " + path.string());
  for (const auto& c : leading_comments) os << "# " << c << '\n';
  write_matrix(os, m);
  if (!os) fail("write failed: " + path.string());
}

Matrix read_matrix_file(const std::filesystem::path& path,
                        std::vector<std::string>* leading_comments) {
  std::ifstream is(path);
  if (!is) fail("cannot open: " + path.string());
  return read_matrix(is, leading_comments);
}

void write_vector_file(const std::filesystem::path& path, const Vector& v,
                       const std::vector<std::string>& leading_comments) {
  write_matrix_file(path, v.transpose(), leading_comments);
}

Vector read_vector_file(const std::filesystem::path& path,
                        std::vector<std::string>* leading_comments) {
  const Matrix m = read_matrix_file(path, leading_comments);
  if (m.rows() != 1) fail("vector file must have rows == 1: " + path.string());
  return m.row(0).transpose();
}

void write_pgm(const std::filesystem::path& path, const Matrix& image) {
  std::ofstream os(path);
  if (!os) fail("cannot open for writing: " + path.string());
  os << "P2\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Index i = 0; i < image.rows(); ++i) {
    for (Index j = 0; j < image.cols(); ++j) {
      const double clamped = std::clamp(image(i, j), 0.0, 1.0);
      if (j > 0) os << ' ';
      os << static_cast<int>(std::lround(clamped * 255.0));
    }
    os << '\n';
  }
  if (!os) fail("write failed: " + path.string());
}

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("config line " + std::to_string(lineno) + ": empty key");
    if (cfg.values_.count(key) != 0) {
      fail("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail("cannot open config: " + path.string());
  return parse(is);
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& KeyValueConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail("config: missing key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const { return raw(key); }

long long KeyValueConfig::get_int(const std::string& key) const {
  const std::string& v = raw(key);
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') fail("config: key '" + key + "' is not an integer");
  return x;
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key) const {
  const std::string& v = raw(key);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') fail("config: key '" + key + "' is not an integer");
  return x;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string& v = raw(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') fail("config: key '" + key + "' is not a number");
  return x;
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string& v = raw(key);
  if (v == "true") return true;
  if (v == "false") return false;
  fail("config: key '" + key + "' must be true or false");
}

std::vector<long long> KeyValueConfig::get_int_list(const std::string& key) const {
  const std::string& v = raw(key);
  std::vector<long long> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail("config: key '" + key + "' has an empty list element");
    char* end = nullptr;
    const long long x = std::strtoll(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0') {
      fail("config: key '" + key + "' has a bad integer '" + item + "'");
    }
    out.push_back(x);
  }
  if (out.empty()) fail("config: key '" + key + "' is an empty list");
  return out;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}
long long KeyValueConfig::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}
std::uint64_t KeyValueConfig::get_uint64_or(const std::string& key,
                                            std::uint64_t fallback) const {
  return has(key) ? get_uint64(key) : fallback;
}
double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}
bool KeyValueConfig::get_bool_or(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

void KeyValueConfig::require_known_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail("config: unknown key '" + key + "'");
    }
  }
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [key, value] : values_) out.push_back(key);
  return out;
}

}  // namespace obcs::io
