#include "pweight/tsv.hpp"

#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace pweight::tsv {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double parse_real(const std::string& field, const std::filesystem::path& path, std::size_t lineno,
                  const char* what) {
  const std::string lowered = [&] {
    std::string s = field;
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }();
  if (lowered == "inf" || lowered == "+inf" || lowered == "infinity") {
    return std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(path.string() + ":" + std::to_string(lineno) + ": cannot parse " + what + " from '" + field +
                     "'");
  }
  return value;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::vector<EffectRow> read_effects(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<EffectRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (lineno == 1 || line.empty()) continue;  // header
    const auto fields = split_tabs(line);
    if (fields.size() < 2) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected `id<TAB>mu`, got " +
                       std::to_string(fields.size()) + " field(s)");
    }
    rows.push_back(EffectRow{fields[0], parse_real(fields[1], path, lineno, "mu")});
  }
  if (rows.empty()) throw ParseError(path.string() + ": no data rows");
  return rows;
}

std::vector<testing::SummaryStatRecord> read_summary_stats(const std::filesystem::path& path, double broadcast_n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<testing::SummaryStatRecord> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (lineno == 1 || line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected `id<TAB>p[<TAB>n[<TAB>sign]]`");
    }
    testing::SummaryStatRecord rec;
    rec.id = fields[0];
    rec.p_two_sided = parse_real(fields[1], path, lineno, "p");
    if (fields.size() >= 3 && !fields[2].empty()) {
      rec.n = parse_real(fields[2], path, lineno, "n");
    } else if (broadcast_n > 0.0) {
      rec.n = broadcast_n;
    } else {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": missing sample size column and no --broadcast-n given");
    }
    if (fields.size() >= 4 && !fields[3].empty()) {
      const double s = parse_real(fields[3], path, lineno, "sign");
      rec.sign = s < 0.0 ? -1 : +1;
    }
    rows.push_back(std::move(rec));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no data rows");
  return rows;
}

std::unordered_map<std::string, std::string> read_id_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (lineno == 1 || line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected `id<TAB>locus`");
    }
    out[fields[0]] = fields[1];
  }
  return out;
}

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp = dir / (path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string fnv1a_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for digest");
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016" PRIx64, h);
  return out;
}

}  // namespace pweight::tsv
