#pragma once

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "modcomm/sha256.hpp"
#include "modcomm/textio.hpp"

// Coset-table cache: versioned text records keyed by a content hash of the
// construction request.  Writes are atomic (write-temp-then-rename).

namespace modcomm {

inline const char* table_magic() { return "MODCOMM-TABLE v1"; }

inline std::filesystem::path cache_directory() {
  if (const char* env = std::getenv("MODCOMM_CACHE")) return env;
  if (const char* home = std::getenv("HOME"))
    return std::filesystem::path(home) / ".cache" / "modcomm";
  return std::filesystem::path(".modcomm-cache");
}

// header (kind, index, alphabet), then one line per coset with its images
inline std::string table_record(const std::string& request, const CosetTable& t) {
  std::string s = std::string(table_magic()) + "\n";
  s += "request: " + request + "\n";
  s += "kind: modular index=" + std::to_string(t.n) + " alphabet=S,U\n";
  for (int c = 0; c < t.n; ++c)
    s += std::to_string(c) + " " + std::to_string(t.perm_S[c]) + " " +
         std::to_string(t.perm_U[c]) + "\n";
  return s;
}

inline CosetTable parse_table_record(const std::string& text, const std::string& expect_request) {
  std::istringstream in(text);
  std::string line;
  require(bool(std::getline(in, line)) && line == table_magic(), errc::cache_error,
          "bad table record magic");
  require(bool(std::getline(in, line)) && line == "request: " + expect_request, errc::cache_error,
          "cached table answers a different request");
  require(bool(std::getline(in, line)) && line.rfind("kind: modular index=", 0) == 0,
          errc::cache_error, "unsupported table kind");
  Cursor header(line.substr(20));
  Int n = header.integer();
  require(n >= 1 && n.fits_sint_p(), errc::cache_error, "bad cached index");
  CosetTable t;
  t.n = (int)n.get_si();
  t.perm_S.assign(t.n, -1);
  t.perm_U.assign(t.n, -1);
  for (int c = 0; c < t.n; ++c) {
    require(bool(std::getline(in, line)), errc::cache_error, "truncated table record");
    Cursor row(line);
    Int coset = row.integer(), s = row.integer(), u = row.integer();
    require(coset == c && s >= 0 && s < t.n && u >= 0 && u < t.n, errc::cache_error,
            "bad coset row");
    t.perm_S[c] = (int)s.get_si();
    t.perm_U[c] = (int)u.get_si();
  }
  t.finish();
  require(t.valid(), errc::cache_error, "cached table fails its invariants");
  return t;
}

template <typename Builder>
inline CosetTable cached_table(const std::string& request, Builder&& build) {
  namespace fs = std::filesystem;
  fs::path dir = cache_directory();
  fs::path file = dir / (Sha256::hash(request).substr(0, 24) + ".tbl");
  if (fs::exists(file)) {
    std::ifstream in(file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      return parse_table_record(text, request);
    } catch (const error&) {
      // stale or corrupt entry: fall through and rebuild
    }
  }
  CosetTable t = build();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!ec) {
    fs::path tmp = file;
    tmp += ".tmp." + std::to_string(::getpid());
    {
      std::ofstream out(tmp);
      out << table_record(request, t);
    }
    fs::rename(tmp, file, ec);
    if (ec) fs::remove(tmp, ec);
  }
  return t;
}

} // namespace modcomm
