#pragma once

// ENVI header (.hdr) + raw binary payload.
//
// Header grammar: first non-blank line is the literal "ENVI"; then
// "key = value" lines. A value starting with '{' runs to the matching '}' and
// may span lines. Keys are case-insensitive and whitespace-collapsed. Lines
// starting with ';' are comments.
//
// Integer data types are written with round-half-away-from-zero; a value
// outside the target type's range is an error, never clipped.

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "badband/cube.hpp"
#include "badband/error.hpp"

namespace badband {

enum class DataType : int { U8 = 1, I16 = 2, I32 = 3, F32 = 4, F64 = 5, U16 = 12, U32 = 13 };
enum class Interleave { BSQ, BIL, BIP };
enum class ByteOrder : int { Little = 0, Big = 1 };

constexpr std::size_t size_of(DataType t) noexcept {
  switch (t) {
    case DataType::U8: return 1;
    case DataType::I16: case DataType::U16: return 2;
    case DataType::I32: case DataType::U32: case DataType::F32: return 4;
    case DataType::F64: return 8;
  }
  return 0;
}

constexpr std::string_view to_string(Interleave i) noexcept {
  switch (i) {
    case Interleave::BSQ: return "bsq";
    case Interleave::BIL: return "bil";
    case Interleave::BIP: return "bip";
  }
  return "";
}

constexpr std::string_view to_string(DataType t) noexcept {
  switch (t) {
    case DataType::U8: return "u8";
    case DataType::I16: return "i16";
    case DataType::I32: return "i32";
    case DataType::F32: return "f32";
    case DataType::F64: return "f64";
    case DataType::U16: return "u16";
    case DataType::U32: return "u32";
  }
  return "";
}

struct EnviHeader {
  std::size_t samples = 0;
  std::size_t lines = 0;
  std::size_t bands = 0;
  DataType data_type = DataType::F64;
  Interleave interleave = Interleave::BSQ;
  ByteOrder byte_order = ByteOrder::Little;
  std::size_t header_offset = 0;
  std::optional<std::vector<double>> wavelengths;  // micrometres
  std::optional<std::vector<std::string>> band_names;
  std::optional<std::vector<bool>> bbl;  // true = good band
  /// Keys this library does not interpret, in file order, values verbatim.
  std::vector<std::pair<std::string, std::string>> extra;

  [[nodiscard]] std::size_t payload_size() const noexcept {
    return samples * lines * bands * size_of(data_type) + header_offset;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\v\f");
  return std::string(s.substr(first, last - first + 1));
}

inline std::string normalize_key(std::string_view key) {
  std::string out;
  bool space = false;
  for (char c : trim(key)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string at_line(std::size_t line) { return "ENVI header line " + std::to_string(line) + ": "; }

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  const std::string t = trim(s);
  double v = 0.0;
  const char* begin = t.data();
  if (!t.empty() && t.front() == '+') ++begin;
  const auto res = std::from_chars(begin, t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_list(std::string_view braced) {
  std::string body = trim(braced);
  if (!body.empty() && body.front() == '{') body.erase(0, 1);
  if (!body.empty() && body.back() == '}') body.pop_back();
  std::vector<std::string> items;
  if (trim(body).empty()) return items;
  std::size_t start = 0;
  while (true) {
    const auto comma = body.find(',', start);
    items.push_back(trim(std::string_view(body).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

template <class T>
T load_value(const std::byte* p, bool swap) noexcept {
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), p, sizeof(T));
  if (swap) std::reverse(raw.begin(), raw.end());
  T v;
  std::memcpy(&v, raw.data(), sizeof(T));
  return v;
}

template <class T>
void store_value(std::byte* p, T v, bool swap) noexcept {
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), &v, sizeof(T));
  if (swap) std::reverse(raw.begin(), raw.end());
  std::memcpy(p, raw.data(), sizeof(T));
}

/// File-order element index of (band, pixel) for the given layout.
inline std::size_t file_index(Interleave il, std::size_t band, std::size_t pixel,
                              std::size_t samples, std::size_t lines, std::size_t bands) noexcept {
  const std::size_t line = pixel / samples;
  const std::size_t sample = pixel % samples;
  switch (il) {
    case Interleave::BSQ: return (band * lines + line) * samples + sample;
    case Interleave::BIL: return (line * bands + band) * samples + sample;
    case Interleave::BIP: return (line * samples + sample) * bands + band;
  }
  return 0;
}

inline bool host_is_big_endian() noexcept { return std::endian::native == std::endian::big; }

}  // namespace detail

inline EnviHeader parse_envi_header(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string current;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(std::move(current));
        current.clear();
      } else {
        current += c;
      }
    }
    if (!current.empty()) lines.push_back(std::move(current));
  }

  std::size_t i = 0;
  while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
  if (i == lines.size() || detail::trim(lines[i]) != "ENVI")
    throw InputError("ENVI header must start with the line 'ENVI'");
  ++i;

  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::vector<std::pair<std::string, Entry>> entries;
  for (; i < lines.size(); ++i) {
    const std::string line = detail::trim(lines[i]);
    if (line.empty() || line.front() == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(detail::at_line(i + 1) + "expected 'key = value', got '" + line + "'");
    std::string key = detail::normalize_key(std::string_view(line).substr(0, eq));
    if (key.empty()) throw InputError(detail::at_line(i + 1) + "empty key");
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    const std::size_t start_line = i + 1;
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos) {
        if (++i == lines.size())
          throw InputError(detail::at_line(start_line) + "unterminated '{' list for key '" + key + "'");
        value += ' ';
        value += detail::trim(lines[i]);
      }
      if (detail::trim(value.substr(value.find('}') + 1)) != "")
        throw InputError(detail::at_line(i + 1) + "unexpected text after '}' for key '" + key + "'");
    } else if (value.find('}') != std::string::npos) {
      throw InputError(detail::at_line(start_line) + "'}' without matching '{'");
    }
    auto existing = std::find_if(entries.begin(), entries.end(),
                                 [&](const auto& e) { return e.first == key; });
    if (existing != entries.end())
      existing->second = Entry{std::move(value), start_line};
    else
      entries.emplace_back(std::move(key), Entry{std::move(value), start_line});
  }

  auto find = [&](std::string_view key) -> const Entry* {
    for (const auto& [k, e] : entries)
      if (k == key) return &e;
    return nullptr;
  };
  auto require = [&](std::string_view key) -> const Entry& {
    const Entry* e = find(key);
    if (!e) throw InputError("ENVI header is missing mandatory key '" + std::string(key) + "'");
    return *e;
  };
  auto as_count = [&](const Entry& e, std::string_view key, bool allow_zero) {
    const auto v = detail::parse_double(e.value);
    if (!v || *v != std::floor(*v) || *v < (allow_zero ? 0.0 : 1.0) || *v > 1e15)
      throw InputError(detail::at_line(e.line) + "'" + std::string(key) +
                       "' must be a " + (allow_zero ? "non-negative" : "positive") +
                       " integer, got '" + e.value + "'");
    return static_cast<std::size_t>(*v);
  };

  EnviHeader h;
  h.samples = as_count(require("samples"), "samples", false);
  h.lines = as_count(require("lines"), "lines", false);
  h.bands = as_count(require("bands"), "bands", false);

  {
    const Entry& e = require("data type");
    const auto v = detail::parse_double(e.value);
    const int code = v ? static_cast<int>(*v) : -1;
    switch (code) {
      case 1: case 2: case 3: case 4: case 5: case 12: case 13:
        h.data_type = static_cast<DataType>(code);
        break;
      default:
        throw InputError(detail::at_line(e.line) + "unsupported data type '" + e.value +
                         "' (supported: 1, 2, 3, 4, 5, 12, 13)");
    }
  }
  {
    const Entry& e = require("interleave");
    const std::string v = detail::lower(e.value);
    if (v == "bsq") h.interleave = Interleave::BSQ;
    else if (v == "bil") h.interleave = Interleave::BIL;
    else if (v == "bip") h.interleave = Interleave::BIP;
    else throw InputError(detail::at_line(e.line) + "unknown interleave '" + e.value + "'");
  }
  {
    const Entry& e = require("byte order");
    const std::string v = detail::trim(e.value);
    if (v == "0") h.byte_order = ByteOrder::Little;
    else if (v == "1") h.byte_order = ByteOrder::Big;
    else throw InputError(detail::at_line(e.line) + "byte order must be 0 or 1, got '" + e.value + "'");
  }
  if (const Entry* e = find("header offset")) h.header_offset = as_count(*e, "header offset", true);

  auto list_of = [&](const Entry& e, std::string_view key) {
    if (e.value.empty() || e.value.front() != '{')
      throw InputError(detail::at_line(e.line) + "'" + std::string(key) + "' must be a {...} list");
    auto items = detail::split_list(e.value);
    if (items.size() != h.bands)
      throw InputError(detail::at_line(e.line) + "'" + std::string(key) + "' has " +
                       std::to_string(items.size()) + " entries, expected bands = " +
                       std::to_string(h.bands));
    return items;
  };

  double wavelength_scale = 1.0;
  if (const Entry* e = find("wavelength units")) {
    const std::string units = detail::lower(detail::trim(e->value));
    if (units == "nanometers" || units == "nanometer" || units == "nm") wavelength_scale = 1e-3;
  }
  if (const Entry* e = find("wavelength")) {
    std::vector<double> values;
    for (const std::string& item : list_of(*e, "wavelength")) {
      const auto v = detail::parse_double(item);
      if (!v) throw InputError(detail::at_line(e->line) + "bad wavelength value '" + item + "'");
      values.push_back(*v * wavelength_scale);
    }
    h.wavelengths = std::move(values);
  }
  if (const Entry* e = find("band names")) h.band_names = list_of(*e, "band names");
  if (const Entry* e = find("bbl")) {
    std::vector<bool> flags;
    for (const std::string& item : list_of(*e, "bbl")) {
      const auto v = detail::parse_double(item);
      if (!v) throw InputError(detail::at_line(e->line) + "bad bbl value '" + item + "'");
      flags.push_back(*v != 0.0);
    }
    h.bbl = std::move(flags);
  }

  static constexpr std::string_view known[] = {
      "samples", "lines", "bands", "data type", "interleave", "byte order", "header offset",
      "wavelength units", "wavelength", "band names", "bbl", "file type"};
  for (auto& [key, entry] : entries)
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      h.extra.emplace_back(key, entry.value);
  return h;
}

/// Header text with keys in a fixed order; unknown keys follow in their
/// original order.
inline std::string format_envi_header(const EnviHeader& h) {
  std::ostringstream out;
  auto list = [&](const auto& items, auto&& fmt) {
    out << '{';
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (k) out << ", ";
      out << fmt(items[k]);
    }
    out << "}\n";
  };
  out << "ENVI\n";
  out << "samples = " << h.samples << '\n';
  out << "lines = " << h.lines << '\n';
  out << "bands = " << h.bands << '\n';
  out << "header offset = " << h.header_offset << '\n';
  out << "file type = ENVI Standard\n";
  out << "data type = " << static_cast<int>(h.data_type) << '\n';
  out << "interleave = " << to_string(h.interleave) << '\n';
  out << "byte order = " << static_cast<int>(h.byte_order) << '\n';
  if (h.wavelengths) {
    out << "wavelength units = Micrometers\n";
    out << "wavelength = ";
    list(*h.wavelengths, [](double v) { return detail::format_double(v); });
  }
  if (h.band_names) {
    out << "band names = ";
    list(*h.band_names, [](const std::string& s) { return s; });
  }
  if (h.bbl) {
    out << "bbl = ";
    std::vector<int> flags(h.bbl->begin(), h.bbl->end());
    list(flags, [](int f) { return std::to_string(f); });
  }
  for (const auto& [key, value] : h.extra) out << key << " = " << value << '\n';
  return out.str();
}

/// Decodes a raw payload (including `header_offset` leading bytes) into a
/// band-major double cube.
inline HyperspectralCube read_cube(const EnviHeader& h, std::span<const std::byte> payload) {
  if (payload.size() != h.payload_size())
    throw InputError("payload is " + std::to_string(payload.size()) + " bytes, header implies " +
                     std::to_string(h.payload_size()));
  const std::size_t n = h.samples * h.lines;
  const std::size_t width = size_of(h.data_type);
  const bool swap = (h.byte_order == ByteOrder::Big) != detail::host_is_big_endian();
  const std::byte* base = payload.data() + h.header_offset;

  BandMatrix data(static_cast<Eigen::Index>(h.bands), static_cast<Eigen::Index>(n));
  auto decode = [&](const std::byte* p) -> double {
    switch (h.data_type) {
      case DataType::U8: return static_cast<double>(std::to_integer<std::uint8_t>(*p));
      case DataType::I16: return detail::load_value<std::int16_t>(p, swap);
      case DataType::U16: return detail::load_value<std::uint16_t>(p, swap);
      case DataType::I32: return detail::load_value<std::int32_t>(p, swap);
      case DataType::U32: return detail::load_value<std::uint32_t>(p, swap);
      case DataType::F32: return detail::load_value<float>(p, swap);
      case DataType::F64: return detail::load_value<double>(p, swap);
    }
    return 0.0;
  };
  for (std::size_t b = 0; b < h.bands; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = detail::file_index(h.interleave, b, i, h.samples, h.lines, h.bands);
      const double v = decode(base + idx * width);
      if (!std::isfinite(v))
        throw InputError("non-finite value in payload at band " + std::to_string(b + 1) +
                         ", pixel " + std::to_string(i));
      data(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return HyperspectralCube(h.lines, h.samples, std::move(data), h.wavelengths, h.band_names);
}

struct EnviFile {
  EnviHeader header;
  std::string header_text;
  std::vector<std::byte> payload;
};

/// Encodes a cube. Integer targets round half away from zero; values that do
/// not fit the target type raise InputError.
inline EnviFile write_cube(const HyperspectralCube& cube, Interleave interleave, DataType type,
                           ByteOrder order = ByteOrder::Little) {
  EnviHeader h;
  h.samples = cube.samples();
  h.lines = cube.lines();
  h.bands = cube.bands();
  h.data_type = type;
  h.interleave = interleave;
  h.byte_order = order;
  h.wavelengths = cube.wavelengths();
  h.band_names = cube.band_names();

  const std::size_t n = cube.pixels();
  const std::size_t width = size_of(type);
  const bool swap = (order == ByteOrder::Big) != detail::host_is_big_endian();
  std::vector<std::byte> bytes(h.payload_size());

  auto integral = [&](double v, double lo, double hi, std::size_t b, std::size_t i) {
    const double r = std::round(v);
    if (!(r >= lo && r <= hi))
      throw InputError("value " + detail::format_double(v) + " at band " + std::to_string(b + 1) +
                       ", pixel " + std::to_string(i) + " is not representable as " +
                       std::string(to_string(type)));
    return r;
  };
  for (std::size_t b = 0; b < h.bands; ++b) {
    const auto plane = cube.band(b);
    for (std::size_t i = 0; i < n; ++i) {
      std::byte* p = bytes.data() + detail::file_index(interleave, b, i, h.samples, h.lines, h.bands) * width;
      const double v = plane[i];
      switch (type) {
        case DataType::U8:
          *p = static_cast<std::byte>(static_cast<std::uint8_t>(integral(v, 0, 255, b, i)));
          break;
        case DataType::I16:
          detail::store_value(p, static_cast<std::int16_t>(integral(v, -32768, 32767, b, i)), swap);
          break;
        case DataType::U16:
          detail::store_value(p, static_cast<std::uint16_t>(integral(v, 0, 65535, b, i)), swap);
          break;
        case DataType::I32:
          detail::store_value(p, static_cast<std::int32_t>(integral(v, -2147483648.0, 2147483647.0, b, i)), swap);
          break;
        case DataType::U32:
          detail::store_value(p, static_cast<std::uint32_t>(integral(v, 0, 4294967295.0, b, i)), swap);
          break;
        case DataType::F32: {
          const auto f = static_cast<float>(v);
          if (!std::isfinite(f))
            throw InputError("value " + detail::format_double(v) + " at band " + std::to_string(b + 1) +
                             " overflows f32");
          detail::store_value(p, f, swap);
          break;
        }
        case DataType::F64:
          detail::store_value(p, v, swap);
          break;
      }
    }
  }
  std::string text = format_envi_header(h);
  return EnviFile{std::move(h), std::move(text), std::move(bytes)};
}

// ---------------------------------------------------------------------------
// Files

struct EnviDataset {
  EnviHeader header;
  HyperspectralCube cube;
  std::filesystem::path header_path;
  std::filesystem::path data_path;
  std::string header_text;
  std::vector<std::byte> payload;
};

namespace detail {

inline std::vector<std::byte> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> out(buf.size());
  std::memcpy(out.data(), buf.data(), buf.size());
  return out;
}

inline void write_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace detail

/// Opens `<name>.hdr` and its payload `<name>`, `<name>.dat` or `<name>.img`.
/// `path` may name either the header or the payload.
inline EnviDataset read_envi(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  fs::path header_path;
  fs::path stem;
  std::optional<fs::path> data_hint;
  if (path.extension() == ".hdr") {
    header_path = path;
    stem = fs::path(path).replace_extension();
  } else {
    data_hint = path;
    stem = path;
    header_path = fs::path(path.string() + ".hdr");
    if (!fs::exists(header_path)) header_path = fs::path(path).replace_extension(".hdr");
  }
  if (!fs::is_regular_file(header_path))
    throw InputError("ENVI header not found: '" + header_path.string() + "'");

  std::vector<fs::path> candidates;
  if (data_hint) candidates.push_back(*data_hint);
  for (const char* ext : {"", ".dat", ".img"}) candidates.push_back(fs::path(stem.string() + ext));
  const auto data_path = std::find_if(candidates.begin(), candidates.end(),
                                      [](const fs::path& p) { return fs::is_regular_file(p); });
  if (data_path == candidates.end())
    throw InputError("no payload next to '" + header_path.string() + "' (tried " +
                     stem.string() + ", .dat, .img)");

  const auto header_bytes = detail::read_bytes(header_path);
  std::string text(reinterpret_cast<const char*>(header_bytes.data()), header_bytes.size());
  EnviHeader header = parse_envi_header(text);
  std::vector<std::byte> payload = detail::read_bytes(*data_path);
  HyperspectralCube cube = read_cube(header, payload);
  return EnviDataset{std::move(header), std::move(cube), header_path, *data_path, std::move(text),
                     std::move(payload)};
}

/// Writes `<base>.hdr` and `<base>.img`. Returns the header path.
inline std::filesystem::path write_envi(const std::filesystem::path& base, const HyperspectralCube& cube,
                                        Interleave interleave = Interleave::BSQ,
                                        DataType type = DataType::F64,
                                        ByteOrder order = ByteOrder::Little) {
  const EnviFile file = write_cube(cube, interleave, type, order);
  const std::filesystem::path header_path(base.string() + ".hdr");
  const std::span<const char> text(file.header_text.data(), file.header_text.size());
  detail::write_bytes(header_path, std::as_bytes(text));
  detail::write_bytes(std::filesystem::path(base.string() + ".img"), file.payload);
  return header_path;
}

}  // namespace badband
