#include "fixangle/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fixangle/error.hpp"

namespace fixangle::io {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace {

fs::path with_ext(const fs::path& stem, const char* ext) {
  fs::path p = stem;
  p += ext;
  return p;
}

json grid_json(const GridSpec& s, const char* kind) {
  return {{"d", s.d}, {"N", s.n}, {"L", s.L}, {"R", s.R}, {"kind", kind}};
}

void write_doubles(const fs::path& path, const std::vector<double>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

std::vector<double> read_doubles(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(double))
    fail(ErrorCode::Io, path.string() + ": expected " + std::to_string(count * sizeof(double)) + " bytes, found " +
                            std::to_string(bytes));
  in.seekg(0);
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if (!in) fail(ErrorCode::Io, "read failed: " + path.string());
  return data;
}

std::pair<GridSpec, std::string> read_sidecar(const fs::path& stem) {
  json j;
  try {
    j = json::parse(read_text(with_ext(stem, ".json")));
    GridSpec s;
    s.d = j.at("d").get<int>();
    s.n = j.at("N").get<int>();
    s.L = j.at("L").get<double>();
    s.R = j.at("R").get<double>();
    auto kind = j.at("kind").get<std::string>();
    if (kind != "real" && kind != "complex") fail(ErrorCode::Io, "field sidecar: unknown kind " + kind);
    return {s, kind};
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, "field sidecar " + with_ext(stem, ".json").string() + ": " + e.what());
  }
}

double parse_double(const std::string& text, const fs::path& where) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::Io, where.string() + ": bad number '" + text + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) fail(ErrorCode::Io, "write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field(const RealField& f, const fs::path& stem) {
  write_doubles(with_ext(stem, ".bin"), f.values);
  write_text(with_ext(stem, ".json"), grid_json(f.spec, "real").dump() + "\n");
}

void write_field(const ComplexField& f, const fs::path& stem) {
  std::vector<double> flat(2 * f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    flat[2 * i] = f.values[i].real();
    flat[2 * i + 1] = f.values[i].imag();
  }
  write_doubles(with_ext(stem, ".bin"), flat);
  write_text(with_ext(stem, ".json"), grid_json(f.spec, "complex").dump() + "\n");
}

std::string field_kind(const fs::path& stem) { return read_sidecar(stem).second; }

RealField read_real_field(const fs::path& stem) {
  auto [spec, kind] = read_sidecar(stem);
  if (kind != "real") fail(ErrorCode::Io, stem.string() + ": expected a real field");
  return RealField(spec, read_doubles(with_ext(stem, ".bin"), spec.size()));
}

ComplexField read_complex_field(const fs::path& stem) {
  auto [spec, kind] = read_sidecar(stem);
  if (kind == "real") return ComplexField(RealField(spec, read_doubles(with_ext(stem, ".bin"), spec.size())));
  const auto flat = read_doubles(with_ext(stem, ".bin"), 2 * spec.size());
  ComplexField f(spec);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = {flat[2 * i], flat[2 * i + 1]};
  return f;
}

std::string dataset_csv(const FarFieldDataset& ds) {
  std::string out = "sign,k";
  for (int a = 1; a <= ds.d; ++a) out += ",omega_" + std::to_string(a);
  out += ",re,im\n";
  for (const auto& s : ds.samples) {
    out += s.sign > 0 ? "1" : "-1";
    out += ',' + format_double(s.k);
    for (int a = 0; a < ds.d; ++a) out += ',' + format_double(s.omega[a]);
    out += ',' + format_double(s.value.real());
    out += ',' + format_double(s.value.imag());
    out += '\n';
  }
  return out;
}

void write_dataset(const FarFieldDataset& ds, const fs::path& stem) {
  json theta = json::array();
  for (int a = 0; a < ds.d; ++a) theta.push_back(ds.theta0[a]);
  json generator;
  try {
    generator = json::parse(ds.generator);
  } catch (const json::exception&) {
    generator = ds.generator;
  }
  json manifest = {{"d", ds.d},
                   {"theta0", theta},
                   {"R", ds.R},
                   {"k_count", ds.k_count()},
                   {"omega_count", ds.omega_count()},
                   {"generator", generator}};
  write_text(with_ext(stem, ".json"), manifest.dump(2) + "\n");
  write_text(with_ext(stem, ".csv"), dataset_csv(ds));
}

FarFieldDataset read_dataset(const fs::path& stem) {
  FarFieldDataset ds;
  const fs::path manifest_path = with_ext(stem, ".json");
  try {
    const json m = json::parse(read_text(manifest_path));
    ds.d = m.at("d").get<int>();
    if (ds.d != 2 && ds.d != 3) fail(ErrorCode::Io, manifest_path.string() + ": d must be 2 or 3");
    const auto theta = m.at("theta0").get<std::vector<double>>();
    if (static_cast<int>(theta.size()) != ds.d) fail(ErrorCode::Io, manifest_path.string() + ": theta0 length != d");
    for (int a = 0; a < ds.d; ++a) ds.theta0[a] = theta[static_cast<std::size_t>(a)];
    ds.R = m.at("R").get<double>();
    ds.generator = m.contains("generator") ? m["generator"].dump() : "{}";
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, manifest_path.string() + ": " + e.what());
  }

  const fs::path csv_path = with_ext(stem, ".csv");
  std::istringstream in(read_text(csv_path));
  std::string line;
  std::string expected = "sign,k";
  for (int a = 1; a <= ds.d; ++a) expected += ",omega_" + std::to_string(a);
  expected += ",re,im";
  if (!std::getline(in, line) || line != expected)
    fail(ErrorCode::Io, csv_path.string() + ": header must be '" + expected + "'");
  const std::size_t columns = static_cast<std::size_t>(ds.d) + 4;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) fail(ErrorCode::Io, csv_path.string() + ": wrong column count in '" + line + "'");
    FarFieldSample s;
    if (cells[0] == "1") s.sign = 1;
    else if (cells[0] == "-1") s.sign = -1;
    else fail(ErrorCode::Io, csv_path.string() + ": sign must be 1 or -1");
    s.k = parse_double(cells[1], csv_path);
    for (int a = 0; a < ds.d; ++a) s.omega[a] = parse_double(cells[2 + static_cast<std::size_t>(a)], csv_path);
    s.value = {parse_double(cells[columns - 2], csv_path), parse_double(cells[columns - 1], csv_path)};
    ds.samples.push_back(s);
  }
  return ds;
}

std::string sha256_file(const fs::path& path) {
  const std::string bytes = read_text(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::Io, "sha256 failed for " + path.string());
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace fixangle::io
