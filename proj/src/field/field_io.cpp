// Field container layout:
//   "INNTD1\n"
//   decimal byte length of the header, then '\n'
//   JSON header (dims, meshes, patch configs, mode count)
//   little-endian float64 coefficients, mode-major then dimension order
//   CRC-32 (little-endian uint32) of header bytes followed by coefficient bytes

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "septensor/error.hpp"
#include "septensor/field.hpp"

namespace septensor {
namespace {

constexpr char kMagic[] = "INNTD1\n";
constexpr int kVersion = 1;
constexpr std::size_t kMaxHeaderBytes = std::size_t{1} << 30;

using nlohmann::json;

json header_json(const SeparableField& field) {
  json dims = json::array();
  for (const auto& d : field.space().dims()) {
    dims.push_back({{"name", d.name},
                    {"kind", to_string(d.kind)},
                    {"nodes", std::vector<double>(d.mesh.nodes().begin(), d.mesh.nodes().end())},
                    {"patch",
                     {{"s", d.patch.s},
                      {"a", d.patch.a},
                      {"p", d.patch.p},
                      {"kernel", to_string(d.patch.kernel)}}}});
  }
  return json{{"format", "INNTD"},
              {"version", kVersion},
              {"num_modes", field.num_modes()},
              {"dims", dims}};
}

FieldHeader parse_header(const std::string& text) {
  FieldHeader out;
  try {
    const json h = json::parse(text);
    out.version = h.at("version").get<int>();
    if (out.version != kVersion)
      throw FormatError("unsupported field container version " + std::to_string(out.version));
    out.num_modes = h.at("num_modes").get<std::size_t>();
    for (const auto& d : h.at("dims")) {
      PatchConfig patch;
      const auto& p = d.at("patch");
      patch.s = p.at("s").get<int>();
      patch.a = p.at("a").get<double>();
      patch.p = p.at("p").get<int>();
      patch.kernel = kernel_from_string(p.at("kernel").get<std::string>());
      out.dims.push_back(DimensionSpec{d.at("name").get<std::string>(),
                                       Mesh1D(d.at("nodes").get<std::vector<double>>()), patch,
                                       dim_kind_from_string(d.at("kind").get<std::string>())});
    }
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& err) {
    throw FormatError(std::string("malformed field header: ") + err.what());
  }
  return out;
}

void put_double_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

double get_double_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

std::uint32_t crc_of(const std::string& a, const std::string& b) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(a.data()), static_cast<uInt>(a.size()));
  crc = crc32(crc, reinterpret_cast<const Bytef*>(b.data()), static_cast<uInt>(b.size()));
  return static_cast<std::uint32_t>(crc);
}

// Reads magic and header; leaves the stream at the first coefficient byte.
std::pair<FieldHeader, std::string> read_header(std::istream& in) {
  char magic[sizeof(kMagic) - 1];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw FormatError("not a field container (bad magic)");
  std::string len_line;
  if (!std::getline(in, len_line)) throw FormatError("truncated field container header");
  std::size_t len = 0;
  try {
    std::size_t used = 0;
    len = std::stoull(len_line, &used);
    if (used != len_line.size()) throw FormatError("bad header length");
  } catch (const std::exception&) {
    throw FormatError("bad header length line");
  }
  if (len > kMaxHeaderBytes) throw FormatError("header length too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw FormatError("truncated field container header");
  return {parse_header(text), text};
}

}  // namespace

void save_field(const SeparableField& field, const std::string& path) {
  const std::string header = header_json(field).dump();
  std::string payload;
  payload.reserve(field.num_parameters() * 8);
  for (std::size_t m = 0; m < field.num_modes(); ++m)
    for (double v : field.mode(m)) put_double_le(payload, v);
  const std::uint32_t crc = crc_of(header, payload);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic) - 1);
  out << header.size() << '\n';
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((crc >> (8 * i)) & 0xffu));
  if (!out) throw FormatError("write failed for '" + path + "'");
}

FieldHeader read_field_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return read_header(in).first;
}

SeparableField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  auto [header, header_text] = read_header(in);
  auto space = make_space(header.dims);
  const std::size_t count = header.num_modes * space->mode_size();
  std::string payload(count * 8, '\0');
  if (!in.read(payload.data(), static_cast<std::streamsize>(payload.size())))
    throw FormatError("truncated coefficient block");
  unsigned char crc_bytes[4];
  if (!in.read(reinterpret_cast<char*>(crc_bytes), 4)) throw FormatError("missing checksum");
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<std::uint32_t>(crc_bytes[i]) << (8 * i);
  if (stored != crc_of(header_text, payload)) throw FormatError("checksum mismatch");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checksum");

  SeparableField field(space);
  std::vector<double> mode(space->mode_size());
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t m = 0; m < header.num_modes; ++m) {
    for (std::size_t k = 0; k < mode.size(); ++k)
      mode[k] = get_double_le(bytes + 8 * (m * mode.size() + k));
    field.add_mode_flat(mode);
  }
  return field;
}

}  // namespace septensor
