#include "pico/io/mesh_io.hpp"

#include "pico/io/bytes.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace pico {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && end == s.data() + s.size();
}

size_t type_size(std::string_view t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  return 0;
}

double read_scalar(ByteReader& in, std::string_view t) {
  if (t == "char" || t == "int8") return in.read<std::int8_t>();
  if (t == "uchar" || t == "uint8") return in.read<std::uint8_t>();
  if (t == "short" || t == "int16") return in.read<std::int16_t>();
  if (t == "ushort" || t == "uint16") return in.read<std::uint16_t>();
  if (t == "int" || t == "int32") return in.read<std::int32_t>();
  if (t == "uint" || t == "uint32") return in.read<std::uint32_t>();
  if (t == "float" || t == "float32") return in.read<float>();
  return in.read<double>();
}

struct PlyProperty {
  std::string name, type, count_type;  // count_type set for lists
};

struct PlyElement {
  std::string name;
  std::uint64_t count = 0;
  std::vector<PlyProperty> props;
};

// Header token reader: whitespace-separated words, newline-terminated lines.
struct PnmHeader {
  std::string_view data;
  size_t pos = 0;
  std::string what;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ParseError, what + ": " + msg + " at byte " + std::to_string(pos));
  }
  long number() {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    long v = 0;
    if (start == pos || !parse_number(data.substr(start, pos - start), v)) fail("expected a number");
    return v;
  }
};

}  // namespace

SurfaceMesh parse_obj(std::string_view text, const std::string& what) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::ParseError, what + ": line " + std::to_string(line_no) + ": " + msg);
    };
    const auto tok = tokens(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "v") {
      if (tok.size() < 4 || tok.size() > 5) fail("vertex needs 3 coordinates");
      Vec3 p;
      for (int k = 0; k < 3; ++k)
        if (!parse_number(tok[k + 1], p[k]) || !std::isfinite(p[k])) fail("bad coordinate '" + std::string(tok[k + 1]) + "'");
      vertices.push_back(p);
    } else if (tok[0] == "f") {
      if (tok.size() < 4) fail("face needs at least 3 vertices");
      std::vector<int> idx;
      for (size_t k = 1; k < tok.size(); ++k) {
        const std::string_view ref = tok[k].substr(0, tok[k].find('/'));
        long i = 0;
        if (!parse_number(ref, i)) fail("bad face index '" + std::string(tok[k]) + "'");
        if (i == 0) fail("face index 0 (OBJ indices are 1-based)");
        const long n = static_cast<long>(vertices.size());
        const long v = i > 0 ? i - 1 : n + i;
        if (v < 0 || v >= n) fail("face index " + std::to_string(i) + " out of range");
        idx.push_back(static_cast<int>(v));
      }
      for (size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return build_mesh(std::move(vertices), std::move(faces));
}

std::string serialize_obj(const SurfaceMesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  return out.str();
}

SurfaceMesh parse_ply(std::string_view bytes, const std::string& what) {
  const size_t header_end = bytes.find("end_header\n");
  if (bytes.substr(0, 4) != "ply\n" || header_end == std::string_view::npos)
    throw Error(ErrorKind::ParseError, what + ": missing ply header at byte 0");
  std::vector<PlyElement> elements;
  bool format_ok = false;
  size_t pos = 4;
  while (pos < header_end) {
    const size_t nl = bytes.find('\n', pos);
    const auto tok = tokens(bytes.substr(pos, nl - pos));
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorKind::ParseError, what + ": " + msg + " at byte " + std::to_string(pos));
    };
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") {
    } else if (tok[0] == "format") {
      if (tok.size() != 3 || tok[1] != "binary_little_endian") fail("only binary_little_endian is supported");
      format_ok = true;
    } else if (tok[0] == "element") {
      PlyElement e;
      if (tok.size() != 3 || !parse_number(tok[2], e.count)) fail("bad element line");
      e.name = tok[1];
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) fail("property before element");
      PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        p = {std::string(tok[4]), std::string(tok[3]), std::string(tok[2])};
        if (type_size(p.count_type) == 0 || type_size(p.type) == 0) fail("bad list type");
      } else if (tok.size() == 3) {
        p = {std::string(tok[2]), std::string(tok[1]), ""};
        if (type_size(p.type) == 0) fail("bad property type '" + p.type + "'");
      } else {
        fail("bad property line");
      }
      elements.back().props.push_back(std::move(p));
    } else {
      fail("unknown header line");
    }
    pos = nl + 1;
  }
  if (!format_ok) throw Error(ErrorKind::ParseError, what + ": missing format line at byte 0");

  ByteReader in(bytes, what);
  in.bytes(header_end + 11);
  auto fail = [&](const std::string& msg) { in.fail(msg); };
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  for (const PlyElement& e : elements) {
    if (e.count > in.remaining()) fail("element '" + e.name + "' count exceeds the file size");
    int xyz[3] = {-1, -1, -1};
    int list = -1;
    for (size_t k = 0; k < e.props.size(); ++k) {
      const auto& p = e.props[k];
      if (p.count_type.empty() && (p.name == "x" || p.name == "y" || p.name == "z")) xyz[p.name[0] - 'x'] = (int)k;
      if (!p.count_type.empty() && (p.name == "vertex_indices" || p.name == "vertex_index")) list = (int)k;
    }
    if (e.name == "vertex" && (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0)) fail("vertex element lacks x, y or z");
    if (e.name == "face" && list < 0) fail("face element lacks vertex_indices");
    for (std::uint64_t i = 0; i < e.count; ++i) {
      Vec3 p = Vec3::Zero();
      std::vector<int> idx;
      for (size_t k = 0; k < e.props.size(); ++k) {
        const auto& prop = e.props[k];
        if (prop.count_type.empty()) {
          const double v = read_scalar(in, prop.type);
          for (int a = 0; a < 3; ++a)
            if (xyz[a] == (int)k) p[a] = v;
          continue;
        }
        const double n = read_scalar(in, prop.count_type);
        if (n < 0) fail("negative list length");
        for (long j = 0; j < (long)n; ++j) {
          const double v = read_scalar(in, prop.type);
          if ((int)k == list) {
            if (v < 0 || v >= (double)vertices.size() || v != std::floor(v)) fail("face index out of range");
            idx.push_back(static_cast<int>(v));
          }
        }
      }
      if (e.name == "vertex") {
        if (!p.allFinite()) fail("non-finite vertex");
        vertices.push_back(p);
      } else if (e.name == "face") {
        if (idx.size() < 3) fail("face with fewer than 3 vertices");
        for (size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
      }
    }
  }
  if (!in.at_end()) fail("trailing bytes");
  return build_mesh(std::move(vertices), std::move(faces));
}

std::string serialize_ply(const SurfaceMesh& mesh) {
  ByteWriter out;
  out.bytes("ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(mesh.num_vertices()) +
            "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
            std::to_string(mesh.num_faces()) + "\nproperty list uchar int vertex_indices\nend_header\n");
  for (const Vec3& v : mesh.vertices())
    for (int k = 0; k < 3; ++k) out.write(v[k]);
  for (const Face& f : mesh.faces()) {
    out.write(std::uint8_t{3});
    for (int k = 0; k < 3; ++k) out.write(static_cast<std::int32_t>(f[k]));
  }
  return out.data();
}

SurfaceMesh load_mesh_file(const std::string& path) {
  const std::string data = read_file(path);
  if (data.rfind("ply", 0) == 0) return parse_ply(data, path);
  return parse_obj(data, path);
}

void save_mesh_file(const SurfaceMesh& mesh, const std::string& path) {
  const bool ply = path.size() >= 4 && path.compare(path.size() - 4, 4, ".ply") == 0;
  write_file(path, ply ? serialize_ply(mesh) : serialize_obj(mesh));
}

SilhouetteMask parse_mask(std::string_view bytes, const std::string& what) {
  PnmHeader h{bytes, 2, what};
  const std::string_view magic = bytes.substr(0, 2);
  if (magic != "P5" && magic != "P4") {
    h.pos = 0;
    h.fail("expected P5 or P4");
  }
  const long w = h.number(), ht = h.number();
  const long maxval = magic == "P5" ? h.number() : 1;
  if (w <= 0 || ht <= 0 || w > (1 << 20) || ht > (1 << 20)) h.fail("bad dimensions");
  if (maxval < 1 || maxval > 255) h.fail("maxval must be in [1, 255]");
  if (h.pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[h.pos]))) h.fail("expected whitespace");
  ++h.pos;
  const size_t row = magic == "P5" ? static_cast<size_t>(w) : static_cast<size_t>((w + 7) / 8);
  const size_t need = row * static_cast<size_t>(ht);
  if (bytes.size() - h.pos < need) {
    h.pos = bytes.size();
    h.fail("truncated raster (" + std::to_string(need) + " bytes expected)");
  }
  if (bytes.size() - h.pos > need) {
    h.pos += need;
    h.fail("trailing bytes");
  }
  SilhouetteMask mask(static_cast<int>(w), static_cast<int>(ht));
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + h.pos);
  for (int y = 0; y < ht; ++y)
    for (int x = 0; x < w; ++x) {
      const bool on = magic == "P5" ? raster[y * row + x] >= 128 : (raster[y * row + x / 8] >> (7 - x % 8)) & 1;
      if (on) mask.set(x, y);
    }
  return mask;
}

std::string serialize_pgm(const SilhouetteMask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out.push_back(mask.get(x, y) ? '\xff' : '\0');
  return out;
}

std::string serialize_pbm(const SilhouetteMask& mask) {
  std::string out = "P4\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n";
  const int row = (mask.width() + 7) / 8;
  for (int y = 0; y < mask.height(); ++y) {
    std::string bits(row, '\0');
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y)) bits[x / 8] = static_cast<char>(bits[x / 8] | (0x80 >> (x % 8)));
    out += bits;
  }
  return out;
}

SilhouetteMask load_mask_file(const std::string& path) { return parse_mask(read_file(path), path); }

void save_mask_file(const SilhouetteMask& mask, const std::string& path) {
  const bool pbm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".pbm") == 0;
  write_file(path, pbm ? serialize_pbm(mask) : serialize_pgm(mask));
}

}  // namespace pico
