#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "artic/geometry.hpp"
#include "text_util.hpp"

namespace artic::geom {

namespace {

struct PlyProperty {
  std::string name;
  std::string type;       // scalar type, or the value type for lists
  std::string count_type; // list count type; empty for scalars
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t scalar_size(const std::string& type, std::size_t pos) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8")
    return 1;
  if (type == "short" || type == "ushort" || type == "int16" ||
      type == "uint16")
    return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64" || type == "int64" ||
      type == "uint64")
    return 8;
  fail_at(errc::format_error, "unknown PLY type '" + type + "'", pos);
}

class BinaryCursor {
 public:
  BinaryCursor(const std::string& bytes, std::size_t offset)
      : bytes_(bytes), pos_(offset) {}

  std::size_t pos() const { return pos_; }

  double read_scalar(const std::string& type) {
    const std::size_t size = scalar_size(type, pos_);
    if (pos_ + size > bytes_.size()) {
      fail_at(errc::format_error, "PLY payload truncated", pos_);
    }
    const char* p = bytes_.data() + pos_;
    pos_ += size;
    // Little-endian payload on a little-endian host.
    if (type == "char" || type == "int8") {
      std::int8_t v; std::memcpy(&v, p, 1); return v;
    }
    if (type == "uchar" || type == "uint8") {
      std::uint8_t v; std::memcpy(&v, p, 1); return v;
    }
    if (type == "short" || type == "int16") {
      std::int16_t v; std::memcpy(&v, p, 2); return v;
    }
    if (type == "ushort" || type == "uint16") {
      std::uint16_t v; std::memcpy(&v, p, 2); return v;
    }
    if (type == "int" || type == "int32") {
      std::int32_t v; std::memcpy(&v, p, 4); return v;
    }
    if (type == "uint" || type == "uint32") {
      std::uint32_t v; std::memcpy(&v, p, 4); return v;
    }
    if (type == "float" || type == "float32") {
      float v; std::memcpy(&v, p, 4); return v;
    }
    if (type == "int64") {
      std::int64_t v; std::memcpy(&v, p, 8); return static_cast<double>(v);
    }
    if (type == "uint64") {
      std::uint64_t v; std::memcpy(&v, p, 8); return static_cast<double>(v);
    }
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_;
};

class AsciiCursor {
 public:
  AsciiCursor(const std::string& bytes, std::size_t offset)
      : bytes_(bytes), pos_(offset) {}

  double next() {
    while (pos_ < bytes_.size() &&
           std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (pos_ >= bytes_.size()) {
      fail_at(errc::format_error, "PLY payload truncated", pos_);
    }
    std::size_t start = pos_;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    return text::parse_double(
        std::string_view(bytes_).substr(start, pos_ - start), start);
  }

 private:
  const std::string& bytes_;
  std::size_t pos_;
};

void push_triangle(TriangleMesh& mesh, std::int64_t a, std::int64_t b,
                   std::int64_t c, std::size_t pos) {
  const auto n = static_cast<std::int64_t>(mesh.vertices.size());
  for (std::int64_t idx : {a, b, c}) {
    if (idx < 0 || idx >= n) {
      fail_at(errc::format_error,
              "face index " + std::to_string(idx) + " out of range (have " +
                  std::to_string(n) + " vertices)",
              pos);
    }
  }
  mesh.triangles.push_back({static_cast<std::int32_t>(a),
                            static_cast<std::int32_t>(b),
                            static_cast<std::int32_t>(c)});
}

void drop_degenerate(TriangleMesh& mesh) {
  std::erase_if(mesh.triangles, [&mesh](const std::array<std::int32_t, 3>& t) {
    const Eigen::Vector3d& a = mesh.vertices[t[0]];
    const Eigen::Vector3d& b = mesh.vertices[t[1]];
    const Eigen::Vector3d& c = mesh.vertices[t[2]];
    return 0.5 * (b - a).cross(c - a).norm() <= 0.0;
  });
}

}  // namespace

double TriangleMesh::triangle_area(std::size_t index) const {
  const auto& t = triangles[index];
  const Eigen::Vector3d& a = vertices[t[0]];
  const Eigen::Vector3d& b = vertices[t[1]];
  const Eigen::Vector3d& c = vertices[t[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

double TriangleMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) total += triangle_area(i);
  return total;
}

void Aabb::grow(const Eigen::Vector3d& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

void Aabb::grow(const Aabb& other) {
  min = min.cwiseMin(other.min);
  max = max.cwiseMax(other.max);
}

Aabb bounds_of(const std::vector<Eigen::Vector3d>& points) {
  if (points.empty()) fail(errc::empty_cloud, "no points to bound");
  Aabb box{points.front(), points.front()};
  for (const Eigen::Vector3d& p : points) box.grow(p);
  return box;
}

TriangleMesh parse_ply(const std::string& bytes) {
  std::istringstream header(bytes);
  std::string line;
  if (!std::getline(header, line) || line.substr(0, 3) != "ply") {
    fail_at(errc::format_error, "missing 'ply' magic", 0);
  }

  bool binary = false;
  std::vector<PlyElement> elements;
  std::size_t body_offset = 0;
  while (true) {
    std::size_t line_pos = static_cast<std::size_t>(header.tellg());
    if (!std::getline(header, line)) {
      fail_at(errc::format_error, "header without end_header", bytes.size());
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    std::string word;
    words >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt;
      words >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        fail_at(errc::format_error, "unsupported PLY format '" + fmt + "'",
                line_pos);
      }
    } else if (word == "element") {
      PlyElement el;
      words >> el.name >> el.count;
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) {
        fail_at(errc::format_error, "property before element", line_pos);
      }
      PlyProperty prop;
      std::string first;
      words >> first;
      if (first == "list") {
        prop.is_list = true;
        words >> prop.count_type >> prop.type >> prop.name;
      } else {
        prop.type = first;
        words >> prop.name;
      }
      elements.back().properties.push_back(prop);
    } else if (word == "end_header") {
      body_offset = static_cast<std::size_t>(header.tellg());
      break;
    } else {
      fail_at(errc::format_error, "unexpected header line '" + line + "'",
              line_pos);
    }
  }

  TriangleMesh mesh;
  BinaryCursor bin(bytes, body_offset);
  AsciiCursor ascii(bytes, body_offset);

  auto next_value = [&](const std::string& type) {
    return binary ? bin.read_scalar(type) : ascii.next();
  };
  auto cursor_pos = [&]() { return binary ? bin.pos() : body_offset; };

  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    for (std::size_t i = 0; i < el.count; ++i) {
      Eigen::Vector3d v{0, 0, 0};
      bool have[3] = {false, false, false};
      for (const PlyProperty& prop : el.properties) {
        if (prop.is_list) {
          const std::size_t count_pos = cursor_pos();
          auto n = static_cast<std::int64_t>(next_value(prop.count_type));
          if (n < 0 || n > 1024) {
            fail_at(errc::format_error, "unreasonable list count", count_pos);
          }
          std::vector<double> items(static_cast<std::size_t>(n));
          for (double& item : items) item = next_value(prop.type);
          if (is_face &&
              (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            if (n < 3) {
              fail_at(errc::format_error, "face with fewer than 3 indices",
                      count_pos);
            }
            for (std::int64_t k = 1; k + 1 < n; ++k) {
              push_triangle(mesh, static_cast<std::int64_t>(items[0]),
                            static_cast<std::int64_t>(items[k]),
                            static_cast<std::int64_t>(items[k + 1]),
                            count_pos);
            }
          }
        } else {
          double value = next_value(prop.type);
          if (is_vertex) {
            if (prop.name == "x") { v.x() = value; have[0] = true; }
            else if (prop.name == "y") { v.y() = value; have[1] = true; }
            else if (prop.name == "z") { v.z() = value; have[2] = true; }
          }
        }
      }
      if (is_vertex) {
        if (!have[0] || !have[1] || !have[2]) {
          fail_at(errc::format_error, "vertex element lacks x/y/z", body_offset);
        }
        mesh.vertices.push_back(v);
      }
    }
  }

  drop_degenerate(mesh);
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    fail(errc::empty_mesh, "PLY contains no usable geometry");
  }
  return mesh;
}

TriangleMesh parse_obj(const std::string& bytes) {
  TriangleMesh mesh;
  std::istringstream in(bytes);
  std::string line;
  std::size_t line_start = 0;
  while (std::getline(in, line)) {
    const std::size_t pos = line_start;
    line_start += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("v ", 0) == 0) {
      mesh.vertices.push_back(text::parse_vector3(line.substr(2), pos + 2));
    } else if (line.rfind("f ", 0) == 0) {
      std::istringstream words(line.substr(2));
      std::string word;
      std::vector<std::int64_t> face;
      while (words >> word) {
        // "i", "i/t", "i//n", "i/t/n" forms; only the position index is used.
        std::string idx = word.substr(0, word.find('/'));
        std::int64_t parsed = 0;
        try {
          parsed = std::stoll(idx);
        } catch (const std::exception&) {
          fail_at(errc::format_error, "bad face index '" + word + "'", pos);
        }
        if (parsed < 0) {  // negative indices are relative to the end
          parsed = static_cast<std::int64_t>(mesh.vertices.size()) + parsed;
        } else {
          parsed -= 1;  // OBJ is 1-based
        }
        face.push_back(parsed);
      }
      if (face.size() < 3) {
        fail_at(errc::format_error, "face with fewer than 3 vertices", pos);
      }
      for (std::size_t k = 1; k + 1 < face.size(); ++k) {
        push_triangle(mesh, face[0], face[k], face[k + 1], pos);
      }
    }
    // vn/vt/usemtl/mtllib/o/g/s/# are ignored.
  }
  drop_degenerate(mesh);
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    fail(errc::empty_mesh, "OBJ contains no usable geometry");
  }
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(errc::io_error, "cannot open mesh file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();
  switch (format) {
    case MeshFormat::kPly: return parse_ply(bytes);
    case MeshFormat::kObj: return parse_obj(bytes);
  }
  fail(errc::format_error, "unknown mesh format");
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::string ext = text::to_lower(path.extension().string());
  if (ext == ".ply") return load_mesh(path, MeshFormat::kPly);
  if (ext == ".obj") return load_mesh(path, MeshFormat::kObj);
  fail(errc::format_error,
       "unsupported mesh extension '" + ext + "' for '" + path.string() + "'");
}

std::string cloud_to_ply(const PartCloud& cloud) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.points.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "end_header\n";
  for (const Eigen::Vector3d& p : cloud.points) {
    out += text::format_vector3(p);
    out += "\n";
  }
  return out;
}

void write_cloud_ply(const PartCloud& cloud,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(errc::io_error, "cannot write '" + path.string() + "'");
  }
  out << cloud_to_ply(cloud);
}

}  // namespace artic::geom
