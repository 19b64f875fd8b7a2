#include "gsedit/ply.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "ply reader/writer assumes a little-endian host");

namespace gsedit {
namespace {

struct Property {
  std::string name;
  int size = 0;  // bytes
  bool is_double = false;
  bool is_real = false;  // float or double
};

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset, const std::string& msg) {
  throw std::runtime_error("ply error in " + path.string() + " at byte " + std::to_string(offset) +
                           ": " + msg);
}

int scalar_size(const std::string& type) {
  if (type == "float" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32") return 4;
  return 0;
}

}  // namespace

GaussianScene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file: " + path.string());

  std::size_t offset = 0;
  auto read_line = [&]() {
    std::string line;
    if (!std::getline(in, line)) fail(path, offset, "unexpected end of header");
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (read_line() != "ply") fail(path, 0, "missing 'ply' magic");
  std::size_t vertex_count = 0;
  bool saw_format = false;
  bool in_vertex_element = false;
  std::vector<Property> props;
  Vec3 background = Vec3::Ones();
  bool have_background = false;

  for (;;) {
    const std::size_t line_start = offset;
    const std::string line = read_line();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "end_header") break;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian") fail(path, line_start, "unsupported format '" + fmt + "'");
      saw_format = true;
    } else if (tok == "comment") {
      std::string what;
      ss >> what;
      if (what == "background") {
        ss >> background.x() >> background.y() >> background.z();
        have_background = true;
      }
    } else if (tok == "element") {
      std::string name;
      std::size_t count = 0;
      ss >> name >> count;
      if (name == "vertex") {
        vertex_count = count;
        in_vertex_element = true;
      } else {
        if (in_vertex_element) in_vertex_element = false;
        if (count != 0) fail(path, line_start, "unsupported non-vertex element '" + name + "'");
      }
    } else if (tok == "property") {
      if (!in_vertex_element) continue;
      std::string type, name;
      ss >> type >> name;
      if (type == "list") fail(path, line_start, "list properties are not supported");
      const int sz = scalar_size(type);
      if (sz == 0) fail(path, line_start, "unknown property type '" + type + "'");
      const bool dbl = type == "double" || type == "float64";
      const bool real = dbl || type == "float" || type == "float32";
      props.push_back({name, sz, dbl, real});
    }
  }
  if (!saw_format) fail(path, offset, "missing format line");
  if (vertex_count == 0) fail(path, offset, "nonempty scene required");

  static const char* required[] = {"x",       "y",       "z",       "rot_0",  "rot_1",
                                   "rot_2",   "rot_3",   "scale_0", "scale_1", "scale_2",
                                   "opacity", "f_dc_0",  "f_dc_1",  "f_dc_2"};
  std::map<std::string, int> index;
  int stride = 0;
  std::vector<int> prop_offset(props.size());
  for (std::size_t i = 0; i < props.size(); ++i) {
    prop_offset[i] = stride;
    stride += props[i].size;
    index[props[i].name] = static_cast<int>(i);
  }
  for (const char* name : required) {
    auto it = index.find(name);
    if (it == index.end()) fail(path, offset, std::string("missing property '") + name + "'");
    if (!props[it->second].is_real) {
      fail(path, offset, std::string("property '") + name + "' must be float or double");
    }
  }

  std::vector<char> row(stride);
  auto get = [&](const char* name) -> double {
    const auto& p = props[index.at(name)];
    const char* src = row.data() + prop_offset[index.at(name)];
    if (p.is_double) {
      double v;
      std::memcpy(&v, src, 8);
      return v;
    }
    float v;
    std::memcpy(&v, src, 4);
    return v;
  };

  GaussianScene scene;
  scene.gaussians.resize(vertex_count);
  if (have_background) scene.background = background;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const std::size_t row_start = offset;
    in.read(row.data(), stride);
    if (in.gcount() != stride) fail(path, row_start, "truncated vertex data");
    offset += stride;

    Gaussian3D& g = scene.gaussians[i];
    g.mu = {get("x"), get("y"), get("z")};
    const Vec4 rot(get("rot_0"), get("rot_1"), get("rot_2"), get("rot_3"));
    g.log_scale = {get("scale_0"), get("scale_1"), get("scale_2")};
    g.opacity_logit = get("opacity");
    g.color = {get("f_dc_0"), get("f_dc_1"), get("f_dc_2")};

    if (!g.mu.allFinite() || !rot.allFinite() || !g.log_scale.allFinite() ||
        !std::isfinite(g.opacity_logit) || !g.color.allFinite()) {
      fail(path, row_start, "non-finite field in vertex " + std::to_string(i));
    }
    if (!(rot.norm() > 0.0)) {
      fail(path, row_start, "zero-norm rotation in vertex " + std::to_string(i));
    }
    g.q = rot / rot.norm();
  }
  scene.snapshot_init();
  return scene;
}

void save_scene(const GaussianScene& scene, const std::filesystem::path& path) {
  if (scene.gaussians.empty()) throw std::invalid_argument("nonempty scene required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scene file: " + path.string());

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "comment background " << scene.background.x() << " " << scene.background.y() << " "
      << scene.background.z() << "\n";
  out << "element vertex " << scene.gaussians.size() << "\n";
  for (const char* name : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0",
                           "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"}) {
    out << "property double " << name << "\n";
  }
  out << "end_header\n";

  std::vector<double> row(14);
  for (const auto& g : scene.gaussians) {
    row[0] = g.mu.x();
    row[1] = g.mu.y();
    row[2] = g.mu.z();
    row[3] = g.color.x();
    row[4] = g.color.y();
    row[5] = g.color.z();
    row[6] = g.opacity_logit;
    row[7] = g.log_scale.x();
    row[8] = g.log_scale.y();
    row[9] = g.log_scale.z();
    row[10] = g.q[0];
    row[11] = g.q[1];
    row[12] = g.q[2];
    row[13] = g.q[3];
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace gsedit
