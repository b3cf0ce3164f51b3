#include "hemips/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hemips/error.hpp"
#include "json.hpp"

namespace hemips::io {

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("io", "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("io", "cannot write " + path.string());
  return out;
}

// Header token of a Netpbm-style file; '#' comments are skipped.
std::string token(std::istream& in) {
  std::string t;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!t.empty()) break;
      continue;
    }
    t.push_back(c);
  }
  return t;
}

int header_int(std::istream& in, const fs::path& path) {
  const std::string t = token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used == t.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw InputError("io", "bad header field '" + t + "' in " + path.string());
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

void write_pfm(const fs::path& path, const FloatImage& img) {
  if (img.channels != 1 && img.channels != 3) throw InputError("io", "PFM needs 1 or 3 channels");
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height * img.channels)
    throw InputError("io", "image data does not match its size");
  std::ofstream out = open_out(path);
  out << (img.channels == 3 ? "PF" : "Pf") << '\n' << img.width << ' ' << img.height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  std::vector<std::uint32_t> buf(row);
  for (int r = img.height - 1; r >= 0; --r) {
    for (std::size_t i = 0; i < row; ++i) {
      std::uint32_t v;
      std::memcpy(&v, &img.data[static_cast<std::size_t>(r) * row + i], 4);
      buf[i] = std::endian::native == std::endian::little ? v : byteswap32(v);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(row * 4));
  }
  if (!out) throw InputError("io", "write failed for " + path.string());
}

FloatImage read_pfm(const fs::path& path) {
  std::ifstream in = open_in(path);
  const std::string magic = token(in);
  FloatImage img;
  if (magic == "Pf") img.channels = 1;
  else if (magic == "PF") img.channels = 3;
  else throw InputError("io", "not a PFM file: " + path.string());
  img.width = header_int(in, path);
  img.height = header_int(in, path);
  double scale = 0.0;
  try {
    scale = std::stod(token(in));
  } catch (const std::exception&) {
    throw InputError("io", "bad PFM scale in " + path.string());
  }
  if (scale == 0.0) throw InputError("io", "bad PFM scale in " + path.string());
  const bool little = scale < 0.0;
  const bool swap = little != (std::endian::native == std::endian::little);
  const std::size_t row = static_cast<std::size_t>(img.width) * img.channels;
  img.data.resize(row * img.height);
  std::vector<std::uint32_t> buf(row);
  for (int r = img.height - 1; r >= 0; --r) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(row * 4)))
      throw InputError("io", "truncated PFM data in " + path.string());
    for (std::size_t i = 0; i < row; ++i) {
      const std::uint32_t v = swap ? byteswap32(buf[i]) : buf[i];
      std::memcpy(&img.data[static_cast<std::size_t>(r) * row + i], &v, 4);
    }
  }
  return img;
}

FloatImage read_pgm(const fs::path& path) {
  std::ifstream in = open_in(path);
  const std::string magic = token(in);
  if (magic != "P5" && magic != "P2") throw InputError("io", "not a PGM file: " + path.string());
  FloatImage img;
  img.width = header_int(in, path);
  img.height = header_int(in, path);
  const int maxval = header_int(in, path);
  if (maxval > 65535) throw InputError("io", "PGM maxval too large in " + path.string());
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  img.data.resize(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      const std::string t = token(in);
      if (t.empty()) throw InputError("io", "truncated PGM data in " + path.string());
      img.data[i] = static_cast<float>(std::stoi(t)) / static_cast<float>(maxval);
    }
    return img;
  }
  const int bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> buf(n * bytes);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw InputError("io", "truncated PGM data in " + path.string());
  for (std::size_t i = 0; i < n; ++i) {
    const int v = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];  // big-endian
    img.data[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return img;
}

void write_pgm(const fs::path& path, const FloatImage& img) {
  if (img.channels != 1) throw InputError("io", "PGM output is single-channel");
  std::ofstream out = open_out(path);
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  for (float v : img.data) out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f))));
  if (!out) throw InputError("io", "write failed for " + path.string());
}

std::vector<double> read_gray(const fs::path& path, int& width, int& height) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  const FloatImage img = ext == ".pfm" ? read_pfm(path) : read_pgm(path);
  width = img.width;
  height = img.height;
  std::vector<double> out(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = img.channels == 3 ? luminance(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]) : img.data[i];
  return out;
}

void write_lights_csv(const fs::path& path, const std::vector<sh::Direction>& lights) {
  std::ofstream out = open_out(path);
  out << "lx,ly,lz\n" << std::setprecision(17);
  for (const auto& l : lights) out << l.x() << ',' << l.y() << ',' << l.z() << '\n';
}

std::vector<sh::Direction> read_lights_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<sh::Direction> lights;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "lx,ly,lz") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z)) throw InputError("io", "bad light on line " + std::to_string(lineno) + " of " + path.string());
    lights.push_back(sh::Direction::normalized(Eigen::Vector3d(x, y, z)));
  }
  return lights;
}

FloatImage normals_image(int width, int height, const std::vector<Eigen::Vector3d>& normals) {
  FloatImage img;
  img.width = width;
  img.height = height;
  img.channels = 3;
  img.data.resize(normals.size() * 3);
  for (std::size_t i = 0; i < normals.size(); ++i)
    for (int c = 0; c < 3; ++c) img.data[3 * i + c] = static_cast<float>(normals[i][c]);
  return img;
}

std::vector<Eigen::Vector3d> normals_from_image(const FloatImage& img) {
  if (img.channels != 3) throw InputError("io", "normal maps need 3 channels");
  std::vector<Eigen::Vector3d> out(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Eigen::Vector3d(img.data[3 * i], img.data[3 * i + 1], img.data[3 * i + 2]);
  return out;
}

std::vector<std::string> write_stack(const fs::path& dir, const render::ImageStack& stack) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("io", "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::string> names;
  FloatImage img;
  img.width = stack.width;
  img.height = stack.height;
  img.data.resize(static_cast<std::size_t>(stack.width) * stack.height);
  for (std::size_t k = 0; k < stack.images.size(); ++k) {
    std::ostringstream name;
    name << "image_" << std::setw(3) << std::setfill('0') << k << ".pfm";
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<float>(stack.images[k][i]);
    write_pfm(dir / name.str(), img);
    names.push_back(name.str());
  }
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = stack.mask[i] ? 1.0f : 0.0f;
  write_pgm(dir / "mask.pgm", img);
  if (!stack.lights.empty()) write_lights_csv(dir / "lights.csv", stack.lights);
  return names;
}

render::ImageStack read_stack(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("io", "not a directory: " + dir.string());
  std::vector<fs::path> files;
  if (fs::exists(dir / "scene.json")) {
    std::ifstream in = open_in(dir / "scene.json");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("io", std::string("malformed scene.json: ") + e.what());
    }
    if (j.contains("images"))
      for (const auto& name : j["images"]) files.push_back(dir / name.get<std::string>());
  }
  if (files.empty()) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      const std::string stem = e.path().stem().string();
      if ((ext == ".pfm" || ext == ".pgm") && stem != "mask" && stem.rfind("normals", 0) != 0 && stem.rfind("depth", 0) != 0)
        files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw InputError("io", "no images in " + dir.string());

  render::ImageStack st;
  for (const auto& f : files) {
    int w = 0, h = 0;
    st.images.push_back(read_gray(f, w, h));
    if (st.images.size() == 1) {
      st.width = w;
      st.height = h;
    } else if (w != st.width || h != st.height) {
      throw InputError("io", "image size differs in " + f.string());
    }
  }
  const std::size_t n = static_cast<std::size_t>(st.width) * st.height;
  if (fs::exists(dir / "mask.pgm")) {
    const FloatImage m = read_pgm(dir / "mask.pgm");
    if (m.width != st.width || m.height != st.height) throw InputError("io", "mask size differs from the images");
    st.mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) st.mask[i] = m.data[i] > 0.5f;
  } else {
    st.mask.assign(n, 0);
    for (const auto& img : st.images)
      for (std::size_t i = 0; i < n; ++i)
        if (img[i] > 0.0) st.mask[i] = 1;
  }
  for (auto& img : st.images)
    for (std::size_t i = 0; i < n; ++i) {
      if (!(img[i] >= 0.0) || !std::isfinite(img[i])) img[i] = 0.0;
      if (!st.mask[i]) img[i] = 0.0;
    }
  if (fs::exists(dir / "lights.csv")) {
    st.lights = read_lights_csv(dir / "lights.csv");
    if (st.lights.size() != st.images.size()) st.lights.clear();
  }
  return st;
}

}  // namespace hemips::io
