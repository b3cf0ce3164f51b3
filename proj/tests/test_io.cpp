#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "hemips/error.hpp"
#include "hemips/io.hpp"

using namespace hemips;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hemips_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

io::FloatImage ramp(int w, int h, int ch) {
  io::FloatImage img{w, h, ch, {}};
  for (int i = 0; i < w * h * ch; ++i) img.data.push_back(0.25f * static_cast<float>(i) - 1.5f);
  return img;
}

std::uint32_t swap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

}  // namespace

TEST_CASE("pfm round trip preserves values and row order") {
  const fs::path dir = scratch("pfm");
  for (int ch : {1, 3}) {
    const auto img = ramp(5, 3, ch);
    io::write_pfm(dir / "a.pfm", img);
    const auto back = io::read_pfm(dir / "a.pfm");
    CHECK(back.width == 5);
    CHECK(back.height == 3);
    CHECK(back.channels == ch);
    CHECK(back.data == img.data);
  }
}

TEST_CASE("big-endian pfm written by hand reads back top row first") {
  const fs::path p = scratch("pfm_be") / "b.pfm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "Pf\n2 2\n1.0\n";
    // file rows run bottom to top: bottom row (3, 4), top row (1, 2)
    for (float v : {3.0f, 4.0f, 1.0f, 2.0f}) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = swap32(bits);
      out.write(reinterpret_cast<const char*>(&bits), 4);
    }
  }
  const auto img = io::read_pfm(p);
  CHECK(img.data == std::vector<float>{1.0f, 2.0f, 3.0f, 4.0f});
}

TEST_CASE("truncated pfm is an input error") {
  const fs::path p = scratch("pfm_bad") / "c.pfm";
  {
    std::ofstream out(p, std::ios::binary);
    out << "Pf\n4 4\n-1.0\n";
    out.write("\0\0\0\0", 4);
  }
  CHECK_THROWS_AS(io::read_pfm(p), InputError);
}

TEST_CASE("pgm reads 8 and 16 bit and plain files scaled to unit range") {
  const fs::path dir = scratch("pgm");
  {
    std::ofstream out(dir / "a.pgm", std::ios::binary);
    out << "P5\n2 1\n255\n";
    out.put(0).put(static_cast<char>(255));
  }
  CHECK(io::read_pgm(dir / "a.pgm").data == std::vector<float>{0.0f, 1.0f});
  {
    std::ofstream out(dir / "b.pgm", std::ios::binary);
    out << "P5\n2 1\n65535\n";
    // big-endian 0x8000 and 0xffff
    out.put(static_cast<char>(0x80)).put(0).put(static_cast<char>(0xff)).put(static_cast<char>(0xff));
  }
  const auto b = io::read_pgm(dir / "b.pgm");
  CHECK(b.data[0] == doctest::Approx(32768.0 / 65535.0));
  CHECK(b.data[1] == doctest::Approx(1.0));
  {
    std::ofstream out(dir / "c.pgm");
    out << "P2\n# comment\n3 1\n10\n0 5 10\n";
  }
  CHECK(io::read_pgm(dir / "c.pgm").data == std::vector<float>{0.0f, 0.5f, 1.0f});

  io::FloatImage m{3, 1, 1, {0.0f, 1.0f, 1.0f}};
  io::write_pgm(dir / "m.pgm", m);
  CHECK(io::read_pgm(dir / "m.pgm").data == m.data);
}

TEST_CASE("colour images become luminance") {
  const fs::path dir = scratch("gray");
  io::write_pfm(dir / "rgb.pfm", io::FloatImage{1, 1, 3, {1.0f, 0.0f, 0.0f}});
  int w = 0, h = 0;
  const auto g = io::read_gray(dir / "rgb.pfm", w, h);
  CHECK(w == 1);
  CHECK(h == 1);
  CHECK(g[0] == doctest::Approx(0.299));
}

TEST_CASE("lights csv round trip") {
  const fs::path p = scratch("lights") / "lights.csv";
  std::vector<sh::Direction> lights{sh::Direction(0, 0, 1), sh::Direction::normalized(1, 2, -3)};
  io::write_lights_csv(p, lights);
  const auto back = io::read_lights_csv(p);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK((back[i].vec() - lights[i].vec()).norm() < 1e-12);
}

TEST_CASE("stack round trip keeps images mask and lights") {
  const fs::path dir = scratch("stack");
  render::ImageStack st;
  st.width = 4;
  st.height = 3;
  st.mask = {0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 0};
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 4; ++k) {
    std::vector<double> img(12);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = st.mask[i] ? u(rng) : 0.0;
    st.images.push_back(img);
    st.lights.push_back(sh::Direction::from_spherical(0.3 * k + 0.1, 1.1 * k));
  }
  const auto names = io::write_stack(dir, st);
  CHECK(names.size() == 4);
  const auto back = io::read_stack(dir);
  CHECK(back.width == 4);
  CHECK(back.height == 3);
  CHECK(back.mask == st.mask);
  REQUIRE(back.images.size() == 4);
  REQUIRE(back.lights.size() == 4);
  for (int k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < 12; ++i) CHECK(back.images[k][i] == doctest::Approx(st.images[k][i]).epsilon(1e-6));
}

TEST_CASE("stack without mask uses pixels lit anywhere and ignores truth files") {
  const fs::path dir = scratch("stack_nomask");
  io::write_pfm(dir / "a.pfm", io::FloatImage{2, 1, 1, {0.0f, 0.5f}});
  io::write_pfm(dir / "b.pfm", io::FloatImage{2, 1, 1, {0.0f, 0.25f}});
  io::write_pfm(dir / "c.pfm", io::FloatImage{2, 1, 1, {0.0f, 0.0f}});
  io::write_pfm(dir / "normals_truth.pfm", io::FloatImage{2, 1, 3, {0, 0, 1, 0, 0, 1}});
  const auto st = io::read_stack(dir);
  CHECK(st.images.size() == 3);
  CHECK(st.mask == std::vector<std::uint8_t>{0, 1});
  CHECK(st.lights.empty());
}

TEST_CASE("mismatched image sizes and empty directories are input errors") {
  const fs::path dir = scratch("stack_bad");
  CHECK_THROWS_AS(io::read_stack(dir), InputError);
  io::write_pfm(dir / "a.pfm", io::FloatImage{2, 1, 1, {0.0f, 0.5f}});
  io::write_pfm(dir / "b.pfm", io::FloatImage{1, 2, 1, {0.0f, 0.5f}});
  CHECK_THROWS_AS(io::read_stack(dir), InputError);
  CHECK_THROWS_AS(io::read_stack(dir / "missing"), InputError);
}
