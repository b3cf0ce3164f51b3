#pragma once

// File formats: PFM and PGM images, light lists and image-stack
// directories.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hemips/render.hpp"
#include "hemips/sh_core.hpp"

namespace hemips::io {

namespace fs = std::filesystem;

/// Row-major, row 0 on top; `channels` values per pixel.
struct FloatImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;
};

/// Little-endian PFM ("Pf" or "PF"), rows stored bottom to top.
void write_pfm(const fs::path& path, const FloatImage& img);
/// Accepts either endianness. Throws InputError on malformed files.
FloatImage read_pfm(const fs::path& path);

/// Binary PGM (P5), 8 or 16 bit, scaled to [0, 1]; plain P2 is accepted too.
FloatImage read_pgm(const fs::path& path);
/// 8-bit P5 from values in [0, 1].
void write_pgm(const fs::path& path, const FloatImage& img);

/// Rec. 601 luma of linear RGB.
inline double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

/// One image as gray: PFM or PGM by extension; colour images go through
/// luminance().
std::vector<double> read_gray(const fs::path& path, int& width, int& height);

/// "lx,ly,lz" header, then one light per line.
void write_lights_csv(const fs::path& path, const std::vector<sh::Direction>& lights);
std::vector<sh::Direction> read_lights_csv(const fs::path& path);

/// Per-pixel normals as a 3-channel PFM; masked-out pixels are zero.
FloatImage normals_image(int width, int height, const std::vector<Eigen::Vector3d>& normals);
std::vector<Eigen::Vector3d> normals_from_image(const FloatImage& img);

/// Writes image_NNN.pfm, mask.pgm and, when lights are known, lights.csv.
/// Returns the image file names in order.
std::vector<std::string> write_stack(const fs::path& dir, const render::ImageStack& stack);

/// Reads the images listed in scene.json when present, otherwise every
/// .pfm/.pgm file except mask and truth files, in name order. The mask is
/// mask.pgm when present, otherwise pixels lit in at least one image.
/// Throws InputError for an unreadable directory or mismatched sizes.
render::ImageStack read_stack(const fs::path& dir);

}  // namespace hemips::io
