#pragma once

#include <filesystem>

#include "evspec/types.hpp"

namespace evspec {

// Thrown on malformed or out-of-contract input files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Event CSV: header "t_us,x,y,p" preceded by a geometry comment line
// "# geometry,<width>,<height>", then one integer row per event.
EventStream read_events(const std::filesystem::path& path);
void write_events(const EventStream& stream, const std::filesystem::path& path);

// PGM (P5, maxval 255) for 8-bit gray and label maps.
ImageGray read_pgm(const std::filesystem::path& path);
void write_pgm(const ImageGray& image, const std::filesystem::path& path);

// PPM (P6, maxval 255).
ImageRGB read_ppm(const std::filesystem::path& path);
void write_ppm(const ImageRGB& image, const std::filesystem::path& path);

// PFM, single channel ("Pf"); scale sign encodes endianness per the PFM
// convention. Rows are stored bottom-up in the file.
ImageFloat read_pfm(const std::filesystem::path& path);
void write_pfm(const ImageFloat& image, const std::filesystem::path& path);

// Whitespace-separated XYZ text, one point per line, 9 significant digits.
PointCloud read_pointcloud(const std::filesystem::path& path);
void write_pointcloud(const PointCloud& cloud, const std::filesystem::path& path);

DepthMap read_depthmap(const std::filesystem::path& pfm_path, const std::filesystem::path& mask_path);
void write_depthmap(const DepthMap& depth, const std::filesystem::path& pfm_path,
                    const std::filesystem::path& mask_path);

}  // namespace evspec
