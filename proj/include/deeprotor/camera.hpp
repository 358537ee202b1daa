#pragma once

#include <string>
#include <vector>

#include "deeprotor/arena.hpp"
#include "deeprotor/geometry.hpp"

namespace deeprotor {

struct CameraConfig {
    int width = 84;
    int height = 84;
    double hfov_deg = 90.0;
    double max_range = 40.0;
    double mount_height = 0.0;  // offset above the vehicle center
};

// Per-pixel Euclidean distance along each camera ray, row-major, top-left
// origin.  Values are in (0, max_range].
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double at(int u, int v) const { return data[static_cast<size_t>(v) * width + u]; }
};

// Depth scaled into [0, 1]; the network input.
struct ObservationTensor {
    int width = 0;
    int height = 0;
    std::vector<float> data;
};

struct CameraPose {
    double x = 0.0, y = 0.0, z = 0.0;
    double yaw_deg = 0.0;
};

// Unit direction of the pinhole ray through the center of pixel (u, v).
// Pixel (0, 0) is the top-left of the image; the optical axis points along
// the pose yaw.  Square pixels, vertical FOV follows from aspect ratio.
Vec3 pixel_ray(const CameraConfig& config, double yaw_deg, int u, int v);

// Ray trace every pixel.  Pure function of its inputs; identical inputs give
// a bit-identical image.
DepthImage render_depth(const Arena& arena, const CameraPose& pose, const CameraConfig& config);

// out[i] = img[i] / max_range, clipped to [0, 1].
ObservationTensor normalize_depth(const DepthImage& img, double max_range);

// P2 (ASCII) PGM, maxval 255, value = round(255 * normalized depth).
std::string depth_to_pgm(const DepthImage& img, double max_range);

void write_pgm_file(const std::string& path, const DepthImage& img, double max_range);

}  // namespace deeprotor
