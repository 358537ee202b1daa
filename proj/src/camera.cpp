#include "deeprotor/camera.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace deeprotor {

Vec3 pixel_ray(const CameraConfig& config, double yaw_deg, int u, int v) {
    // Focal length in pixel units from the horizontal FOV.
    const double focal = (config.width / 2.0) / std::tan(deg_to_rad(config.hfov_deg) / 2.0);
    const double lateral = config.width / 2.0 - (u + 0.5);   // +left
    const double vertical = config.height / 2.0 - (v + 0.5);  // +up
    // Camera frame (forward, left, up) -> world via the yaw rotation.
    const double c = cos_deg(yaw_deg), s = sin_deg(yaw_deg);
    const Vec3 dir{focal * c - lateral * s, focal * s + lateral * c, vertical};
    return dir.normalized();
}

DepthImage render_depth(const Arena& arena, const CameraPose& pose, const CameraConfig& config) {
    if (config.width < 2 || config.height < 2) throw std::invalid_argument("camera: resolution must be >= 2x2");
    if (!(config.hfov_deg > 0.0 && config.hfov_deg < 180.0))
        throw std::invalid_argument("camera: hfov must be in (0, 180)");
    if (!(config.max_range > 0.0)) throw std::invalid_argument("camera: max_range must be > 0");

    DepthImage img;
    img.width = config.width;
    img.height = config.height;
    img.data.resize(static_cast<size_t>(config.width) * config.height);
    const Vec3 origin{pose.x, pose.y, pose.z + config.mount_height};
    size_t i = 0;
    for (int v = 0; v < config.height; ++v) {
        for (int u = 0; u < config.width; ++u, ++i) {
            const Vec3 dir = pixel_ray(config, pose.yaw_deg, u, v);
            img.data[i] = ray_intersect(arena, origin, dir, config.max_range);
        }
    }
    return img;
}

ObservationTensor normalize_depth(const DepthImage& img, double max_range) {
    ObservationTensor out;
    out.width = img.width;
    out.height = img.height;
    out.data.resize(img.data.size());
    for (size_t i = 0; i < img.data.size(); ++i) {
        double v = img.data[i] / max_range;
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        out.data[i] = static_cast<float>(v);
    }
    return out;
}

std::string depth_to_pgm(const DepthImage& img, double max_range) {
    const ObservationTensor norm = normalize_depth(img, max_range);
    std::string out = "P2\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    for (int v = 0; v < img.height; ++v) {
        for (int u = 0; u < img.width; ++u) {
            const int value = static_cast<int>(std::lround(255.0 * norm.data[static_cast<size_t>(v) * img.width + u]));
            out += std::to_string(value);
            out += (u + 1 == img.width) ? '\n' : ' ';
        }
    }
    return out;
}

void write_pgm_file(const std::string& path, const DepthImage& img, double max_range) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << depth_to_pgm(img, max_range);
}

}  // namespace deeprotor
