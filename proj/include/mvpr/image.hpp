#pragma once

#include <cstdint>
#include <vector>

namespace mvpr {

// Binary silhouette mask, row-major, one byte per pixel (0 or 1).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

    bool at(int x, int y) const { return values[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { values[static_cast<size_t>(y) * width + x] = v ? 1 : 0; }

    long count() const {
        long n = 0;
        for (std::uint8_t v : values) n += v != 0;
        return n;
    }
    bool empty_mask() const { return count() == 0; }
};

// Soft silhouette, per-pixel coverage in [0,1], row-major.
struct SilhouetteImage {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    SilhouetteImage() = default;
    SilhouetteImage(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0.0) {}

    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
};

}  // namespace mvpr
