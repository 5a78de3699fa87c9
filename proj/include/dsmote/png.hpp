#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dsmote {

// Minimal PNG writer (zlib-deflated, filter 0). channels: 1 = grayscale,
// 3 = RGB. Rows are packed top to bottom.
void write_png(const std::string& path, int width, int height, int channels,
               const std::vector<uint8_t>& pixels);

}  // namespace dsmote
