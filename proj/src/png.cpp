#include "dsmote/png.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "dsmote/error.hpp"

namespace dsmote {

namespace {

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<uint8_t>(v & 0xff));
}

void put_chunk(std::vector<uint8_t>& out, const char type[4],
               const std::vector<uint8_t>& payload) {
  put_u32_be(out, static_cast<uint32_t>(payload.size()));
  const size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + payload.size()));
  put_u32_be(out, static_cast<uint32_t>(crc));
}

}  // namespace

void write_png(const std::string& path, int width, int height, int channels,
               const std::vector<uint8_t>& pixels) {
  if (width < 1 || height < 1 || (channels != 1 && channels != 3))
    throw DataError("write_png: unsupported geometry");
  if (pixels.size() != static_cast<size_t>(width) * height * channels)
    throw DataError("write_png: pixel buffer size mismatch");

  // Scanlines with filter byte 0.
  const size_t stride = static_cast<size_t>(width) * channels;
  std::vector<uint8_t> raw((stride + 1) * height);
  for (int y = 0; y < height; ++y) {
    raw[y * (stride + 1)] = 0;
    std::memcpy(raw.data() + y * (stride + 1) + 1, pixels.data() + y * stride, stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> deflated(bound);
  if (compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()),
                Z_BEST_SPEED) != Z_OK)
    throw DataError("write_png: deflate failed");
  deflated.resize(bound);

  std::vector<uint8_t> file = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  std::vector<uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<uint32_t>(width));
  put_u32_be(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);                                  // bit depth
  ihdr.push_back(channels == 1 ? 0 : 2);              // gray / truecolor
  ihdr.push_back(0);                                  // compression
  ihdr.push_back(0);                                  // filter
  ihdr.push_back(0);                                  // no interlace
  put_chunk(file, "IHDR", ihdr);
  put_chunk(file, "IDAT", deflated);
  put_chunk(file, "IEND", {});

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError(path + ": cannot open for writing");
  os.write(reinterpret_cast<const char*>(file.data()),
           static_cast<std::streamsize>(file.size()));
  if (!os) throw DataError(path + ": write failed");
}

}  // namespace dsmote
