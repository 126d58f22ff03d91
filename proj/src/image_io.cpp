#include "camfuse/image_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "camfuse/errors.hpp"

namespace camfuse {

namespace {

const std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing file: " + path);
}

std::uint32_t be32(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) |
           (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& payload) {
    push_be32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + payload.size()));
    push_be32(out, static_cast<std::uint32_t>(crc));
}

std::vector<std::uint8_t> zlib_inflate(const std::uint8_t* data, std::size_t size,
                                       std::size_t expected) {
    std::vector<std::uint8_t> out(expected);
    uLongf out_len = static_cast<uLongf>(expected);
    const int rc = ::uncompress(out.data(), &out_len, data, static_cast<uLong>(size));
    if (rc != Z_OK || out_len != expected)
        throw FormatError("PNG: corrupt or truncated pixel data");
    return out;
}

std::vector<std::uint8_t> zlib_deflate(const std::vector<std::uint8_t>& data) {
    uLongf bound = ::compressBound(static_cast<uLong>(data.size()));
    std::vector<std::uint8_t> out(bound);
    const int rc = ::compress2(out.data(), &bound, data.data(),
                               static_cast<uLong>(data.size()), Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) throw FormatError("PNG: compression failed");
    out.resize(bound);
    return out;
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

// Decoded PNG before channel mapping.
struct PngRaw {
    std::size_t height = 0, width = 0;
    std::size_t channels = 0;  // 1 (gray), 3 (rgb) or 4 (rgba)
    std::vector<std::uint8_t> pixels;
};

PngRaw decode_png(const std::vector<std::uint8_t>& bytes, const std::string& path) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0)
        throw FormatError("not a PNG file: " + path);
    std::size_t pos = 8;
    PngRaw raw;
    int bit_depth = 0, color_type = -1;
    std::vector<std::uint8_t> idat;
    bool saw_end = false;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size())
            throw FormatError("PNG: truncated chunk in " + path);
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const std::uint8_t* payload = &bytes[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw FormatError("PNG: malformed IHDR in " + path);
            raw.width = be32(payload);
            raw.height = be32(payload + 4);
            bit_depth = payload[8];
            color_type = payload[9];
            if (payload[10] != 0 || payload[11] != 0)
                throw FormatError("PNG: unsupported compression/filter method in " + path);
            if (payload[12] != 0)
                throw FormatError("PNG: interlaced images are unsupported: " + path);
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_end = true;
            break;
        }
        pos += 12 + len;
    }
    if (raw.width == 0 || raw.height == 0) throw FormatError("PNG: missing IHDR in " + path);
    if (!saw_end) throw FormatError("PNG: truncated file (no IEND): " + path);
    if (bit_depth != 8)
        throw FormatError("PNG: only 8-bit depth is supported: " + path);
    switch (color_type) {
        case 0: raw.channels = 1; break;
        case 2: raw.channels = 3; break;
        case 6: raw.channels = 4; break;
        default:
            throw FormatError("PNG: unsupported color type " + std::to_string(color_type) +
                              " in " + path);
    }
    const std::size_t stride = raw.width * raw.channels;
    const std::size_t expected = raw.height * (stride + 1);
    std::vector<std::uint8_t> lines = zlib_inflate(idat.data(), idat.size(), expected);

    raw.pixels.resize(raw.height * stride);
    const std::size_t bpp = raw.channels;
    for (std::size_t y = 0; y < raw.height; ++y) {
        const std::uint8_t filter = lines[y * (stride + 1)];
        const std::uint8_t* src = &lines[y * (stride + 1) + 1];
        std::uint8_t* dst = &raw.pixels[y * stride];
        const std::uint8_t* prev = y > 0 ? &raw.pixels[(y - 1) * stride] : nullptr;
        for (std::size_t x = 0; x < stride; ++x) {
            const int a = x >= bpp ? dst[x - bpp] : 0;
            const int b = prev ? prev[x] : 0;
            const int c = (prev && x >= bpp) ? prev[x - bpp] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default:
                    throw FormatError("PNG: invalid scanline filter in " + path);
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xFF);
        }
    }
    return raw;
}

std::vector<std::uint8_t> encode_png(std::size_t height, std::size_t width,
                                     std::size_t channels,
                                     const std::vector<std::uint8_t>& pixels) {
    std::vector<std::uint8_t> ihdr;
    push_be32(ihdr, static_cast<std::uint32_t>(width));
    push_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace

    const std::size_t stride = width * channels;
    std::vector<std::uint8_t> lines;
    lines.reserve(height * (stride + 1));
    for (std::size_t y = 0; y < height; ++y) {
        lines.push_back(0);  // filter: none
        lines.insert(lines.end(), pixels.begin() + static_cast<long>(y * stride),
                     pixels.begin() + static_cast<long>((y + 1) * stride));
    }
    std::vector<std::uint8_t> out(kPngSignature, kPngSignature + 8);
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", zlib_deflate(lines));
    push_chunk(out, "IEND", {});
    return out;
}

std::uint8_t quantize(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

}  // namespace

RgbImage load_png(const std::string& path) {
    const PngRaw raw = decode_png(read_file(path), path);
    RgbImage img;
    img.height = raw.height;
    img.width = raw.width;
    img.pixels.resize(raw.height * raw.width * 3);
    for (std::size_t p = 0; p < raw.height * raw.width; ++p) {
        const std::uint8_t* src = &raw.pixels[p * raw.channels];
        std::uint8_t* dst = &img.pixels[p * 3];
        if (raw.channels == 1) {
            dst[0] = dst[1] = dst[2] = src[0];
        } else {
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return img;
}

void save_png(const std::string& path, const RgbImage& image) {
    if (image.pixels.size() != image.height * image.width * 3)
        throw ValueError("save_png: pixel buffer does not match dimensions");
    write_file(path, encode_png(image.height, image.width, 3, image.pixels));
}

RgbImage load_ppm(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file(path);
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> std::size_t {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
            throw FormatError("PPM: malformed header in " + path);
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            ++pos;
        }
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        throw FormatError("not a binary PPM (P6) file: " + path);
    pos = 2;
    RgbImage img;
    img.width = read_int();
    img.height = read_int();
    const std::size_t maxval = read_int();
    if (maxval != 255)
        throw FormatError("PPM: only maxval 255 is supported: " + path);
    ++pos;  // single whitespace after maxval
    const std::size_t need = img.height * img.width * 3;
    if (bytes.size() < pos + need) throw FormatError("PPM: truncated pixel data in " + path);
    img.pixels.assign(bytes.begin() + static_cast<long>(pos),
                      bytes.begin() + static_cast<long>(pos + need));
    return img;
}

void save_ppm(const std::string& path, const RgbImage& image) {
    if (image.pixels.size() != image.height * image.width * 3)
        throw ValueError("save_ppm: pixel buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("failed writing file: " + path);
}

RgbImage load_rgb_file(const std::string& path) {
    const std::vector<std::uint8_t> head = read_file(path);
    if (head.size() >= 8 && std::memcmp(head.data(), kPngSignature, 8) == 0)
        return load_png(path);
    if (head.size() >= 2 && head[0] == 'P' && head[1] == '6') return load_ppm(path);
    throw FormatError("unsupported image format (expected PNG or PPM P6): " + path);
}

Tensor to_unit_tensor(const RgbImage& image) {
    Tensor out({3, image.height, image.width});
    const std::size_t hw = image.height * image.width;
    for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < 3; ++c)
            out[c * hw + p] = static_cast<double>(image.pixels[p * 3 + c]) / 255.0;
    return out;
}

RgbImage to_rgb_image(const Tensor& image_unit) {
    if (image_unit.rank() != 3 || image_unit.extent(0) != 3)
        throw ShapeError("to_rgb_image: expected [3, H, W], got " +
                         shape_to_string(image_unit.shape()));
    RgbImage img;
    img.height = image_unit.extent(1);
    img.width = image_unit.extent(2);
    const std::size_t hw = img.height * img.width;
    img.pixels.resize(hw * 3);
    for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < 3; ++c)
            img.pixels[p * 3 + c] = quantize(image_unit[c * hw + p]);
    return img;
}

Tensor load_image(const std::string& path) { return to_unit_tensor(load_rgb_file(path)); }

Tensor load_mask_png(const std::string& path) {
    const RgbImage img = load_png(path);
    Tensor mask({img.height, img.width});
    for (std::size_t p = 0; p < img.height * img.width; ++p) {
        const bool fg = img.pixels[p * 3] != 0 || img.pixels[p * 3 + 1] != 0 ||
                        img.pixels[p * 3 + 2] != 0;
        mask[p] = fg ? 1.0 : 0.0;
    }
    return mask;
}

void save_mask_png(const std::string& path, const Tensor& mask) {
    if (mask.rank() != 2)
        throw ShapeError("save_mask_png: expected rank-2 mask, got " +
                         shape_to_string(mask.shape()));
    std::vector<std::uint8_t> gray(mask.size());
    for (std::size_t p = 0; p < mask.size(); ++p) gray[p] = mask[p] != 0.0 ? 255 : 0;
    write_file(path, encode_png(mask.extent(0), mask.extent(1), 1, gray));
}

std::array<double, 3> heat_colormap(double v) {
    v = std::clamp(v, 0.0, 1.0);
    if (v <= 0.5) {
        const double t = v / 0.5;
        return {0.0, t, 1.0 - t};
    }
    const double t = (v - 0.5) / 0.5;
    return {t, 1.0 - t, 0.0};
}

RgbImage render_heatmap(const SaliencyMap& map, const Tensor& image_unit, double alpha) {
    if (image_unit.rank() != 3 || image_unit.extent(0) != 3 ||
        image_unit.extent(1) != map.height() || image_unit.extent(2) != map.width())
        throw ShapeError("render_heatmap: map/image dimensions differ");
    RgbImage img;
    img.height = map.height();
    img.width = map.width();
    const std::size_t hw = img.height * img.width;
    img.pixels.resize(hw * 3);
    for (std::size_t p = 0; p < hw; ++p) {
        const std::array<double, 3> heat = heat_colormap(map.values[p]);
        for (std::size_t c = 0; c < 3; ++c) {
            const double blended =
                alpha * heat[c] + (1.0 - alpha) * image_unit[c * hw + p];
            img.pixels[p * 3 + c] = quantize(blended);
        }
    }
    return img;
}

RgbImage render_colormap(const SaliencyMap& map) {
    RgbImage img;
    img.height = map.height();
    img.width = map.width();
    const std::size_t hw = img.height * img.width;
    img.pixels.resize(hw * 3);
    for (std::size_t p = 0; p < hw; ++p) {
        const std::array<double, 3> heat = heat_colormap(map.values[p]);
        for (std::size_t c = 0; c < 3; ++c) img.pixels[p * 3 + c] = quantize(heat[c]);
    }
    return img;
}

void save_heatmap(const std::string& path, const SaliencyMap& map,
                  const Tensor& image_unit, double alpha) {
    save_png(path, render_heatmap(map, image_unit, alpha));
}

}  // namespace camfuse
