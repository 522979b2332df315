#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvf/observation.hpp"

// Minimal PNG writer/reader. The writer emits uncompressed (stored) deflate
// blocks, which keeps the output byte-deterministic with no codec dependency;
// the reader parses exactly the subset the writer emits.

namespace tvf {
namespace png {

inline std::uint32_t crc32(const std::uint8_t* data, std::size_t n, std::uint32_t crc = 0xffffffffu) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1u) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    for (std::size_t i = 0; i < n; ++i) {
        crc = table[(crc ^ data[i]) & 0xffu] ^ (crc >> 8);
    }
    return crc;
}

inline std::uint32_t adler32(const std::vector<std::uint8_t>& data) {
    std::uint32_t a = 1, b = 0;
    for (std::uint8_t byte : data) {
        a = (a + byte) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_chunk(std::vector<std::uint8_t>& out, const char type[4], const std::vector<std::uint8_t>& data) {
    put_be32(out, static_cast<std::uint32_t>(data.size()));
    std::vector<std::uint8_t> body(type, type + 4);
    body.insert(body.end(), data.begin(), data.end());
    out.insert(out.end(), body.begin(), body.end());
    put_be32(out, crc32(body.data(), body.size()) ^ 0xffffffffu);
}

inline std::vector<std::uint8_t> zlib_stored(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t pos = 0;
    do {
        const std::size_t len = std::min<std::size_t>(65535, raw.size() - pos);
        const bool final = pos + len == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<std::uint8_t>(len & 0xff));
        z.push_back(static_cast<std::uint8_t>(len >> 8));
        z.push_back(static_cast<std::uint8_t>(~len & 0xff));
        z.push_back(static_cast<std::uint8_t>((~len >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + len);
        pos += len;
    } while (pos < raw.size());
    put_be32(z, adler32(raw));
    return z;
}

inline std::vector<std::uint8_t> encode(int width, int height, int bit_depth, int color_type,
                                        const std::vector<std::uint8_t>& raw_scanlines) {
    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<std::uint8_t> ihdr;
    put_be32(ihdr, static_cast<std::uint32_t>(width));
    put_be32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(static_cast<std::uint8_t>(bit_depth));
    ihdr.push_back(static_cast<std::uint8_t>(color_type));
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_stored(raw_scanlines));
    append_chunk(out, "IEND", {});
    return out;
}

struct Decoded {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    int color_type = 0;
    std::vector<std::uint8_t> scanlines;  // filter bytes stripped
};

inline std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) | p[3];
}

inline Decoded decode(const std::vector<std::uint8_t>& file) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (file.size() < 8 || std::memcmp(file.data(), sig, 8) != 0) {
        throw std::runtime_error("image_io.decode: not a PNG file");
    }
    Decoded dec;
    std::vector<std::uint8_t> zdata;
    std::size_t pos = 8;
    while (pos + 8 <= file.size()) {
        const std::uint32_t len = read_be32(&file[pos]);
        const std::string type(reinterpret_cast<const char*>(&file[pos + 4]), 4);
        if (pos + 12 + len > file.size()) {
            throw std::runtime_error("image_io.decode: truncated chunk");
        }
        const std::uint8_t* data = &file[pos + 8];
        if (type == "IHDR") {
            dec.width = static_cast<int>(read_be32(data));
            dec.height = static_cast<int>(read_be32(data + 4));
            dec.bit_depth = data[8];
            dec.color_type = data[9];
            if (data[12] != 0) {
                throw std::runtime_error("image_io.decode: interlaced PNG unsupported");
            }
        } else if (type == "IDAT") {
            zdata.insert(zdata.end(), data, data + len);
        } else if (type == "IEND") {
            break;
        }
        pos += 12 + len;
    }
    if (zdata.size() < 6) {
        throw std::runtime_error("image_io.decode: missing IDAT");
    }
    // stored-block deflate only
    std::size_t zp = 2;
    std::vector<std::uint8_t> raw;
    for (;;) {
        if (zp >= zdata.size()) {
            throw std::runtime_error("image_io.decode: truncated deflate stream");
        }
        const std::uint8_t header = zdata[zp++];
        if ((header & 0x06u) != 0) {
            throw std::runtime_error("image_io.decode: compressed deflate blocks unsupported");
        }
        const std::size_t len = zdata[zp] | (std::size_t(zdata[zp + 1]) << 8);
        zp += 4;
        raw.insert(raw.end(), zdata.begin() + zp, zdata.begin() + zp + len);
        zp += len;
        if (header & 0x01u) break;
    }
    const int bpp = dec.color_type == 2 ? 3 : 2;  // rgb8 or gray16
    const std::size_t stride = static_cast<std::size_t>(dec.width) * bpp;
    dec.scanlines.reserve(stride * dec.height);
    std::size_t rp = 0;
    for (int row = 0; row < dec.height; ++row) {
        if (raw[rp] != 0) {
            throw std::runtime_error("image_io.decode: filtered scanlines unsupported");
        }
        ++rp;
        dec.scanlines.insert(dec.scanlines.end(), raw.begin() + rp, raw.begin() + rp + stride);
        rp += stride;
    }
    return dec;
}

}  // namespace png

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("image_io.write_file: cannot open " + path);
    }
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("image_io.read_file: cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// RGB channels as 8-bit truecolor PNG.
inline std::vector<std::uint8_t> encode_rgb8(const Observation& o) {
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(o.rows()) * (1 + 3 * o.cols()));
    for (int u = 0; u < o.rows(); ++u) {
        raw.push_back(0);  // filter: none
        for (int v = 0; v < o.cols(); ++v) {
            for (int c = 0; c < 3; ++c) {
                const double x = std::clamp(o.at(u, v, c), 0.0, 1.0);
                raw.push_back(static_cast<std::uint8_t>(std::llround(x * 255.0)));
            }
        }
    }
    return png::encode(o.cols(), o.rows(), 8, 2, raw);
}

// Height channel as 16-bit grayscale PNG, millimeter-scaled.
inline std::vector<std::uint8_t> encode_height16(const Observation& o) {
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(o.rows()) * (1 + 2 * o.cols()));
    for (int u = 0; u < o.rows(); ++u) {
        raw.push_back(0);
        for (int v = 0; v < o.cols(); ++v) {
            const long long mm = std::clamp<long long>(std::llround(o.height(u, v) * 1000.0), 0, 65535);
            raw.push_back(static_cast<std::uint8_t>(mm >> 8));
            raw.push_back(static_cast<std::uint8_t>(mm & 0xff));
        }
    }
    return png::encode(o.cols(), o.rows(), 16, 0, raw);
}

inline void write_observation_png(const Observation& o, const std::string& rgb_path, const std::string& height_path) {
    write_file(rgb_path, encode_rgb8(o));
    write_file(height_path, encode_height16(o));
}

// Reassemble an observation from the rgb + height pair written above.
inline Observation read_observation_png(const std::string& rgb_path, const std::string& height_path) {
    const auto rgb = png::decode(read_file(rgb_path));
    const auto hgt = png::decode(read_file(height_path));
    if (rgb.color_type != 2 || rgb.bit_depth != 8) {
        throw std::runtime_error("image_io.read_observation_png: expected 8-bit RGB: " + rgb_path);
    }
    if (hgt.color_type != 0 || hgt.bit_depth != 16) {
        throw std::runtime_error("image_io.read_observation_png: expected 16-bit grayscale: " + height_path);
    }
    if (rgb.width != hgt.width || rgb.height != hgt.height) {
        throw std::runtime_error("image_io.read_observation_png: rgb/height size mismatch");
    }
    Observation o(rgb.height, rgb.width);
    for (int u = 0; u < o.rows(); ++u) {
        for (int v = 0; v < o.cols(); ++v) {
            const std::size_t ri = (static_cast<std::size_t>(u) * rgb.width + v) * 3;
            for (int c = 0; c < 3; ++c) {
                o.at(u, v, c) = rgb.scanlines[ri + c] / 255.0;
            }
            const std::size_t hi = (static_cast<std::size_t>(u) * hgt.width + v) * 2;
            const unsigned mm = (unsigned(hgt.scanlines[hi]) << 8) | hgt.scanlines[hi + 1];
            o.height(u, v) = mm / 1000.0;
        }
    }
    return o;
}

}  // namespace tvf
