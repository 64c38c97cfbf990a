// Copyright 2026 The tinyod authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "tinyod/raster.hpp"

namespace tinyod {

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open file: " + path);
    return f;
}

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
    (void)png;
    throw FormatError(std::string("png: ") + msg);
}
inline void png_warn_fn(png_structp, png_const_charp) {}

// Reads raw 8-bit rows; gray stays 1 channel, everything else lands on RGB.
// 16-bit files keep their precision until the [0,1] scale at the end.
inline void read_png(const std::string& path, std::vector<uint16_t>& out, int& w, int& h,
                     int& channels, int& bit_depth) {
    FilePtr f = open_file(path, "rb");
    png_byte sig[8] = {};
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw FormatError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
    if (!png) throw InternalError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw InternalError("png_create_info_struct failed");
    }
    try {
        png_init_io(png, f.get());
        png_set_sig_bytes(png, 8);
        png_read_info(png, info);

        int color = png_get_color_type(png, info);
        bit_depth = png_get_bit_depth(png, info);
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (color == PNG_COLOR_TYPE_PALETTE && (color & PNG_COLOR_MASK_ALPHA)) png_set_strip_alpha(png);
        png_set_interlace_handling(png);
        png_read_update_info(png, info);

        w = static_cast<int>(png_get_image_width(png, info));
        h = static_cast<int>(png_get_image_height(png, info));
        bit_depth = png_get_bit_depth(png, info);
        channels = png_get_channels(png, info);
        if (channels == 4) {  // strip_alpha may be deferred on some paths
            png_set_strip_alpha(png);
            png_read_update_info(png, info);
            channels = png_get_channels(png, info);
        }
        if (channels != 1 && channels != 3)
            throw FormatError("png: unsupported channel count in " + path);

        size_t row_bytes = png_get_rowbytes(png, info);
        std::vector<png_byte> raw(static_cast<size_t>(h) * row_bytes);
        std::vector<png_bytep> rows(h);
        for (int y = 0; y < h; ++y) rows[y] = raw.data() + static_cast<size_t>(y) * row_bytes;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);

        out.resize(static_cast<size_t>(w) * h * channels);
        if (bit_depth == 16) {
            for (size_t i = 0; i < out.size(); ++i)
                out[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
        } else {
            for (size_t i = 0; i < out.size(); ++i) out[i] = raw[i];
        }
        png_destroy_read_struct(&png, &info, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
}

inline void write_png(const std::string& path, const uint16_t* data, int w, int h, int channels,
                      int bit_depth, const png_color* palette = nullptr, int palette_size = 0) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warn_fn);
    if (!png) throw InternalError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw InternalError("png_create_info_struct failed");
    }
    try {
        png_init_io(png, f.get());
        png_set_compression_level(png, 6);
        int color = palette         ? PNG_COLOR_TYPE_PALETTE
                    : channels == 1 ? PNG_COLOR_TYPE_GRAY
                                    : PNG_COLOR_TYPE_RGB;
        png_set_IHDR(png, info, w, h, bit_depth, color, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        if (palette) png_set_PLTE(png, info, palette, palette_size);
        png_write_info(png, info);

        size_t row_samples = static_cast<size_t>(w) * channels;
        std::vector<png_byte> row(row_samples * (bit_depth == 16 ? 2 : 1));
        for (int y = 0; y < h; ++y) {
            const uint16_t* src = data + static_cast<size_t>(y) * row_samples;
            if (bit_depth == 16) {
                for (size_t i = 0; i < row_samples; ++i) {
                    row[2 * i] = static_cast<png_byte>(src[i] >> 8);
                    row[2 * i + 1] = static_cast<png_byte>(src[i] & 0xff);
                }
            } else {
                for (size_t i = 0; i < row_samples; ++i) row[i] = static_cast<png_byte>(src[i]);
            }
            png_write_row(png, row.data());
        }
        png_write_end(png, info);
        png_destroy_write_struct(&png, &info);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
}

inline int pnm_next_value(std::FILE* f, const std::string& path) {
    int c;
    for (;;) {
        c = std::fgetc(f);
        if (c == '#') {
            while (c != '\n' && c != EOF) c = std::fgetc(f);
        } else if (!std::isspace(c)) {
            break;
        }
    }
    if (c == EOF) throw FormatError("pnm: truncated header in " + path);
    int v = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        any = true;
        c = std::fgetc(f);
    }
    if (!any) throw FormatError("pnm: malformed header in " + path);
    return v;
}

inline Raster read_pnm(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    int m0 = std::fgetc(f.get());
    int m1 = std::fgetc(f.get());
    if (m0 != 'P' || (m1 != '2' && m1 != '3' && m1 != '5' && m1 != '6'))
        throw FormatError("pnm: unsupported magic in " + path);
    bool ascii = (m1 == '2' || m1 == '3');
    int channels = (m1 == '3' || m1 == '6') ? 3 : 1;
    int w = pnm_next_value(f.get(), path);
    int h = pnm_next_value(f.get(), path);
    int maxval = pnm_next_value(f.get(), path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw FormatError("pnm: bad dimensions in " + path);

    Raster img(w, h, channels);
    size_t n = img.data.size();
    if (ascii) {
        for (size_t i = 0; i < n; ++i)
            img.data[i] = static_cast<double>(pnm_next_value(f.get(), path)) / maxval;
    } else {
        // Binary payload starts after exactly one whitespace byte (already
        // consumed by the maxval scan).
        if (maxval < 256) {
            std::vector<uint8_t> buf(n);
            if (std::fread(buf.data(), 1, n, f.get()) != n)
                throw FormatError("pnm: truncated pixel data in " + path);
            for (size_t i = 0; i < n; ++i) img.data[i] = static_cast<double>(buf[i]) / maxval;
        } else {
            std::vector<uint8_t> buf(2 * n);
            if (std::fread(buf.data(), 1, 2 * n, f.get()) != 2 * n)
                throw FormatError("pnm: truncated pixel data in " + path);
            for (size_t i = 0; i < n; ++i)
                img.data[i] = static_cast<double>((buf[2 * i] << 8) | buf[2 * i + 1]) / maxval;
        }
    }
    return img;
}

}  // namespace detail

// Loads a PNG or PGM/PPM image; 8-bit samples map to [0,1], channels preserved.
inline Raster load_image(const std::string& path) {
    {
        detail::FilePtr probe = detail::open_file(path, "rb");
        unsigned char magic[2] = {};
        size_t got = std::fread(magic, 1, 2, probe.get());
        if (got == 2 && magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '6')
            return detail::read_pnm(path);
    }
    std::vector<uint16_t> raw;
    int w = 0, h = 0, channels = 0, depth = 0;
    detail::read_png(path, raw, w, h, channels, depth);
    Raster img(w, h, channels);
    double scale = depth == 16 ? 65535.0 : 255.0;
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<double>(raw[i]) / scale;
    return img;
}

// 8-bit PNG from a [0,1] raster (gray or RGB).
inline void save_png(const std::string& path, const Raster& img) {
    std::vector<uint16_t> raw(img.data.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double v = std::clamp(img.data[i], 0.0, 1.0);
        raw[i] = static_cast<uint16_t>(std::lround(v * 255.0));
    }
    detail::write_png(path, raw.data(), img.width, img.height, img.channels, 8);
}

// 16-bit grayscale PNG from a [0,1] grid. Used for probability and edge dumps.
inline void save_png16(const std::string& path, const Grid<double>& values) {
    std::vector<uint16_t> raw(values.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double v = std::clamp(values.data[i], 0.0, 1.0);
        raw[i] = static_cast<uint16_t>(std::lround(v * 65535.0));
    }
    detail::write_png(path, raw.data(), values.width, values.height, 1, 16);
}

// Color-indexed PNG of an integer label map, for superpixel debug dumps.
inline void save_png_indexed(const std::string& path, const Grid<int>& labels) {
    png_color palette[256];
    for (int i = 0; i < 256; ++i) {
        // Golden-ratio hue walk gives visually distinct neighbors.
        double hue = std::fmod(i * 0.61803398875, 1.0) * 6.0;
        double f = hue - std::floor(hue);
        double comps[3] = {0, 0, 0};
        int sector = static_cast<int>(hue) % 6;
        double v = 0.95, s = i == 0 ? 0.0 : 0.65;
        double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
        switch (sector) {
            case 0: comps[0] = v; comps[1] = t; comps[2] = p; break;
            case 1: comps[0] = q; comps[1] = v; comps[2] = p; break;
            case 2: comps[0] = p; comps[1] = v; comps[2] = t; break;
            case 3: comps[0] = p; comps[1] = q; comps[2] = v; break;
            case 4: comps[0] = t; comps[1] = p; comps[2] = v; break;
            default: comps[0] = v; comps[1] = p; comps[2] = q; break;
        }
        palette[i].red = static_cast<png_byte>(comps[0] * 255);
        palette[i].green = static_cast<png_byte>(comps[1] * 255);
        palette[i].blue = static_cast<png_byte>(comps[2] * 255);
    }
    std::vector<uint16_t> raw(labels.size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<uint16_t>(labels.data[i] & 0xff);
    detail::write_png(path, raw.data(), labels.width, labels.height, 1, 8, palette, 256);
}

// Masks travel as plain 8-bit grayscale PNG holding raw label values
// (0=road, 1=obstacle, 2=non-road, 255=ignore).
inline Mask load_mask(const std::string& path) {
    std::vector<uint16_t> raw;
    int w = 0, h = 0, channels = 0, depth = 0;
    detail::read_png(path, raw, w, h, channels, depth);
    if (channels != 1 || depth != 8) throw FormatError("mask must be 8-bit grayscale: " + path);
    Mask m(w, h);
    for (size_t i = 0; i < raw.size(); ++i) {
        uint8_t v = static_cast<uint8_t>(raw[i]);
        if (!label::known(v))
            throw FormatError("mask label " + std::to_string(v) + " outside palette: " + path);
        m.labels[i] = v;
    }
    return m;
}

inline void save_mask(const std::string& path, const Mask& m) {
    std::vector<uint16_t> raw(m.labels.size());
    for (size_t i = 0; i < raw.size(); ++i) raw[i] = m.labels[i];
    detail::write_png(path, raw.data(), m.width, m.height, 1, 8);
}

}  // namespace tinyod
