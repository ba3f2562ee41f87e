#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "usdegrade/image.hpp"

namespace usdegrade {

class IoError : public std::runtime_error {
public:
    IoError(const std::filesystem::path& path, const std::string& reason)
        : std::runtime_error(path.string() + ": " + reason) {}
};

/// round(clip(v) * 255), half-up.
inline std::uint8_t to_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::floor(clamp_unit(v) * 255.0 + 0.5));
}

namespace detail {

inline std::string lower_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

inline GrayImage from_bytes(std::size_t h, std::size_t w, const std::vector<std::uint8_t>& bytes) {
    std::vector<double> values(bytes.size());
    std::transform(bytes.begin(), bytes.end(), values.begin(),
                   [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
    return GrayImage(h, w, std::move(values));
}

inline void skip_pnm_space(std::istream& in) {
    while (true) {
        const int ch = in.peek();
        if (ch == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (ch != EOF && std::isspace(ch)) {
            in.get();
        } else {
            return;
        }
    }
}

inline GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5") throw IoError(path, "unsupported format (only binary PGM 'P5' is read)");
    std::size_t w = 0, h = 0;
    unsigned maxval = 0;
    skip_pnm_space(in);
    in >> w;
    skip_pnm_space(in);
    in >> h;
    skip_pnm_space(in);
    in >> maxval;
    if (!in || w == 0 || h == 0) throw IoError(path, "malformed PGM header");
    if (maxval != 255) throw IoError(path, "unsupported bit depth (maxval " + std::to_string(maxval) + ", need 255)");
    in.get();  // single whitespace before the raster
    std::vector<std::uint8_t> bytes(w * h);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) throw IoError(path, "truncated PGM raster");
    return from_bytes(h, w, bytes);
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<std::uint8_t> bytes(img.size());
    std::transform(img.values().begin(), img.values().end(), bytes.begin(), to_byte);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path, "write failed");
}

inline GrayImage load_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError(path, std::string("cannot decode PNG: ") + image.message);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw IoError(path, "unsupported bit depth 16 (need 8-bit)");
    }
    const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = colour ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const std::size_t w = image.width;
    const std::size_t h = image.height;
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
        throw IoError(path, std::string("cannot decode PNG: ") + image.message);
    }
    if (!colour) return from_bytes(h, w, raw);

    std::vector<double> values(w * h);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint8_t* px = raw.data() + 3 * i;
        values[i] = (0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]) / 255.0;
    }
    return GrayImage(h, w, std::move(values));
}

inline void save_png(const GrayImage& img, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes(img.size());
    std::transform(img.values().begin(), img.values().end(), bytes.begin(), to_byte);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, bytes.data(), 0, nullptr)) {
        throw IoError(path, std::string("cannot write PNG: ") + image.message);
    }
}

}  // namespace detail

/// Reads 8-bit grayscale PNG (colour PNGs are converted to luma) or binary PGM (P5).
/// Intensities are byte / 255.
inline GrayImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError(path, "file does not exist");
    const std::string ext = detail::lower_extension(path);
    if (ext == ".pgm") return detail::load_pgm(path);
    if (ext == ".png") return detail::load_png(path);
    throw IoError(path, "unsupported file extension '" + ext + "' (expected .png or .pgm)");
}

/// Writes 8-bit grayscale; the format follows the extension (.png or .pgm).
inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
    const std::string ext = detail::lower_extension(path);
    if (ext == ".pgm") return detail::save_pgm(img, path);
    if (ext == ".png") return detail::save_png(img, path);
    throw IoError(path, "unsupported file extension '" + ext + "' (expected .png or .pgm)");
}

inline bool is_image_file(const std::filesystem::path& p) {
    const std::string ext = detail::lower_extension(p);
    return ext == ".png" || ext == ".pgm";
}

}  // namespace usdegrade
