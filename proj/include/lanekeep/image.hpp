#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lanekeep/errors.hpp"

namespace lanekeep {

// Row-major 8-bit grayscale image. Origin is the top-left corner, x grows
// rightward along columns, y grows downward along rows; the bottom row is
// nearest the vehicle.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    bool operator==(const GrayImage&) const = default;
};

// Row-major binary occupancy grid; true marks a lane (white) pixel.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // 0 or 1

    BinaryImage() = default;
    BinaryImage(int w, int h, bool fill = false)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}

    bool at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    std::size_t count_true() const {
        std::size_t n = 0;
        for (auto v : data) n += v != 0;
        return n;
    }

    bool operator==(const BinaryImage&) const = default;
};

// Inclusive comparison: a pixel passes when intensity >= t.
inline BinaryImage threshold(const GrayImage& img, int t) {
    BinaryImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = img.data[i] >= t ? 1 : 0;
    return out;
}

inline GrayImage to_gray(const BinaryImage& img) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        out.data[i] = img.data[i] ? 255 : 0;
    return out;
}

enum class PgmFormat { P2, P5 };

namespace detail {

// Reads one whitespace/comment-delimited token of a PGM header.
inline std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

inline int parse_pgm_int(std::istream& in, const char* what) {
    const std::string tok = next_pgm_token(in);
    if (tok.empty()) throw MalformedHeader(std::string("pgm: missing ") + what);
    int value = 0;
    for (char ch : tok) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw MalformedHeader(std::string("pgm: bad ") + what + " '" + tok + "'");
        value = value * 10 + (ch - '0');
        if (value > 1000000) throw MalformedHeader(std::string("pgm: oversized ") + what);
    }
    return value;
}

} // namespace detail

inline GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedHeader("pgm: cannot open " + path.string());

    const std::string magic = detail::next_pgm_token(in);
    if (magic != "P2" && magic != "P5")
        throw MalformedHeader("pgm: bad magic '" + magic + "' in " + path.string());
    const int w = detail::parse_pgm_int(in, "width");
    const int h = detail::parse_pgm_int(in, "height");
    const int maxval = detail::parse_pgm_int(in, "maxval");
    if (w < 1 || h < 1) throw MalformedHeader("pgm: non-positive dimensions");
    if (maxval < 1 || maxval > 255) throw MalformedHeader("pgm: maxval must be in [1, 255]");

    GrayImage img(w, h);
    if (magic == "P5") {
        // Header ends with exactly one whitespace byte, already consumed by
        // the tokenizer; raster follows.
        in.read(reinterpret_cast<char*>(img.data.data()),
                static_cast<std::streamsize>(img.data.size()));
        if (static_cast<std::size_t>(in.gcount()) != img.data.size())
            throw TruncatedData("pgm: raster shorter than width*height");
    } else {
        for (auto& px : img.data) {
            const std::string tok = detail::next_pgm_token(in);
            if (tok.empty()) throw TruncatedData("pgm: ran out of ASCII samples");
            int value = 0;
            for (char ch : tok) {
                if (!std::isdigit(static_cast<unsigned char>(ch)))
                    throw TruncatedData("pgm: non-numeric sample '" + tok + "'");
                value = value * 10 + (ch - '0');
                if (value > 255 * 10) break;
            }
            if (value > maxval) throw MalformedHeader("pgm: sample exceeds maxval");
            px = static_cast<std::uint8_t>(value);
        }
    }
    for (auto px : img.data)
        if (px > maxval) throw MalformedHeader("pgm: sample exceeds maxval");
    return img;
}

inline BinaryImage load_pgm_binary(const std::filesystem::path& path) {
    const GrayImage g = load_pgm(path);
    BinaryImage out(g.width, g.height);
    for (std::size_t i = 0; i < g.data.size(); ++i) out.data[i] = g.data[i] > 0 ? 1 : 0;
    return out;
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path,
                     PgmFormat format = PgmFormat::P5) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("pgm: cannot write " + path.string());
    if (format == PgmFormat::P5) {
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.data.data()),
                  static_cast<std::streamsize>(img.data.size()));
    } else {
        out << "P2\n" << img.width << " " << img.height << "\n255\n";
        for (int y = 0; y < img.height; ++y) {
            for (int x = 0; x < img.width; ++x) {
                out << static_cast<int>(img.at(x, y));
                out << (x + 1 == img.width ? '\n' : ' ');
            }
        }
    }
}

// Binary images serialize with maxval 255 and samples in {0, 255}.
inline void save_pgm(const BinaryImage& img, const std::filesystem::path& path,
                     PgmFormat format = PgmFormat::P5) {
    save_pgm(to_gray(img), path, format);
}

} // namespace lanekeep
