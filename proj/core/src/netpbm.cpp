#include <cmath>
#include <cstdio>
#include <fstream>

#include "nipsr/image.hpp"

namespace nipsr {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failure on '" + path + "'");
    return buf;
}

bool is_space(std::uint8_t b) {
    return b == ' ' || b == '\t' || b == '\r' || b == '\n' || b == '\v' || b == '\f';
}

struct HeaderParser {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < buf.size()) {
            if (is_space(buf[pos])) {
                ++pos;
            } else if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    int parse_int(const char* what) {
        skip_space_and_comments();
        if (pos >= buf.size() || buf[pos] < '0' || buf[pos] > '9') {
            throw ParseError(std::string("expected ") + what, pos);
        }
        long value = 0;
        while (pos < buf.size() && buf[pos] >= '0' && buf[pos] <= '9') {
            value = value * 10 + (buf[pos] - '0');
            if (value > 1000000000L) throw ParseError(std::string(what) + " out of range", pos);
            ++pos;
        }
        return static_cast<int>(value);
    }
};

std::uint8_t quantize(double v) {
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

void write_file(const std::string& path, const std::string& header,
                const std::vector<std::uint8_t>& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    f.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
    if (!f) throw IoError("write failure on '" + path + "'");
}

std::string header_for(const char* magic, int w, int h) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s\n%d %d\n255\n", magic, w, h);
    return buf;
}

}  // namespace

NetpbmImage load_netpbm(const std::string& path) {
    const std::vector<std::uint8_t> buf = read_file(path);
    HeaderParser hp{buf};

    if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6')) {
        throw ParseError("unknown magic, want P5 or P6", 0);
    }
    const bool color = buf[1] == '6';
    hp.pos = 2;

    const int w = hp.parse_int("width");
    const int h = hp.parse_int("height");
    if (w <= 0 || h <= 0) throw ParseError("dimensions must be positive", hp.pos);
    const std::size_t maxval_pos = hp.pos;
    const int maxval = hp.parse_int("maxval");
    if (maxval != 255) throw ParseError("unsupported maxval, want 255", maxval_pos);

    // Exactly one whitespace byte separates the header from the raster.
    if (hp.pos >= buf.size() || !is_space(buf[hp.pos])) {
        throw ParseError("expected single whitespace before pixel data", hp.pos);
    }
    ++hp.pos;

    const std::size_t expected = static_cast<std::size_t>(w) * h * (color ? 3 : 1);
    if (buf.size() - hp.pos < expected) {
        throw ParseError("truncated pixel data", buf.size());
    }
    if (buf.size() - hp.pos > expected) {
        throw ParseError("trailing bytes after pixel data", hp.pos + expected);
    }

    if (color) {
        RgbImage img(h, w);
        std::copy(buf.begin() + static_cast<std::ptrdiff_t>(hp.pos), buf.end(), img.rgb.begin());
        return img;
    }
    ImagePlane p(h, w);
    for (std::size_t i = 0; i < expected; ++i) p.v[i] = buf[hp.pos + i] / 255.0;
    return p;
}

void save_netpbm(const ImagePlane& p, const std::string& path) {
    std::vector<std::uint8_t> body(p.v.size());
    for (std::size_t i = 0; i < p.v.size(); ++i) body[i] = quantize(p.v[i]);
    write_file(path, header_for("P5", p.w, p.h), body);
}

void save_netpbm(const RgbImage& img, const std::string& path) {
    write_file(path, header_for("P6", img.w, img.h), img.rgb);
}

ImagePlane load_luminance(const std::string& path) {
    NetpbmImage img = load_netpbm(path);
    if (std::holds_alternative<ImagePlane>(img)) return std::get<ImagePlane>(std::move(img));
    return rgb_to_ycbcr(std::get<RgbImage>(img)).y;
}

}  // namespace nipsr
