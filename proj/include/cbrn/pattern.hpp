#ifndef CBRN_PATTERN_HPP
#define CBRN_PATTERN_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbrn {

// One binary attribute-element image. bits are row-major, 1 = dark.
struct PatternImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;
    std::string label;

    bool operator==(const PatternImage& o) const {
        return width == o.width && height == o.height && bits == o.bits;
    }
    int dark_count() const {
        int n = 0;
        for (uint8_t b : bits) n += b ? 1 : 0;
        return n;
    }
};

// Unit-norm real vector form of a PatternImage.
struct PatternVector {
    std::vector<double> values;
    std::string source_label;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    size_t offset() const { return offset_; }

private:
    size_t offset_;
};

namespace detail {

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct Splitmix64 {
    uint64_t state;
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

// Skips whitespace and '#' comment lines inside a PBM header.
inline void skip_pbm_space(const std::string& b, size_t& pos) {
    while (pos < b.size()) {
        char c = b[pos];
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
            ++pos;
        } else {
            break;
        }
    }
}

inline int parse_pbm_int(const std::string& b, size_t& pos, const char* what) {
    skip_pbm_space(b, pos);
    if (pos >= b.size() || b[pos] < '0' || b[pos] > '9')
        throw ParseError(std::string("expected ") + what, pos);
    long v = 0;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        v = v * 10 + (b[pos] - '0');
        if (v > 1'000'000) throw ParseError(std::string(what) + " out of range", pos);
        ++pos;
    }
    return static_cast<int>(v);
}

} // namespace detail

// Parses a P1 (ASCII) or P4 (binary) portable bitmap. PBM 1 = black = dark.
inline PatternImage load_pbm(const std::string& bytes, const std::string& label = "") {
    if (bytes.size() < 2 || bytes[0] != 'P')
        throw ParseError("not a PBM file, missing 'P' magic", 0);
    char type = bytes[1];
    if (type == '2' || type == '3' || type == '5' || type == '6')
        throw ParseError(std::string("unsupported PBM type P") + type + ", only P1/P4 handled", 1);
    if (type != '1' && type != '4')
        throw ParseError("unrecognized PBM magic", 1);

    size_t pos = 2;
    int w = detail::parse_pbm_int(bytes, pos, "width");
    int h = detail::parse_pbm_int(bytes, pos, "height");
    if (w < 1 || h < 1) throw ParseError("dimensions must be >= 1", pos);

    PatternImage img;
    img.width = w;
    img.height = h;
    img.label = label;
    img.bits.resize(static_cast<size_t>(w) * h);

    if (type == '1') {
        for (size_t i = 0; i < img.bits.size(); ++i) {
            detail::skip_pbm_space(bytes, pos);
            if (pos >= bytes.size()) throw ParseError("pixel data ends early", pos);
            char c = bytes[pos];
            if (c != '0' && c != '1') throw ParseError("P1 pixel must be 0 or 1", pos);
            img.bits[i] = static_cast<uint8_t>(c - '0');
            ++pos;
        }
    } else {
        // Exactly one whitespace byte separates the header from the payload.
        if (pos >= bytes.size()) throw ParseError("payload missing", pos);
        ++pos;
        size_t row_bytes = (static_cast<size_t>(w) + 7) / 8;
        if (bytes.size() - pos < row_bytes * h)
            throw ParseError("payload shorter than width*height bits", bytes.size());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                uint8_t byte = static_cast<uint8_t>(bytes[pos + y * row_bytes + x / 8]);
                img.bits[static_cast<size_t>(y) * w + x] = (byte >> (7 - x % 8)) & 1;
            }
        }
    }
    return img;
}

// Emits P4 with rows padded to byte boundaries, most-significant bit first.
inline std::string save_pbm(const PatternImage& img) {
    if (img.width < 1 || img.height < 1 ||
        img.bits.size() != static_cast<size_t>(img.width) * img.height)
        throw std::invalid_argument("save_pbm: malformed PatternImage");
    std::string out = "P4\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n";
    size_t row_bytes = (static_cast<size_t>(img.width) + 7) / 8;
    for (int y = 0; y < img.height; ++y) {
        std::string row(row_bytes, '\0');
        for (int x = 0; x < img.width; ++x)
            if (img.bits[static_cast<size_t>(y) * img.width + x])
                row[x / 8] |= static_cast<char>(0x80u >> (x % 8));
        out += row;
    }
    return out;
}

// Deterministic stand-in for an externally rendered QR image: the label's
// FNV-1a hash seeds a splitmix64 stream, one word per pixel, top bit = dark.
inline PatternImage synth_pattern(const std::string& label, int width, int height) {
    if (label.empty()) throw std::invalid_argument("synth_pattern: empty label");
    if (width < 1 || height < 1) throw std::invalid_argument("synth_pattern: bad dimensions");
    PatternImage img;
    img.width = width;
    img.height = height;
    img.label = label;
    img.bits.resize(static_cast<size_t>(width) * height);
    uint64_t seed = detail::fnv1a64(label);
    for (;;) {
        detail::Splitmix64 rng{seed};
        bool any_dark = false;
        for (auto& b : img.bits) {
            b = static_cast<uint8_t>(rng.next() >> 63);
            any_dark |= b != 0;
        }
        if (any_dark) break;
        ++seed;
    }
    return img;
}

// dark -> 1, light -> 0, then scaled to unit Euclidean norm.
inline PatternVector vectorize(const PatternImage& img) {
    int dark = img.dark_count();
    if (dark == 0)
        throw std::domain_error("vectorize: all-light image cannot be normalized");
    PatternVector v;
    v.source_label = img.label;
    v.values.resize(img.bits.size());
    double scale = 1.0 / std::sqrt(static_cast<double>(dark));
    for (size_t i = 0; i < img.bits.size(); ++i) v.values[i] = img.bits[i] ? scale : 0.0;
    return v;
}

inline double cosine(const PatternVector& p, const PatternVector& q) {
    if (p.values.size() != q.values.size())
        throw std::invalid_argument("cosine: length mismatch");
    double s = 0.0;
    for (size_t i = 0; i < p.values.size(); ++i) s += p.values[i] * q.values[i];
    return s;
}

inline std::string ascii_render(const PatternImage& img) {
    std::string out;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            out += img.bits[static_cast<size_t>(y) * img.width + x] ? "█" : "·";
        out += '\n';
    }
    return out;
}

} // namespace cbrn

#endif
