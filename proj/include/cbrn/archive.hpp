#ifndef CBRN_ARCHIVE_HPP
#define CBRN_ARCHIVE_HPP

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbrn/model.hpp"

namespace cbrn {

class ArchiveError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u8(std::string& out, uint8_t v) { out.push_back(static_cast<char>(v)); }

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out += s;
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (buf.size() - pos < n)
            throw ArchiveError(std::string("archive truncated at offset ") +
                               std::to_string(pos) + " while reading " + what);
    }
    uint8_t u8(const char* what) {
        need(1, what);
        return static_cast<uint8_t>(buf[pos++]);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str(const char* what) {
        uint32_t n = u32(what);
        need(n, what);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    void f64_array(std::vector<double>& out, size_t n, const char* what) {
        need(n * 8, what);
        out.resize(n);
        for (size_t i = 0; i < n; ++i) out[i] = f64(what);
    }
};

} // namespace detail

// Layout: "CBRN", version u32, config block, per-ball neuron records
// (learned flag, label, w array, v array), link count, per-link names + u
// matrix (to-neuron major). All integers LE u32, floats LE IEEE-754 f64.
inline std::string save_weights(const CbrnSystem& system) {
    using namespace detail;
    std::string out;
    out += "CBRN";
    put_u32(out, 1);

    const SystemConfig& c = system.config;
    put_u32(out, static_cast<uint32_t>(c.image_width));
    put_u32(out, static_cast<uint32_t>(c.image_height));
    put_u32(out, static_cast<uint32_t>(c.neurons_per_ball));
    put_f64(out, c.eps_w);
    put_f64(out, c.eps_v);
    put_f64(out, c.lambda_cb);
    put_u32(out, static_cast<uint32_t>(c.theta_series.size()));
    for (double t : c.theta_series) put_f64(out, t);
    put_f64(out, c.threshold_d);
    put_u32(out, static_cast<uint32_t>(c.chain_order.size()));
    for (const auto& name : c.chain_order) put_str(out, name);

    for (const auto& ball : system.balls) {
        for (const auto& n : ball.neurons) {
            put_u8(out, n.learned ? 1 : 0);
            put_str(out, n.stored_label.value_or(""));
            for (double w : n.w_column) put_f64(out, w);
            for (double v : n.v_row) put_f64(out, v);
        }
    }

    put_u32(out, static_cast<uint32_t>(system.links.size()));
    for (const auto& link : system.links) {
        put_str(out, link.from_ball);
        put_str(out, link.to_ball);
        for (const auto& row : link.u)
            for (double u : row) put_f64(out, u);
    }
    return out;
}

inline CbrnSystem load_weights(const std::string& bytes) {
    using namespace detail;
    Reader r{bytes};
    r.need(4, "magic");
    if (bytes.compare(0, 4, "CBRN") != 0) throw ArchiveError("bad magic, not a CBRN archive");
    r.pos = 4;
    uint32_t version = r.u32("version");
    if (version != 1)
        throw ArchiveError("unsupported archive version " + std::to_string(version));

    SystemConfig c;
    c.image_width = static_cast<int>(r.u32("image width"));
    c.image_height = static_cast<int>(r.u32("image height"));
    c.neurons_per_ball = static_cast<int>(r.u32("neurons per ball"));
    c.eps_w = r.f64("eps_w");
    c.eps_v = r.f64("eps_v");
    c.lambda_cb = r.f64("lambda_cb");
    uint32_t n_theta = r.u32("theta count");
    c.theta_series.clear();
    for (uint32_t i = 0; i < n_theta; ++i) c.theta_series.push_back(r.f64("theta"));
    c.threshold_d = r.f64("threshold_d");
    uint32_t n_balls = r.u32("ball count");
    c.chain_order.clear();
    for (uint32_t i = 0; i < n_balls; ++i) c.chain_order.push_back(r.str("ball name"));

    CbrnSystem system = CbrnSystem::make(c);
    size_t dim = static_cast<size_t>(c.pattern_dim());

    for (auto& ball : system.balls) {
        for (auto& n : ball.neurons) {
            n.learned = r.u8("learned flag") != 0;
            std::string label = r.str("stored label");
            n.stored_label = label.empty() && !n.learned
                                 ? std::nullopt
                                 : std::optional<std::string>(label);
            r.f64_array(n.w_column, dim, "w array");
            r.f64_array(n.v_row, dim, "v array");
            if (!n.learned) {
                for (double w : n.w_column)
                    if (w != 0.0)
                        throw ArchiveError("invariant violation: unlearned neuron of " +
                                           ball.attribute + " has nonzero w");
            }
        }
    }

    uint32_t n_links = r.u32("link count");
    if (n_links != system.links.size())
        throw ArchiveError("link count " + std::to_string(n_links) + " does not match " +
                           std::to_string(system.links.size()) + " chain adjacencies");
    for (auto& link : system.links) {
        std::string from = r.str("link from-name");
        std::string to = r.str("link to-name");
        if (from != link.from_ball || to != link.to_ball)
            throw ArchiveError("link " + from + "->" + to + " out of order, expected " +
                               link.from_ball + "->" + link.to_ball);
        for (auto& row : link.u)
            for (double& u : row) u = r.f64("u matrix");
    }

    if (r.pos != bytes.size())
        throw ArchiveError("trailing garbage: " + std::to_string(bytes.size() - r.pos) +
                           " unread bytes at offset " + std::to_string(r.pos));
    return system;
}

} // namespace cbrn

#endif
