#include "nipsr/srnet.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "nipsr/rng.hpp"

namespace nipsr {

namespace {

constexpr char kMagic[8] = {'S', 'R', 'N', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc = ~crc;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return ~crc;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (buf.size() - pos < n) {
            throw CheckpointError(CheckpointError::Code::truncated, "checkpoint truncated");
        }
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = buf[pos] | (buf[pos + 1] << 8) | (buf[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(buf[pos + 3]) << 24);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

void validate_plan(const SrNetwork& net) {
    if (net.depth < 2 || static_cast<int>(net.layers.size()) != net.depth) {
        throw CheckpointError(CheckpointError::Code::bad_shape, "layer count does not match depth");
    }
    for (int l = 0; l < net.depth; ++l) {
        const Tensor& w = net.layers[static_cast<std::size_t>(l)].w;
        const int ci_want = l == 0 ? 1 : net.width;
        const int co_want = l == net.depth - 1 ? 1 : net.width;
        if (w.c != ci_want || w.n != co_want || w.h != 3 || w.w != 3) {
            throw CheckpointError(CheckpointError::Code::bad_shape,
                                  "layer " + std::to_string(l) + " violates the channel plan");
        }
        if (static_cast<int>(net.layers[static_cast<std::size_t>(l)].b.size()) != co_want) {
            throw CheckpointError(CheckpointError::Code::bad_shape,
                                  "layer " + std::to_string(l) + " bias length mismatch");
        }
    }
}

}  // namespace

std::int64_t SrNetwork::parameter_count() const {
    std::int64_t count = 0;
    for (const auto& l : layers) count += l.w.size() + static_cast<std::int64_t>(l.b.size());
    return count;
}

SrNetwork init_network(int depth, std::uint64_t seed, int width) {
    if (depth < 2) throw ContractError("init_network: depth must be >= 2");
    if (width < 1) throw ContractError("init_network: width must be >= 1");

    SrNetwork net;
    net.depth = depth;
    net.width = width;
    net.layers.reserve(static_cast<std::size_t>(depth));
    SeededRng rng(seed);
    for (int l = 0; l < depth; ++l) {
        const int ci = l == 0 ? 1 : width;
        const int co = l == depth - 1 ? 1 : width;
        ConvLayer layer;
        if (l == depth - 1) {
            layer.w = Tensor(co, ci, 3, 3);  // zero: fresh net is the identity
        } else {
            const double stddev = std::sqrt(2.0 / (ci * 9.0));
            layer.w = rng_normal(rng, co, ci, 3, 3, 0.0, stddev);
        }
        layer.b.assign(static_cast<std::size_t>(co), 0.0);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Tensor forward(const SrNetwork& net, const Tensor& x, ForwardCache* cache) {
    if (x.c != 1) throw ContractError("forward: channel axis must be 1");
    if (x.h < 3 || x.w < 3) throw ContractError("forward: spatial size must be >= 3");
    if (static_cast<int>(net.layers.size()) != net.depth) {
        throw ContractError("forward: malformed network");
    }

    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
        cache->pre.reserve(static_cast<std::size_t>(net.depth));
        cache->post.reserve(static_cast<std::size_t>(net.depth));
    }

    Tensor cur = x;
    for (int l = 0; l < net.depth; ++l) {
        const ConvLayer& layer = net.layers[static_cast<std::size_t>(l)];
        Tensor z = conv2d_forward(cur, layer.w, layer.b, 1);
        const bool last = l == net.depth - 1;
        Tensor a = last ? z : relu(z);
        if (cache) {
            cache->pre.push_back(std::move(z));
            cache->post.push_back(a);
        }
        cur = std::move(a);
    }

    Tensor y = cur;
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
    return y;
}

NetworkGrads backward(const SrNetwork& net, const ForwardCache& cache, const Tensor& grad_y) {
    if (static_cast<int>(cache.pre.size()) != net.depth ||
        static_cast<int>(cache.post.size()) != net.depth) {
        throw ContractError("backward: cache does not match network depth");
    }
    if (!grad_y.same_shape(cache.input)) {
        throw ContractError("backward: grad_y shape does not match forward output");
    }

    NetworkGrads grads;
    grads.layers.resize(static_cast<std::size_t>(net.depth));

    Tensor g = grad_y;  // gradient flowing into the residual path's output
    for (int l = net.depth - 1; l >= 0; --l) {
        const ConvLayer& layer = net.layers[static_cast<std::size_t>(l)];
        if (l != net.depth - 1) {
            g = relu_backward(cache.pre[static_cast<std::size_t>(l)], g);
        }
        const Tensor& layer_in = l == 0 ? cache.input : cache.post[static_cast<std::size_t>(l - 1)];
        ConvGrads cg = conv2d_backward(layer_in, layer.w, 1, g);
        grads.layers[static_cast<std::size_t>(l)] = {std::move(cg.w), std::move(cg.b)};
        g = std::move(cg.x);
    }

    // Skip connection: the identity path adds grad_y directly.
    grads.input = std::move(g);
    for (std::size_t i = 0; i < grads.input.data.size(); ++i) {
        grads.input.data[i] += grad_y.data[i];
    }
    return grads;
}

void save_checkpoint(const SrNetwork& net, const std::string& path) {
    validate_plan(net);
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(net.depth));
    for (const auto& l : net.layers) {
        put_u32(out, static_cast<std::uint32_t>(l.w.n));
        put_u32(out, static_cast<std::uint32_t>(l.w.c));
        put_u32(out, static_cast<std::uint32_t>(l.w.h));
        put_u32(out, static_cast<std::uint32_t>(l.w.w));
    }
    for (const auto& l : net.layers) {
        for (double v : l.w.data) put_f64(out, v);
        for (double v : l.b) put_f64(out, v);
    }
    put_u32(out, crc32_update(0, out.data(), out.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failure on '" + path + "'");
}

SrNetwork load_checkpoint(const std::string& path, int expected_depth) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint '" + path + "'");
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());

    if (buf.size() < 8) {
        throw CheckpointError(CheckpointError::Code::truncated, "checkpoint truncated");
    }
    if (std::memcmp(buf.data(), kMagic, 8) != 0) {
        throw CheckpointError(CheckpointError::Code::bad_magic, "bad checkpoint magic");
    }

    Reader r{buf, 8};
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw CheckpointError(CheckpointError::Code::bad_version,
                              "unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint32_t depth = r.u32();
    if (depth < 2 || depth > 10000) {
        throw CheckpointError(CheckpointError::Code::bad_shape, "implausible depth header");
    }
    if (expected_depth > 0 && static_cast<int>(depth) != expected_depth) {
        throw CheckpointError(CheckpointError::Code::bad_shape,
                              "checkpoint depth " + std::to_string(depth) + " but expected " +
                                  std::to_string(expected_depth));
    }

    SrNetwork net;
    net.depth = static_cast<int>(depth);
    net.layers.resize(depth);
    std::size_t payload_doubles = 0;
    for (std::uint32_t l = 0; l < depth; ++l) {
        const std::uint32_t co = r.u32();
        const std::uint32_t ci = r.u32();
        const std::uint32_t kh = r.u32();
        const std::uint32_t kw = r.u32();
        if (kh != 3 || kw != 3 || co < 1 || ci < 1 || co > 65536 || ci > 65536) {
            throw CheckpointError(CheckpointError::Code::bad_shape, "bad layer shape header");
        }
        net.layers[l].w = Tensor(static_cast<int>(co), static_cast<int>(ci), 3, 3);
        net.layers[l].b.assign(co, 0.0);
        payload_doubles += static_cast<std::size_t>(co) * ci * 9 + co;
    }
    net.width = net.layers[0].w.n;
    validate_plan(net);

    // Structural completeness first, so a cut-off file reports truncation
    // rather than a checksum failure.
    if (buf.size() != r.pos + payload_doubles * 8 + 4) {
        throw CheckpointError(CheckpointError::Code::truncated,
                              "checkpoint payload length mismatch");
    }
    const std::uint32_t stored_crc = buf[buf.size() - 4] | (buf[buf.size() - 3] << 8) |
                                     (buf[buf.size() - 2] << 16) |
                                     (static_cast<std::uint32_t>(buf[buf.size() - 1]) << 24);
    if (crc32_update(0, buf.data(), buf.size() - 4) != stored_crc) {
        throw CheckpointError(CheckpointError::Code::bad_crc, "checkpoint CRC mismatch");
    }

    for (auto& l : net.layers) {
        for (double& v : l.w.data) v = r.f64();
        for (double& v : l.b) v = r.f64();
    }
    return net;
}

}  // namespace nipsr
