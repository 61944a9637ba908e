#include "flowprobe/weights_io.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <iterator>
#include <algorithm>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic{'F', 'P', 'M', 'L', 'P', 0, 0, 0};
constexpr std::uint32_t kTanh = 0;
// Refuses absurd sizes before allocating.
constexpr std::uint32_t kMaxWidth = 1u << 16;
constexpr std::uint32_t kMaxLayers = 256;

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }
    std::span<const std::uint8_t> raw(std::size_t n, const char* what) {
        need(n, what);
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t offset() const noexcept { return pos_; }
    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw ParseError(fmt::format("truncated weight document while reading {}", what), pos_);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_weights(const Mlp& net) {
    Writer w;
    w.raw(kMagic);
    w.u32(kWeightsVersion);
    w.u32(kTanh);
    w.u32(static_cast<std::uint32_t>(net.state_dim()));
    w.u32(static_cast<std::uint32_t>(net.cond_dim()));
    const auto& layers = net.layers();
    w.u32(static_cast<std::uint32_t>(layers.size()));
    w.u32(static_cast<std::uint32_t>(layers.front().weight.cols()));
    for (const auto& layer : layers) w.u32(static_cast<std::uint32_t>(layer.weight.rows()));
    for (const auto& layer : layers) {
        w.u32(static_cast<std::uint32_t>(layer.weight.rows()));
        w.u32(static_cast<std::uint32_t>(layer.weight.cols()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.f64(layer.weight(r, c));
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) w.f64(layer.bias(r));
    }
    return w.take();
}

Mlp load_weights(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    const auto magic = in.raw(kMagic.size(), "magic");
    if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
        throw ParseError("not a weight document (bad magic)", 0);
    }
    const std::size_t version_at = in.offset();
    if (const auto version = in.u32("version"); version != kWeightsVersion) {
        throw ParseError(fmt::format("unsupported weight document version {}", version), version_at);
    }
    const std::size_t activation_at = in.offset();
    if (in.u32("activation") != kTanh) throw ParseError("unknown activation tag", activation_at);

    const std::uint32_t state_dim = in.u32("state_dim");
    const std::uint32_t cond_dim = in.u32("cond_dim");
    const std::size_t count_at = in.offset();
    const std::uint32_t layer_count = in.u32("layer_count");
    if (layer_count == 0 || layer_count > kMaxLayers) {
        throw ParseError(fmt::format("implausible layer count {}", layer_count), count_at);
    }
    std::vector<std::uint32_t> widths(layer_count + 1);
    for (auto& width : widths) {
        const std::size_t at = in.offset();
        width = in.u32("layer width");
        if (width == 0 || width > kMaxWidth) {
            throw ParseError(fmt::format("implausible layer width {}", width), at);
        }
    }
    if (state_dim == 0 || widths.back() != state_dim) {
        throw SchemaError(fmt::format("declared output width {} != state_dim {}", widths.back(),
                                      state_dim));
    }
    if (static_cast<std::uint64_t>(widths.front()) !=
        static_cast<std::uint64_t>(state_dim) + 1 + cond_dim) {
        throw SchemaError(fmt::format("declared input width {} != state_dim + 1 + cond_dim = {}",
                                      widths.front(), std::uint64_t{state_dim} + 1 + cond_dim));
    }

    std::vector<DenseLayer> layers;
    layers.reserve(layer_count);
    for (std::uint32_t l = 0; l < layer_count; ++l) {
        const std::uint32_t rows = in.u32("layer rows");
        const std::uint32_t cols = in.u32("layer cols");
        if (rows != widths[l + 1] || cols != widths[l]) {
            throw SchemaError(fmt::format("layer {} is {}x{} but the header declares {}x{}", l, rows,
                                          cols, widths[l + 1], widths[l]));
        }
        DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = in.f64("weight");
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = in.f64("bias");
        layers.push_back(std::move(layer));
    }
    if (!in.done()) throw ParseError("trailing bytes after last layer", in.offset());
    return Mlp(state_dim, cond_dim, std::move(layers));
}

void save_weights_file(const Mlp& net, const std::filesystem::path& path) {
    const auto bytes = save_weights(net);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(fmt::format("failed writing '{}'", path.string()));
}

Mlp load_weights_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open weights file '{}'", path.string()));
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return load_weights(bytes);
}

}  // namespace flowprobe
