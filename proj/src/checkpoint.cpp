#include "ecgssl/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace ecgssl::numcore {

namespace {

constexpr std::uint8_t kMagic[4] = {'E', 'S', 'C', 'K'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw DataError("checkpoint: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize_params(const std::vector<Tensor>& params) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, kCheckpointVersion);
    put_u64(out, params.size());
    for (const Tensor& p : params) {
        put_u32(out, static_cast<std::uint32_t>(p.rank()));
        for (int d : p.shape()) put_u64(out, static_cast<std::uint64_t>(d));
    }
    for (const Tensor& p : params)
        for (double v : p.values()) put_f64(out, v);
    return out;
}

std::vector<Tensor> deserialize_params(std::span<const std::uint8_t> bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw DataError("checkpoint: bad magic (not a checkpoint file)");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        throw DataError("checkpoint: unsupported format version " + std::to_string(version));
    const std::uint64_t count = r.u64();
    std::vector<Shape> shapes;
    shapes.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t rank = r.u32();
        Shape s;
        s.reserve(rank);
        for (std::uint32_t d = 0; d < rank; ++d) s.push_back(static_cast<int>(r.u64()));
        shapes.push_back(std::move(s));
    }
    std::vector<Tensor> params;
    params.reserve(count);
    for (auto& s : shapes) {
        const std::size_t n = shape_numel(s);
        std::vector<double> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = r.f64();
        params.push_back(Tensor::from_vector(std::move(s), std::move(vals)));
    }
    if (r.pos != bytes.size()) throw DataError("checkpoint: trailing bytes");
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<Tensor>& params) {
    const auto bytes = serialize_params(params);
    atomic_write_file(path, std::span<const std::uint8_t>(bytes));
}

std::vector<Tensor> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_params(bytes);
}

}  // namespace ecgssl::numcore
