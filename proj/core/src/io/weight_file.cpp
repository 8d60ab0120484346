#include "vehnet/io/weight_file.hpp"

#include <cstring>
#include <fstream>

namespace vehnet::io {

namespace {

constexpr char kMagic[8] = {'V', 'E', 'H', 'N', 'E', 'T', '0', '1'};
constexpr std::uint32_t kMaxNameLength = 4096;
constexpr std::uint32_t kMaxRank = 32;

static_assert(sizeof(float) == 4, "weight format stores 4-byte IEEE floats");

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ofstream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw std::runtime_error("weight file: cannot open '" + path + "'");
    }

    bool at_eof() {
        in_.peek();
        return in_.eof();
    }

    std::size_t offset() const { return offset_; }

    void read_bytes(void* dst, std::size_t n, const char* what) {
        in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) {
            throw std::runtime_error("weight file '" + path_ + "': truncated " + what +
                                     " at byte offset " + std::to_string(offset_));
        }
        offset_ += n;
    }

    std::uint32_t read_u32(const char* what) {
        unsigned char b[4];
        read_bytes(b, 4, what);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    float read_f32(const char* what) {
        const std::uint32_t bits = read_u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t offset_ = 0;
};

}  // namespace

void save_weights(const std::string& path, const NamedTensors& tensors) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("weight file: cannot write '" + path + "'");
    out.write(kMagic, sizeof(kMagic));
    for (const auto& [name, tensor] : tensors.tensors) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t d = 0; d < tensor.rank(); ++d)
            put_u32(out, static_cast<std::uint32_t>(tensor.dim(d)));
        for (std::size_t i = 0; i < tensor.size(); ++i) put_f32(out, tensor[i]);
    }
    if (!out) throw std::runtime_error("weight file: write failed for '" + path + "'");
}

void save_weights(const std::string& path, const nn::ParamStore& store) {
    NamedTensors named;
    for (const auto& [name, p] : store) named.tensors.emplace(name, p.value.cast<float>());
    save_weights(path, named);
}

NamedTensors load_weights(const std::string& path) {
    Reader in(path);
    char magic[8];
    in.read_bytes(magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("weight file '" + path + "': bad magic, expected VEHNET01");
    }

    NamedTensors out;
    while (!in.at_eof()) {
        const std::size_t record_offset = in.offset();
        const std::uint32_t name_len = in.read_u32("name length");
        if (name_len == 0 || name_len > kMaxNameLength) {
            throw std::runtime_error("weight file '" + path + "': invalid name length " +
                                     std::to_string(name_len) + " at byte offset " +
                                     std::to_string(record_offset));
        }
        std::string name(name_len, '\0');
        in.read_bytes(name.data(), name_len, "tensor name");
        const std::uint32_t rank = in.read_u32("rank");
        if (rank == 0 || rank > kMaxRank) {
            throw std::runtime_error("weight file '" + path + "': invalid rank " +
                                     std::to_string(rank) + " for '" + name + "'");
        }
        Shape shape(rank);
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            shape[d] = in.read_u32("dimension");
            numel *= shape[d];
        }
        TensorT<float> tensor(shape);
        for (std::size_t i = 0; i < numel; ++i) tensor[i] = in.read_f32("tensor values");
        if (!out.tensors.emplace(std::move(name), std::move(tensor)).second) {
            throw std::runtime_error("weight file '" + path + "': duplicate tensor name");
        }
    }
    return out;
}

void load_all_into(nn::ParamStore& store, const NamedTensors& tensors) {
    for (const auto& [name, tensor] : tensors.tensors) {
        if (!store.contains(name))
            throw std::runtime_error("weights: model has no parameter '" + name + "'");
        nn::Param& p = store.get(name);
        if (p.value.shape() != tensor.shape()) {
            throw std::runtime_error("weights: shape mismatch for '" + name + "': model " +
                                     shape_to_string(p.value.shape()) + ", file " +
                                     shape_to_string(tensor.shape()));
        }
        for (std::size_t i = 0; i < tensor.size(); ++i) p.value[i] = static_cast<real_t>(tensor[i]);
    }
}

}  // namespace vehnet::io
