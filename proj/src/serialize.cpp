#include "ulsad/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ulsad {

namespace {

constexpr char kMagic[8] = {'U', 'L', 'S', 'A', 'R', 'R', 'A', 'Y'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw PersistenceError("array file: truncated read");
    return v;
}

}  // namespace

void write_array_file(const std::string& path, const ArrayMap& arrays) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PersistenceError("cannot open for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kVersion);
    write_pod(os, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& [name, tensor] : arrays) {
        write_pod(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod(os, static_cast<std::uint32_t>(tensor.dim()));
        for (int d : tensor.shape()) write_pod(os, static_cast<std::int32_t>(d));
        os.write(reinterpret_cast<const char*>(tensor.data()),
                 static_cast<std::streamsize>(sizeof(real) * tensor.numel()));
    }
    if (!os) throw PersistenceError("write failed: " + path);
}

ArrayMap read_array_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PersistenceError("cannot open: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw PersistenceError("not an array container: " + path);
    }
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion) {
        throw PersistenceError("unsupported container version " + std::to_string(version));
    }
    const auto count = read_pod<std::uint32_t>(is);
    ArrayMap arrays;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = read_pod<std::uint32_t>(is);
        if (name_len > 4096) throw PersistenceError("array file: implausible name length");
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto ndim = read_pod<std::uint32_t>(is);
        if (ndim == 0 || ndim > 8) throw PersistenceError("array file: bad rank");
        std::vector<int> shape;
        std::int64_t numel = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            const auto dim = read_pod<std::int32_t>(is);
            if (dim <= 0 || dim > (1 << 28)) throw PersistenceError("array file: bad dimension");
            shape.push_back(dim);
            numel *= dim;
        }
        std::vector<real> values(static_cast<size_t>(numel));
        is.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(sizeof(real) * values.size()));
        if (!is) throw PersistenceError("array file: truncated data for " + name);
        arrays.emplace(std::move(name), Tensor(std::move(shape), std::move(values)));
    }
    return arrays;
}

void write_npy(const std::string& path, const Tensor& t) {
    std::ostringstream shape;
    shape << "(";
    for (int i = 0; i < t.dim(); ++i) {
        shape << t.shape(i);
        if (i + 1 < t.dim() || t.dim() == 1) shape << ",";
    }
    shape << ")";
    std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " + shape.str() + ", }";
    const size_t unpadded = 10 + header.size() + 1;
    const size_t pad = (64 - unpadded % 64) % 64;
    header.append(pad, ' ');
    header.push_back('\n');

    std::ofstream os(path, std::ios::binary);
    if (!os) throw PersistenceError("cannot open for writing: " + path);
    os.write("\x93NUMPY\x01\x00", 8);
    const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
    os.write(reinterpret_cast<const char*>(&hlen), 2);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(sizeof(real) * t.numel()));
    if (!os) throw PersistenceError("write failed: " + path);
}

}  // namespace ulsad
