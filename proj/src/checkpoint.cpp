#include "freqcast/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace freqcast {

namespace {

constexpr char kMagic[8] = {'F', 'Q', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t v;
    static_assert(sizeof(v) == sizeof(d));
    std::memcpy(&v, &d, 8);
    write_u64(os, v);
}

double read_f64(std::istream& is) {
    std::uint64_t v = read_u64(is);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

} // namespace

void Checkpoint::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    os.write(kMagic, 8);
    write_u64(os, config_json.size());
    os.write(config_json.data(), static_cast<std::streamsize>(config_json.size()));
    write_u64(os, arrays.size());
    for (const auto& [name, values] : arrays) {
        write_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(os, values.size());
        for (double d : values) write_f64(os, d);
    }
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    Checkpoint ckpt;
    std::uint64_t json_len = read_u64(is);
    ckpt.config_json.resize(json_len);
    is.read(ckpt.config_json.data(), static_cast<std::streamsize>(json_len));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t n = read_u64(is);
    ckpt.arrays.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t name_len = read_u64(is);
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        if (!is) throw std::runtime_error("checkpoint: truncated file");
        std::uint64_t count = read_u64(is);
        std::vector<double> values(count);
        for (auto& d : values) d = read_f64(is);
        ckpt.arrays.emplace_back(std::move(name), std::move(values));
    }
    return ckpt;
}

const std::vector<double>* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, v] : arrays)
        if (n == name) return &v;
    return nullptr;
}

} // namespace freqcast
