#ifndef FREQCAST_CHECKPOINT_HPP
#define FREQCAST_CHECKPOINT_HPP

#include <string>
#include <utility>
#include <vector>

namespace freqcast {

/// Versioned binary container: a JSON metadata blob plus named double arrays.
/// Values are written as little-endian IEEE 754 bytes, so load(save(x))
/// round-trips bit-exactly.
struct Checkpoint {
    std::string config_json;
    std::vector<std::pair<std::string, std::vector<double>>> arrays;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);

    const std::vector<double>* find(const std::string& name) const;
};

} // namespace freqcast

#endif
