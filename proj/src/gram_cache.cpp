#include "qppm/gram_cache.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "qppm/error.hpp"

namespace qppm::qkernel {
namespace {

constexpr char kMagic[8] = {'Q', 'P', 'P', 'M', 'G', 'R', 'A', 'M'};

void put_u64(std::ostream &out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    out.write(reinterpret_cast<const char *>(b), 8);
}

bool get_u64(std::istream &in, std::uint64_t &v) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char *>(b), 8)) {
        return false;
    }
    v = 0;
    for (int i = 7; i >= 0; --i) {
        v = (v << 8) | b[i];
    }
    return true;
}

} // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t hash_matrix(const Eigen::MatrixXd &m) {
    std::string shape = std::to_string(m.rows()) + "x" + std::to_string(m.cols());
    std::uint64_t h = fnv1a(shape);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            char raw[sizeof(double)];
            std::memcpy(raw, &v, sizeof v);
            h = fnv1a({raw, sizeof raw}, h);
        }
    }
    return h;
}

GramCache::GramCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string GramCache::key(std::string_view dataset, std::string_view encoder, std::string_view kernel,
                           std::uint64_t seed, std::string_view extra) {
    std::string text;
    text.append(dataset).append("|").append(encoder).append("|").append(kernel).append("|");
    text.append(std::to_string(seed)).append("|").append(extra);
    return hex64(fnv1a(text));
}

std::filesystem::path GramCache::path_for(const std::string &key) const {
    return dir_ / (key + ".gram");
}

std::optional<std::pair<Eigen::MatrixXd, std::size_t>> GramCache::load(const std::string &key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    char magic[8];
    std::uint64_t rows = 0, cols = 0, evals = 0;
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0 || !get_u64(in, rows) ||
        !get_u64(in, cols) || !get_u64(in, evals)) {
        return std::nullopt;
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint64_t i = 0; i < rows; ++i) {
        for (std::uint64_t j = 0; j < cols; ++j) {
            std::uint64_t bits = 0;
            if (!get_u64(in, bits)) {
                return std::nullopt;
            }
            double v = 0.0;
            std::memcpy(&v, &bits, sizeof v);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return std::make_pair(std::move(m), static_cast<std::size_t>(evals));
}

void GramCache::store(const std::string &key, const Eigen::MatrixXd &m, std::size_t evaluations) const {
    const auto final_path = path_for(key);
    const auto tmp = final_path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write gram cache file '" + tmp + "'");
        }
        out.write(kMagic, 8);
        put_u64(out, static_cast<std::uint64_t>(m.rows()));
        put_u64(out, static_cast<std::uint64_t>(m.cols()));
        put_u64(out, evaluations);
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                std::uint64_t bits = 0;
                const double v = m(i, j);
                std::memcpy(&bits, &v, sizeof v);
                put_u64(out, bits);
            }
        }
    }
    std::filesystem::rename(tmp, final_path);
}

} // namespace qppm::qkernel
