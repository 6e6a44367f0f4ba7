#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace qppm::qkernel {

/// 64-bit FNV-1a; stable across platforms, used for cache keys and config
/// fingerprints.
[[nodiscard]] std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
[[nodiscard]] std::string hex64(std::uint64_t v);

/// Hash of the raw bytes of a matrix (shape included).
[[nodiscard]] std::uint64_t hash_matrix(const Eigen::MatrixXd &m);

/// On-disk cache of kernel matrices. Files are `<dir>/<hex key>.gram`:
/// magic "QPPMGRAM", u64 rows, u64 cols, u64 evaluations, then rows*cols
/// little-endian doubles in row-major order.
class GramCache {
  public:
    explicit GramCache(std::filesystem::path dir);

    /// Key from (dataset hash, encoder config, kernel config, seed, extra).
    [[nodiscard]] static std::string key(std::string_view dataset, std::string_view encoder,
                                         std::string_view kernel, std::uint64_t seed,
                                         std::string_view extra = {});

    [[nodiscard]] std::optional<std::pair<Eigen::MatrixXd, std::size_t>> load(const std::string &key) const;
    void store(const std::string &key, const Eigen::MatrixXd &m, std::size_t evaluations) const;

  private:
    [[nodiscard]] std::filesystem::path path_for(const std::string &key) const;
    std::filesystem::path dir_;
};

} // namespace qppm::qkernel
