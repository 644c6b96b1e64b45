#ifndef LITMINE_TESTS_SUPPORT_HPP
#define LITMINE_TESTS_SUPPORT_HPP

#include "litmine/common.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(LITMINE_FIXTURE_DIR) / name;
}

inline std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(LITMINE_DATA_DIR) / name;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("litmine_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct Blobs {
    litmine::DenseMatrix<float> points;
    std::vector<int> labels;
};

/// Isotropic Gaussian blobs; centres uniform in [-box, box]^dim.
inline Blobs make_blobs(std::size_t per_blob, std::size_t blobs, std::size_t dim, double sd, double box,
                        std::uint64_t seed) {
    litmine::Rng rng(seed);
    std::vector<std::vector<double>> centres(blobs, std::vector<double>(dim));
    for (auto& c : centres) {
        for (auto& v : c) {
            v = -box + 2.0 * box * rng.uniform();
        }
    }
    Blobs out;
    out.points = litmine::DenseMatrix<float>(per_blob * blobs, dim);
    for (std::size_t b = 0; b < blobs; ++b) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            const std::size_t row = b * per_blob + i;
            for (std::size_t d = 0; d < dim; ++d) {
                out.points(row, d) = static_cast<float>(centres[b][d] + sd * rng.normal());
            }
            out.labels.push_back(static_cast<int>(b));
        }
    }
    return out;
}

/// The three-blob fixture shared by the layout and clustering checks.
inline Blobs three_blobs() { return make_blobs(100, 3, 20, 1.0, 10.0, 20240601); }

inline litmine::DenseMatrix<double> uniform_points(std::size_t n, std::size_t dim, std::uint64_t seed,
                                                   double scale = 1.0) {
    litmine::Rng rng(seed);
    litmine::DenseMatrix<double> m(n, dim);
    for (auto& v : m.values()) {
        v = scale * rng.uniform();
    }
    return m;
}

template <typename T>
litmine::DenseMatrix<double> to_double(const litmine::DenseMatrix<T>& m) {
    std::vector<double> v(m.values().begin(), m.values().end());
    return litmine::DenseMatrix<double>(m.rows(), m.cols(), std::move(v));
}

} // namespace testsupport

#endif
