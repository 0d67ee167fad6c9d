#include "ssm/random.hpp"

#include <random>

namespace ssm {

namespace {

std::mt19937_64 engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

Vector standard_normals(std::uint64_t seed, std::uint64_t stream, Eigen::Index count) {
    auto gen = engine(seed, stream);
    std::normal_distribution<double> dist;
    Vector out(count);
    for (Eigen::Index i = 0; i < count; ++i) out(i) = dist(gen);
    return out;
}

Vector uniforms(std::uint64_t seed, std::uint64_t stream, Eigen::Index count) {
    auto gen = engine(seed, stream);
    std::uniform_real_distribution<double> dist;
    Vector out(count);
    for (Eigen::Index i = 0; i < count; ++i) out(i) = dist(gen);
    return out;
}

} // namespace ssm
