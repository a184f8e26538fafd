#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace chaos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Kernels that have an OpenMP path keep a serial reference path for testing.
enum class Execution { Serial, Parallel };

/// Independent stream seed for task `task` under `master` (splitmix64 finalizer).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task)
{
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (task + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace chaos
