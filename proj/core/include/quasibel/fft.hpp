#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace qbel {

/// In-place 2-D complex FFTs over row-major [ny][nx] data, backed by FFTW
/// with a mutex-guarded plan cache (FFTW_ESTIMATE plans, reproducible).
/// Inverse is unnormalized; callers divide by nx * ny.
void fft2(std::vector<std::complex<double>>& data, int nx, int ny, bool inverse);

/// Simple blocked parallel-for over [0, count); each index is processed
/// exactly once and results may be written independently, so the output is
/// deterministic regardless of thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& run_block);

}  // namespace qbel
