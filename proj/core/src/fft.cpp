#include "quasibel/fft.hpp"

#include <fftw3.h>

#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace qbel {

namespace {

std::mutex plan_mutex;

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

// FFTW planning is not thread-safe and mutates global state; execution via
// fftw_execute_dft on distinct buffers is safe.
PlanPair& plans_for(int nx, int ny) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  auto key = std::make_pair(nx, ny);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<fftw_complex> scratch(static_cast<std::size_t>(nx) * ny);
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(ny, nx, scratch.data(), scratch.data(), FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.inv = fftw_plan_dft_2d(ny, nx, scratch.data(), scratch.data(), FFTW_BACKWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.fwd || !p.inv) throw std::runtime_error("fftw plan creation failed");
  return cache.emplace(key, p).first->second;
}

}  // namespace

void fft2(std::vector<std::complex<double>>& data, int nx, int ny, bool inverse) {
  if (data.size() != static_cast<std::size_t>(nx) * ny)
    throw std::invalid_argument("fft2: size mismatch");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& p = plans_for(nx, ny);
    plan = inverse ? p.inv : p.fwd;
  }
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, raw, raw);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& run_block) {
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t workers = hw ? hw : 1;
  if (workers > 8) workers = 8;
  if (count < 256 || workers == 1) {
    run_block(0, count);
    return;
  }
  // fixed partition into 32 blocks so per-block sequential work (and any
  // warm-start state inside a block) does not depend on the worker count
  constexpr std::size_t kBlocks = 32;
  std::size_t chunk = (count + kBlocks - 1) / kBlocks;
  if (workers > kBlocks) workers = kBlocks;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < kBlocks; b += workers) {
        std::size_t lo = b * chunk;
        std::size_t hi = lo + chunk < count ? lo + chunk : count;
        if (lo >= hi) break;
        run_block(lo, hi);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace qbel
