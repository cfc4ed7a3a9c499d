#pragma once

// Counter-based random numbers (Philox4x32-10).
//
// Every variate in the library is a pure function of (seed, path, slot,
// purpose), so ensembles are reproducible bit-for-bit regardless of
// execution order or the number of worker threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace couplab::rng {

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

using Block = std::array<std::uint32_t, 4>;

// One 128-bit Philox4x32-10 block. Word layout follows the reference
// implementation, so the published test vectors apply verbatim.
inline Block philox4x32(Block ctr, std::uint64_t key64) {
    using namespace detail;
    std::uint32_t k0 = static_cast<std::uint32_t>(key64);
    std::uint32_t k1 = static_cast<std::uint32_t>(key64 >> 32);
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = Block{hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    }
    return ctr;
}

// Disjoint purpose tags; they keep independent uses of the same
// (seed, path) pair from ever sharing a counter.
enum class Purpose : std::uint32_t {
    Increment = 1,   // Brownian increments, keyed (path, step, coord)
    Probe = 2,       // probe points for condition checks
    JumpDraw = 3,    // compound-Poisson skeleton draws
    ExtraLevy = 4,   // truncated-series small-jump component
    SeedDerive = 5,  // per-check seeds derived from a master seed
    Instance = 6,    // random test instances (measures, functions)
};

inline Block block_at(std::uint64_t seed, std::uint64_t path, std::uint32_t slot,
                      std::uint32_t lane, Purpose purpose) {
    const Block ctr{static_cast<std::uint32_t>(path),
                    static_cast<std::uint32_t>(path >> 32),
                    slot,
                    (lane << 8) | static_cast<std::uint32_t>(purpose)};
    return philox4x32(ctr, seed);
}

inline std::uint64_t to_u64(std::uint32_t hi, std::uint32_t lo) {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

// Uniform in the open interval (0,1); safe to feed into log().
inline double u64_to_open01(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

struct NormalPair {
    double z0;
    double z1;
};

inline NormalPair box_muller(std::uint64_t bits0, std::uint64_t bits1) {
    const double u1 = u64_to_open01(bits0);
    const double u2 = u64_to_open01(bits1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return NormalPair{r * std::cos(a), r * std::sin(a)};
}

// Standard normal for one (path, step, coordinate) slot. This is the
// single source of Brownian increments in the SDE kernels.
inline double normal_at(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                        std::uint32_t coord, Purpose purpose = Purpose::Increment) {
    const Block b = block_at(seed, path, step, coord, purpose);
    return box_muller(to_u64(b[0], b[1]), to_u64(b[2], b[3])).z0;
}

inline double uniform_at(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                         std::uint32_t coord, Purpose purpose) {
    const Block b = block_at(seed, path, step, coord, purpose);
    return u64_to_open01(to_u64(b[0], b[1]));
}

// Sequential draw stream for situations where the number of variates per
// path is itself random (jump counts, rejection sampling). Each draw
// advances a private counter; streams for different paths never interact.
class Sequence {
  public:
    Sequence(std::uint64_t seed, std::uint64_t path, Purpose purpose)
        : seed_(seed), path_(path), purpose_(purpose) {}

    double uniform() {
        const Block b = next_block();
        return u64_to_open01(to_u64(b[0], b[1]));
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const Block b = next_block();
        const NormalPair p = box_muller(to_u64(b[0], b[1]), to_u64(b[2], b[3]));
        spare_ = p.z1;
        have_spare_ = true;
        return p.z0;
    }

    // Inversion by CDF walk; exact and deterministic for the moderate
    // rates used here (lambda*t <= a few hundred).
    long poisson(double lambda) {
        const double u = uniform();
        double p = std::exp(-lambda);
        double cum = p;
        long k = 0;
        while (u > cum && k < 100000) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

    std::uint64_t bits64() {
        const Block b = next_block();
        return to_u64(b[0], b[1]);
    }

  private:
    Block next_block() {
        return block_at(seed_, path_, idx_++, 0, purpose_);
    }

    std::uint64_t seed_;
    std::uint64_t path_;
    Purpose purpose_;
    std::uint32_t idx_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Deterministic per-check seeds derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    const Block b = block_at(master, index, 0, 0, Purpose::SeedDerive);
    return to_u64(b[0], b[1]);
}

}  // namespace couplab::rng
