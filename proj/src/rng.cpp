#include "ebsde/rng.hpp"

#include <cmath>
#include <limits>

namespace ebsde::rng {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

// Distinct key lanes for the two draw families so a normal and a uniform
// addressed by the same (seed, path, step, component) never collide.
constexpr std::uint64_t kNormalSalt = 0x6E6F726D616C3031ULL;
constexpr std::uint64_t kUniformSalt = 0x756E69666F726D31ULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(a) * static_cast<unsigned __int128>(b);
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
}

inline void round_once(std::array<std::uint64_t, 4>& c,
                       const std::array<std::uint64_t, 2>& k) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

double rational(double r, const double* num, const double* den, int n) {
    double p = num[n - 1];
    for (int i = n - 2; i >= 0; --i) p = p * r + num[i];
    double q = den[n - 1];
    for (int i = n - 2; i >= 0; --i) q = q * r + den[i];
    return p / q;
}

}  // namespace

std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        round_once(counter, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return counter;
}

double uniform_open01(std::uint64_t word) {
    // Center on half-integers so neither endpoint is reachable: the naive
    // 53-bit ldexp form rounds its top value to exactly 1.0.
    return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
}

double inverse_normal_cdf(double p) {
    // Wichura, Algorithm AS 241, PPND16 variant.
    static const double a[8] = {
        3.3871328727963666080e0,  1.3314166789178437745e2,
        1.9715909503065514427e3,  1.3731693765509461125e4,
        4.5921953931549871457e4,  6.7265770927008700853e4,
        3.3430575583588128105e4,  2.5090809287301226727e3};
    static const double b[8] = {
        1.0,                      4.2313330701600911252e1,
        6.8718700749205790830e2,  5.3941960214247511077e3,
        2.1213794301586595867e4,  3.9307895800092710610e4,
        2.8729085735721942674e4,  5.2264952788528545610e3};
    static const double c[8] = {
        1.42343711074968357734e0,  4.63033784615654529590e0,
        5.76949722146069140550e0,  3.64784832476320460504e0,
        1.27045825245236838258e0,  2.41780725177450611770e-1,
        2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static const double d[8] = {
        1.0,                       2.05319162663775882187e0,
        1.67638483018380384940e0,  6.89767334985100004550e-1,
        1.48103976427480074590e-1, 1.51986665636164571966e-2,
        5.47593808499534494600e-4, 1.05075007164441684324e-9};
    static const double e[8] = {
        6.65790464350110377720e0,  5.46378491116411436990e0,
        1.78482653991729133580e0,  2.96560571828504891230e-1,
        2.65321895265761230930e-2, 1.24266094738807843860e-3,
        2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static const double f[8] = {
        1.0,                       5.99832206555887937690e-1,
        1.36929880922735805310e-1, 1.48753612908506148525e-2,
        7.86869131145613259100e-4, 1.84631831751005468180e-5,
        1.42151175831644588870e-7, 2.04426310338993978564e-15};

    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * rational(r, a, b, 8);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    if (r <= 0.0) {
        return q < 0.0 ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity();
    }
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        x = rational(r - 1.6, c, d, 8);
    } else {
        x = rational(r - 5.0, e, f, 8);
    }
    return q < 0.0 ? -x : x;
}

double normal_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                   std::uint64_t component) {
    const auto block =
        philox4x64({path, step, component, 0}, {seed, kNormalSalt});
    return inverse_normal_cdf(uniform_open01(block[0]));
}

double uniform_draw(std::uint64_t seed, std::uint64_t path, std::uint64_t step,
                    std::uint64_t component) {
    const auto block =
        philox4x64({path, step, component, 0}, {seed, kUniformSalt});
    return uniform_open01(block[0]);
}

}  // namespace ebsde::rng
