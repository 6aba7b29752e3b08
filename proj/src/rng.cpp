#include "randsig/rng.hpp"

namespace randsig {

std::uint64_t CounterRng::mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed) : key_(mix(seed + kGamma)) {}

CounterRng CounterRng::split(std::uint64_t stream) const
{
    CounterRng child;
    child.key_ = mix(mix(key_ ^ 0x5851f42d4c957f2dULL) + (stream + 1) * 0xd1b54a32d192ed03ULL);
    return child;
}

double CounterRng::uniform()
{
    // 53 random bits, shifted half an ulp off zero.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() { return normal_(*this); }

}  // namespace randsig
