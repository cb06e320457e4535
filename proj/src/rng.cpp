#include "npisim/rng.hpp"

#include <cmath>

namespace npisim {

double Rng::normal() {
    // Box-Muller; u1 in (0,1] to keep the log finite.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

} // namespace npisim
