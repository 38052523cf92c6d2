#pragma once

#include "regtail/common.hpp"

#include <cmath>

namespace regtail {

// p-entropy x log(x/p) + (1-x) log((1-x)/(1-p)), natural log
inline double ip_scalar(double x, double p)
{
    if (!(p > 0 && p < 1))
        throw ConfigError("ip_scalar: need 0 < p < 1");
    if (!(x >= 0 && x <= 1))
        throw ConfigError("ip_scalar: need 0 <= x <= 1");
    if (x == 0)
        return -std::log1p(-p);
    if (x == 1)
        return std::log(1 / p);
    return x * std::log(x / p) + (1 - x) * std::log1p(-x) - (1 - x) * std::log1p(-p);
}

}
