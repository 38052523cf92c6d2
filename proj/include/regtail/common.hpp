#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace regtail {

using Rational = boost::rational<long long>;

// exit codes used by the CLI map onto these
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string to_string(const Rational & r)
{
    if (r.denominator() == 1)
        return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline Rational parse_rational(const std::string & s)
{
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos)
            return Rational(std::stoll(s));
        long long num = std::stoll(s.substr(0, slash));
        long long den = std::stoll(s.substr(slash + 1));
        if (den == 0)
            throw ConfigError("zero denominator in '" + s + "'");
        return Rational(num, den);
    }
    catch (const std::logic_error &) {
        throw ConfigError("not a rational: '" + s + "'");
    }
}

inline double to_double(const Rational & r)
{
    return boost::rational_cast<double>(r);
}

// values held in half units: 0, 1, 2 mean 0, 1/2, 1
inline Rational from_halves(long long h)
{
    return Rational(h, 2);
}

struct Caps {
    int subgraph_edges = 16;
    int cover_vertices = 12;
    int matching_edges = 13;
    long long block_terms = 10'000'000;
    int hom_pattern_vertices = 6;
    int hom_host_vertices = 64;
};

}
