#include "amkg/util.hpp"

#include <algorithm>
#include <cctype>

namespace amkg::util {

double percentile(std::vector<double> sample, double p) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    if (sample.size() == 1) return sample[0];
    double rank = (p / 100.0) * static_cast<double>(sample.size() - 1);
    std::size_t lo = static_cast<std::size_t>(rank);
    std::size_t hi = std::min(lo + 1, sample.size() - 1);
    double frac = rank - static_cast<double>(lo);
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace amkg::util
