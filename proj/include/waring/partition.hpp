#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "waring/errors.hpp"

namespace waring {

/// Integer partition: weakly decreasing positive parts.
struct Partition {
    std::vector<int> parts;

    Partition() = default;
    explicit Partition(std::vector<int> p) : parts(std::move(p)) {
        std::sort(parts.begin(), parts.end(), std::greater<int>());
        for (int x : parts)
            if (x <= 0) throw PreconditionViolated("partition parts must be positive");
    }

    int weight() const { return std::accumulate(parts.begin(), parts.end(), 0); }
    bool empty() const { return parts.empty(); }
    std::size_t size() const { return parts.size(); }

    friend bool operator==(const Partition& a, const Partition& b) { return a.parts == b.parts; }
    friend bool operator!=(const Partition& a, const Partition& b) { return !(a == b); }

    /// Lexicographic order on the weakly decreasing part lists.
    friend bool lex_less(const Partition& a, const Partition& b) {
        return std::lexicographical_compare(a.parts.begin(), a.parts.end(), b.parts.begin(),
                                            b.parts.end());
    }

    std::string to_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(parts[i]);
        }
        return s + "]";
    }
};

/// Enumerates all partitions of `weight` in decreasing lexicographic order.
inline std::vector<Partition> all_partitions(int weight) {
    std::vector<Partition> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int rem, int maxpart) {
        if (rem == 0) {
            out.emplace_back();
            out.back().parts = cur;
            return;
        }
        for (int p = std::min(rem, maxpart); p >= 1; --p) {
            cur.push_back(p);
            rec(rem - p, p);
            cur.pop_back();
        }
    };
    if (weight >= 0) rec(weight, weight);
    return out;
}

} // namespace waring
