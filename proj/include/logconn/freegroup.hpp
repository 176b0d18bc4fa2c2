#pragma once

// Words in a free group on g generators, and subgroup generators of the
// kernel of a surjection onto Z/n by Reidemeister-Schreier.

#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "logconn/error.hpp"

namespace logconn {

/// Letters are +(i+1) for generator i and -(i+1) for its inverse.
using Word = std::vector<int>;

inline Word reduce_word(const Word& w)
{
    Word out;
    for (int x : w) {
        if (!out.empty() && out.back() == -x)
            out.pop_back();
        else
            out.push_back(x);
    }
    return out;
}

inline Word inverse_word(const Word& w)
{
    Word out(w.rbegin(), w.rend());
    for (int& x : out)
        x = -x;
    return out;
}

inline Word concat(Word a, const Word& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return reduce_word(a);
}

/// "g1 g1 g2^-1"; the empty word prints as "e".
inline std::string word_str(const Word& w)
{
    if (w.empty())
        return "e";
    std::ostringstream os;
    for (size_t k = 0; k < w.size(); ++k) {
        if (k)
            os << ' ';
        os << 'g' << std::abs(w[k]);
        if (w[k] < 0)
            os << "^-1";
    }
    return os.str();
}

namespace detail {
inline long mod_n(long a, long n) { return ((a % n) + n) % n; }
}  // namespace detail

/// Schreier transversal and free generators of ker(chi) for chi(g_i) = c_i mod n.
struct SchreierData {
    size_t generator_count = 0;
    unsigned index = 1;
    std::vector<long> exponents;
    std::vector<Word> transversal;            ///< transversal[k] lies in the coset chi = k
    std::vector<Word> generators;             ///< nontrivial T[k] g_i T[k + c_i]^-1, ordered by i then k
    std::vector<std::vector<long>> gen_index; ///< gen_index[k][i]: position in `generators`, or -1

    long coset_of(const Word& w) const
    {
        long k = 0;
        for (int x : w)
            k += (x > 0 ? 1 : -1) * exponents[static_cast<size_t>(std::abs(x) - 1)];
        return detail::mod_n(k, index);
    }

    /// Expresses a word of the subgroup in the free generators, as (generator, +-1) factors.
    std::vector<std::pair<size_t, int>> rewrite(const Word& w) const
    {
        std::vector<std::pair<size_t, int>> out;
        long k = 0;
        for (int x : w) {
            size_t i = static_cast<size_t>(std::abs(x) - 1);
            if (i >= generator_count)
                throw MathError(ErrorCode::invalid_argument, "word uses an unknown generator");
            if (x > 0) {
                if (long s = gen_index[static_cast<size_t>(k)][i]; s >= 0)
                    out.emplace_back(static_cast<size_t>(s), 1);
                k = detail::mod_n(k + exponents[i], index);
            } else {
                k = detail::mod_n(k - exponents[i], index);
                if (long s = gen_index[static_cast<size_t>(k)][i]; s >= 0)
                    out.emplace_back(static_cast<size_t>(s), -1);
            }
        }
        if (k != 0)
            throw MathError(ErrorCode::invalid_argument, "word " + word_str(w) + " is not in the subgroup");
        return out;
    }
};

/// Uses the powers of the first generator whose exponent is prime to n as the
/// transversal; without one, a breadth-first prefix-closed transversal.
inline SchreierData reidemeister_schreier(size_t g, unsigned n, const std::vector<long>& c)
{
    if (c.size() != g || n == 0)
        throw MathError(ErrorCode::invalid_argument, "character does not match the generator count");
    SchreierData rs;
    rs.generator_count = g;
    rs.index = n;
    for (long x : c)
        rs.exponents.push_back(detail::mod_n(x, n));
    rs.transversal.assign(n, Word{});
    std::vector<bool> seen(n, false);
    long t = -1;
    for (size_t i = 0; i < g && t < 0; ++i)
        if (std::gcd(rs.exponents[i], static_cast<long>(n)) == 1)
            t = static_cast<long>(i);
    if (t >= 0) {
        Word w;
        for (unsigned j = 0; j < n; ++j) {
            long k = detail::mod_n(static_cast<long>(j) * rs.exponents[static_cast<size_t>(t)], n);
            rs.transversal[static_cast<size_t>(k)] = w;
            seen[static_cast<size_t>(k)] = true;
            w.push_back(static_cast<int>(t) + 1);
        }
    } else {
        std::queue<long> q;
        q.push(0);
        seen[0] = true;
        while (!q.empty()) {
            long k = q.front();
            q.pop();
            for (int sign : {1, -1})
                for (size_t i = 0; i < g; ++i) {
                    long next = detail::mod_n(k + sign * rs.exponents[i], n);
                    if (seen[static_cast<size_t>(next)])
                        continue;
                    seen[static_cast<size_t>(next)] = true;
                    Word w = rs.transversal[static_cast<size_t>(k)];
                    w.push_back(sign * (static_cast<int>(i) + 1));
                    rs.transversal[static_cast<size_t>(next)] = w;
                    q.push(next);
                }
        }
    }
    for (bool s : seen)
        if (!s)
            throw MathError(ErrorCode::invalid_argument, "character is not surjective onto Z/" + std::to_string(n));
    rs.gen_index.assign(n, std::vector<long>(g, -1));
    for (size_t i = 0; i < g; ++i)
        for (unsigned k = 0; k < n; ++k) {
            long next = detail::mod_n(static_cast<long>(k) + rs.exponents[i], n);
            Word w = rs.transversal[k];
            w.push_back(static_cast<int>(i) + 1);
            w = concat(w, inverse_word(rs.transversal[static_cast<size_t>(next)]));
            if (w.empty())
                continue;
            rs.gen_index[k][i] = static_cast<long>(rs.generators.size());
            rs.generators.push_back(w);
        }
    return rs;
}

}  // namespace logconn
