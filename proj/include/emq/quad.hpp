#pragma once

#include <gmpxx.h>
#include <cmath>
#include <stdexcept>
#include <string>

namespace emq {

using Rat = mpq_class;

struct EmqError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Rat rat(long n, long d = 1) {
    if (d == 0) throw EmqError("rational with zero denominator");
    Rat r(n, d);
    r.canonicalize();
    return r;
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

// Element of Q(sqrt2): a + b*sqrt2.  Closed under the four operations,
// with an exact zero test (sqrt2 is irrational, so a + b*sqrt2 = 0 iff a = b = 0).
struct Quad {
    Rat a, b;

    Quad() : a(0), b(0) {}
    Quad(long v) : a(v), b(0) {}
    Quad(const Rat& r) : a(r), b(0) {}
    Quad(Rat r, Rat s) : a(std::move(r)), b(std::move(s)) {}

    static Quad sqrt2() { return Quad(Rat(0), Rat(1)); }

    bool is_zero() const { return a == 0 && b == 0; }
    bool is_rational() const { return b == 0; }
    bool is_one() const { return a == 1 && b == 0; }

    Quad operator-() const { return Quad(-a, -b); }
    Quad operator+(const Quad& o) const { return Quad(a + o.a, b + o.b); }
    Quad operator-(const Quad& o) const { return Quad(a - o.a, b - o.b); }
    Quad operator*(const Quad& o) const {
        return Quad(a * o.a + 2 * b * o.b, a * o.b + b * o.a);
    }
    Quad& operator+=(const Quad& o) { a += o.a; b += o.b; return *this; }
    Quad& operator-=(const Quad& o) { a -= o.a; b -= o.b; return *this; }
    Quad& operator*=(const Quad& o) { *this = *this * o; return *this; }

    Quad inverse() const {
        Rat n = a * a - 2 * b * b;
        if (n == 0) throw EmqError("division by zero coefficient");
        return Quad(a / n, -b / n);
    }
    Quad operator/(const Quad& o) const { return *this * o.inverse(); }

    bool operator==(const Quad& o) const { return a == o.a && b == o.b; }
    bool operator!=(const Quad& o) const { return !(*this == o); }

    // canonical (not numeric) order, for deterministic term keys
    int order(const Quad& o) const {
        int c = cmp(a, o.a);
        if (c != 0) return c;
        return cmp(b, o.b);
    }

    double to_double() const {
        return a.get_d() + b.get_d() * std::sqrt(2.0);
    }

    std::string str() const {
        if (b == 0) return rat_str(a);
        std::string rad = (b == 1) ? "sqrt2" : (b == -1) ? "-sqrt2" : rat_str(b) + "*sqrt2";
        if (a == 0) return rad;
        std::string s = "(" + rat_str(a);
        if (b > 0) {
            s += "+" + ((b == 1) ? std::string("sqrt2") : rat_str(b) + "*sqrt2");
        } else {
            Rat nb = -b;
            s += "-" + ((nb == 1) ? std::string("sqrt2") : rat_str(nb) + "*sqrt2");
        }
        return s + ")";
    }
};

} // namespace emq
