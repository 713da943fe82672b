#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace liffig {

// Arbitrary-precision signed integer: the universe for int-typed variables.
using Int = boost::multiprecision::cpp_int;

struct EvalError : std::runtime_error {
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// Integer array with declared logical bounds [lo, hi] (hi = lo-1 means empty).
// Element storage is shared copy-on-write: enumeration and execution copy
// states freely, a write clones the backing vector.
struct IntArray {
    long long lo = 0;
    long long hi = -1;
    std::shared_ptr<const std::vector<Int>> elems =
        std::make_shared<const std::vector<Int>>();

    long long size() const { return hi - lo + 1; }

    const Int& at(long long index) const {
        if (index < lo || index > hi)
            throw EvalError("array index " + std::to_string(index) +
                            " out of bounds [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
        return (*elems)[static_cast<size_t>(index - lo)];
    }

    void set(long long index, Int v) {
        if (index < lo || index > hi)
            throw EvalError("array index " + std::to_string(index) +
                            " out of bounds [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
        auto copy = std::make_shared<std::vector<Int>>(*elems);
        (*copy)[static_cast<size_t>(index - lo)] = std::move(v);
        elems = std::move(copy);
    }

    void swap_elems(long long i, long long j) {
        at(i);
        at(j);
        if (i == j) return;
        auto copy = std::make_shared<std::vector<Int>>(*elems);
        std::swap((*copy)[static_cast<size_t>(i - lo)],
                  (*copy)[static_cast<size_t>(j - lo)]);
        elems = std::move(copy);
    }

    static IntArray of(std::vector<Int> xs, long long lo = 0) {
        IntArray a;
        a.lo = lo;
        a.hi = lo + static_cast<long long>(xs.size()) - 1;
        a.elems = std::make_shared<const std::vector<Int>>(std::move(xs));
        return a;
    }

    bool operator==(const IntArray& o) const {
        return lo == o.lo && hi == o.hi && *elems == *o.elems;
    }
};

class Value {
public:
    Value() : v_(Int(0)) {}
    Value(Int i) : v_(std::move(i)) {}
    Value(long long i) : v_(Int(i)) {}
    Value(int i) : v_(Int(i)) {}
    Value(double f) : v_(f) {}
    Value(IntArray a) : v_(std::move(a)) {}

    bool is_int() const { return std::holds_alternative<Int>(v_); }
    bool is_float() const { return std::holds_alternative<double>(v_); }
    bool is_array() const { return std::holds_alternative<IntArray>(v_); }

    const Int& as_int() const {
        if (!is_int()) throw EvalError("expected an integer value");
        return std::get<Int>(v_);
    }
    double as_float() const {
        if (!is_float()) throw EvalError("expected a float value");
        return std::get<double>(v_);
    }
    const IntArray& as_array() const {
        if (!is_array()) throw EvalError("expected an array value");
        return std::get<IntArray>(v_);
    }
    IntArray& as_array_mut() {
        if (!is_array()) throw EvalError("expected an array value");
        return std::get<IntArray>(v_);
    }

    // Numeric view with Int -> double promotion for mixed arithmetic.
    double to_float() const {
        if (is_float()) return as_float();
        if (is_int()) return as_int().convert_to<double>();
        throw EvalError("array value used as a number");
    }

    bool operator==(const Value& o) const;

    std::string str() const;

private:
    std::variant<Int, double, IntArray> v_;
};

// Exact int/float-aware equality (2 == 2.0 holds; arrays compare per kind).
bool values_equal(const Value& a, const Value& b);
// Three-way ordering for comparisons: -1, 0, 1.  Errors on arrays.
int values_compare(const Value& a, const Value& b);

size_t value_hash(const Value& v);

// Index conversion for array subscripts and bounds.
long long to_index(const Value& v);

}  // namespace liffig
