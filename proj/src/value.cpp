#include "liffig/value.hpp"

#include <cmath>
#include <sstream>

namespace liffig {

bool values_equal(const Value& a, const Value& b) {
    if (a.is_array() || b.is_array()) {
        if (!(a.is_array() && b.is_array()))
            throw EvalError("cannot compare an array with a scalar");
        return a.as_array() == b.as_array();
    }
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return a.to_float() == b.to_float();
}

int values_compare(const Value& a, const Value& b) {
    if (a.is_array() || b.is_array())
        throw EvalError("arrays are not ordered");
    if (a.is_int() && b.is_int()) {
        const Int& x = a.as_int();
        const Int& y = b.as_int();
        return x < y ? -1 : (x == y ? 0 : 1);
    }
    double x = a.to_float();
    double y = b.to_float();
    if (std::isnan(x) || std::isnan(y))
        throw EvalError("NaN is not ordered");
    return x < y ? -1 : (x == y ? 0 : 1);
}

bool Value::operator==(const Value& o) const {
    if (is_array() != o.is_array()) return false;
    if (is_array()) return as_array() == o.as_array();
    if (is_int() != o.is_int()) return false;
    if (is_int()) return as_int() == o.as_int();
    return as_float() == o.as_float();
}

size_t value_hash(const Value& v) {
    auto mix = [](size_t h, size_t x) {
        h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return h;
    };
    if (v.is_int()) {
        const Int& i = v.as_int();
        if (i >= std::numeric_limits<long long>::min() &&
            i <= std::numeric_limits<long long>::max())
            return mix(1, std::hash<long long>()(i.convert_to<long long>()));
        return mix(1, std::hash<std::string>()(i.str()));
    }
    if (v.is_float()) {
        double d = v.as_float();
        return mix(2, std::hash<double>()(d));
    }
    const IntArray& a = v.as_array();
    size_t h = mix(3, std::hash<long long>()(a.lo));
    h = mix(h, std::hash<long long>()(a.hi));
    for (const Int& e : *a.elems) h = mix(h, value_hash(Value(e)));
    return h;
}

long long to_index(const Value& v) {
    if (!v.is_int()) throw EvalError("array index must be an integer");
    const Int& i = v.as_int();
    if (i < std::numeric_limits<long long>::min() ||
        i > std::numeric_limits<long long>::max())
        throw EvalError("array index out of machine range");
    return i.convert_to<long long>();
}

std::string Value::str() const {
    if (is_int()) return as_int().str();
    if (is_float()) {
        std::ostringstream os;
        double d = as_float();
        os << d;
        std::string s = os.str();
        if (s.find('.') == std::string::npos &&
            s.find('e') == std::string::npos &&
            s.find("inf") == std::string::npos &&
            s.find("nan") == std::string::npos)
            s += ".0";
        return s;
    }
    const IntArray& a = as_array();
    std::string s = "[";
    for (long long k = a.lo; k <= a.hi; ++k) {
        if (k != a.lo) s += ",";
        s += a.at(k).str();
    }
    s += "]";
    if (a.lo != 0) s += "@" + std::to_string(a.lo);
    return s;
}

}  // namespace liffig
