#pragma once

#include <string>
#include <vector>

namespace liffig {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string message;
    int line = 0;
    int col = 0;

    std::string format(const std::string& file) const {
        return file + ":" + std::to_string(line) + ":" + std::to_string(col) +
               ": " + (severity == Severity::Error ? "error" : "warning") +
               ": " + message;
    }
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds)
        if (d.severity == Severity::Error) return true;
    return false;
}

}  // namespace liffig
