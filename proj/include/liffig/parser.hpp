#pragma once

#include "liffig/ast.hpp"
#include "liffig/diagnostics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace liffig {

struct ParseOptions {
    // Lenient mode: `if` accepted for `fi` as block terminator, `*v` lvalues,
    // `=` for `:=` after a starred lvalue, undeclared variables auto-declared
    // as int.  Each concession emits a warning.  Strict mode rejects.
    bool lenient = false;
};

struct ParseResult {
    std::optional<Program> program;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return program.has_value() && !has_errors(diagnostics); }
};

ParseResult parse_liffig(const std::string& src, ParseOptions opt = {});
ParseResult parse_triples(const std::string& src, ParseOptions opt = {});

// Dispatches on extension: .liffig, .triples.
ParseResult parse_path(const std::string& path, ParseOptions opt = {});

// Standalone formula/term parsers (used by tests and the CLI input reader).
FormulaPtr parse_formula_text(const std::string& src);
TermPtr parse_term_text(const std::string& src);

// Structural checks; diagnostics are the result, never throws.
std::vector<Diagnostic> validate(const Program& p);

}  // namespace liffig
