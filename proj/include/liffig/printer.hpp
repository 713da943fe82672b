#pragma once

#include "liffig/ast.hpp"

#include <string>

namespace liffig {

enum class ProgramFormat { Liffig, Triples };

std::string to_text(const TermPtr& t);
std::string to_text(const FormulaPtr& f);
std::string to_text(const CommandPtr& c);

// Canonical text; parsing it back yields a structurally equal Program.
std::string pretty_print(const Program& p, ProgramFormat format);

}  // namespace liffig
