#pragma once

#include "liffig/value.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace liffig {

struct SourceSpan {
    int line = 0;
    int col = 0;
};

enum class BinOp { Add, Sub, Mul, Div, Mod, Pow };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

CmpOp flip_cmp(CmpOp op);          // a op b  <=>  b (flip op) a
const char* cmp_text(CmpOp op);
const char* binop_text(BinOp op);

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    struct Lit {
        Value value;
    };
    struct Var {
        std::string name;
        int slot = -1;
    };
    struct Elem {
        std::string array;
        int slot = -1;
        TermPtr index;
    };
    struct Neg {
        TermPtr operand;
    };
    struct Bin {
        BinOp op;
        TermPtr lhs, rhs;
    };

    std::variant<Lit, Var, Elem, Neg, Bin> node;
    SourceSpan span;
};

TermPtr t_lit(Value v);
TermPtr t_var(std::string name);
TermPtr t_elem(std::string array, TermPtr index);
TermPtr t_neg(TermPtr t);
TermPtr t_bin(BinOp op, TermPtr l, TermPtr r);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    struct BoolLit {
        bool value;
    };
    struct Cmp {
        CmpOp op;
        TermPtr lhs, rhs;
    };
    // t0 op0 t1 op1 t2 ... (conjunction of adjacent comparisons).
    struct Chain {
        std::vector<TermPtr> terms;
        std::vector<CmpOp> ops;
    };
    struct Even {
        TermPtr t;
    };
    struct Odd {
        TermPtr t;
    };
    struct Perm {
        std::string a, b;
        int slot_a = -1, slot_b = -1;
    };
    // forall k in [lo, hi]: a[k] rel bound   (vacuous when hi < lo)
    struct Seg {
        std::string array;
        int slot = -1;
        TermPtr lo, hi;
        CmpOp rel;
        TermPtr bound;
    };
    // lo > hi (empty segment), or [lo, hi] within a's declared bounds
    struct Alloc {
        std::string array;
        int slot = -1;
        TermPtr lo, hi;
    };
    struct Printed {
        TermPtr t;
    };
    struct And {
        FormulaPtr lhs, rhs;
    };
    struct Or {
        FormulaPtr lhs, rhs;
    };
    struct Not {
        FormulaPtr f;
    };
    struct LabelRef {
        std::string label;
    };

    std::variant<BoolLit, Cmp, Chain, Even, Odd, Perm, Seg, Alloc, Printed,
                 And, Or, Not, LabelRef>
        node;
    SourceSpan span;
};

FormulaPtr f_bool(bool b);
FormulaPtr f_cmp(CmpOp op, TermPtr l, TermPtr r);
FormulaPtr f_chain(std::vector<TermPtr> terms, std::vector<CmpOp> ops);
FormulaPtr f_even(TermPtr t);
FormulaPtr f_odd(TermPtr t);
FormulaPtr f_perm(std::string a, std::string b);
FormulaPtr f_seg(std::string a, TermPtr lo, TermPtr hi, CmpOp rel, TermPtr bound);
FormulaPtr f_alloc(std::string a, TermPtr lo, TermPtr hi);
FormulaPtr f_printed(TermPtr t);
FormulaPtr f_and(FormulaPtr l, FormulaPtr r);
FormulaPtr f_or(FormulaPtr l, FormulaPtr r);
FormulaPtr f_not(FormulaPtr f);
FormulaPtr f_labelref(std::string label);

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

struct Command {
    struct Guard {
        FormulaPtr f;
    };
    struct AssignVar {
        std::string name;
        int slot = -1;
        TermPtr rhs;
    };
    struct AssignElem {
        std::string array;
        int slot = -1;
        TermPtr index, rhs;
    };
    struct Swap {
        std::string array;
        int slot = -1;
        TermPtr i, j;
    };
    struct Print {
        TermPtr t;
    };
    struct Skip {};
    struct Seq {
        CommandPtr first, second;
    };

    std::variant<Guard, AssignVar, AssignElem, Swap, Print, Skip, Seq> node;
    SourceSpan span;
};

CommandPtr c_guard(FormulaPtr f);
CommandPtr c_assign(std::string var, TermPtr rhs);
CommandPtr c_assign_elem(std::string array, TermPtr index, TermPtr rhs);
CommandPtr c_swap(std::string array, TermPtr i, TermPtr j);
CommandPtr c_print(TermPtr t);
CommandPtr c_skip();
CommandPtr c_seq(CommandPtr a, CommandPtr b);
// Right-folded Seq of a command list; Skip when empty.
CommandPtr seq_of(const std::vector<CommandPtr>& cmds);
// Flattens nested Seq into a list (drops no commands, keeps Skips out
// unless the whole command is a single Skip).
std::vector<CommandPtr> flatten(const CommandPtr& c);

enum class VarType { Int, Float, IntArray };

struct VarDecl {
    std::string name;
    VarType type = VarType::Int;
    bool output = false;
    SourceSpan span;

    // A declared name ending in '0' snapshots its base variable at S-entry.
    bool is_ghost() const {
        return name.size() > 1 && name.back() == '0';
    }
    std::string ghost_base() const { return name.substr(0, name.size() - 1); }
};

struct GuardedArm {
    FormulaPtr guard;
    std::vector<CommandPtr> body;
    // Target label; empty optional means RETURN (halt; post-assertion is H's).
    std::optional<std::string> target;
    SourceSpan span;
};

struct LabelBlock {
    std::string label;
    FormulaPtr assertion;
    std::string prose;       // trailing informal text kept as documentation
    bool prose_only = false; // whole assertion was prose; formula is `true`
    std::vector<GuardedArm> arms;
    // Halt label only: commands run when control reaches H by goto
    // (the `if true -> cmds; return fi` form).  Generates no VC.
    std::vector<CommandPtr> exit_body;
    SourceSpan span;
};

struct Program {
    std::vector<VarDecl> vars;
    std::vector<LabelBlock> blocks;  // source order
    std::string start = "S";
    std::string halt = "H";

    std::map<std::string, int> var_index;
    std::map<std::string, int> block_index;

    int slot_of(const std::string& name) const {
        auto it = var_index.find(name);
        return it == var_index.end() ? -1 : it->second;
    }
    const LabelBlock* block(const std::string& label) const {
        auto it = block_index.find(label);
        return it == block_index.end() ? nullptr : &blocks[it->second];
    }
    bool has_label(const std::string& label) const {
        return block_index.count(label) != 0;
    }

    // Resolves variable slots throughout all trees and rebuilds the indexes.
    // Must be called after construction and before evaluation.
    // Throws EvalError on duplicate declarations.
    void freeze();

    size_t arm_count() const {
        size_t n = 0;
        for (const auto& b : blocks) n += b.arms.size();
        return n;
    }
};

struct VerificationCondition {
    std::string pre_label;
    FormulaPtr pre;       // expanded (no label refs)
    CommandPtr command;   // Guard(arm guard); body...
    std::string post_label;
    FormulaPtr post;      // expanded
    SourceSpan span;
    int arm_index = -1;   // index within the pre_label block
};

// --- structural equality -------------------------------------------------

bool equal(const TermPtr& a, const TermPtr& b);
bool equal(const FormulaPtr& a, const FormulaPtr& b);
bool equal(const CommandPtr& a, const CommandPtr& b);
bool equal(const Program& a, const Program& b);

// --- label-reference expansion -------------------------------------------

// Replaces every label reference by that label's (recursively expanded)
// assertion.  Throws EvalError naming the cycle on cyclic references.
FormulaPtr expand_label_refs(const FormulaPtr& f, const Program& p);

// All labels' assertions, expanded.
std::map<std::string, FormulaPtr> assertion_vector(const Program& p);

// --- variable usage ------------------------------------------------------

void collect_read_vars(const TermPtr& t, std::set<std::string>& out);
void collect_read_vars(const FormulaPtr& f, std::set<std::string>& out);
// For commands: variables read by guards, rhs terms, indexes, swaps, prints.
void collect_read_vars(const CommandPtr& c, std::set<std::string>& out);
bool formula_reads_out(const FormulaPtr& f);  // contains printed(...)

}  // namespace liffig
