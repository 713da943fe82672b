#include "liffig/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace liffig {

std::map<std::string, uint64_t> Counters::as_map() const {
    return {
        {"additions", additions},       {"subtractions", subtractions},
        {"multiplications", multiplications}, {"divisions", divisions},
        {"comparisons", comparisons},   {"swaps", swaps},
        {"array_reads", array_reads},   {"array_writes", array_writes},
        {"prints", prints},             {"steps", steps},
    };
}

const char* outcome_text(Outcome o) {
    switch (o) {
        case Outcome::Halted: return "halted";
        case Outcome::AssertionViolation: return "assertion_violation";
        case Outcome::NoTrueGuard: return "no_true_guard";
        case Outcome::BudgetExceeded: return "budget_exceeded";
        case Outcome::RuntimeError: return "runtime_error";
    }
    return "?";
}

// --- term evaluation -------------------------------------------------------

namespace {

Value int_pow(const Int& base, const Int& exp) {
    if (exp < 0) throw EvalError("pow with negative exponent");
    Int result = 1;
    Int b = base;
    Int e = exp;
    while (e > 0) {
        if ((e & 1) != 0) result *= b;
        b *= b;
        e >>= 1;
    }
    return Value(result);
}

Value float_pow(double base, const Int& exp) {
    if (exp < 0) throw EvalError("pow with negative exponent");
    double result = 1.0;
    double b = base;
    Int e = exp;
    while (e > 0) {
        if ((e & 1) != 0) result *= b;
        b *= b;
        e >>= 1;
    }
    return Value(result);
}

Value apply_bin(BinOp op, const Value& l, const Value& r, EvalCtx ctx) {
    if (l.is_array() || r.is_array())
        throw EvalError("arithmetic on an array value");
    if (op == BinOp::Pow) {
        if (!r.is_int()) throw EvalError("pow exponent must be an integer");
        return l.is_int() ? int_pow(l.as_int(), r.as_int())
                          : float_pow(l.as_float(), r.as_int());
    }
    bool ints = l.is_int() && r.is_int();
    switch (op) {
        case BinOp::Add:
            if (ctx.counters) ctx.counters->additions++;
            return ints ? Value(l.as_int() + r.as_int())
                        : Value(l.to_float() + r.to_float());
        case BinOp::Sub:
            if (ctx.counters) ctx.counters->subtractions++;
            return ints ? Value(l.as_int() - r.as_int())
                        : Value(l.to_float() - r.to_float());
        case BinOp::Mul:
            if (ctx.counters) ctx.counters->multiplications++;
            return ints ? Value(l.as_int() * r.as_int())
                        : Value(l.to_float() * r.to_float());
        case BinOp::Div:
            if (ctx.counters) ctx.counters->divisions++;
            if (ints) {
                if (r.as_int() == 0) throw EvalError("division by zero");
                // cpp_int division truncates toward zero
                return Value(Int(l.as_int() / r.as_int()));
            }
            return Value(l.to_float() / r.to_float());  // IEEE semantics
        case BinOp::Mod:
            if (ctx.counters) ctx.counters->divisions++;
            if (!ints) throw EvalError("mod requires integer operands");
            if (r.as_int() == 0) throw EvalError("mod by zero");
            return Value(Int(l.as_int() % r.as_int()));
        default:
            throw EvalError("bad operator");
    }
}

}  // namespace

Value eval_term(const TermPtr& t, const State& s, EvalCtx ctx) {
    if (!t) throw EvalError("null term");
    if (const auto* lit = std::get_if<Term::Lit>(&t->node)) return lit->value;
    if (const auto* v = std::get_if<Term::Var>(&t->node))
        return s.get(v->slot, v->name);
    if (const auto* e = std::get_if<Term::Elem>(&t->node)) {
        const Value& av = s.get(e->slot, e->array);
        long long idx = to_index(eval_term(e->index, s, ctx));
        if (ctx.counters) ctx.counters->array_reads++;
        if (ctx.access) ctx.access->note(idx);
        return Value(av.as_array().at(idx));
    }
    if (const auto* n = std::get_if<Term::Neg>(&t->node)) {
        Value v = eval_term(n->operand, s, ctx);
        if (v.is_int()) return Value(Int(-v.as_int()));
        if (v.is_float()) return Value(-v.as_float());
        throw EvalError("negation of an array");
    }
    const auto& b = std::get<Term::Bin>(t->node);
    return apply_bin(b.op, eval_term(b.lhs, s, ctx), eval_term(b.rhs, s, ctx), ctx);
}

// --- formula evaluation ------------------------------------------------------

namespace {

bool apply_cmp(CmpOp op, const Value& l, const Value& r, EvalCtx ctx) {
    if (ctx.counters) ctx.counters->comparisons++;
    switch (op) {
        case CmpOp::Eq: return values_equal(l, r);
        case CmpOp::Ne: return !values_equal(l, r);
        case CmpOp::Lt: return values_compare(l, r) < 0;
        case CmpOp::Le: return values_compare(l, r) <= 0;
        case CmpOp::Gt: return values_compare(l, r) > 0;
        case CmpOp::Ge: return values_compare(l, r) >= 0;
    }
    return false;
}

bool is_multiset_perm(const IntArray& a, const IntArray& b) {
    if (a.size() != b.size()) return false;
    std::vector<Int> x(a.elems->begin(), a.elems->end());
    std::vector<Int> y(b.elems->begin(), b.elems->end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
}

}  // namespace

bool eval_formula(const FormulaPtr& f, const State& s, EvalCtx ctx) {
    if (!f) throw EvalError("null formula");
    if (const auto* b = std::get_if<Formula::BoolLit>(&f->node)) return b->value;
    if (const auto* c = std::get_if<Formula::Cmp>(&f->node))
        return apply_cmp(c->op, eval_term(c->lhs, s, ctx),
                         eval_term(c->rhs, s, ctx), ctx);
    if (const auto* ch = std::get_if<Formula::Chain>(&f->node)) {
        Value prev = eval_term(ch->terms[0], s, ctx);
        for (size_t i = 0; i < ch->ops.size(); ++i) {
            Value next = eval_term(ch->terms[i + 1], s, ctx);
            if (!apply_cmp(ch->ops[i], prev, next, ctx)) return false;
            prev = std::move(next);
        }
        return true;
    }
    if (const auto* e = std::get_if<Formula::Even>(&f->node)) {
        Value v = eval_term(e->t, s, ctx);
        if (!v.is_int()) throw EvalError("even() requires an integer");
        return (v.as_int() & 1) == 0;
    }
    if (const auto* o = std::get_if<Formula::Odd>(&f->node)) {
        Value v = eval_term(o->t, s, ctx);
        if (!v.is_int()) throw EvalError("odd() requires an integer");
        return (v.as_int() & 1) != 0;
    }
    if (const auto* p = std::get_if<Formula::Perm>(&f->node)) {
        const Value& a = s.get(p->slot_a, p->a);
        const Value& b = s.get(p->slot_b, p->b);
        return is_multiset_perm(a.as_array(), b.as_array());
    }
    if (const auto* sg = std::get_if<Formula::Seg>(&f->node)) {
        const Value& av = s.get(sg->slot, sg->array);
        const IntArray& arr = av.as_array();
        long long lo = to_index(eval_term(sg->lo, s, ctx));
        long long hi = to_index(eval_term(sg->hi, s, ctx));
        if (hi < lo) return true;  // empty segment is vacuously true
        Value bound = eval_term(sg->bound, s, ctx);
        for (long long k = lo; k <= hi; ++k) {
            if (ctx.access) ctx.access->note(k);
            if (!apply_cmp(sg->rel, Value(arr.at(k)), bound, ctx)) return false;
        }
        return true;
    }
    if (const auto* al = std::get_if<Formula::Alloc>(&f->node)) {
        const Value& av = s.get(al->slot, al->array);
        const IntArray& arr = av.as_array();
        long long lo = to_index(eval_term(al->lo, s, ctx));
        long long hi = to_index(eval_term(al->hi, s, ctx));
        if (lo > hi) return true;
        return arr.lo <= lo && hi <= arr.hi;
    }
    if (const auto* pr = std::get_if<Formula::Printed>(&f->node)) {
        Value v = eval_term(pr->t, s, ctx);
        for (const auto& o : s.out)
            if (values_equal(o, v)) return true;
        return false;
    }
    if (const auto* a = std::get_if<Formula::And>(&f->node))
        return eval_formula(a->lhs, s, ctx) && eval_formula(a->rhs, s, ctx);
    if (const auto* o = std::get_if<Formula::Or>(&f->node))
        return eval_formula(o->lhs, s, ctx) || eval_formula(o->rhs, s, ctx);
    if (const auto* n = std::get_if<Formula::Not>(&f->node))
        return !eval_formula(n->f, s, ctx);
    throw EvalError("assertion still contains a label reference; expand first");
}

// --- command execution -------------------------------------------------------

bool exec_command(const CommandPtr& c, State& s, EvalCtx ctx) {
    if (!c) throw EvalError("null command");
    if (const auto* g = std::get_if<Command::Guard>(&c->node))
        return eval_formula(g->f, s, ctx);
    if (const auto* a = std::get_if<Command::AssignVar>(&c->node)) {
        Value v = eval_term(a->rhs, s, ctx);
        if (a->slot < 0) throw EvalError("undeclared variable " + a->name);
        s.set(a->slot, std::move(v));
        return true;
    }
    if (const auto* e = std::get_if<Command::AssignElem>(&c->node)) {
        long long idx = to_index(eval_term(e->index, s, ctx));
        Value v = eval_term(e->rhs, s, ctx);
        if (!v.is_int()) throw EvalError("array element must be an integer");
        Value av = s.get(e->slot, e->array);
        if (ctx.counters) ctx.counters->array_writes++;
        if (ctx.access) ctx.access->note(idx);
        av.as_array_mut().set(idx, v.as_int());
        s.set(e->slot, std::move(av));
        return true;
    }
    if (const auto* sw = std::get_if<Command::Swap>(&c->node)) {
        long long i = to_index(eval_term(sw->i, s, ctx));
        long long j = to_index(eval_term(sw->j, s, ctx));
        Value av = s.get(sw->slot, sw->array);
        if (ctx.counters) ctx.counters->swaps++;
        if (ctx.access) {
            ctx.access->note(i);
            ctx.access->note(j);
        }
        av.as_array_mut().swap_elems(i, j);
        s.set(sw->slot, std::move(av));
        return true;
    }
    if (const auto* p = std::get_if<Command::Print>(&c->node)) {
        Value v = eval_term(p->t, s, ctx);
        if (ctx.counters) ctx.counters->prints++;
        s.out.push_back(std::move(v));
        return true;
    }
    if (std::get_if<Command::Skip>(&c->node)) return true;
    const auto& q = std::get<Command::Seq>(c->node);
    if (!exec_command(q.first, s, ctx)) return false;
    return exec_command(q.second, s, ctx);
}

// --- stepping ----------------------------------------------------------------

StepResult step(const Program& p, const std::string& label, State& s, EvalCtx ctx) {
    const LabelBlock* b = p.block(label);
    if (!b) throw EvalError("unknown label " + label);
    if (ctx.counters) ctx.counters->steps++;
    for (size_t k = 0; k < b->arms.size(); ++k) {
        const GuardedArm& arm = b->arms[k];
        if (!eval_formula(arm.guard, s, ctx)) continue;
        for (const auto& cmd : arm.body) {
            if (!exec_command(cmd, s, ctx))
                throw EvalError("false guard inside an arm body at " + label);
        }
        return StepResult{arm.target, static_cast<int>(k)};
    }
    throw EvalError("no true guard at " + label);
}

// --- full run ------------------------------------------------------------------

RunResult run(const Program& p, const RunConfig& cfg) {
    RunResult res;
    State s = State::for_program(p);
    EvalCtx ctx{&res.counters, &res.access};

    auto fail = [&](Outcome o, const std::string& label, const std::string& why) {
        res.outcome = o;
        res.at_label = label;
        res.detail = why;
        res.final_state = s;
        return res;
    };

    try {
        for (const auto& [name, value] : cfg.inputs) {
            int slot = p.slot_of(name);
            if (slot < 0) throw EvalError("input for undeclared variable " + name);
            s.set(slot, value);
        }
        // Ghost snapshots at S-entry: x0 := x.
        for (const auto& v : p.vars) {
            if (!v.is_ghost()) continue;
            int base = p.slot_of(v.ghost_base());
            int self = p.slot_of(v.name);
            if (base >= 0 && s.bound(base)) s.set(self, s.get(base, v.ghost_base()));
        }

        std::map<std::string, FormulaPtr> assertions;
        if (cfg.check_assertions) assertions = assertion_vector(p);

        std::string label = p.start;
        uint64_t steps = 0;
        for (;;) {
            const LabelBlock* b = p.block(label);
            if (!b) return fail(Outcome::RuntimeError, label, "unknown label");
            if (cfg.check_assertions &&
                !eval_formula(assertions.at(label), s, ctx))
                return fail(Outcome::AssertionViolation, label,
                            "assertion false at " + label);
            if (cfg.trace) res.trace.push_back({label, s, -1});

            if (label == p.halt && b->arms.empty()) {
                for (const auto& cmd : b->exit_body) exec_command(cmd, s, ctx);
                res.outcome = Outcome::Halted;
                res.final_state = s;
                return res;
            }
            if (b->arms.empty())
                return fail(Outcome::NoTrueGuard, label, "label has no arms");

            if (++steps > cfg.step_budget)
                return fail(Outcome::BudgetExceeded, label, "step budget exceeded");

            StepResult sr;
            try {
                sr = step(p, label, s, ctx);
            } catch (const EvalError& e) {
                std::string what = e.what();
                if (what.rfind("no true guard", 0) == 0)
                    return fail(Outcome::NoTrueGuard, label, what);
                throw;
            }
            if (cfg.trace) res.trace.back().arm_index = sr.arm_index;
            if (!sr.next.has_value()) {
                // RETURN arm: H's assertion is checked, H's exit code is not run.
                if (cfg.check_assertions &&
                    !eval_formula(assertions.at(p.halt), s, ctx))
                    return fail(Outcome::AssertionViolation, p.halt,
                                "assertion false at " + p.halt + " (return)");
                res.outcome = Outcome::Halted;
                res.final_state = s;
                return res;
            }
            label = *sr.next;
        }
    } catch (const EvalError& e) {
        return fail(Outcome::RuntimeError, "", e.what());
    }
}

std::string format_trace(const Program& p, const std::vector<TraceEntry>& trace) {
    std::ostringstream os;
    for (const auto& e : trace) {
        os << e.label << " | ";
        bool first = true;
        for (size_t i = 0; i < p.vars.size(); ++i) {
            if (!e.state.slots[i].has_value()) continue;
            if (!first) os << ",";
            first = false;
            os << p.vars[i].name << "=" << e.state.slots[i]->str();
        }
        os << " | arm=" << e.arm_index << "\n";
    }
    return os.str();
}

}  // namespace liffig
