#include "liffig/ast.hpp"

#include <algorithm>

namespace liffig {

CmpOp flip_cmp(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return CmpOp::Eq;
        case CmpOp::Ne: return CmpOp::Ne;
        case CmpOp::Lt: return CmpOp::Gt;
        case CmpOp::Le: return CmpOp::Ge;
        case CmpOp::Gt: return CmpOp::Lt;
        case CmpOp::Ge: return CmpOp::Le;
    }
    return CmpOp::Eq;
}

const char* cmp_text(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

const char* binop_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "mod";
        case BinOp::Pow: return "pow";
    }
    return "?";
}

TermPtr t_lit(Value v) { return std::make_shared<Term>(Term{Term::Lit{std::move(v)}, {}}); }
TermPtr t_var(std::string name) { return std::make_shared<Term>(Term{Term::Var{std::move(name)}, {}}); }
TermPtr t_elem(std::string a, TermPtr i) { return std::make_shared<Term>(Term{Term::Elem{std::move(a), -1, std::move(i)}, {}}); }
TermPtr t_neg(TermPtr t) { return std::make_shared<Term>(Term{Term::Neg{std::move(t)}, {}}); }
TermPtr t_bin(BinOp op, TermPtr l, TermPtr r) { return std::make_shared<Term>(Term{Term::Bin{op, std::move(l), std::move(r)}, {}}); }

FormulaPtr f_bool(bool b) { return std::make_shared<Formula>(Formula{Formula::BoolLit{b}, {}}); }
FormulaPtr f_cmp(CmpOp op, TermPtr l, TermPtr r) { return std::make_shared<Formula>(Formula{Formula::Cmp{op, std::move(l), std::move(r)}, {}}); }
FormulaPtr f_chain(std::vector<TermPtr> ts, std::vector<CmpOp> ops) { return std::make_shared<Formula>(Formula{Formula::Chain{std::move(ts), std::move(ops)}, {}}); }
FormulaPtr f_even(TermPtr t) { return std::make_shared<Formula>(Formula{Formula::Even{std::move(t)}, {}}); }
FormulaPtr f_odd(TermPtr t) { return std::make_shared<Formula>(Formula{Formula::Odd{std::move(t)}, {}}); }
FormulaPtr f_perm(std::string a, std::string b) { return std::make_shared<Formula>(Formula{Formula::Perm{std::move(a), std::move(b)}, {}}); }
FormulaPtr f_seg(std::string a, TermPtr lo, TermPtr hi, CmpOp rel, TermPtr bound) { return std::make_shared<Formula>(Formula{Formula::Seg{std::move(a), -1, std::move(lo), std::move(hi), rel, std::move(bound)}, {}}); }
FormulaPtr f_alloc(std::string a, TermPtr lo, TermPtr hi) { return std::make_shared<Formula>(Formula{Formula::Alloc{std::move(a), -1, std::move(lo), std::move(hi)}, {}}); }
FormulaPtr f_printed(TermPtr t) { return std::make_shared<Formula>(Formula{Formula::Printed{std::move(t)}, {}}); }
FormulaPtr f_and(FormulaPtr l, FormulaPtr r) { return std::make_shared<Formula>(Formula{Formula::And{std::move(l), std::move(r)}, {}}); }
FormulaPtr f_or(FormulaPtr l, FormulaPtr r) { return std::make_shared<Formula>(Formula{Formula::Or{std::move(l), std::move(r)}, {}}); }
FormulaPtr f_not(FormulaPtr f) { return std::make_shared<Formula>(Formula{Formula::Not{std::move(f)}, {}}); }
FormulaPtr f_labelref(std::string l) { return std::make_shared<Formula>(Formula{Formula::LabelRef{std::move(l)}, {}}); }

CommandPtr c_guard(FormulaPtr f) { return std::make_shared<Command>(Command{Command::Guard{std::move(f)}, {}}); }
CommandPtr c_assign(std::string v, TermPtr rhs) { return std::make_shared<Command>(Command{Command::AssignVar{std::move(v), -1, std::move(rhs)}, {}}); }
CommandPtr c_assign_elem(std::string a, TermPtr i, TermPtr rhs) { return std::make_shared<Command>(Command{Command::AssignElem{std::move(a), -1, std::move(i), std::move(rhs)}, {}}); }
CommandPtr c_swap(std::string a, TermPtr i, TermPtr j) { return std::make_shared<Command>(Command{Command::Swap{std::move(a), -1, std::move(i), std::move(j)}, {}}); }
CommandPtr c_print(TermPtr t) { return std::make_shared<Command>(Command{Command::Print{std::move(t)}, {}}); }
CommandPtr c_skip() { return std::make_shared<Command>(Command{Command::Skip{}, {}}); }
CommandPtr c_seq(CommandPtr a, CommandPtr b) { return std::make_shared<Command>(Command{Command::Seq{std::move(a), std::move(b)}, {}}); }

CommandPtr seq_of(const std::vector<CommandPtr>& cmds) {
    if (cmds.empty()) return c_skip();
    CommandPtr acc = cmds.back();
    for (size_t i = cmds.size() - 1; i-- > 0;) acc = c_seq(cmds[i], acc);
    return acc;
}

static void flatten_into(const CommandPtr& c, std::vector<CommandPtr>& out) {
    if (const auto* s = std::get_if<Command::Seq>(&c->node)) {
        flatten_into(s->first, out);
        flatten_into(s->second, out);
    } else {
        out.push_back(c);
    }
}

std::vector<CommandPtr> flatten(const CommandPtr& c) {
    std::vector<CommandPtr> out;
    flatten_into(c, out);
    return out;
}

// --- structural equality -------------------------------------------------

bool equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (const auto* x = std::get_if<Term::Lit>(&a->node))
        return x->value == std::get<Term::Lit>(b->node).value;
    if (const auto* x = std::get_if<Term::Var>(&a->node))
        return x->name == std::get<Term::Var>(b->node).name;
    if (const auto* x = std::get_if<Term::Elem>(&a->node)) {
        const auto& y = std::get<Term::Elem>(b->node);
        return x->array == y.array && equal(x->index, y.index);
    }
    if (const auto* x = std::get_if<Term::Neg>(&a->node))
        return equal(x->operand, std::get<Term::Neg>(b->node).operand);
    const auto& x = std::get<Term::Bin>(a->node);
    const auto& y = std::get<Term::Bin>(b->node);
    return x.op == y.op && equal(x.lhs, y.lhs) && equal(x.rhs, y.rhs);
}

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (const auto* x = std::get_if<Formula::BoolLit>(&a->node))
        return x->value == std::get<Formula::BoolLit>(b->node).value;
    if (const auto* x = std::get_if<Formula::Cmp>(&a->node)) {
        const auto& y = std::get<Formula::Cmp>(b->node);
        return x->op == y.op && equal(x->lhs, y.lhs) && equal(x->rhs, y.rhs);
    }
    if (const auto* x = std::get_if<Formula::Chain>(&a->node)) {
        const auto& y = std::get<Formula::Chain>(b->node);
        if (x->ops != y.ops || x->terms.size() != y.terms.size()) return false;
        for (size_t i = 0; i < x->terms.size(); ++i)
            if (!equal(x->terms[i], y.terms[i])) return false;
        return true;
    }
    if (const auto* x = std::get_if<Formula::Even>(&a->node))
        return equal(x->t, std::get<Formula::Even>(b->node).t);
    if (const auto* x = std::get_if<Formula::Odd>(&a->node))
        return equal(x->t, std::get<Formula::Odd>(b->node).t);
    if (const auto* x = std::get_if<Formula::Perm>(&a->node)) {
        const auto& y = std::get<Formula::Perm>(b->node);
        return x->a == y.a && x->b == y.b;
    }
    if (const auto* x = std::get_if<Formula::Seg>(&a->node)) {
        const auto& y = std::get<Formula::Seg>(b->node);
        return x->array == y.array && x->rel == y.rel && equal(x->lo, y.lo) &&
               equal(x->hi, y.hi) && equal(x->bound, y.bound);
    }
    if (const auto* x = std::get_if<Formula::Alloc>(&a->node)) {
        const auto& y = std::get<Formula::Alloc>(b->node);
        return x->array == y.array && equal(x->lo, y.lo) && equal(x->hi, y.hi);
    }
    if (const auto* x = std::get_if<Formula::Printed>(&a->node))
        return equal(x->t, std::get<Formula::Printed>(b->node).t);
    if (const auto* x = std::get_if<Formula::And>(&a->node)) {
        const auto& y = std::get<Formula::And>(b->node);
        return equal(x->lhs, y.lhs) && equal(x->rhs, y.rhs);
    }
    if (const auto* x = std::get_if<Formula::Or>(&a->node)) {
        const auto& y = std::get<Formula::Or>(b->node);
        return equal(x->lhs, y.lhs) && equal(x->rhs, y.rhs);
    }
    if (const auto* x = std::get_if<Formula::Not>(&a->node))
        return equal(x->f, std::get<Formula::Not>(b->node).f);
    return std::get<Formula::LabelRef>(a->node).label ==
           std::get<Formula::LabelRef>(b->node).label;
}

bool equal(const CommandPtr& a, const CommandPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->node.index() != b->node.index()) return false;
    if (const auto* x = std::get_if<Command::Guard>(&a->node))
        return equal(x->f, std::get<Command::Guard>(b->node).f);
    if (const auto* x = std::get_if<Command::AssignVar>(&a->node)) {
        const auto& y = std::get<Command::AssignVar>(b->node);
        return x->name == y.name && equal(x->rhs, y.rhs);
    }
    if (const auto* x = std::get_if<Command::AssignElem>(&a->node)) {
        const auto& y = std::get<Command::AssignElem>(b->node);
        return x->array == y.array && equal(x->index, y.index) && equal(x->rhs, y.rhs);
    }
    if (const auto* x = std::get_if<Command::Swap>(&a->node)) {
        const auto& y = std::get<Command::Swap>(b->node);
        return x->array == y.array && equal(x->i, y.i) && equal(x->j, y.j);
    }
    if (const auto* x = std::get_if<Command::Print>(&a->node))
        return equal(x->t, std::get<Command::Print>(b->node).t);
    if (std::get_if<Command::Skip>(&a->node)) return true;
    const auto& x = std::get<Command::Seq>(a->node);
    const auto& y = std::get<Command::Seq>(b->node);
    return equal(x.first, y.first) && equal(x.second, y.second);
}

bool equal(const Program& a, const Program& b) {
    if (a.start != b.start || a.halt != b.halt) return false;
    if (a.vars.size() != b.vars.size() || a.blocks.size() != b.blocks.size())
        return false;
    for (size_t i = 0; i < a.vars.size(); ++i) {
        const auto& x = a.vars[i];
        const auto& y = b.vars[i];
        if (x.name != y.name || x.type != y.type || x.output != y.output)
            return false;
    }
    for (size_t i = 0; i < a.blocks.size(); ++i) {
        const auto& x = a.blocks[i];
        const auto& y = b.blocks[i];
        if (x.label != y.label || !equal(x.assertion, y.assertion)) return false;
        if (x.arms.size() != y.arms.size()) return false;
        if (x.exit_body.size() != y.exit_body.size()) return false;
        for (size_t k = 0; k < x.exit_body.size(); ++k)
            if (!equal(x.exit_body[k], y.exit_body[k])) return false;
        for (size_t k = 0; k < x.arms.size(); ++k) {
            const auto& p = x.arms[k];
            const auto& q = y.arms[k];
            if (p.target != q.target || !equal(p.guard, q.guard)) return false;
            if (p.body.size() != q.body.size()) return false;
            for (size_t m = 0; m < p.body.size(); ++m)
                if (!equal(p.body[m], q.body[m])) return false;
        }
    }
    return true;
}

// --- slot resolution -------------------------------------------------------

namespace {

struct Resolver {
    const std::map<std::string, int>& index;

    int slot(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? -1 : it->second;
    }

    TermPtr resolve(const TermPtr& t) const {
        if (!t) return t;
        Term copy = *t;
        if (auto* v = std::get_if<Term::Var>(&copy.node)) {
            v->slot = slot(v->name);
        } else if (auto* e = std::get_if<Term::Elem>(&copy.node)) {
            e->slot = slot(e->array);
            e->index = resolve(e->index);
        } else if (auto* n = std::get_if<Term::Neg>(&copy.node)) {
            n->operand = resolve(n->operand);
        } else if (auto* b = std::get_if<Term::Bin>(&copy.node)) {
            b->lhs = resolve(b->lhs);
            b->rhs = resolve(b->rhs);
        }
        return std::make_shared<Term>(std::move(copy));
    }

    FormulaPtr resolve(const FormulaPtr& f) const {
        if (!f) return f;
        Formula copy = *f;
        if (auto* c = std::get_if<Formula::Cmp>(&copy.node)) {
            c->lhs = resolve(c->lhs);
            c->rhs = resolve(c->rhs);
        } else if (auto* ch = std::get_if<Formula::Chain>(&copy.node)) {
            for (auto& t : ch->terms) t = resolve(t);
        } else if (auto* e = std::get_if<Formula::Even>(&copy.node)) {
            e->t = resolve(e->t);
        } else if (auto* o = std::get_if<Formula::Odd>(&copy.node)) {
            o->t = resolve(o->t);
        } else if (auto* p = std::get_if<Formula::Perm>(&copy.node)) {
            p->slot_a = slot(p->a);
            p->slot_b = slot(p->b);
        } else if (auto* s = std::get_if<Formula::Seg>(&copy.node)) {
            s->slot = slot(s->array);
            s->lo = resolve(s->lo);
            s->hi = resolve(s->hi);
            s->bound = resolve(s->bound);
        } else if (auto* al = std::get_if<Formula::Alloc>(&copy.node)) {
            al->slot = slot(al->array);
            al->lo = resolve(al->lo);
            al->hi = resolve(al->hi);
        } else if (auto* pr = std::get_if<Formula::Printed>(&copy.node)) {
            pr->t = resolve(pr->t);
        } else if (auto* a = std::get_if<Formula::And>(&copy.node)) {
            a->lhs = resolve(a->lhs);
            a->rhs = resolve(a->rhs);
        } else if (auto* r = std::get_if<Formula::Or>(&copy.node)) {
            r->lhs = resolve(r->lhs);
            r->rhs = resolve(r->rhs);
        } else if (auto* n = std::get_if<Formula::Not>(&copy.node)) {
            n->f = resolve(n->f);
        }
        return std::make_shared<Formula>(std::move(copy));
    }

    CommandPtr resolve(const CommandPtr& c) const {
        if (!c) return c;
        Command copy = *c;
        if (auto* g = std::get_if<Command::Guard>(&copy.node)) {
            g->f = resolve(g->f);
        } else if (auto* a = std::get_if<Command::AssignVar>(&copy.node)) {
            a->slot = slot(a->name);
            a->rhs = resolve(a->rhs);
        } else if (auto* e = std::get_if<Command::AssignElem>(&copy.node)) {
            e->slot = slot(e->array);
            e->index = resolve(e->index);
            e->rhs = resolve(e->rhs);
        } else if (auto* s = std::get_if<Command::Swap>(&copy.node)) {
            s->slot = slot(s->array);
            s->i = resolve(s->i);
            s->j = resolve(s->j);
        } else if (auto* p = std::get_if<Command::Print>(&copy.node)) {
            p->t = resolve(p->t);
        } else if (auto* q = std::get_if<Command::Seq>(&copy.node)) {
            q->first = resolve(q->first);
            q->second = resolve(q->second);
        }
        return std::make_shared<Command>(std::move(copy));
    }
};

}  // namespace

void Program::freeze() {
    var_index.clear();
    block_index.clear();
    for (size_t i = 0; i < vars.size(); ++i) {
        if (!var_index.emplace(vars[i].name, static_cast<int>(i)).second)
            throw EvalError("duplicate variable declaration: " + vars[i].name);
    }
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (!block_index.emplace(blocks[i].label, static_cast<int>(i)).second)
            throw EvalError("duplicate label: " + blocks[i].label);
    }
    Resolver rs{var_index};
    for (auto& b : blocks) {
        b.assertion = rs.resolve(b.assertion);
        for (auto& arm : b.arms) {
            arm.guard = rs.resolve(arm.guard);
            for (auto& c : arm.body) c = rs.resolve(c);
        }
        for (auto& c : b.exit_body) c = rs.resolve(c);
    }
}

// --- label-reference expansion ---------------------------------------------

namespace {

FormulaPtr expand_rec(const FormulaPtr& f, const Program& p,
                      std::vector<std::string>& stack) {
    if (!f) return f;
    if (const auto* ref = std::get_if<Formula::LabelRef>(&f->node)) {
        for (const auto& s : stack)
            if (s == ref->label) {
                std::string cyc;
                for (const auto& t : stack) cyc += t + " -> ";
                throw EvalError("cyclic assertion reference: " + cyc + ref->label);
            }
        const LabelBlock* b = p.block(ref->label);
        if (!b) throw EvalError("assertion references unknown label " + ref->label);
        stack.push_back(ref->label);
        FormulaPtr r = expand_rec(b->assertion, p, stack);
        stack.pop_back();
        return r;
    }
    Formula copy = *f;
    if (auto* a = std::get_if<Formula::And>(&copy.node)) {
        a->lhs = expand_rec(a->lhs, p, stack);
        a->rhs = expand_rec(a->rhs, p, stack);
    } else if (auto* o = std::get_if<Formula::Or>(&copy.node)) {
        o->lhs = expand_rec(o->lhs, p, stack);
        o->rhs = expand_rec(o->rhs, p, stack);
    } else if (auto* n = std::get_if<Formula::Not>(&copy.node)) {
        n->f = expand_rec(n->f, p, stack);
    } else {
        return f;  // leaf without refs: share
    }
    return std::make_shared<Formula>(std::move(copy));
}

}  // namespace

FormulaPtr expand_label_refs(const FormulaPtr& f, const Program& p) {
    std::vector<std::string> stack;
    return expand_rec(f, p, stack);
}

std::map<std::string, FormulaPtr> assertion_vector(const Program& p) {
    std::map<std::string, FormulaPtr> out;
    for (const auto& b : p.blocks)
        out[b.label] = expand_label_refs(b.assertion, p);
    return out;
}

// --- variable usage --------------------------------------------------------

void collect_read_vars(const TermPtr& t, std::set<std::string>& out) {
    if (!t) return;
    if (const auto* v = std::get_if<Term::Var>(&t->node)) {
        out.insert(v->name);
    } else if (const auto* e = std::get_if<Term::Elem>(&t->node)) {
        out.insert(e->array);
        collect_read_vars(e->index, out);
    } else if (const auto* n = std::get_if<Term::Neg>(&t->node)) {
        collect_read_vars(n->operand, out);
    } else if (const auto* b = std::get_if<Term::Bin>(&t->node)) {
        collect_read_vars(b->lhs, out);
        collect_read_vars(b->rhs, out);
    }
}

void collect_read_vars(const FormulaPtr& f, std::set<std::string>& out) {
    if (!f) return;
    if (const auto* c = std::get_if<Formula::Cmp>(&f->node)) {
        collect_read_vars(c->lhs, out);
        collect_read_vars(c->rhs, out);
    } else if (const auto* ch = std::get_if<Formula::Chain>(&f->node)) {
        for (const auto& t : ch->terms) collect_read_vars(t, out);
    } else if (const auto* e = std::get_if<Formula::Even>(&f->node)) {
        collect_read_vars(e->t, out);
    } else if (const auto* o = std::get_if<Formula::Odd>(&f->node)) {
        collect_read_vars(o->t, out);
    } else if (const auto* p = std::get_if<Formula::Perm>(&f->node)) {
        out.insert(p->a);
        out.insert(p->b);
    } else if (const auto* s = std::get_if<Formula::Seg>(&f->node)) {
        out.insert(s->array);
        collect_read_vars(s->lo, out);
        collect_read_vars(s->hi, out);
        collect_read_vars(s->bound, out);
    } else if (const auto* al = std::get_if<Formula::Alloc>(&f->node)) {
        out.insert(al->array);
        collect_read_vars(al->lo, out);
        collect_read_vars(al->hi, out);
    } else if (const auto* pr = std::get_if<Formula::Printed>(&f->node)) {
        collect_read_vars(pr->t, out);
    } else if (const auto* a = std::get_if<Formula::And>(&f->node)) {
        collect_read_vars(a->lhs, out);
        collect_read_vars(a->rhs, out);
    } else if (const auto* r = std::get_if<Formula::Or>(&f->node)) {
        collect_read_vars(r->lhs, out);
        collect_read_vars(r->rhs, out);
    } else if (const auto* n = std::get_if<Formula::Not>(&f->node)) {
        collect_read_vars(n->f, out);
    }
}

void collect_read_vars(const CommandPtr& c, std::set<std::string>& out) {
    if (!c) return;
    if (const auto* g = std::get_if<Command::Guard>(&c->node)) {
        collect_read_vars(g->f, out);
    } else if (const auto* a = std::get_if<Command::AssignVar>(&c->node)) {
        collect_read_vars(a->rhs, out);
    } else if (const auto* e = std::get_if<Command::AssignElem>(&c->node)) {
        out.insert(e->array);  // element write reads the rest of the array
        collect_read_vars(e->index, out);
        collect_read_vars(e->rhs, out);
    } else if (const auto* s = std::get_if<Command::Swap>(&c->node)) {
        out.insert(s->array);
        collect_read_vars(s->i, out);
        collect_read_vars(s->j, out);
    } else if (const auto* p = std::get_if<Command::Print>(&c->node)) {
        collect_read_vars(p->t, out);
    } else if (const auto* q = std::get_if<Command::Seq>(&c->node)) {
        collect_read_vars(q->first, out);
        collect_read_vars(q->second, out);
    }
}

bool formula_reads_out(const FormulaPtr& f) {
    if (!f) return false;
    if (std::get_if<Formula::Printed>(&f->node)) return true;
    if (const auto* a = std::get_if<Formula::And>(&f->node))
        return formula_reads_out(a->lhs) || formula_reads_out(a->rhs);
    if (const auto* o = std::get_if<Formula::Or>(&f->node))
        return formula_reads_out(o->lhs) || formula_reads_out(o->rhs);
    if (const auto* n = std::get_if<Formula::Not>(&f->node))
        return formula_reads_out(n->f);
    return false;
}

}  // namespace liffig
