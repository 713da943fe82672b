#pragma once

#include "liffig/ast.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace liffig {

// Mutable execution state: one slot per declared variable plus the print
// stream.  Confined to a single thread; Programs are shared freely.
struct State {
    std::vector<std::optional<Value>> slots;
    std::vector<Value> out;

    static State for_program(const Program& p) {
        State s;
        s.slots.resize(p.vars.size());
        return s;
    }

    bool bound(int slot) const {
        return slot >= 0 && slot < static_cast<int>(slots.size()) &&
               slots[static_cast<size_t>(slot)].has_value();
    }
    const Value& get(int slot, const std::string& name) const {
        if (!bound(slot)) throw EvalError("unbound variable " + name);
        return *slots[static_cast<size_t>(slot)];
    }
    void set(int slot, Value v) { slots[static_cast<size_t>(slot)] = std::move(v); }

    bool operator==(const State& o) const {
        return slots == o.slots && out == o.out;
    }
};

struct Counters {
    uint64_t additions = 0;
    uint64_t subtractions = 0;
    uint64_t multiplications = 0;
    uint64_t divisions = 0;
    uint64_t comparisons = 0;
    uint64_t swaps = 0;
    uint64_t array_reads = 0;
    uint64_t array_writes = 0;
    uint64_t prints = 0;
    uint64_t steps = 0;

    std::map<std::string, uint64_t> as_map() const;
};

// Records the extreme array indexes touched during a run (used to check the
// sentinel property: scans never leave the worked segment).
struct AccessRange {
    bool any = false;
    long long lo = 0;
    long long hi = 0;

    void note(long long i) {
        if (!any) {
            lo = hi = i;
            any = true;
        } else {
            if (i < lo) lo = i;
            if (i > hi) hi = i;
        }
    }
};

struct EvalCtx {
    Counters* counters = nullptr;
    AccessRange* access = nullptr;
};

Value eval_term(const TermPtr& t, const State& s, EvalCtx ctx = {});
bool eval_formula(const FormulaPtr& f, const State& s, EvalCtx ctx = {});

// Executes one command.  Returns false when an embedded guard is false
// (state may be partially updated by earlier Seq parts).  Throws EvalError.
bool exec_command(const CommandPtr& c, State& s, EvalCtx ctx = {});

struct RunConfig {
    std::map<std::string, Value> inputs;
    uint64_t step_budget = 1000000;
    bool check_assertions = true;
    bool trace = false;
    uint64_t rng_seed = 0;  // harness-level pivot selection (rndm)
};

enum class Outcome {
    Halted,
    AssertionViolation,
    NoTrueGuard,
    BudgetExceeded,
    RuntimeError,
};

const char* outcome_text(Outcome o);

struct TraceEntry {
    std::string label;
    State state;  // on arrival
    int arm_index = -1;
};

struct RunResult {
    Outcome outcome = Outcome::RuntimeError;
    State final_state;
    std::string at_label;    // violation / abort site
    std::string detail;      // runtime error text
    Counters counters;
    AccessRange access;
    std::vector<TraceEntry> trace;
};

struct StepResult {
    std::optional<std::string> next;  // nullopt = RETURN
    int arm_index = -1;
};

// Evaluates guards in textual order, executes the first true arm's body,
// returns its target.  Throws EvalError on NoTrueGuard ("no true guard").
StepResult step(const Program& p, const std::string& label, State& s,
                EvalCtx ctx = {});

RunResult run(const Program& p, const RunConfig& cfg);

std::string format_trace(const Program& p, const std::vector<TraceEntry>& trace);

// Deterministic seeded integer in [lo, hi] (pivot selection helper).
struct Rndm {
    std::mt19937_64 gen;
    explicit Rndm(uint64_t seed) : gen(seed) {}
    long long operator()(long long lo, long long hi) {
        std::uniform_int_distribution<long long> d(lo, hi);
        return d(gen);
    }
};

}  // namespace liffig
