#include "vx/interp.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "vx/diag.hpp"

namespace vx {

const char* to_string(CrashKind kind) {
    switch (kind) {
    case CrashKind::Abort: return "abort";
    case CrashKind::AssertionFailure: return "assertion-failure";
    case CrashKind::BufferOverflowRead: return "buffer-overflow-read";
    case CrashKind::BufferOverflowWrite: return "buffer-overflow-write";
    }
    return "?";
}

std::optional<CrashKind> crash_kind_from_string(const std::string& text) {
    if (text == "abort") return CrashKind::Abort;
    if (text == "assertion-failure") return CrashKind::AssertionFailure;
    if (text == "buffer-overflow-read") return CrashKind::BufferOverflowRead;
    if (text == "buffer-overflow-write") return CrashKind::BufferOverflowWrite;
    return std::nullopt;
}

namespace {

constexpr long long kStatementBudget = 1000000;

uint64_t fnv1a64(const uint8_t* data, size_t len) {
    uint64_t h = 14695981039346656037ull;
    for (size_t i = 0; i < len; i++) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

struct Pointer {
    int buf = 0;
    long long off = 0;
    TypeRef pointee; // type of *p
};

using Value = std::variant<long long, Pointer>;

struct MemRef {
    int buf = 0;
    long long off = 0;
    TypeRef type;
};

// An lvalue is either a named slot or a typed buffer location.
using LValue = std::variant<Value*, MemRef>;

struct CrashSignal {
    CrashKind kind;
    SourceLocation site;
};

struct Activation {
    const TranslationUnit* tu = nullptr;
    std::string function;
    SourceLocation cur;
    std::vector<std::map<std::string, Value>> scopes;
};

enum class Flow { Normal, Returned };

class Machine {
public:
    Machine(const TranslationUnit& tu, const std::vector<const TranslationUnit*>& extra,
            const std::vector<uint8_t>& input) {
        register_tu(tu);
        for (const TranslationUnit* e : extra) register_tu(*e);
        buffers_.push_back(std::vector<uint8_t>(input.begin(), input.end()));
    }

    RunResult run(const std::string& entry) {
        auto it = functions_.find(entry);
        if (it == functions_.end())
            throw UndefinedName({}, "entry function '" + entry + "' not found");
        RunResult result;
        try {
            std::vector<Value> args = {
                Pointer{0, 0, TypeRef{BaseType::Char}},
                static_cast<long long>(buffers_[0].size()),
            };
            result.exit_value = call(entry, args, SourceLocation{});
        } catch (const CrashSignal& sig) {
            CrashReport report;
            report.kind = sig.kind;
            report.site = sig.site;
            for (auto it2 = stack_.rbegin(); it2 != stack_.rend(); ++it2) {
                Frame f;
                f.function = it2->function;
                f.file = it2->tu->file;
                if (it2 == stack_.rbegin()) {
                    f.line = sig.site.line;
                    f.column = sig.site.column;
                } else {
                    f.line = it2->cur.line;
                    f.column = it2->cur.column;
                }
                report.stack.push_back(std::move(f));
            }
            result.crash = std::move(report);
        }
        result.slice = std::move(slice_);
        result.functions = std::move(entered_);
        return result;
    }

private:
    std::map<std::string, std::pair<const TranslationUnit*, int>> functions_;
    std::vector<std::vector<uint8_t>> buffers_;
    std::map<std::string, int> literal_buffers_;
    std::vector<Activation> stack_;
    ExecutionSlice slice_;
    std::set<FunctionKey> entered_;
    long long executed_ = 0;
    Value return_value_ = 0ll;

    void register_tu(const TranslationUnit& tu) {
        tus_.push_back(&tu);
        for (const auto& [name, id] : tu.functions) {
            functions_.emplace(name, std::make_pair(&tu, id));
        }
    }
    std::vector<const TranslationUnit*> tus_;

    const std::vector<FieldInfo>* find_record(const std::string& name) const {
        for (const TranslationUnit* tu : tus_) {
            auto it = tu->records.find(name);
            if (it != tu->records.end()) return &it->second;
        }
        return nullptr;
    }

    long long record_size(const std::string& name) const {
        const std::vector<FieldInfo>* fields = find_record(name);
        if (!fields) return 0;
        long long n = 0;
        for (const FieldInfo& f : *fields) n += storage_size_of(f.type);
        return n;
    }

    long long scalar_size(const TypeRef& type) const {
        if (type.pointer_depth > 0) return 8;
        if (type.base == BaseType::Record) return record_size(type.record_name);
        return size_of(type);
    }

    Activation& act() { return stack_.back(); }

    int intern_literal(const std::string& bytes) {
        auto it = literal_buffers_.find(bytes);
        if (it != literal_buffers_.end()) return it->second;
        std::vector<uint8_t> buf(bytes.begin(), bytes.end());
        buf.push_back(0); // NUL so strcpy terminates
        buffers_.push_back(std::move(buf));
        int id = static_cast<int>(buffers_.size()) - 1;
        literal_buffers_[bytes] = id;
        return id;
    }

    void check_bounds(int buf, long long off, long long size, const SourceLocation& loc,
                      bool write) {
        const auto& storage = buffers_[buf];
        if (off < 0 || off + size > static_cast<long long>(storage.size())) {
            throw CrashSignal{write ? CrashKind::BufferOverflowWrite
                                    : CrashKind::BufferOverflowRead,
                              loc};
        }
    }

    long long load_scalar(int buf, long long off, const TypeRef& type,
                          const SourceLocation& loc) {
        long long size = scalar_size(type);
        check_bounds(buf, off, size, loc, false);
        uint64_t raw = 0;
        for (long long i = 0; i < size; i++)
            raw |= static_cast<uint64_t>(buffers_[buf][off + i]) << (8 * i);
        if (type.pointer_depth == 0 && type.is_signed() && size < 8) {
            uint64_t sign_bit = 1ull << (8 * size - 1);
            if (raw & sign_bit) raw |= ~((sign_bit << 1) - 1);
        }
        return static_cast<long long>(raw);
    }

    void store_scalar(int buf, long long off, const TypeRef& type, long long value,
                      const SourceLocation& loc) {
        long long size = scalar_size(type);
        check_bounds(buf, off, size, loc, true);
        for (long long i = 0; i < size; i++)
            buffers_[buf][off + i] = static_cast<uint8_t>((value >> (8 * i)) & 0xff);
    }

    static bool truthy(const Value& v) {
        if (const long long* i = std::get_if<long long>(&v)) return *i != 0;
        return true;
    }

    long long as_int(const Value& v, const SourceLocation& loc) const {
        if (const long long* i = std::get_if<long long>(&v)) return *i;
        throw UndefinedName(loc, "expected an integer value");
    }

    Pointer as_pointer(const Value& v, const SourceLocation& loc) const {
        if (const Pointer* p = std::get_if<Pointer>(&v)) return *p;
        throw UndefinedName(loc, "expected a pointer value");
    }

    void note_stmt(const AstNode& n) {
        if (++executed_ > kStatementBudget)
            throw RuntimeLimit("statement budget exceeded; program may not terminate");
        slice_.lines.insert({act().tu->file, n.loc.line});
        act().cur = n.loc;
    }

    long long call(const std::string& name, std::vector<Value>& args,
                   const SourceLocation& call_loc) {
        auto it = functions_.find(name);
        if (it == functions_.end())
            throw UndefinedName(call_loc, "call to undefined function '" + name + "'");
        const TranslationUnit* tu = it->second.first;
        const AstNode& fn = tu->node(it->second.second);

        Activation frame;
        frame.tu = tu;
        frame.function = name;
        frame.cur = fn.loc;
        frame.scopes.emplace_back();
        size_t param_count = fn.children.size() - 1;
        if (args.size() != param_count)
            throw UndefinedName(call_loc, "wrong arity in call to '" + name + "'");
        for (size_t i = 0; i < param_count; i++) {
            frame.scopes.back()[tu->node(fn.children[i]).name] = args[i];
        }
        stack_.push_back(std::move(frame));
        entered_.insert({tu->file, name});

        return_value_ = 0ll;
        exec_stmt(tu->node(fn.children.back()));
        long long ret = as_int(return_value_, fn.loc);
        stack_.pop_back();
        return ret;
    }

    Flow exec_stmt(const AstNode& n) {
        const TranslationUnit* tu = act().tu;
        switch (n.kind) {
        case NodeKind::CompoundStmt: {
            act().scopes.emplace_back();
            Flow flow = Flow::Normal;
            for (int c : n.children) {
                flow = exec_stmt(tu->node(c));
                if (flow == Flow::Returned) break;
            }
            act().scopes.pop_back();
            return flow;
        }
        case NodeKind::DeclStmt: {
            note_stmt(n);
            const AstNode& var = tu->node(n.children[0]);
            const TypeRef& type = *var.type_annot;
            Value init = 0ll;
            if (type.array_len && type.pointer_depth == 0) {
                // Local array: fresh zeroed buffer, variable decays to a pointer.
                TypeRef elem = type;
                elem.array_len.reset();
                buffers_.push_back(std::vector<uint8_t>(storage_size_of(type), 0));
                init = Pointer{static_cast<int>(buffers_.size()) - 1, 0, elem};
                if (!var.children.empty())
                    throw UndefinedName(var.loc, "array initializers are not supported");
            } else if (!var.children.empty()) {
                init = eval(tu->node(var.children[0]));
            }
            act().scopes.back()[var.name] = init;
            return Flow::Normal;
        }
        case NodeKind::ExprStmt: {
            note_stmt(n);
            eval(tu->node(n.children[0]));
            return Flow::Normal;
        }
        case NodeKind::IfStmt: {
            note_stmt(n);
            if (truthy(eval(tu->node(n.children[0]))))
                return exec_stmt(tu->node(n.children[1]));
            if (n.children.size() > 2) return exec_stmt(tu->node(n.children[2]));
            return Flow::Normal;
        }
        case NodeKind::WhileStmt: {
            while (true) {
                note_stmt(n);
                if (!truthy(eval(tu->node(n.children[0])))) break;
                if (exec_stmt(tu->node(n.children[1])) == Flow::Returned)
                    return Flow::Returned;
            }
            return Flow::Normal;
        }
        case NodeKind::ReturnStmt: {
            note_stmt(n);
            return_value_ = n.children.empty() ? Value(0ll) : eval(tu->node(n.children[0]));
            return Flow::Returned;
        }
        default:
            throw UndefinedName(n.loc, "unexpected statement kind");
        }
    }

    Value load(const MemRef& ref, const SourceLocation& loc) {
        if (ref.type.pointer_depth > 0 || ref.type.base != BaseType::Record)
            return load_scalar(ref.buf, ref.off, ref.type, loc);
        throw UndefinedName(loc, "cannot load a whole record value");
    }

    LValue lvalue(const AstNode& n) {
        const TranslationUnit* tu = act().tu;
        switch (n.kind) {
        case NodeKind::DeclRefExpr: {
            for (auto it = act().scopes.rbegin(); it != act().scopes.rend(); ++it) {
                auto jt = it->find(n.name);
                if (jt != it->end()) return &jt->second;
            }
            auto gt = globals_.find(n.name);
            if (gt != globals_.end()) return &gt->second;
            // Lazily materialize globals declared at file scope.
            for (const TranslationUnit* t : tus_) {
                for (int c : t->node(t->root).children) {
                    const AstNode& g = t->node(c);
                    if (g.kind == NodeKind::VarDecl && g.name == n.name) {
                        globals_[n.name] = 0ll;
                        return &globals_[n.name];
                    }
                }
            }
            throw UndefinedName(n.loc, "use of undefined variable '" + n.name + "'");
        }
        case NodeKind::UnaryOperator: {
            if (n.op != "*") break;
            Pointer p = as_pointer(eval(tu->node(n.children[0])), n.loc);
            return MemRef{p.buf, p.off, p.pointee};
        }
        case NodeKind::MemberExpr: {
            if (n.member_offset < 0)
                throw UndefinedName(n.loc, "member access without type resolution");
            if (n.arrow) {
                Pointer p = as_pointer(eval(tu->node(n.children[0])), n.loc);
                return MemRef{p.buf, p.off + n.member_offset, *n.type_annot};
            }
            LValue base = lvalue(tu->node(n.children[0]));
            if (MemRef* m = std::get_if<MemRef>(&base))
                return MemRef{m->buf, m->off + n.member_offset, *n.type_annot};
            throw UndefinedName(n.loc, "'.' access requires a record in memory");
        }
        case NodeKind::ArraySubscriptExpr: {
            Value base = eval(tu->node(n.children[0]));
            long long idx = as_int(eval(tu->node(n.children[1])), n.loc);
            Pointer p = as_pointer(base, n.loc);
            return MemRef{p.buf, p.off + idx * scalar_size(p.pointee), p.pointee};
        }
        default:
            break;
        }
        throw UndefinedName(n.loc, "expression is not assignable");
    }

    Value eval(const AstNode& n) {
        const TranslationUnit* tu = act().tu;
        switch (n.kind) {
        case NodeKind::IntegerLiteral:
            return n.int_value;
        case NodeKind::StringLiteral:
            return Pointer{intern_literal(n.string_value), 0, TypeRef{BaseType::Char}};
        case NodeKind::DeclRefExpr: {
            LValue lv = lvalue(n);
            if (Value** slot = std::get_if<Value*>(&lv)) return **slot;
            return load(std::get<MemRef>(lv), n.loc);
        }
        case NodeKind::MemberExpr:
        case NodeKind::ArraySubscriptExpr: {
            LValue lv = lvalue(n);
            if (Value** slot = std::get_if<Value*>(&lv)) return **slot;
            return load(std::get<MemRef>(lv), n.loc);
        }
        case NodeKind::CastExpr: {
            Value v = eval(tu->node(n.children[0]));
            const TypeRef& target = *n.type_annot;
            if (target.pointer_depth > 0) {
                Pointer p = as_pointer(v, n.loc);
                TypeRef pointee = target;
                pointee.pointer_depth--;
                p.pointee = pointee;
                return p;
            }
            long long raw = as_int(v, n.loc);
            long long size = size_of(target);
            if (size >= 8) return raw;
            uint64_t mask = (1ull << (8 * size)) - 1;
            uint64_t trunc = static_cast<uint64_t>(raw) & mask;
            if (target.is_signed()) {
                uint64_t sign_bit = 1ull << (8 * size - 1);
                if (trunc & sign_bit) trunc |= ~mask;
            }
            return static_cast<long long>(trunc);
        }
        case NodeKind::UnaryOperator: {
            if (n.op == "*") {
                LValue lv = lvalue(n);
                return load(std::get<MemRef>(lv), n.loc);
            }
            if (n.op == "&") {
                LValue lv = lvalue(tu->node(n.children[0]));
                if (MemRef* m = std::get_if<MemRef>(&lv))
                    return Pointer{m->buf, m->off, m->type};
                throw UndefinedName(n.loc, "cannot take the address of a register variable");
            }
            long long v = as_int(eval(tu->node(n.children[0])), n.loc);
            if (n.op == "!") return v == 0 ? 1ll : 0ll;
            if (n.op == "-") return -v;
            throw UndefinedName(n.loc, "unknown unary operator '" + n.op + "'");
        }
        case NodeKind::BinaryOperator:
            return eval_binary(n);
        case NodeKind::CallExpr:
            return eval_call(n);
        default:
            throw UndefinedName(n.loc, "unexpected expression kind");
        }
    }

    Value eval_binary(const AstNode& n) {
        const TranslationUnit* tu = act().tu;
        if (n.op == "=") {
            Value rhs = eval(tu->node(n.children[1]));
            LValue lv = lvalue(tu->node(n.children[0]));
            if (Value** slot = std::get_if<Value*>(&lv)) {
                **slot = rhs;
            } else {
                MemRef& m = std::get<MemRef>(lv);
                store_scalar(m.buf, m.off, m.type, as_int(rhs, n.loc), n.loc);
            }
            return rhs;
        }
        Value lv = eval(tu->node(n.children[0]));
        Value rv = eval(tu->node(n.children[1]));

        // Pointer arithmetic and pointer comparison.
        if (std::holds_alternative<Pointer>(lv) || std::holds_alternative<Pointer>(rv)) {
            if (n.op == "+" || n.op == "-") {
                Pointer p = as_pointer(lv, n.loc);
                long long delta = as_int(rv, n.loc) * scalar_size(p.pointee);
                p.off += n.op == "+" ? delta : -delta;
                return p;
            }
            if (n.op == "==" || n.op == "!=") {
                Pointer a = as_pointer(lv, n.loc);
                Pointer b = as_pointer(rv, n.loc);
                bool eq = a.buf == b.buf && a.off == b.off;
                return (n.op == "==") == eq ? 1ll : 0ll;
            }
            throw UndefinedName(n.loc, "invalid pointer operation '" + n.op + "'");
        }

        long long a = as_int(lv, n.loc);
        long long b = as_int(rv, n.loc);
        if (n.op == "+") return a + b;
        if (n.op == "-") return a - b;
        if (n.op == "*") return a * b;
        if (n.op == "/") {
            if (b == 0) throw UndefinedName(n.loc, "division by zero");
            return a / b;
        }
        if (n.op == "%") {
            if (b == 0) throw UndefinedName(n.loc, "modulo by zero");
            return a % b;
        }
        if (n.op == "&") return a & b;
        if (n.op == "|") return a | b;
        if (n.op == "==") return a == b ? 1ll : 0ll;
        if (n.op == "!=") return a != b ? 1ll : 0ll;
        if (n.op == "<") return a < b ? 1ll : 0ll;
        if (n.op == "<=") return a <= b ? 1ll : 0ll;
        if (n.op == ">") return a > b ? 1ll : 0ll;
        if (n.op == ">=") return a >= b ? 1ll : 0ll;
        throw UndefinedName(n.loc, "unknown binary operator '" + n.op + "'");
    }

    std::string literal_bytes(const Pointer& p, const SourceLocation& loc) const {
        for (const auto& [bytes, id] : literal_buffers_) {
            if (id == p.buf) return bytes;
        }
        throw UndefinedName(loc, "expected a string literal argument");
    }

    Value eval_call(const AstNode& n) {
        const TranslationUnit* tu = act().tu;
        if (n.name.empty())
            throw UndefinedName(n.loc, "indirect calls are not supported");
        act().cur = n.loc;

        std::vector<Value> args;
        for (size_t i = 1; i < n.children.size(); i++)
            args.push_back(eval(tu->node(n.children[i])));

        if (n.name == "abort") {
            throw CrashSignal{CrashKind::Abort, n.loc};
        }
        if (n.name == "assert") {
            if (args.size() != 1 || !truthy(args[0]))
                throw CrashSignal{CrashKind::AssertionFailure, n.loc};
            return 0ll;
        }
        if (n.name == "input_eq" || n.name == "hash_eq") {
            if (args.size() != 3)
                throw UndefinedName(n.loc, n.name + " expects (pointer, len, literal)");
            Pointer p = as_pointer(args[0], n.loc);
            long long len = as_int(args[1], n.loc);
            std::string lit = literal_bytes(as_pointer(args[2], n.loc), n.loc);
            check_bounds(p.buf, p.off, len, n.loc, false);
            const uint8_t* data = buffers_[p.buf].data() + p.off;
            if (n.name == "input_eq") {
                bool eq = len == static_cast<long long>(lit.size()) &&
                          std::equal(lit.begin(), lit.end(), data);
                return eq ? 1ll : 0ll;
            }
            uint64_t want = std::stoull(lit, nullptr, 16);
            return fnv1a64(data, static_cast<size_t>(len)) == want ? 1ll : 0ll;
        }
        if (n.name == "memcpy") {
            if (args.size() != 3)
                throw UndefinedName(n.loc, "memcpy expects (dst, src, n)");
            Pointer dst = as_pointer(args[0], n.loc);
            Pointer src = as_pointer(args[1], n.loc);
            long long count = as_int(args[2], n.loc);
            check_bounds(src.buf, src.off, count, n.loc, false);
            check_bounds(dst.buf, dst.off, count, n.loc, true);
            for (long long i = 0; i < count; i++)
                buffers_[dst.buf][dst.off + i] = buffers_[src.buf][src.off + i];
            return 0ll;
        }
        if (n.name == "strcpy") {
            if (args.size() != 2)
                throw UndefinedName(n.loc, "strcpy expects (dst, src)");
            Pointer dst = as_pointer(args[0], n.loc);
            Pointer src = as_pointer(args[1], n.loc);
            long long i = 0;
            while (true) {
                check_bounds(src.buf, src.off + i, 1, n.loc, false);
                uint8_t byte = buffers_[src.buf][src.off + i];
                check_bounds(dst.buf, dst.off + i, 1, n.loc, true);
                buffers_[dst.buf][dst.off + i] = byte;
                if (byte == 0) break;
                i++;
            }
            return 0ll;
        }
        return call(n.name, args, n.loc);
    }

    std::map<std::string, Value> globals_;
};

} // namespace

RunResult execute(const TranslationUnit& tu,
                  const std::vector<const TranslationUnit*>& extra_tus,
                  const std::vector<uint8_t>& input, const std::string& entry) {
    Machine machine(tu, extra_tus, input);
    return machine.run(entry);
}

std::string render_trace(const RunResult& result) {
    std::set<std::string> lines;
    for (const auto& [file, line] : result.slice.lines)
        lines.insert("L " + file + " " + std::to_string(line));
    for (const FunctionKey& f : result.functions)
        lines.insert("F " + f.file + " " + f.function);
    std::string out;
    for (const std::string& l : lines) out += l + "\n";
    return out;
}

void write_trace(const RunResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write trace file: " + path);
    out << render_trace(result);
}

std::string render_report(const CrashReport& report) {
    std::string out = std::string("ERROR: MiniSan: ") + to_string(report.kind) + " at " +
                      to_string(report.site) + "\n";
    for (size_t i = 0; i < report.stack.size(); i++) {
        const Frame& f = report.stack[i];
        out += "#" + std::to_string(i) + " in " + f.function + " " + f.file + ":" +
               std::to_string(f.line) + ":" + std::to_string(f.column) + "\n";
    }
    return out;
}

void write_report(const CrashReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write crash report: " + path);
    out << render_report(report);
}

} // namespace vx
