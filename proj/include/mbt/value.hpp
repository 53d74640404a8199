#pragma once

// Model values: the symbolic vocabulary shared by reference models, actor
// to_model() images, and every file format. A value is nil, a boolean, an
// integer, a string, a sequence, a set, or a record. Sets and records are
// kept in canonical order at all times, so structural equality and the text
// form coincide.
//
// Text form (no whitespace outside string literals):
//   nil | true | false | -12 | "str" | <a,b> | {a,b} | [key=v,key2=v]

#include "mbt/error.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mbt {

class Value;

struct SeqValue {
    std::vector<Value> items;
};

struct SetValue {
    std::vector<Value> items; // sorted, unique
};

struct RecordValue {
    std::vector<std::pair<std::string, Value>> fields; // sorted by key, unique keys
};

class Value {
public:
    enum class Kind { Nil, Bool, Int, String, Seq, Set, Record };

    Value() = default;
    Value(bool b) : data_(b) {}
    Value(std::int64_t i) : data_(i) {}
    Value(int i) : data_(static_cast<std::int64_t>(i)) {}
    Value(std::size_t i) : data_(static_cast<std::int64_t>(i)) {}
    Value(std::string s) : data_(std::move(s)) {}
    Value(const char* s) : data_(std::string(s)) {}

    static Value nil() { return Value{}; }

    static Value seq(std::vector<Value> items)
    {
        Value v;
        v.data_ = SeqValue{std::move(items)};
        return v;
    }

    static Value set(std::vector<Value> items);
    static Value record(std::vector<std::pair<std::string, Value>> fields);
    static Value record(std::initializer_list<std::pair<std::string, Value>> fields)
    {
        return record(std::vector<std::pair<std::string, Value>>(fields));
    }

    Kind kind() const noexcept { return static_cast<Kind>(data_.index()); }
    bool is_nil() const noexcept { return kind() == Kind::Nil; }
    bool is_bool() const noexcept { return kind() == Kind::Bool; }
    bool is_int() const noexcept { return kind() == Kind::Int; }
    bool is_string() const noexcept { return kind() == Kind::String; }
    bool is_seq() const noexcept { return kind() == Kind::Seq; }
    bool is_set() const noexcept { return kind() == Kind::Set; }
    bool is_record() const noexcept { return kind() == Kind::Record; }

    bool as_bool() const { return get<bool>("bool"); }
    std::int64_t as_int() const { return get<std::int64_t>("int"); }
    const std::string& as_string() const { return get<std::string>("string"); }

    /// Elements of a sequence or a set.
    const std::vector<Value>& items() const
    {
        if (is_seq()) return std::get<SeqValue>(data_).items;
        if (is_set()) return std::get<SetValue>(data_).items;
        fail(ErrorCode::MalformedInput, "value is not a sequence or set: " + describe_kind());
    }

    const std::vector<std::pair<std::string, Value>>& fields() const
    {
        return get<RecordValue>("record").fields;
    }

    const Value* find(std::string_view key) const
    {
        const auto& fs = fields();
        auto it = std::lower_bound(fs.begin(), fs.end(), key,
                                   [](const auto& f, std::string_view k) { return f.first < k; });
        if (it == fs.end() || it->first != key) return nullptr;
        return &it->second;
    }

    const Value& at(std::string_view key) const
    {
        if (const Value* v = find(key)) return *v;
        fail(ErrorCode::MalformedInput, "record has no field '" + std::string(key) + "'");
    }

    bool contains(const Value& member) const
    {
        const auto& xs = get<SetValue>("set").items;
        return std::binary_search(xs.begin(), xs.end(), member);
    }

    friend std::strong_ordering operator<=>(const Value& a, const Value& b);
    friend bool operator==(const Value& a, const Value& b) { return (a <=> b) == 0; }

private:
    template <class T>
    const T& get(const char* expected) const
    {
        if (const T* p = std::get_if<T>(&data_)) return *p;
        fail(ErrorCode::MalformedInput, std::string("expected ") + expected + ", got " + describe_kind());
    }

    std::string describe_kind() const
    {
        static constexpr const char* names[] = {"nil", "bool", "int", "string", "seq", "set", "record"};
        return names[data_.index()];
    }

    std::variant<std::monostate, bool, std::int64_t, std::string, SeqValue, SetValue, RecordValue> data_;
};

namespace detail {

template <class Range, class Cmp>
std::strong_ordering lex(const Range& a, const Range& b, Cmp cmp)
{
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = cmp(a[i], b[i]); c != 0) return c;
    }
    return a.size() <=> b.size();
}

} // namespace detail

inline std::strong_ordering operator<=>(const Value& a, const Value& b)
{
    if (a.data_.index() != b.data_.index()) return a.data_.index() <=> b.data_.index();
    auto by_value = [](const Value& x, const Value& y) { return x <=> y; };
    switch (a.kind()) {
    case Value::Kind::Nil: return std::strong_ordering::equal;
    case Value::Kind::Bool: return std::get<bool>(a.data_) <=> std::get<bool>(b.data_);
    case Value::Kind::Int: return std::get<std::int64_t>(a.data_) <=> std::get<std::int64_t>(b.data_);
    case Value::Kind::String: {
        int c = std::get<std::string>(a.data_).compare(std::get<std::string>(b.data_));
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }
    case Value::Kind::Seq: return detail::lex(std::get<SeqValue>(a.data_).items, std::get<SeqValue>(b.data_).items, by_value);
    case Value::Kind::Set: return detail::lex(std::get<SetValue>(a.data_).items, std::get<SetValue>(b.data_).items, by_value);
    case Value::Kind::Record:
        return detail::lex(std::get<RecordValue>(a.data_).fields, std::get<RecordValue>(b.data_).fields,
                           [](const auto& x, const auto& y) {
                               if (int c = x.first.compare(y.first); c != 0)
                                   return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
                               return x.second <=> y.second;
                           });
    }
    return std::strong_ordering::equal;
}

inline Value Value::set(std::vector<Value> items)
{
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    Value v;
    v.data_ = SetValue{std::move(items)};
    return v;
}

inline Value Value::record(std::vector<std::pair<std::string, Value>> fields)
{
    std::sort(fields.begin(), fields.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    for (std::size_t i = 1; i < fields.size(); ++i) {
        if (fields[i].first == fields[i - 1].first)
            fail(ErrorCode::MalformedInput, "duplicate record key '" + fields[i].first + "'");
    }
    Value v;
    v.data_ = RecordValue{std::move(fields)};
    return v;
}

// ---------------------------------------------------------------------------
// Canonical text form

namespace detail {

inline bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

inline bool is_plain_key(std::string_view k)
{
    if (k.empty() || !is_ident_start(k[0])) return false;
    if (k == "nil" || k == "true" || k == "false") return false;
    return std::all_of(k.begin(), k.end(), is_ident_char);
}

inline void write_string(std::string& out, std::string_view s)
{
    static constexpr char hex[] = "0123456789abcdef";
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default:
            if (c < 0x20 || c == 0x7f) {
                out += "\\x";
                out.push_back(hex[c >> 4]);
                out.push_back(hex[c & 0xf]);
            } else {
                out.push_back(static_cast<char>(c));
            }
        }
    }
    out.push_back('"');
}

} // namespace detail

inline void write_value(std::string& out, const Value& v)
{
    switch (v.kind()) {
    case Value::Kind::Nil: out += "nil"; break;
    case Value::Kind::Bool: out += v.as_bool() ? "true" : "false"; break;
    case Value::Kind::Int: out += std::to_string(v.as_int()); break;
    case Value::Kind::String: detail::write_string(out, v.as_string()); break;
    case Value::Kind::Seq:
    case Value::Kind::Set: {
        out.push_back(v.is_seq() ? '<' : '{');
        bool first = true;
        for (const auto& x : v.items()) {
            if (!first) out.push_back(',');
            first = false;
            write_value(out, x);
        }
        out.push_back(v.is_seq() ? '>' : '}');
        break;
    }
    case Value::Kind::Record: {
        out.push_back('[');
        bool first = true;
        for (const auto& [k, x] : v.fields()) {
            if (!first) out.push_back(',');
            first = false;
            if (detail::is_plain_key(k))
                out += k;
            else
                detail::write_string(out, k);
            out.push_back('=');
            write_value(out, x);
        }
        out.push_back(']');
        break;
    }
    }
}

inline std::string to_text(const Value& v)
{
    std::string out;
    write_value(out, v);
    return out;
}

/// Recursive-descent reader for the canonical text form. Sets and records are
/// re-canonicalized on read, so hand-written input in any order is accepted.
class ValueReader {
public:
    explicit ValueReader(std::string_view text) : text_(text) {}

    Value read()
    {
        skip_ws();
        if (pos_ >= text_.size()) error("unexpected end of input");
        char c = text_[pos_];
        if (c == '"') return Value(read_string());
        if (c == '<') return Value::seq(read_list('<', '>'));
        if (c == '{') return Value::set(read_list('{', '}'));
        if (c == '[') return read_record();
        if (c == '-' || (c >= '0' && c <= '9')) return Value(read_int());
        if (detail::is_ident_start(c)) {
            std::string word = read_ident();
            if (word == "nil") return Value::nil();
            if (word == "true") return Value(true);
            if (word == "false") return Value(false);
            error("unknown literal '" + word + "'");
        }
        error(std::string("unexpected character '") + c + "'");
    }

    std::int64_t read_int()
    {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
        std::size_t digits = pos_;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
        if (pos_ == digits) error("expected integer");
        try {
            return std::stoll(std::string(text_.substr(start, pos_ - start)));
        } catch (const std::exception&) {
            error("integer out of range");
        }
    }

    std::string read_word()
    {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\t') ++pos_;
        if (start == pos_) error("expected token");
        return std::string(text_.substr(start, pos_ - start));
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
    }

    bool at_end()
    {
        skip_ws();
        return pos_ >= text_.size();
    }

    void expect_end()
    {
        if (!at_end()) error("trailing characters");
    }

    std::size_t position() const { return pos_; }

private:
    [[noreturn]] void error(const std::string& msg) const
    {
        fail(ErrorCode::MalformedInput, msg + " at column " + std::to_string(pos_ + 1));
    }

    std::string read_ident()
    {
        std::size_t start = pos_;
        while (pos_ < text_.size() && detail::is_ident_char(text_[pos_])) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string read_string()
    {
        ++pos_; // opening quote
        std::string out;
        while (true) {
            if (pos_ >= text_.size()) error("unterminated string");
            char c = text_[pos_++];
            if (c == '"') return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (pos_ >= text_.size()) error("dangling escape");
            char e = text_[pos_++];
            switch (e) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 'x': {
                if (pos_ + 2 > text_.size()) error("short \\x escape");
                out.push_back(static_cast<char>(std::stoi(std::string(text_.substr(pos_, 2)), nullptr, 16)));
                pos_ += 2;
                break;
            }
            default: error(std::string("unknown escape \\") + e);
            }
        }
    }

    std::vector<Value> read_list(char open, char close)
    {
        ++pos_;
        (void)open;
        std::vector<Value> items;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == close) {
            ++pos_;
            return items;
        }
        while (true) {
            items.push_back(read());
            skip_ws();
            if (pos_ >= text_.size()) error("unterminated collection");
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == close) {
                ++pos_;
                return items;
            }
            error("expected ',' or closing bracket");
        }
    }

    Value read_record()
    {
        ++pos_;
        std::vector<std::pair<std::string, Value>> fields;
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ']') {
            ++pos_;
            return Value::record(std::move(fields));
        }
        while (true) {
            skip_ws();
            std::string key;
            if (pos_ < text_.size() && text_[pos_] == '"')
                key = read_string();
            else if (pos_ < text_.size() && detail::is_ident_start(text_[pos_]))
                key = read_ident();
            else
                error("expected record key");
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != '=') error("expected '='");
            ++pos_;
            fields.emplace_back(std::move(key), read());
            skip_ws();
            if (pos_ >= text_.size()) error("unterminated record");
            if (text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (text_[pos_] == ']') {
                ++pos_;
                return Value::record(std::move(fields));
            }
            error("expected ',' or ']'");
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline Value parse_value(std::string_view text)
{
    ValueReader reader(text);
    Value v = reader.read();
    reader.expect_end();
    return v;
}

/// FNV-1a, 64 bit. Used for content hashes in file headers; stable across
/// processes and platforms.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t h)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

} // namespace mbt
