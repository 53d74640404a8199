#pragma once

// Line-oriented file formats shared by the explorer, the suite generator and
// the conformance runner. All files are UTF-8, one record per line:
//
//   # mbt-graph v1 model=<name> bounds=<k:v,...> V=<n> E=<m> D=<d> hash=<fnv64>
//   S <index> <state value>            index 1 first, ascending
//   E <from> <to> <action value>
//
//   # mbt-suite v1 model=<name> bounds=<k:v,...> algorithm=<alg> V= E= D= P= L= hash=<fnv64>
//   S <index> <state value>
//   P <edge-count> <action value> <dest-index> ...
//
// The hash covers every line after the header. Values use the canonical text
// form from value.hpp; labels stay opaque Values here and are decoded into
// Actions only by the conformance runner.

#include "mbt/error.hpp"
#include "mbt/explorer.hpp"
#include "mbt/tsg.hpp"
#include "mbt/value.hpp"

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mbt {

inline constexpr int kFormatVersion = 1;

using Bounds = std::map<std::string, std::int64_t>;

inline std::string bounds_to_text(const Bounds& b)
{
    if (b.empty()) return "-";
    std::string out;
    for (const auto& [k, v] : b) {
        if (!out.empty()) out.push_back(',');
        out += k + ":" + std::to_string(v);
    }
    return out;
}

inline Bounds bounds_from_text(std::string_view text)
{
    Bounds b;
    if (text == "-" || text.empty()) return b;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = text.substr(pos, comma - pos);
        auto colon = item.find(':');
        if (colon == std::string_view::npos) fail(ErrorCode::MalformedInput, "bad bounds entry '" + std::string(item) + "'");
        try {
            b[std::string(item.substr(0, colon))] = std::stoll(std::string(item.substr(colon + 1)));
        } catch (const std::exception&) {
            fail(ErrorCode::MalformedInput, "bad bounds value in '" + std::string(item) + "'");
        }
        pos = comma + 1;
    }
    return b;
}

struct LabeledEdge {
    std::size_t from = 0; // 0-based
    std::size_t to = 0;
    Value label;
};

/// Graph as stored on disk: opaque state values and labeled edges.
struct LabeledGraph {
    std::string model = "-";
    Bounds bounds;
    std::vector<Value> states;
    std::vector<LabeledEdge> edges;
};

inline LabeledGraph to_labeled(const TransitionGraph& g, std::string model, Bounds bounds)
{
    LabeledGraph out{std::move(model), std::move(bounds), {}, {}};
    out.states.reserve(g.states.size());
    for (const auto& s : g.states) out.states.push_back(s.to_value());
    out.edges.reserve(g.edges.size());
    for (const auto& e : g.edges) out.edges.push_back({e.from, e.to, e.action.to_value()});
    return out;
}

inline tsg::CoverGraph to_cover_graph(const LabeledGraph& g)
{
    tsg::CoverGraph c;
    c.vertex_count = static_cast<int>(g.states.size());
    c.source = 0;
    c.edges.reserve(g.edges.size());
    for (const auto& e : g.edges) c.edges.emplace_back(static_cast<int>(e.from), static_cast<int>(e.to));
    return c;
}

struct SuiteStep {
    Value label;
    std::size_t dest = 0; // 1-based state index
};

struct SuiteFile {
    std::string model = "-";
    Bounds bounds;
    std::string algorithm = "-";
    std::size_t edge_count = 0;
    std::size_t diameter = 0;
    std::vector<Value> states;
    std::vector<std::vector<SuiteStep>> paths;
    std::string hash; // filled by write_suite / read_suite

    std::size_t total_length() const
    {
        std::size_t n = 0;
        for (const auto& p : paths) n += p.size();
        return n;
    }
};

inline SuiteFile make_suite_file(const LabeledGraph& g, const tsg::TestSuite& suite, tsg::Algorithm algorithm)
{
    SuiteFile f;
    f.model = g.model;
    f.bounds = g.bounds;
    f.algorithm = tsg::to_string(algorithm);
    f.edge_count = g.edges.size();
    f.diameter = g.states.empty() ? 0 : static_cast<std::size_t>(tsg::diameter(to_cover_graph(g)));
    f.states = g.states;
    f.paths.reserve(suite.paths.size());
    for (const auto& p : suite.paths) {
        std::vector<SuiteStep> steps;
        steps.reserve(p.size());
        for (int id : p) {
            const auto& e = g.edges[static_cast<std::size_t>(id)];
            steps.push_back({e.label, e.to + 1});
        }
        f.paths.push_back(std::move(steps));
    }
    return f;
}

namespace detail {

inline void append_states(std::string& body, const std::vector<Value>& states)
{
    for (std::size_t i = 0; i < states.size(); ++i) {
        body += "S ";
        body += std::to_string(i + 1);
        body.push_back(' ');
        write_value(body, states[i]);
        body.push_back('\n');
    }
}

struct Header {
    std::string kind;
    std::map<std::string, std::string> fields;

    const std::string& get(const std::string& key) const
    {
        auto it = fields.find(key);
        if (it == fields.end()) fail(ErrorCode::MalformedInput, "line 1: header lacks '" + key + "'");
        return it->second;
    }

    std::size_t get_size(const std::string& key) const
    {
        try {
            return static_cast<std::size_t>(std::stoull(get(key)));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            fail(ErrorCode::MalformedInput, "line 1: bad number for '" + key + "'");
        }
    }
};

inline std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return lines;
}

inline Header parse_header(std::string_view line)
{
    std::istringstream in{std::string(line)};
    std::string hash_mark, kind, version;
    in >> hash_mark >> kind >> version;
    if (hash_mark != "#" || kind.rfind("mbt-", 0) != 0)
        fail(ErrorCode::MalformedInput, "line 1: missing mbt header");
    if (version != "v" + std::to_string(kFormatVersion))
        fail(ErrorCode::LogVersionMismatch, "line 1: unsupported format version '" + version + "'");
    Header h{kind.substr(4), {}};
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) fail(ErrorCode::MalformedInput, "line 1: bad header field '" + tok + "'");
        h.fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return h;
}

inline std::string body_hash(const std::vector<std::string_view>& lines)
{
    std::uint64_t h = fnv1a("");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        h = fnv1a(lines[i], h);
        h = fnv1a("\n", h);
    }
    return hex64(h);
}

inline void check_hash(const Header& h, const std::vector<std::string_view>& lines)
{
    std::string actual = body_hash(lines);
    if (h.get("hash") != actual)
        fail(ErrorCode::HashMismatch, "content hash " + actual + " does not match header hash " + h.get("hash"));
}

[[noreturn]] inline void line_error(std::size_t line, const std::string& what)
{
    fail(ErrorCode::MalformedInput, "line " + std::to_string(line) + ": " + what);
}

/// Reads `S <index> <value>` expecting `expected_index`.
inline Value read_state_line(std::string_view line, std::size_t lineno, std::size_t expected_index)
{
    try {
        ValueReader r(line.substr(1));
        auto idx = r.read_int();
        if (idx != static_cast<std::int64_t>(expected_index))
            line_error(lineno, "expected state index " + std::to_string(expected_index));
        Value v = r.read();
        r.expect_end();
        return v;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedInput) throw;
        std::string what = e.what();
        if (what.find("line ") != std::string::npos) throw;
        line_error(lineno, what);
    }
}

template <class F>
auto with_line(std::size_t lineno, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedInput) throw;
        std::string what = e.what();
        if (what.find("line ") != std::string::npos) throw;
        line_error(lineno, what);
    } catch (const std::logic_error& e) {
        line_error(lineno, e.what());
    }
}

} // namespace detail

inline std::string write_graph(const LabeledGraph& g)
{
    std::string body;
    detail::append_states(body, g.states);
    for (const auto& e : g.edges) {
        body += "E " + std::to_string(e.from + 1) + " " + std::to_string(e.to + 1) + " ";
        write_value(body, e.label);
        body.push_back('\n');
    }
    std::size_t d = 0;
    if (!g.states.empty()) d = static_cast<std::size_t>(tsg::diameter(to_cover_graph(g)));
    std::uint64_t h = fnv1a(body);
    return "# mbt-graph v" + std::to_string(kFormatVersion) + " model=" + g.model + " bounds="
           + bounds_to_text(g.bounds) + " V=" + std::to_string(g.states.size()) + " E="
           + std::to_string(g.edges.size()) + " D=" + std::to_string(d) + " hash=" + hex64(h) + "\n" + body;
}

/// Plain edge list: one `<tail> <head> [label]` per line, 1-based vertices,
/// vertex 1 is the source; blank lines and `#` comments are ignored.
inline LabeledGraph read_edge_list(std::string_view text)
{
    LabeledGraph g;
    std::size_t max_vertex = 1;
    auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = lines[i];
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') continue;
        detail::with_line(i + 1, [&] {
            ValueReader r(line);
            auto u = r.read_int();
            auto v = r.read_int();
            if (u < 1 || v < 1) fail(ErrorCode::MalformedInput, "vertex ids start at 1");
            Value label = r.at_end() ? Value("e" + std::to_string(g.edges.size() + 1)) : r.read();
            r.expect_end();
            max_vertex = std::max({max_vertex, static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
            g.edges.push_back({static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1), std::move(label)});
        });
    }
    g.states.assign(max_vertex, Value::nil());
    return g;
}

inline LabeledGraph read_graph(std::string_view text)
{
    auto lines = detail::split_lines(text);
    if (lines.empty()) fail(ErrorCode::MalformedInput, "line 1: empty graph file");
    if (lines[0].rfind("# mbt-", 0) != 0) return read_edge_list(text);

    auto h = detail::parse_header(lines[0]);
    if (h.kind != "graph") fail(ErrorCode::MalformedInput, "line 1: expected an mbt-graph file, got mbt-" + h.kind);
    LabeledGraph g;
    g.model = h.get("model");
    g.bounds = bounds_from_text(h.get("bounds"));
    const std::size_t n = h.get_size("V");
    const std::size_t m = h.get_size("E");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = lines[i];
        if (line.empty()) continue;
        if (line.rfind("S ", 0) == 0) {
            if (!g.edges.empty()) detail::line_error(i + 1, "state after edges");
            g.states.push_back(detail::read_state_line(line, i + 1, g.states.size() + 1));
        } else if (line.rfind("E ", 0) == 0) {
            detail::with_line(i + 1, [&] {
                ValueReader r(line.substr(1));
                auto u = r.read_int();
                auto v = r.read_int();
                if (u < 1 || v < 1 || static_cast<std::size_t>(u) > n || static_cast<std::size_t>(v) > n)
                    fail(ErrorCode::MalformedInput, "edge endpoint out of range");
                Value label = r.read();
                r.expect_end();
                g.edges.push_back({static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1), std::move(label)});
            });
        } else {
            detail::line_error(i + 1, "unknown record");
        }
    }
    if (g.states.size() != n) fail(ErrorCode::MalformedInput, "line " + std::to_string(lines.size()) + ": expected " + std::to_string(n) + " states, found " + std::to_string(g.states.size()));
    if (g.edges.size() != m) fail(ErrorCode::MalformedInput, "line " + std::to_string(lines.size()) + ": expected " + std::to_string(m) + " edges, found " + std::to_string(g.edges.size()));
    detail::check_hash(h, lines);
    return g;
}

inline std::string write_suite(SuiteFile& f)
{
    std::string body;
    detail::append_states(body, f.states);
    for (const auto& p : f.paths) {
        body += "P " + std::to_string(p.size());
        for (const auto& s : p) {
            body.push_back(' ');
            write_value(body, s.label);
            body += " " + std::to_string(s.dest);
        }
        body.push_back('\n');
    }
    f.hash = hex64(fnv1a(body));
    return "# mbt-suite v" + std::to_string(kFormatVersion) + " model=" + f.model + " bounds="
           + bounds_to_text(f.bounds) + " algorithm=" + f.algorithm + " V=" + std::to_string(f.states.size())
           + " E=" + std::to_string(f.edge_count) + " D=" + std::to_string(f.diameter) + " P="
           + std::to_string(f.paths.size()) + " L=" + std::to_string(f.total_length()) + " hash=" + f.hash + "\n"
           + body;
}

inline SuiteFile read_suite(std::string_view text)
{
    auto lines = detail::split_lines(text);
    if (lines.empty()) fail(ErrorCode::MalformedInput, "line 1: empty suite file");
    auto h = detail::parse_header(lines[0]);
    if (h.kind != "suite") fail(ErrorCode::MalformedInput, "line 1: expected an mbt-suite file, got mbt-" + h.kind);
    SuiteFile f;
    f.model = h.get("model");
    f.bounds = bounds_from_text(h.get("bounds"));
    f.algorithm = h.get("algorithm");
    f.edge_count = h.get_size("E");
    f.diameter = h.get_size("D");
    f.hash = h.get("hash");
    const std::size_t n = h.get_size("V");
    const std::size_t p = h.get_size("P");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto line = lines[i];
        if (line.empty()) continue;
        if (line.rfind("S ", 0) == 0) {
            if (!f.paths.empty()) detail::line_error(i + 1, "state after paths");
            f.states.push_back(detail::read_state_line(line, i + 1, f.states.size() + 1));
        } else if (line.rfind("P ", 0) == 0) {
            detail::with_line(i + 1, [&] {
                ValueReader r(line.substr(1));
                auto count = r.read_int();
                if (count < 0) fail(ErrorCode::MalformedInput, "negative edge count");
                std::vector<SuiteStep> steps;
                for (std::int64_t k = 0; k < count; ++k) {
                    Value label = r.read();
                    auto dest = r.read_int();
                    if (dest < 1 || static_cast<std::size_t>(dest) > n)
                        fail(ErrorCode::MalformedInput, "destination index " + std::to_string(dest) + " out of range");
                    steps.push_back({std::move(label), static_cast<std::size_t>(dest)});
                }
                r.expect_end();
                f.paths.push_back(std::move(steps));
            });
        } else {
            detail::line_error(i + 1, "unknown record");
        }
    }
    if (f.states.size() != n || n == 0)
        fail(ErrorCode::MalformedInput, "line " + std::to_string(lines.size()) + ": expected " + std::to_string(n) + " states, found " + std::to_string(f.states.size()));
    if (f.paths.size() != p)
        fail(ErrorCode::MalformedInput, "line " + std::to_string(lines.size()) + ": expected " + std::to_string(p) + " paths, found " + std::to_string(f.paths.size()));
    detail::check_hash(h, lines);
    return f;
}

// ---------------------------------------------------------------------------
// Graphviz export. Unlike a plain state dump, every edge keeps its full
// action label so the graph can be read back.

namespace detail {

inline std::string dot_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string dot_label(std::string_view line, std::size_t lineno)
{
    auto start = line.find("[label=\"");
    if (start == std::string_view::npos) line_error(lineno, "missing label attribute");
    std::string out;
    for (std::size_t i = start + 8; i < line.size(); ++i) {
        char c = line[i];
        if (c == '\\' && i + 1 < line.size()) {
            out.push_back(line[++i]);
            continue;
        }
        if (c == '"') return out;
        out.push_back(c);
    }
    line_error(lineno, "unterminated label");
}

} // namespace detail

inline std::string export_dot(const LabeledGraph& g)
{
    std::string out = "digraph transitions {\n";
    for (std::size_t i = 0; i < g.states.size(); ++i)
        out += "  " + std::to_string(i + 1) + " [label=\"" + detail::dot_escape(to_text(g.states[i])) + "\"];\n";
    for (const auto& e : g.edges)
        out += "  " + std::to_string(e.from + 1) + " -> " + std::to_string(e.to + 1) + " [label=\""
               + detail::dot_escape(to_text(e.label)) + "\"];\n";
    out += "}\n";
    return out;
}

/// Reads back the output of export_dot.
inline LabeledGraph import_dot(std::string_view text)
{
    LabeledGraph g;
    auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = lines[i];
        auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        line = line.substr(first);
        if (line.rfind("digraph", 0) == 0 || line == "}") continue;
        detail::with_line(i + 1, [&] {
            Value label = parse_value(detail::dot_label(line, i + 1));
            auto arrow = line.find(" -> ");
            auto bracket = line.find(" [label=");
            if (arrow != std::string_view::npos && arrow < bracket) {
                auto u = std::stoull(std::string(line.substr(0, arrow)));
                auto v = std::stoull(std::string(line.substr(arrow + 4, bracket - arrow - 4)));
                g.edges.push_back({u - 1, v - 1, std::move(label)});
            } else {
                auto idx = std::stoull(std::string(line.substr(0, bracket)));
                if (idx != g.states.size() + 1) fail(ErrorCode::MalformedInput, "node ids must be dense and ascending");
                g.states.push_back(std::move(label));
            }
        });
    }
    return g;
}

} // namespace mbt
