#ifndef LAPSOM_DOT_HPP
#define LAPSOM_DOT_HPP

#include <cctype>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lapsom/error.hpp"

namespace lapsom::dot {

using Attributes = std::vector<std::pair<std::string, std::string>>;

struct Node
{
    std::string id;
    Attributes attrs;
};

struct Edge
{
    std::string from;
    std::string to;
    Attributes attrs;
};

/// Flat DOT document: enough for rendering hand-off and round-trip checks.
/// Subgraphs are not modelled.
struct Graph
{
    std::string name;
    bool directed = false;
    Attributes graph_attrs;
    Attributes node_defaults;
    Attributes edge_defaults;
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    const Node* find_node(const std::string& id) const
    {
        for (const auto& n : nodes)
            if (n.id == id)
                return &n;
        return nullptr;
    }
};

inline const std::string* attr(const Attributes& attrs, const std::string& key)
{
    for (const auto& [k, v] : attrs)
        if (k == key)
            return &v;
    return nullptr;
}

/// Quoted DOT identifier with " and \ escaped.
inline std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    out += '"';
    return out;
}

namespace detail {

inline void write_attrs(std::ostream& out, const Attributes& attrs)
{
    if (attrs.empty())
        return;
    out << " [";
    for (std::size_t i = 0; i < attrs.size(); ++i)
        out << (i ? ", " : "") << attrs[i].first << '=' << quote(attrs[i].second);
    out << ']';
}

} // namespace detail

inline void write(std::ostream& out, const Graph& g)
{
    out << (g.directed ? "digraph " : "graph ") << quote(g.name) << " {\n";
    if (!g.graph_attrs.empty()) {
        out << "  graph";
        detail::write_attrs(out, g.graph_attrs);
        out << ";\n";
    }
    if (!g.node_defaults.empty()) {
        out << "  node";
        detail::write_attrs(out, g.node_defaults);
        out << ";\n";
    }
    if (!g.edge_defaults.empty()) {
        out << "  edge";
        detail::write_attrs(out, g.edge_defaults);
        out << ";\n";
    }
    for (const auto& n : g.nodes) {
        out << "  " << quote(n.id);
        detail::write_attrs(out, n.attrs);
        out << ";\n";
    }
    const char* op = g.directed ? " -> " : " -- ";
    for (const auto& e : g.edges) {
        out << "  " << quote(e.from) << op << quote(e.to);
        detail::write_attrs(out, e.attrs);
        out << ";\n";
    }
    out << "}\n";
}

inline std::string to_string(const Graph& g)
{
    std::ostringstream s;
    write(s, g);
    return s.str();
}

// ---------------------------------------------------------------------------
// Parser for the subset of the DOT grammar this library emits, plus the usual
// extras: bare and numeral IDs, `strict`, edge chains, attribute statements,
// `a = b` statements, and //, /* */ and # comments.

namespace detail {

enum class Tok { Id, LBrace, RBrace, LBracket, RBracket, Semi, Comma, Equals, EdgeOp, End };

struct Token
{
    Tok kind;
    std::string text;
    bool quoted = false;
    std::size_t line = 1;
};

class Lexer
{
public:
    explicit Lexer(std::string src) : src_(std::move(src)) {}

    Token next()
    {
        skip();
        Token t{Tok::End, "", false, line_};
        if (pos_ >= src_.size())
            return t;
        const char c = src_[pos_];
        auto single = [&](Tok k) {
            ++pos_;
            t.kind = k;
            t.text = std::string(1, c);
            return t;
        };
        switch (c) {
        case '{': return single(Tok::LBrace);
        case '}': return single(Tok::RBrace);
        case '[': return single(Tok::LBracket);
        case ']': return single(Tok::RBracket);
        case ';': return single(Tok::Semi);
        case ',': return single(Tok::Comma);
        case '=': return single(Tok::Equals);
        default: break;
        }
        if (c == '-' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '-' || src_[pos_ + 1] == '>')) {
            t.kind = Tok::EdgeOp;
            t.text = src_.substr(pos_, 2);
            pos_ += 2;
            return t;
        }
        if (c == '"') {
            ++pos_;
            t.kind = Tok::Id;
            t.quoted = true;
            for (;;) {
                if (pos_ >= src_.size())
                    throw InputError("DOT line " + std::to_string(t.line) + ": unterminated string");
                const char d = src_[pos_++];
                if (d == '"')
                    break;
                if (d == '\\' && pos_ < src_.size()) {
                    const char e = src_[pos_++];
                    if (e == '"' || e == '\\')
                        t.text += e;
                    else if (e == 'n')
                        t.text += '\n'; // the writer's line-break escape
                    else if (e == '\n')
                        ++line_; // line continuation
                    else {
                        t.text += '\\';
                        t.text += e;
                    }
                    continue;
                }
                if (d == '\n')
                    ++line_;
                t.text += d;
            }
            return t;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' ||
            static_cast<unsigned char>(c) >= 0x80) {
            t.kind = Tok::Id;
            while (pos_ < src_.size()) {
                const auto d = static_cast<unsigned char>(src_[pos_]);
                if (!(std::isalnum(d) || d == '_' || d == '.' || d >= 0x80 ||
                      (d == '-' && !(pos_ + 1 < src_.size() && (src_[pos_ + 1] == '-' || src_[pos_ + 1] == '>')))))
                    break;
                t.text += src_[pos_++];
            }
            return t;
        }
        throw InputError("DOT line " + std::to_string(line_) + ": unexpected character '" + std::string(1, c) + "'");
    }

private:
    void skip()
    {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            const bool line_start = pos_ == 0 || src_[pos_ - 1] == '\n';
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '#' && line_start) {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    ++pos_;
            } else if (src_.compare(pos_, 2, "//") == 0) {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    ++pos_;
            } else if (src_.compare(pos_, 2, "/*") == 0) {
                const auto end = src_.find("*/", pos_ + 2);
                if (end == std::string::npos)
                    throw InputError("DOT line " + std::to_string(line_) + ": unterminated comment");
                for (std::size_t i = pos_; i < end; ++i)
                    line_ += src_[i] == '\n';
                pos_ = end + 2;
            } else {
                break;
            }
        }
    }

    std::string src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

inline bool keyword(const Token& t, const char* kw)
{
    if (t.kind != Tok::Id || t.quoted)
        return false;
    std::string lower;
    for (char c : t.text)
        lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower == kw;
}

class Parser
{
public:
    explicit Parser(std::string src) : lex_(std::move(src)) { advance(); }

    Graph parse()
    {
        Graph g;
        if (keyword(tok_, "strict"))
            advance();
        if (keyword(tok_, "graph"))
            g.directed = false;
        else if (keyword(tok_, "digraph"))
            g.directed = true;
        else
            fail("expected 'graph' or 'digraph'");
        directed_ = g.directed;
        advance();
        if (tok_.kind == Tok::Id) {
            g.name = tok_.text;
            advance();
        }
        expect(Tok::LBrace, "'{'");
        while (tok_.kind != Tok::RBrace) {
            if (tok_.kind == Tok::End)
                fail("missing '}'");
            statement(g);
        }
        advance();
        if (tok_.kind != Tok::End)
            fail("trailing content after graph body");
        return g;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw InputError("DOT line " + std::to_string(tok_.line) + ": " + what);
    }

    void advance() { tok_ = lex_.next(); }

    void expect(Tok k, const char* what)
    {
        if (tok_.kind != k)
            fail(std::string("expected ") + what);
        advance();
    }

    std::string id()
    {
        if (tok_.kind != Tok::Id)
            fail("expected an identifier");
        auto text = tok_.text;
        advance();
        return text;
    }

    Attributes attr_list()
    {
        Attributes attrs;
        while (tok_.kind == Tok::LBracket) {
            advance();
            while (tok_.kind != Tok::RBracket) {
                auto key = id();
                expect(Tok::Equals, "'=' in attribute");
                attrs.emplace_back(std::move(key), id());
                if (tok_.kind == Tok::Comma || tok_.kind == Tok::Semi)
                    advance();
            }
            advance();
        }
        return attrs;
    }

    void statement(Graph& g)
    {
        if (tok_.kind == Tok::Semi) {
            advance();
            return;
        }
        if (keyword(tok_, "subgraph") || tok_.kind == Tok::LBrace)
            fail("subgraphs are not supported");
        if (keyword(tok_, "graph") || keyword(tok_, "node") || keyword(tok_, "edge")) {
            const auto which = tok_;
            advance();
            auto attrs = attr_list();
            auto& target = keyword(which, "graph") ? g.graph_attrs
                           : keyword(which, "node") ? g.node_defaults
                                                    : g.edge_defaults;
            target.insert(target.end(), attrs.begin(), attrs.end());
        } else {
            auto first = id();
            if (tok_.kind == Tok::Equals) {
                advance();
                g.graph_attrs.emplace_back(std::move(first), id());
            } else if (tok_.kind == Tok::EdgeOp) {
                std::vector<std::string> chain{std::move(first)};
                while (tok_.kind == Tok::EdgeOp) {
                    if ((tok_.text == "->") != directed_)
                        fail(directed_ ? "'--' in a digraph" : "'->' in an undirected graph");
                    advance();
                    chain.push_back(id());
                }
                const auto attrs = attr_list();
                for (const auto& n : chain)
                    ensure_node(g, n);
                for (std::size_t i = 0; i + 1 < chain.size(); ++i)
                    g.edges.push_back({chain[i], chain[i + 1], attrs});
            } else {
                auto attrs = attr_list();
                auto& node = ensure_node(g, first);
                node.attrs.insert(node.attrs.end(), attrs.begin(), attrs.end());
            }
        }
        if (tok_.kind == Tok::Semi)
            advance();
    }

    Node& ensure_node(Graph& g, const std::string& name)
    {
        auto [it, fresh] = index_.emplace(name, g.nodes.size());
        if (fresh)
            g.nodes.push_back({name, {}});
        return g.nodes[it->second];
    }

    Lexer lex_;
    Token tok_{Tok::End, "", false, 1};
    bool directed_ = false;
    std::map<std::string, std::size_t> index_;
};

} // namespace detail

inline Graph parse(const std::string& text) { return detail::Parser(text).parse(); }

inline Graph parse(std::istream& in)
{
    return parse(std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()));
}

} // namespace lapsom::dot

#endif // LAPSOM_DOT_HPP
