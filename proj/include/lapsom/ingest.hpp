#ifndef LAPSOM_INGEST_HPP
#define LAPSOM_INGEST_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lapsom/error.hpp"
#include "lapsom/graph.hpp"

namespace lapsom {

namespace detail {

inline std::string trim(std::string_view s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

/// Splits one CSV record. Double-quoted fields may contain the delimiter and
/// "" escapes; fields are trimmed unless quoted.
inline std::vector<std::string> split_csv(std::string_view line, char delim, std::size_t line_no)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == delim) {
            fields.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(c);
        }
    }
    if (quoted)
        throw InputError("line " + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(was_quoted ? cur : trim(cur));
    return fields;
}

inline std::optional<double> parse_double(const std::string& s)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last)
        return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(const std::string& s)
{
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

inline void strip_cr(std::string& line)
{
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
}

inline bool skip_line(const std::string& line)
{
    const auto t = trim(line);
    return t.empty() || t.front() == '#';
}

} // namespace detail

// ---------------------------------------------------------------------------
// Edge lists

struct EdgeListOptions
{
    enum class Header { Auto, Present, Absent };

    char delimiter = ',';
    Header header = Header::Auto;
    double default_weight = 1.0;
};

/// Reads `source,target[,weight]` rows. Duplicate pairs (either orientation)
/// sum their weights; vertices are numbered by first appearance.
inline WeightedGraph load_edge_list(std::istream& in, const EdgeListOptions& opts = {})
{
    if (!(opts.default_weight > 0.0))
        throw AnalysisError("default weight must be positive");
    GraphBuilder builder;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::skip_line(line))
            continue;
        auto fields = detail::split_csv(line, opts.delimiter, line_no);
        if (first_row) {
            first_row = false;
            const bool looks_like_header = fields.size() >= 2 && detail::lower(fields[0]) == "source" &&
                                           detail::lower(fields[1]) == "target";
            if (opts.header == EdgeListOptions::Header::Present ||
                (opts.header == EdgeListOptions::Header::Auto && looks_like_header))
                continue;
        }
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (fields.size() < 2 || fields.size() > 3)
            throw InputError(where + "expected 'source,target[,weight]', got " + std::to_string(fields.size()) +
                             " fields");
        if (fields[0].empty() || fields[1].empty())
            throw InputError(where + "empty vertex label");
        double w = opts.default_weight;
        if (fields.size() == 3 && !fields[2].empty()) {
            auto parsed = detail::parse_double(fields[2]);
            if (!parsed)
                throw InputError(where + "weight '" + fields[2] + "' is not a number");
            w = *parsed;
        }
        if (!(w > 0.0))
            throw InputError(where + "non-positive weight " + fields[2]);
        if (fields[0] == fields[1])
            throw InputError(where + "self-loop on '" + fields[0] + "'");
        builder.add_edge(fields[0], fields[1], w);
    }
    return builder.build();
}

/// Writes the graph back as an edge list with a header; vertices without
/// edges are not representable and are dropped.
inline void write_edge_list(std::ostream& out, const WeightedGraph& g)
{
    out << "source,target,weight\n";
    out.precision(17);
    for (const auto& e : g.edges())
        out << g.label(e.u) << ',' << g.label(e.v) << ',' << e.weight << '\n';
}

// ---------------------------------------------------------------------------
// Contract corpora

enum class Role { Peasant, Noble, Notary };

inline std::optional<Role> parse_role(const std::string& s)
{
    const auto l = detail::lower(detail::trim(s));
    if (l == "peasant")
        return Role::Peasant;
    if (l == "noble")
        return Role::Noble;
    if (l == "notary")
        return Role::Notary;
    return std::nullopt;
}

struct ContractRecord
{
    std::string contract_id;
    int date = 0;
    std::optional<std::string> lord;
    std::optional<std::string> notary;
    std::vector<std::string> persons;
    std::vector<Role> person_roles; // parallel to persons
};

struct DateRange
{
    int min = 1000;
    int max = 2000;
};

inline void validate_record(const ContractRecord& r, const DateRange& range = {})
{
    const std::string what = "contract '" + r.contract_id + "': ";
    if (r.persons.empty())
        throw AnalysisError(what + "no persons");
    if (r.person_roles.size() != r.persons.size())
        throw AnalysisError(what + "roles and persons differ in length");
    if (r.date < range.min || r.date > range.max)
        throw AnalysisError(what + "date " + std::to_string(r.date) + " outside [" + std::to_string(range.min) +
                            ", " + std::to_string(range.max) + "]");
}

/// Reads the `contract_id,date,lord,notary,persons,roles` CSV. `persons` and
/// `roles` are `;`-separated parallel lists; an empty roles field means every
/// person is a peasant.
inline std::vector<ContractRecord> load_contracts(std::istream& in, const DateRange& range = {})
{
    static const std::vector<std::string> expected = {"contract_id", "date", "lord", "notary", "persons", "roles"};
    std::vector<ContractRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::skip_line(line))
            continue;
        auto fields = detail::split_csv(line, ',', line_no);
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (!header_seen) {
            std::vector<std::string> lowered;
            for (const auto& f : fields)
                lowered.push_back(detail::lower(f));
            if (lowered != expected)
                throw InputError(where + "expected header 'contract_id,date,lord,notary,persons,roles'");
            header_seen = true;
            continue;
        }
        if (fields.size() != expected.size())
            throw InputError(where + "expected 6 fields, got " + std::to_string(fields.size()));
        ContractRecord r;
        r.contract_id = fields[0];
        if (r.contract_id.empty())
            throw InputError(where + "empty contract_id");
        auto date = detail::parse_int(fields[1]);
        if (!date)
            throw InputError(where + "date '" + fields[1] + "' is not an integer year");
        r.date = static_cast<int>(*date);
        if (!fields[2].empty())
            r.lord = fields[2];
        if (!fields[3].empty())
            r.notary = fields[3];
        for (const auto& p : detail::split_csv(fields[4], ';', line_no))
            if (!p.empty())
                r.persons.push_back(p);
        if (fields[5].empty()) {
            r.person_roles.assign(r.persons.size(), Role::Peasant);
        } else {
            for (const auto& s : detail::split_csv(fields[5], ';', line_no)) {
                auto role = parse_role(s);
                if (!role)
                    throw InputError(where + "unknown role '" + s + "'");
                r.person_roles.push_back(*role);
            }
        }
        try {
            validate_record(r, range);
        } catch (const AnalysisError& e) {
            throw InputError(where + e.what());
        }
        out.push_back(std::move(r));
    }
    if (!header_seen)
        throw InputError("contracts file has no header");
    return out;
}

struct ContractGraphConfig
{
    int window_years = 15;
    std::set<std::string> excluded_lords;
    std::set<Role> drop_roles = {Role::Noble, Role::Notary};
};

/**
 * Builds the co-occurrence graph of persons named in contracts.
 *
 * Persons holding a dropped role in any record are removed everywhere. Every
 * pair of kept persons named in one contract gains +1. Every pair of contracts
 * dated strictly less than `window_years` apart that share a lord (outside
 * `excluded_lords`) or a notary adds +1 to each person pair formed across the
 * two contracts. Records are canonicalised by contract id first, so the result
 * does not depend on input order.
 */
inline WeightedGraph build_from_contracts(const std::vector<ContractRecord>& records,
                                          const ContractGraphConfig& config = {})
{
    if (records.empty())
        throw AnalysisError("no contract records");
    if (config.window_years < 0)
        throw AnalysisError("window_years must be non-negative");

    std::vector<const ContractRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) {
        if (r.persons.empty())
            throw AnalysisError("contract '" + r.contract_id + "': no persons");
        if (r.person_roles.size() != r.persons.size())
            throw AnalysisError("contract '" + r.contract_id + "': roles and persons differ in length");
        sorted.push_back(&r);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const ContractRecord* a, const ContractRecord* b) { return a->contract_id < b->contract_id; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->contract_id == sorted[i - 1]->contract_id)
            throw AnalysisError("duplicate contract id '" + sorted[i]->contract_id + "'");

    std::set<std::string> dropped;
    for (const auto* r : sorted)
        for (std::size_t k = 0; k < r->persons.size(); ++k)
            if (config.drop_roles.count(r->person_roles[k]))
                dropped.insert(r->persons[k]);

    GraphBuilder builder;
    std::vector<std::vector<VertexId>> members(sorted.size());
    for (std::size_t c = 0; c < sorted.size(); ++c) {
        for (const auto& p : sorted[c]->persons) {
            if (dropped.count(p))
                continue;
            const VertexId v = builder.add_vertex(p);
            if (std::find(members[c].begin(), members[c].end(), v) == members[c].end())
                members[c].push_back(v);
        }
    }

    for (const auto& m : members)
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = a + 1; b < m.size(); ++b)
                builder.add_edge(m[a], m[b], 1.0);

    auto shares_authority = [&config](const ContractRecord& x, const ContractRecord& y) {
        if (x.lord && y.lord && *x.lord == *y.lord && !config.excluded_lords.count(*x.lord))
            return true;
        return x.notary && y.notary && *x.notary == *y.notary;
    };

    std::vector<std::size_t> by_date(sorted.size());
    for (std::size_t i = 0; i < by_date.size(); ++i)
        by_date[i] = i;
    std::stable_sort(by_date.begin(), by_date.end(),
                     [&](std::size_t a, std::size_t b) { return sorted[a]->date < sorted[b]->date; });

    for (std::size_t i = 0; i < by_date.size(); ++i) {
        const auto ci = by_date[i];
        for (std::size_t j = i + 1; j < by_date.size(); ++j) {
            const auto cj = by_date[j];
            if (sorted[cj]->date - sorted[ci]->date >= config.window_years)
                break;
            if (!shares_authority(*sorted[ci], *sorted[cj]))
                continue;
            std::set<std::pair<VertexId, VertexId>> pairs;
            for (VertexId p : members[ci])
                for (VertexId q : members[cj])
                    if (p != q)
                        pairs.insert(std::minmax(p, q));
            for (const auto& [p, q] : pairs)
                builder.add_edge(p, q, 1.0);
        }
    }
    return builder.build();
}

/// Mean contract date per person over every record naming them.
inline std::map<std::string, double> person_mean_dates(const std::vector<ContractRecord>& records)
{
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& r : records) {
        std::set<std::string> seen(r.persons.begin(), r.persons.end());
        for (const auto& p : seen) {
            auto& [sum, count] = acc[p];
            sum += r.date;
            ++count;
        }
    }
    std::map<std::string, double> out;
    for (const auto& [p, sc] : acc)
        out[p] = sc.first / static_cast<double>(sc.second);
    return out;
}

// ---------------------------------------------------------------------------
// Vertex metadata

struct VertexMetadata
{
    std::optional<double> date;
    std::optional<std::string> location;
    std::optional<std::string> family;
};

using MetadataTable = std::map<std::string, VertexMetadata>;

/// Reads a CSV with a `label` column and any of `date`, `location`, `family`.
inline MetadataTable load_metadata(std::istream& in)
{
    MetadataTable table;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    std::optional<std::size_t> label_col, date_col, loc_col, fam_col;
    while (std::getline(in, line)) {
        ++line_no;
        detail::strip_cr(line);
        if (detail::skip_line(line))
            continue;
        auto fields = detail::split_csv(line, ',', line_no);
        if (header.empty()) {
            header = fields;
            for (std::size_t i = 0; i < header.size(); ++i) {
                const auto h = detail::lower(header[i]);
                if (h == "label" || h == "vertex")
                    label_col = i;
                else if (h == "date")
                    date_col = i;
                else if (h == "location")
                    loc_col = i;
                else if (h == "family")
                    fam_col = i;
            }
            if (!label_col)
                throw InputError("metadata header has no 'label' column");
            continue;
        }
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (fields.size() != header.size())
            throw InputError(where + "expected " + std::to_string(header.size()) + " fields");
        VertexMetadata m;
        if (date_col && !fields[*date_col].empty()) {
            auto d = detail::parse_double(fields[*date_col]);
            if (!d)
                throw InputError(where + "date '" + fields[*date_col] + "' is not a number");
            m.date = *d;
        }
        if (loc_col && !fields[*loc_col].empty())
            m.location = fields[*loc_col];
        if (fam_col && !fields[*fam_col].empty())
            m.family = fields[*fam_col];
        const auto& label = fields[*label_col];
        if (label.empty())
            throw InputError(where + "empty label");
        if (!table.emplace(label, std::move(m)).second)
            throw InputError(where + "duplicate label '" + label + "'");
    }
    if (header.empty())
        throw InputError("metadata file is empty");
    return table;
}

} // namespace lapsom

#endif // LAPSOM_INGEST_HPP
