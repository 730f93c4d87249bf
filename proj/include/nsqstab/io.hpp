#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "nsqstab/block.hpp"
#include "nsqstab/hash.hpp"

namespace nsqstab {

// ---------------------------------------------------------------------------
// number formatting
// ---------------------------------------------------------------------------

/// Shortest decimal form that round-trips to the same double (file format).
inline std::string format_double_shortest(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Fixed 17-significant-digit form (reports; byte equality is meaningful).
inline std::string format_double_17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------------------
// matrix file format
//
//   line 1:        m n
//   line 2:        p_1 ... p_m
//   next m lines:  n decimal entries each (rows of A)
//   optional block "K": m lines, line i with p_i entries
//   optional block "E": same shape
//
// Line-oriented, UTF-8, '#' starts a comment, blank lines ignored.
// ---------------------------------------------------------------------------

struct ParsedModel {
    PlantMatrix A;
    std::optional<GainMatrix> K;
    std::optional<Detuning> E;
};

namespace detail {

struct Token {
    std::string text;
    long line;
    long column;
};

struct TokenLine {
    std::vector<Token> tokens;
    long line;
};

inline std::vector<TokenLine> tokenize_lines(std::string_view text) {
    std::vector<TokenLine> out;
    long line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : eol - pos);
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        TokenLine tl{{}, line_no};
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
                ++i;
            std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
                ++i;
            if (i > start)
                tl.tokens.push_back({std::string(line.substr(start, i - start)), line_no,
                                     static_cast<long>(start) + 1});
        }
        if (!tl.tokens.empty()) out.push_back(std::move(tl));
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return out;
}

inline int parse_int(const Token& t) {
    int v = 0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
        throw parse_error("expected an integer, got '" + t.text + "'", t.line, t.column);
    return v;
}

inline double parse_double(const Token& t) {
    double v = 0.0;
    auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
        throw parse_error("expected a number, got '" + t.text + "'", t.line, t.column);
    if (!std::isfinite(v))
        throw parse_error("entry '" + t.text + "' is not finite", t.line, t.column);
    return v;
}

} // namespace detail

inline ParsedModel parse_matrix_text(std::string_view text) {
    auto lines = detail::tokenize_lines(text);
    std::size_t cursor = 0;
    auto next_line = [&](const char* what) -> const detail::TokenLine& {
        if (cursor >= lines.size())
            throw parse_error(std::string("unexpected end of file, expected ") + what,
                              lines.empty() ? 1 : lines.back().line, 1);
        return lines[cursor++];
    };

    const auto& header = next_line("header 'm n'");
    if (header.tokens.size() != 2)
        throw parse_error("malformed header: expected exactly 'm n'", header.line, 1);
    int m = detail::parse_int(header.tokens[0]);
    int n = detail::parse_int(header.tokens[1]);
    if (m < 1 || n < 1)
        throw parse_error("header: m and n must be >= 1", header.line, 1);

    const auto& sizes_line = next_line("group sizes");
    if (static_cast<int>(sizes_line.tokens.size()) != m)
        throw parse_error("expected " + std::to_string(m) + " group sizes", sizes_line.line, 1);
    std::vector<int> p;
    int sum = 0;
    for (const auto& t : sizes_line.tokens) {
        int v = detail::parse_int(t);
        if (v < 1) throw parse_error("group sizes must be >= 1", t.line, t.column);
        p.push_back(v);
        sum += v;
    }
    if (sum != n)
        throw parse_error("group sizes on this line sum to " + std::to_string(sum) +
                              " but the header (line " + std::to_string(header.line) +
                              ") declares n = " + std::to_string(n),
                          sizes_line.line, 1);
    BlockStructure structure(p);

    Mat data(m, n);
    for (int r = 0; r < m; ++r) {
        const auto& row = next_line("a matrix row");
        if (static_cast<int>(row.tokens.size()) != n)
            throw parse_error("matrix row " + std::to_string(r + 1) + " expects " +
                                  std::to_string(n) + " entries, got " +
                                  std::to_string(row.tokens.size()),
                              row.line, 1);
        for (int c = 0; c < n; ++c) data(r, c) = detail::parse_double(row.tokens[static_cast<std::size_t>(c)]);
    }

    ParsedModel model{PlantMatrix(structure, data), std::nullopt, std::nullopt};

    auto parse_block = [&](const char* name) {
        std::vector<std::vector<double>> entries;
        for (int i = 0; i < m; ++i) {
            const auto& row = next_line("a block row");
            if (static_cast<int>(row.tokens.size()) != structure.group_size(i))
                throw parse_error(std::string(name) + " block row " + std::to_string(i + 1) +
                                      " expects " + std::to_string(structure.group_size(i)) +
                                      " entries",
                                  row.line, 1);
            std::vector<double> vals;
            for (const auto& t : row.tokens) {
                double v = detail::parse_double(t);
                if (v < 0.0)
                    throw parse_error(std::string(name) + " entries must be nonnegative",
                                      t.line, t.column);
                vals.push_back(v);
            }
            entries.push_back(std::move(vals));
        }
        return entries;
    };

    while (cursor < lines.size()) {
        const auto& marker = lines[cursor++];
        if (marker.tokens.size() != 1 ||
            (marker.tokens[0].text != "K" && marker.tokens[0].text != "E"))
            throw parse_error("expected block marker 'K' or 'E'", marker.line,
                              marker.tokens[0].column);
        if (marker.tokens[0].text == "K") {
            if (model.K)
                throw parse_error("duplicate K block", marker.line, marker.tokens[0].column);
            model.K = GainMatrix(structure, parse_block("K"));
        } else {
            if (model.E)
                throw parse_error("duplicate E block", marker.line, marker.tokens[0].column);
            model.E = Detuning(structure, parse_block("E"));
        }
    }
    return model;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ParsedModel parse_matrix_file(const std::string& path) {
    return parse_matrix_text(read_file(path));
}

inline std::string print_matrix_file(const ParsedModel& model) {
    const auto& s = model.A.structure;
    std::string out;
    out += std::to_string(s.group_count()) + " " + std::to_string(s.total_cols()) + "\n";
    for (int i = 0; i < s.group_count(); ++i) {
        if (i) out += " ";
        out += std::to_string(s.group_size(i));
    }
    out += "\n";
    for (Eigen::Index r = 0; r < model.A.data.rows(); ++r) {
        for (Eigen::Index c = 0; c < model.A.data.cols(); ++c) {
            if (c) out += " ";
            out += format_double_shortest(model.A.data(r, c));
        }
        out += "\n";
    }
    auto print_block = [&](const char* name, const std::vector<std::vector<double>>& rows) {
        out += name;
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) out += " ";
                out += format_double_shortest(row[j]);
            }
            out += "\n";
        }
    };
    if (model.K) print_block("K", model.K->k);
    if (model.E) print_block("E", model.E->eps);
    return out;
}

// ---------------------------------------------------------------------------
// fixed-order JSON emission
// ---------------------------------------------------------------------------

/// Streaming JSON writer with caller-controlled field order and
/// 17-significant-digit floats, so equal inputs produce byte-equal reports.
class JsonWriter {
public:
    JsonWriter& begin_object() { return open('{'); }
    JsonWriter& end_object() { return close('}'); }
    JsonWriter& begin_array() { return open('['); }
    JsonWriter& end_array() { return close(']'); }

    JsonWriter& key(std::string_view k) {
        separate();
        emit_string(k);
        out_ += ':';
        after_key_ = true;
        return *this;
    }

    JsonWriter& value(std::string_view v) {
        separate();
        emit_string(v);
        return *this;
    }
    JsonWriter& value(const char* v) { return value(std::string_view(v)); }
    JsonWriter& value(bool v) {
        separate();
        out_ += v ? "true" : "false";
        return *this;
    }
    JsonWriter& value(double v) {
        separate();
        if (std::isfinite(v)) {
            out_ += format_double_17(v);
        } else {
            emit_string(format_double_17(v)); // "inf" / "-inf" / "nan" as strings
        }
        return *this;
    }
    JsonWriter& value(long long v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(long v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(std::uint64_t v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& null() {
        separate();
        out_ += "null";
        return *this;
    }

    /// 1-based index array (external reports use paper-facing indices).
    JsonWriter& value_indices(const std::vector<int>& idx) {
        begin_array();
        for (int v : idx) value(v + 1);
        return end_array();
    }
    JsonWriter& value(const Vec& v) {
        begin_array();
        for (Eigen::Index i = 0; i < v.size(); ++i) value(v[i]);
        return end_array();
    }

    const std::string& str() const { return out_; }

private:
    JsonWriter& open(char c) {
        separate();
        out_ += c;
        stack_.push_back(false);
        return *this;
    }
    JsonWriter& close(char c) {
        out_ += c;
        stack_.pop_back();
        return *this;
    }
    void separate() {
        if (after_key_) {
            after_key_ = false;
            return;
        }
        if (!stack_.empty()) {
            if (stack_.back()) out_ += ',';
            stack_.back() = true;
        }
    }
    void emit_string(std::string_view s) {
        out_ += '"';
        for (char ch : s) {
            switch (ch) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\r': out_ += "\\r"; break;
                case '\t': out_ += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                        out_ += buf;
                    } else {
                        out_ += ch;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<bool> stack_;
    bool after_key_ = false;
};

/// Matrix as a row-major array of arrays (17-digit floats).
inline void json_matrix(JsonWriter& w, const Mat& m) {
    w.begin_array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        w.begin_array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) w.value(m(i, j));
        w.end_array();
    }
    w.end_array();
}

inline void json_block_entries(JsonWriter& w, const std::vector<std::vector<double>>& rows) {
    w.begin_array();
    for (const auto& row : rows) {
        w.begin_array();
        for (double v : row) w.value(v);
        w.end_array();
    }
    w.end_array();
}

} // namespace nsqstab
