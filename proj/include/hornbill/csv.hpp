#pragma once

#include <hornbill/errors.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

namespace hornbill::csv {

/// Shortest round-trip decimal form; locale independent.
[[nodiscard]] inline std::string format(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

template <class I>
    requires std::is_integral_v<I>
[[nodiscard]] std::string format(I v)
{
    return std::to_string(v);
}

/// Text fields are quoted when they contain a separator, quote or newline.
[[nodiscard]] inline std::string format(const std::string& v)
{
    if (v.find_first_of(",\"\n") == std::string::npos) {
        return v;
    }
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

[[nodiscard]] inline std::string format(const char* v) { return format(std::string(v)); }

/// Comma-separated rows with a mandatory header; every row ends in '\n'.
class Writer {
public:
    Writer(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size())
    {
        write_row(header);
    }

    template <class... Ts>
    void row(const Ts&... values)
    {
        if (sizeof...(Ts) != columns_) {
            throw PreconditionError("csv: row has " + std::to_string(sizeof...(Ts)) + " fields, header has " +
                                    std::to_string(columns_));
        }
        std::vector<std::string> f{format(values)...};
        write_row(f);
    }

private:
    void write_row(const std::vector<std::string>& fields)
    {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) {
                out_ << ',';
            }
            out_ << fields[i];
        }
        out_ << '\n';
    }

    std::ostream& out_;
    std::size_t columns_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    [[nodiscard]] std::size_t column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw DomainError("csv: no column named '" + std::string(name) + "'");
    }
};

[[nodiscard]] inline double parse_number(std::string_view s)
{
    if (s == "nan") {
        return std::nan("");
    }
    if (s == "inf") {
        return INFINITY;
    }
    if (s == "-inf") {
        return -INFINITY;
    }
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        return std::nan("");
    }
    return v;
}

/// Reads a numeric CSV; non-numeric cells become NaN.
[[nodiscard]] inline Table read(std::istream& in)
{
    Table t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            out.push_back(cell);
        }
        if (!l.empty() && l.back() == ',') {
            out.emplace_back();
        }
        return out;
    };
    if (!std::getline(in, line)) {
        throw DomainError("csv: empty input");
    }
    t.header = split(line);
    t.columns.resize(t.header.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw DomainError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                              " fields, expected " + std::to_string(t.header.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            t.columns[i].push_back(parse_number(cells[i]));
        }
    }
    return t;
}

} // namespace hornbill::csv
