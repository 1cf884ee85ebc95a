#include "pcrlab/sample_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace pcrlab {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
    out << 'y';
    for (Index j = 0; j < sample.p(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (Index t = 0; t < sample.T(); ++t) {
        out << format_double(sample.Y(t));
        for (Index j = 0; j < sample.p(); ++j) out << ',' << format_double(sample.X(t, j));
        out << '\n';
    }
}

void write_sample_csv(const std::string& path, const Sample& sample) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_sample_csv(out, sample);
    if (!out) throw Error("write to '" + path + "' failed");
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_field(std::string_view field, long line_no) {
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    double value = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid number '" + std::string(field) + "'",
                         line_no);
    }
    return value;
}

} // namespace

Sample read_sample_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("line 1: missing header", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    const Index p = static_cast<Index>(header.size()) - 1;
    if (p < 1 || header[0] != "y") throw ParseError("line 1: header must be y,x1,...,xp", 1);
    for (Index j = 1; j <= p; ++j) {
        if (header[j] != "x" + std::to_string(j)) {
            throw ParseError("line 1: expected column x" + std::to_string(j), 1);
        }
    }

    std::vector<double> values;
    long line_no = 1;
    Index rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_commas(line);
        if (static_cast<Index>(fields.size()) != p + 1) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(p + 1) +
                                 " fields, found " + std::to_string(fields.size()),
                             line_no);
        }
        for (const auto f : fields) values.push_back(parse_field(f, line_no));
        ++rows;
    }
    if (rows == 0) throw ParseError("sample has no observations", 0);

    Sample sample;
    sample.X.resize(rows, p);
    sample.Y.resize(rows);
    for (Index t = 0; t < rows; ++t) {
        const double* row = values.data() + t * (p + 1);
        sample.Y(t) = row[0];
        for (Index j = 0; j < p; ++j) sample.X(t, j) = row[j + 1];
    }
    sample.spec.p = p;
    return sample;
}

Sample read_sample_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_sample_csv(in);
}

} // namespace pcrlab
