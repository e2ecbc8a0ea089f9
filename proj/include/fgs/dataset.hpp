#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgs {

/// Immutable rectangular sample matrix, stored column-major. Column order
/// matches variable indexes throughout the library.
struct Dataset {
    std::vector<std::string> names;
    std::size_t n = 0;                        // samples
    std::vector<std::vector<double>> columns; // names.size() columns of length n

    std::size_t var_count() const { return names.size(); }

    void validate() const {
        if (n < 2) throw std::invalid_argument("dataset needs at least 2 samples");
        if (columns.size() != names.size())
            throw std::invalid_argument("column/name count mismatch");
        for (const auto& col : columns) {
            if (col.size() != n) throw std::invalid_argument("ragged dataset");
            for (double v : col)
                if (!std::isfinite(v)) throw std::invalid_argument("non-finite cell in dataset");
        }
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

/// Tab-separated text: header of variable names, then one sample per line.
/// Values are written in shortest round-trip form.
inline std::string dataset_to_tsv(const Dataset& data) {
    std::string out;
    for (std::size_t j = 0; j < data.names.size(); ++j) {
        if (j > 0) out += '\t';
        out += data.names[j];
    }
    out += '\n';
    for (std::size_t t = 0; t < data.n; ++t) {
        for (std::size_t j = 0; j < data.columns.size(); ++j) {
            if (j > 0) out += '\t';
            out += detail::format_double(data.columns[j][t]);
        }
        out += '\n';
    }
    return out;
}

/// Parses the TSV form. Rejects non-numeric or non-finite cells and ragged
/// rows, reporting the offending line.
inline Dataset dataset_from_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw std::runtime_error("dataset is missing a header line");

    Dataset data;
    {
        std::istringstream header(line);
        std::string name;
        while (std::getline(header, name, '\t')) {
            if (name.empty()) throw std::runtime_error("empty variable name in header");
            data.names.push_back(name);
        }
    }
    data.columns.assign(data.names.size(), {});

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t start = 0;
        for (std::size_t j = 0; j < data.names.size(); ++j) {
            const std::size_t end = line.find('\t', start);
            const bool last = j + 1 == data.names.size();
            if ((end == std::string::npos) != last)
                throw std::runtime_error("wrong cell count at line " + std::to_string(line_no));
            const std::string cell = line.substr(start, end == std::string::npos ? end : end - start);
            double value = 0.0;
            const char* first = cell.data();
            const char* stop = cell.data() + cell.size();
            auto res = std::from_chars(first, stop, value);
            if (res.ec != std::errc{} || res.ptr != stop || !std::isfinite(value))
                throw std::runtime_error("non-numeric cell '" + cell + "' at line " +
                                         std::to_string(line_no));
            data.columns[j].push_back(value);
            start = end + 1;
        }
        ++data.n;
    }
    data.validate();
    return data;
}

inline Dataset read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return dataset_from_tsv(buf.str());
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace fgs
