#include "rkpod/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rkpod {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, delimiter)) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == delimiter) cells.push_back("");
    return cells;
}

// Raw cell grid; empty trailing lines are dropped.
std::vector<std::vector<std::string>> read_cells(const std::string& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && opts.header) {
            first = false;
            continue;
        }
        first = false;
        if (trim(line).empty()) continue;
        rows.push_back(split_line(line, opts.delimiter));
    }
    if (rows.empty()) throw std::runtime_error("empty CSV file: " + path);
    std::size_t width = rows.front().size();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != width) {
            throw std::runtime_error(path + ": row " + std::to_string(i + 1) +
                                     " has " + std::to_string(rows[i].size()) +
                                     " cells, expected " + std::to_string(width));
        }
    }
    return rows;
}

bool is_na(const std::string& cell, const CsvOptions& opts) {
    return std::find(opts.na_tokens.begin(), opts.na_tokens.end(), cell) != opts.na_tokens.end();
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t row, std::size_t col) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw std::runtime_error(path + ": non-numeric cell '" + cell + "' at row " +
                                 std::to_string(row + 1) + ", column " + std::to_string(col + 1));
    }
    return value;
}

}  // namespace

MaskedMatrix read_masked_csv(const std::string& path, const CsvOptions& opts) {
    auto cells = read_cells(path, opts);
    const Index n = static_cast<Index>(cells.size());
    const Index p = static_cast<Index>(cells.front().size());
    Matrix values = Matrix::Zero(n, p);
    BoolMatrix mask(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            const std::string& cell = cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (is_na(cell, opts)) {
                mask(i, j) = false;
            } else {
                mask(i, j) = true;
                values(i, j) = parse_cell(cell, path, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    return MaskedMatrix(values, mask);
}

Matrix read_matrix_csv(const std::string& path, const CsvOptions& opts) {
    auto cells = read_cells(path, opts);
    const Index n = static_cast<Index>(cells.size());
    const Index p = static_cast<Index>(cells.front().size());
    Matrix values(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) {
            values(i, j) = parse_cell(cells[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                      path, static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    return values;
}

IntVector read_labels_csv(const std::string& path, const CsvOptions& opts) {
    auto cells = read_cells(path, opts);
    IntVector labels(static_cast<Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].size() != 1) {
            throw std::runtime_error(path + ": labels file must have one column");
        }
        labels(static_cast<Index>(i)) = static_cast<int>(parse_cell(cells[i][0], path, i, 0));
    }
    return labels;
}

BoolMatrix read_mask_csv(const std::string& path, const CsvOptions& opts) {
    Matrix raw = read_matrix_csv(path, opts);
    BoolMatrix mask(raw.rows(), raw.cols());
    for (Index i = 0; i < raw.rows(); ++i) {
        for (Index j = 0; j < raw.cols(); ++j) {
            if (raw(i, j) != 0.0 && raw(i, j) != 1.0) {
                throw std::runtime_error(path + ": mask cells must be 0 or 1");
            }
            mask(i, j) = raw(i, j) != 0.0;
        }
    }
    return mask;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Matrix& m, char delimiter) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    std::string line;
    for (Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) line += delimiter;
            append_number(line, m(i, j));
        }
        out << line << '\n';
    }
}

void write_masked_csv(const std::string& path, const MaskedMatrix& m,
                      const std::string& na_token, char delimiter) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    std::string line;
    for (Index i = 0; i < m.rows(); ++i) {
        line.clear();
        for (Index j = 0; j < m.cols(); ++j) {
            if (j > 0) line += delimiter;
            if (m.observed(i, j)) {
                append_number(line, m.values()(i, j));
            } else {
                line += na_token;
            }
        }
        out << line << '\n';
    }
}

void write_mask_csv(const std::string& path, const BoolMatrix& mask, char delimiter) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (Index i = 0; i < mask.rows(); ++i) {
        for (Index j = 0; j < mask.cols(); ++j) {
            if (j > 0) out << delimiter;
            out << (mask(i, j) ? '1' : '0');
        }
        out << '\n';
    }
}

void write_labels_csv(const std::string& path, const IntVector& labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (Index i = 0; i < labels.size(); ++i) out << labels(i) << '\n';
}

}  // namespace rkpod
