#pragma once

#include "rkpod/masked_matrix.hpp"

#include <string>
#include <vector>

namespace rkpod {

struct CsvOptions {
    char delimiter = ',';
    bool header = false;  // skip the first line on read, none written
    std::vector<std::string> na_tokens = {"NA", "NaN", ""};
};

// Numeric matrix with NA tokens marking missing cells. Parse failures report
// the 1-based row and column.
MaskedMatrix read_masked_csv(const std::string& path, const CsvOptions& opts = {});

// Fully numeric matrix; NA tokens are an error.
Matrix read_matrix_csv(const std::string& path, const CsvOptions& opts = {});

// Single column (or one value per line) of integer labels.
IntVector read_labels_csv(const std::string& path, const CsvOptions& opts = {});

// 0/1 observation mask.
BoolMatrix read_mask_csv(const std::string& path, const CsvOptions& opts = {});

// Writers emit full double precision (17 significant digits) so values
// round-trip exactly.
void write_matrix_csv(const std::string& path, const Matrix& m, char delimiter = ',');
void write_masked_csv(const std::string& path, const MaskedMatrix& m,
                      const std::string& na_token = "NA", char delimiter = ',');
void write_mask_csv(const std::string& path, const BoolMatrix& mask, char delimiter = ',');
void write_labels_csv(const std::string& path, const IntVector& labels);

}  // namespace rkpod
