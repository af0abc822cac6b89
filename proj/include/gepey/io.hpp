#pragma once

#include <string>
#include <vector>

#include "gepey/matrix.hpp"

namespace gepey {

// Binary matrix container: magic "GEPM", then rows and cols as unsigned
// 64-bit little-endian, then the payload as row-major little-endian doubles.
// Bytes are packed explicitly so files round-trip across platforms.
void write_matrix_file(const std::string& path, const Matrix& m);
Matrix read_matrix_file(const std::string& path);

bool file_exists(const std::string& path);

// One CSV document: a "# gepey-csv-v1" comment line, a header row, then one
// line per data row. Floats carry 17 significant digits so a reader recovers
// the exact doubles; nan marks a column with no defined value on that row.
struct CsvDoc {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_csv(const CsvDoc& doc);
void write_csv(const std::string& path, const CsvDoc& doc);

// 17 significant digits; parses back to the exact same double.
std::string format_double(double v);

}  // namespace gepey
