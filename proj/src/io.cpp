#include "gepey/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

namespace gepey {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& buf, std::size_t at) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(buf[at + i])) << (8 * i);
    return v;
}

}  // namespace

void write_matrix_file(const std::string& path, const Matrix& m) {
    std::string buf;
    buf.reserve(20 + 8 * m.data.size());
    buf += "GEPM";
    put_u64(buf, m.rows);
    put_u64(buf, m.cols);
    for (double d : m.data) {
        std::uint64_t v;
        std::memcpy(&v, &d, 8);
        put_u64(buf, v);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(buf.data(), std::streamsize(buf.size()));
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

Matrix read_matrix_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (buf.size() < 20 || buf.compare(0, 4, "GEPM") != 0)
        throw IoError("not a matrix file: " + path);
    const std::uint64_t rows = get_u64(buf, 4);
    const std::uint64_t cols = get_u64(buf, 12);
    const std::size_t payload = buf.size() - 20;
    if (payload % 8 != 0) throw IoError("ragged payload: " + path);
    const std::size_t entries = payload / 8;
    if ((rows == 0 || cols == 0) ? entries != 0 : (entries / rows != cols || entries % rows != 0))
        throw IoError("payload does not match dimensions: " + path);

    Matrix m{std::size_t(rows), std::size_t(cols)};
    for (std::size_t j = 0; j < entries; ++j) {
        const std::uint64_t v = get_u64(buf, 20 + 8 * j);
        double d;
        std::memcpy(&d, &v, 8);
        m.data[j] = d;
    }
    return m;
}

bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string format_csv(const CsvDoc& doc) {
    std::string out = "# gepey-csv-v1\n";
    for (std::size_t c = 0; c < doc.columns.size(); ++c) {
        if (c) out += ',';
        out += doc.columns[c];
    }
    out += '\n';
    for (const std::vector<double>& row : doc.rows) {
        if (row.size() != doc.columns.size()) throw IoError("csv row width does not match header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const CsvDoc& doc) {
    const std::string body = format_csv(doc);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(body.data(), std::streamsize(body.size()));
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace gepey
