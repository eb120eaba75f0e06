#include "rcv/field_series.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rcv/errors.hpp"

namespace rcv {

std::string encoding_name(Encoding e) {
    switch (e) {
    case Encoding::Magnitude: return "magnitude";
    case Encoding::RealImagSplit: return "realimag";
    case Encoding::RealScalar: return "realscalar";
    }
    return "?";
}

Encoding encoding_from_name(const std::string& s) {
    if (s == "magnitude") return Encoding::Magnitude;
    if (s == "realimag") return Encoding::RealImagSplit;
    if (s == "realscalar") return Encoding::RealScalar;
    throw UsageError("unknown encoding: " + s);
}

FieldSeries FieldSeries::slice(long start, long count) const {
    if (start < 0 || count < 0 || start + count > steps())
        throw UsageError("slice out of range");
    FieldSeries out = *this;
    out.data = data.middleCols(start, count).eval();
    return out;
}

FieldSeries encode(const Eigen::MatrixXcd& field, Encoding enc, double dt,
                   std::vector<double> grid, std::string tag) {
    FieldSeries s;
    s.dt = dt;
    s.grid = std::move(grid);
    s.encoding = enc;
    s.system_tag = std::move(tag);
    const long G = field.rows(), T = field.cols();
    switch (enc) {
    case Encoding::Magnitude:
        s.data = field.cwiseAbs();
        break;
    case Encoding::RealImagSplit:
        s.data.resize(2 * G, T);
        s.data.topRows(G) = field.real();
        s.data.bottomRows(G) = field.imag();
        break;
    case Encoding::RealScalar:
        throw UsageError("RealScalar encoding is for real fields");
    }
    if (!s.data.allFinite()) throw NumericalError("encoded series has non-finite entries");
    return s;
}

FieldSeries encode(const Eigen::MatrixXd& field, Encoding enc, double dt,
                   std::vector<double> grid, std::string tag) {
    FieldSeries s;
    s.dt = dt;
    s.grid = std::move(grid);
    s.encoding = enc;
    s.system_tag = std::move(tag);
    switch (enc) {
    case Encoding::RealScalar:
        s.data = field;
        break;
    case Encoding::Magnitude:
        s.data = field.cwiseAbs();
        break;
    case Encoding::RealImagSplit:
        throw UsageError("RealImagSplit requires a complex field");
    }
    if (!s.data.allFinite()) throw NumericalError("encoded series has non-finite entries");
    return s;
}

static void fmt17(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void write_series_csv(const FieldSeries& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw UsageError("cannot open for writing: " + path);
    std::string line;
    f << "# system=" << s.system_tag << "\n";
    f << "# encoding=" << encoding_name(s.encoding) << "\n";
    line = "# dt=";
    fmt17(line, s.dt);
    f << line << "\n";
    line = "# grid=";
    for (size_t i = 0; i < s.grid.size(); ++i) {
        if (i) line += ",";
        fmt17(line, s.grid[i]);
    }
    f << line << "\n";
    for (long t = 0; t < s.steps(); ++t) {
        line.clear();
        for (int i = 0; i < s.channels(); ++i) {
            if (i) line += ",";
            fmt17(line, s.data(i, t));
        }
        f << line << "\n";
    }
    if (!f) throw UsageError("write failed: " + path);
}

FieldSeries read_series_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open: " + path);
    FieldSeries s;
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            std::string val = line.substr(eq + 1);
            while (!key.empty() && key.front() == ' ') key.erase(0, 1);
            while (!key.empty() && key.back() == ' ') key.pop_back();
            if (key == "system") s.system_tag = val;
            else if (key == "encoding") s.encoding = encoding_from_name(val);
            else if (key == "dt") s.dt = std::stod(val);
            else if (key == "grid") {
                std::stringstream ss(val);
                std::string tok;
                while (std::getline(ss, tok, ',')) s.grid.push_back(std::stod(tok));
            }
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (!rows.empty() && row.size() != rows.front().size())
            throw UsageError("ragged series CSV: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw UsageError("series CSV has no data rows: " + path);
    const int M = int(rows.front().size());
    s.data.resize(M, long(rows.size()));
    for (long t = 0; t < long(rows.size()); ++t)
        for (int i = 0; i < M; ++i) s.data(i, t) = rows[size_t(t)][size_t(i)];
    return s;
}

} // namespace rcv
