#pragma once
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rcv {

enum class Encoding { Magnitude, RealImagSplit, RealScalar };

std::string encoding_name(Encoding e);
Encoding encoding_from_name(const std::string& s);

// M-channel real time series on a spatial grid. data is channel-major:
// data(i, t) = channel i at sample t.
struct FieldSeries {
    Eigen::MatrixXd data;
    double dt = 0.0;
    std::vector<double> grid;   // one coordinate per original grid point
    Encoding encoding = Encoding::RealScalar;
    std::string system_tag;

    int channels() const { return int(data.rows()); }
    long steps() const { return long(data.cols()); }

    // copy of samples [start, start+count)
    FieldSeries slice(long start, long count) const;
};

// complex field (grid x time) -> real channels
FieldSeries encode(const Eigen::MatrixXcd& field, Encoding enc, double dt,
                   std::vector<double> grid, std::string tag);
// real field; only RealScalar and Magnitude make sense here
FieldSeries encode(const Eigen::MatrixXd& field, Encoding enc, double dt,
                   std::vector<double> grid, std::string tag);

// CSV: "# system=", "# encoding=", "# dt=", "# grid=", then one row per
// time sample with M values at 17 significant digits.
void write_series_csv(const FieldSeries& s, const std::string& path);
FieldSeries read_series_csv(const std::string& path);

} // namespace rcv
