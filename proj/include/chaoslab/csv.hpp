#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace chaoslab {

/// Floats are written with 17 significant digits ("%.17g").
std::string fmt(double v);
std::string fmt(std::size_t v);
std::string fmt(int v);

class CsvWriter {
public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& os_;
    std::size_t columns_;
};

/// Reads two named numeric columns from a CSV file with a header row.
struct CsvColumns {
    std::vector<double> x, y;
};
CsvColumns read_columns(const std::filesystem::path& path, const std::string& x_name,
                        const std::string& y_name);

}  // namespace chaoslab
