#include "chaoslab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "chaoslab/types.hpp"

namespace chaoslab {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size())
{
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    if (cells.size() != columns_) throw DomainError("csv row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << cells[i];
    }
    os_ << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

CsvColumns read_columns(const std::filesystem::path& path, const std::string& x_name,
                        const std::string& y_name)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InsufficientData(path.string() + " is empty");
    const auto header = split(line);
    std::size_t ix = header.size(), iy = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == x_name) ix = i;
        if (header[i] == y_name) iy = i;
    }
    if (ix == header.size() || iy == header.size())
        throw ConfigError(path.string() + " lacks column " + (ix == header.size() ? x_name : y_name));
    CsvColumns cols;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) throw ConfigError("ragged row in " + path.string());
        cols.x.push_back(std::stod(cells[ix]));
        cols.y.push_back(std::stod(cells[iy]));
    }
    return cols;
}

}  // namespace chaoslab
