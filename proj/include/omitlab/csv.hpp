#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

// Locale-independent CSV: comma separator, LF line ends, mandatory header,
// numbers in scientific notation with 17 significant digits.
namespace omitlab::csv {

std::string format_number(double value);

class Writer {
public:
    Writer(std::ostream& out, const std::vector<std::string>& header);
    void row(std::span<const double> values);

private:
    std::ostream& out_;
    std::size_t columns_;
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    // Index of a column, or -1.
    long column(const std::string& name) const;
};

// Throws DomainError (field "csv") on an empty input, a ragged row or a
// non-numeric cell. Accepts CRLF line ends and blank trailing lines.
Table read(std::istream& in);
Table read_file(const std::string& path);

} // namespace omitlab::csv
