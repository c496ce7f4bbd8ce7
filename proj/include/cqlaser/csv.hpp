#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cqlaser::csv {

inline constexpr std::string_view version = "cqlaser 1.0.0";

/// Shortest representation that parses back to the same double.
[[nodiscard]] inline std::string format(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

/// Cell value: number, text, or empty.
class Cell {
public:
    Cell() = default;
    Cell(double v) : text_(format(v)) {}
    Cell(int v) : text_(std::to_string(v)) {}
    Cell(std::size_t v) : text_(std::to_string(v)) {}
    Cell(std::string s) : text_(std::move(s)) {}
    Cell(const char* s) : text_(s) {}
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    std::string text_;
};

class Writer {
public:
    /// Writes `# ` comment lines, then the header row.
    Writer(std::ostream& os, const std::vector<std::string>& columns,
           const std::vector<std::string>& comments)
        : os_(os), width_(columns.size())
    {
        for (const auto& c : comments) os_ << "# " << c << '\n';
        write_line(columns);
    }

    void row(const std::vector<Cell>& cells)
    {
        if (cells.size() != width_) throw std::invalid_argument("csv row width mismatch");
        std::vector<std::string> text;
        text.reserve(cells.size());
        for (const auto& c : cells) text.push_back(c.text());
        write_line(text);
    }

private:
    void write_line(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }

    std::ostream& os_;
    std::size_t width_;
};

} // namespace cqlaser::csv
