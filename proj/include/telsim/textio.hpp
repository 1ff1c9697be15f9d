// Shared helpers for the line-oriented text formats: 12-significant-digit
// real formatting (stable byte output, round-trips through parsing) and a
// tokenizing line reader that tracks line numbers for error messages.

#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace telsim {

// Thrown by all file parsers; message carries "<path>:<line>: <what>".
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Scientific notation with 12 significant digits, e.g. "1.05000000000e+02".
std::string format_real(double v);

double parse_real(const std::string& token, const std::string& context);
long long parse_int(const std::string& token, const std::string& context);
std::uint64_t parse_u64(const std::string& token, const std::string& context);

// Reads a stream line by line, splitting on whitespace. Blank lines and
// lines starting with '#' are skipped. Tracks 1-based line numbers.
class LineReader {
  public:
    LineReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

    // Next non-empty, non-comment line as tokens; false at EOF.
    bool next(std::vector<std::string>& tokens);

    long line_number() const { return line_; }
    const std::string& name() const { return name_; }

    [[noreturn]] void fail(const std::string& what) const;

  private:
    std::istream& in_;
    std::string name_;
    long line_ = 0;
};

}  // namespace telsim
