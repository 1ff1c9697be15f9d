#include "telsim/textio.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace telsim {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

double parse_real(const std::string& token, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    // ERANGE with a tiny result is just underflow to subnormal; accept it
    bool overflow = errno == ERANGE && (v == HUGE_VAL || v == -HUGE_VAL);
    if (end == token.c_str() || *end != '\0' || overflow)
        throw ParseError(context + ": bad real '" + token + "'");
    return v;
}

long long parse_int(const std::string& token, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(context + ": bad integer '" + token + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& token, const std::string& context) {
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || errno == ERANGE || token.front() == '-')
        throw ParseError(context + ": bad unsigned integer '" + token + "'");
    return v;
}

bool LineReader::next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        tokens.clear();
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
        if (!tokens.empty()) return true;
    }
    return false;
}

void LineReader::fail(const std::string& what) const {
    throw ParseError(name_ + ":" + std::to_string(line_) + ": " + what);
}

}  // namespace telsim
