#include "milnorflow/cli_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "milnorflow/errors.hpp"

namespace milnorflow {

namespace {

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw DomainError("grid: not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw DomainError("grid: not a number: '" + s + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream items(text);
    std::string item;
    while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) throw DomainError("grid: empty item in '" + text + "'");
        std::vector<std::string> parts;
        std::stringstream ss(item);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(trim(p));
        if (parts.size() == 1) {
            out.push_back(parse_number(parts[0]));
        } else if (parts.size() == 3) {
            const double a = parse_number(parts[0]), b = parse_number(parts[1]), h = parse_number(parts[2]);
            if (!(h > 0.0)) throw DomainError("grid: step must be positive in '" + item + "'");
            if (b < a) throw DomainError("grid: stop below start in '" + item + "'");
            const auto n = static_cast<long long>(std::floor((b - a) / h + 1e-9));
            if (n > 1000000) throw DomainError("grid: range too long in '" + item + "'");
            for (long long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * h);
        } else {
            throw DomainError("grid: expected a number or start:stop:step, got '" + item + "'");
        }
    }
    if (out.empty()) throw DomainError("grid: empty");
    return out;
}

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace milnorflow
